"""Two-layer mean-aggregation embedding over the projection.

Nodes carry no natural attributes, so the input features are synthesized:
normalized degree, a Manufacturer/Service indicator pair, and one
trainable per-node channel. Each layer combines the node's own features
with the weighted mean of its neighbors'; the output is L2-normalized.
Training minimizes the same negative-sampling objective as the skip-gram
trainer, with positives drawn from walk co-occurrences, full-batch
updates via adaptive-moment steps.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.special import expit

from ..errors import DegenerateCorpus
from ..graph import NodeLabel
from ..optim import Adam
from .config import EmbeddingConfig
from .projection import Projection
from .skipgram import TrainResult, _corpus_pairs
from .tables import EmbeddingTable
from .walks import generate_walks

_PAIR_BUDGET = 4096
_STEPS_PER_EPOCH = 25
_CHUNK = 8192
_ADAM_LR = 0.01


def _mean_adjacency(projection: Projection) -> sparse.csr_matrix:
    n = len(projection)
    rows, cols, vals = [], [], []
    for i in range(n):
        nbrs = projection.neighbors[i]
        if len(nbrs) == 0:
            continue
        w = projection.weights[i]
        rows.extend([i] * len(nbrs))
        cols.extend(int(j) for j in nbrs)
        vals.extend(w / w.sum())
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _static_features(projection: Projection) -> np.ndarray:
    n = len(projection)
    degrees = np.array([projection.degree(i) for i in range(n)], dtype=np.float64)
    scale = degrees.max() if degrees.max() > 0 else 1.0
    feats = np.zeros((n, 3))
    feats[:, 0] = degrees / scale
    for i, label in enumerate(projection.labels):
        feats[i, 1 if label is NodeLabel.MANUFACTURER else 2] = 1.0
    return feats


class _Sage:
    def __init__(self, n: int, dim: int, rng: np.random.Generator):
        h = dim
        self.w1_self = rng.normal(0.0, 0.3, (h, 4))
        self.w1_neigh = rng.normal(0.0, 0.3, (h, 4))
        self.b1 = np.zeros(h)
        self.w2_self = rng.normal(0.0, np.sqrt(1.0 / h), (dim, h))
        self.w2_neigh = rng.normal(0.0, np.sqrt(1.0 / h), (dim, h))
        self.b2 = np.zeros(dim)
        self.channel = rng.normal(0.0, 0.1, n)

    def params(self) -> list[np.ndarray]:
        return [
            self.w1_self, self.w1_neigh, self.b1,
            self.w2_self, self.w2_neigh, self.b2, self.channel,
        ]

    def forward(self, static_feats, adj):
        x = np.hstack([static_feats, self.channel[:, None]])
        m0 = adj @ x
        h1_pre = x @ self.w1_self.T + m0 @ self.w1_neigh.T + self.b1
        h1 = np.maximum(h1_pre, 0.0)
        m1 = adj @ h1
        z0 = h1 @ self.w2_self.T + m1 @ self.w2_neigh.T + self.b2
        norms = np.sqrt((z0 * z0).sum(axis=1, keepdims=True))
        norms = np.maximum(norms, 1e-12)
        z = z0 / norms
        return x, m0, h1_pre, h1, m1, z0, norms, z

    def backward(self, cache, adj, d_z):
        x, m0, h1_pre, h1, m1, z0, norms, z = cache
        d_z0 = (d_z - z * (d_z * z).sum(axis=1, keepdims=True)) / norms
        d_w2s = d_z0.T @ h1
        d_w2n = d_z0.T @ m1
        d_b2 = d_z0.sum(axis=0)
        d_h1 = d_z0 @ self.w2_self + (adj.T @ d_z0) @ self.w2_neigh
        d_h1pre = d_h1 * (h1_pre > 0.0)
        d_w1s = d_h1pre.T @ x
        d_w1n = d_h1pre.T @ m0
        d_b1 = d_h1pre.sum(axis=0)
        d_x = d_h1pre @ self.w1_self + (adj.T @ d_h1pre) @ self.w1_neigh
        return [d_w1s, d_w1n, d_b1, d_w2s, d_w2n, d_b2, d_x[:, 3]]


def _pair_loss_and_dz(z, centers, contexts, negatives):
    d_z = np.zeros_like(z)
    loss = 0.0
    for lo in range(0, len(centers), _CHUNK):
        c = centers[lo : lo + _CHUNK]
        t = contexts[lo : lo + _CHUNK]
        g = negatives[lo : lo + _CHUNK]
        u, v, n = z[c], z[t], z[g]
        pos = np.einsum("bd,bd->b", u, v)
        neg = np.einsum("bd,bkd->bk", u, n)
        loss += np.logaddexp(0.0, -pos).sum() + np.logaddexp(0.0, neg).sum()
        g_pos = expit(pos) - 1.0
        g_neg = expit(neg)
        np.add.at(d_z, c, g_pos[:, None] * v + np.einsum("bk,bkd->bd", g_neg, n))
        np.add.at(d_z, t, g_pos[:, None] * u)
        np.add.at(
            d_z, g.ravel(), (g_neg[..., None] * u[:, None, :]).reshape(-1, z.shape[1])
        )
    return loss / len(centers), d_z / len(centers)


def train_graphsage(projection: Projection, config: EmbeddingConfig) -> TrainResult:
    if len(projection) == 0:
        raise DegenerateCorpus("projection has no nodes")
    adj = _mean_adjacency(projection)
    static_feats = _static_features(projection)
    model = _Sage(len(projection), config.dim, np.random.default_rng((config.seed, 7)))

    corpus = generate_walks(projection, config)
    index = projection.index
    walks_idx = [
        np.array([index[node] for node in walk], dtype=np.int64)
        for walk in corpus.walks
    ]
    try:
        centers, contexts = _corpus_pairs(walks_idx, config.window)
    except DegenerateCorpus:
        # nothing to contrast against: an untrained forward pass still
        # gives every node a finite vector from its own features
        z = model.forward(static_feats, adj)[-1]
        table = EmbeddingTable(method="graphsage", ids=projection.ids, vectors=z)
        return TrainResult(table=table, epoch_losses=())

    optimizer = Adam(model.params(), lr=_ADAM_LR)
    budget = min(_PAIR_BUDGET, len(centers))
    epoch_losses = []
    for epoch in range(config.epochs):
        rng = np.random.default_rng((config.seed, 5000 + epoch))
        step_losses = []
        for _ in range(_STEPS_PER_EPOCH):
            pick = rng.choice(len(centers), budget, replace=False)
            negatives = rng.integers(0, len(projection), (budget, config.negatives))
            cache = model.forward(static_feats, adj)
            loss, d_z = _pair_loss_and_dz(
                cache[-1], centers[pick], contexts[pick], negatives
            )
            grads = model.backward(cache, adj, d_z)
            optimizer.step(grads)
            step_losses.append(loss)
        epoch_losses.append(float(np.mean(step_losses)))

    z = model.forward(static_feats, adj)[-1]
    table = EmbeddingTable(method="graphsage", ids=projection.ids, vectors=z)
    return TrainResult(table=table, epoch_losses=tuple(epoch_losses))
