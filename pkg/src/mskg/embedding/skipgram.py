"""Skip-gram with negative sampling over walk corpora.

Positives are all ordered pairs within the window; negatives are drawn
from the unigram distribution raised to 3/4. Plain SGD with a linearly
decaying rate, sequential batches, fully seeded: the same corpus and
config always produce the same table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import DegenerateCorpus
from .config import EmbeddingConfig
from .tables import EmbeddingTable
from .walks import WalkCorpus


def _batch_size(vocab: int) -> int:
    """Scatter-adds explode when a batch revisits the same row too often,
    so batches scale with the vocabulary."""
    return min(8192, max(64, vocab // 4))


@dataclass(frozen=True)
class TrainResult:
    table: EmbeddingTable
    epoch_losses: tuple[float, ...]


def sgns_batch_loss(w_in, w_out, centers, contexts, negatives) -> float:
    """Mean loss of a pair batch: -log s(u.v) - sum -log s(-u.n)."""
    u = w_in[centers]
    pos = np.einsum("bd,bd->b", u, w_out[contexts])
    neg = np.einsum("bd,bkd->bk", u, w_out[negatives])
    loss = np.logaddexp(0.0, -pos).sum() + np.logaddexp(0.0, neg).sum()
    return float(loss / len(centers))


def sgns_batch_step(w_in, w_out, centers, contexts, negatives, lr) -> float:
    """One SGD step on a pair batch, in place. Returns the pre-step loss."""
    u = w_in[centers]
    v = w_out[contexts]
    n = w_out[negatives]

    pos = np.einsum("bd,bd->b", u, v)
    neg = np.einsum("bd,bkd->bk", u, n)
    loss = np.logaddexp(0.0, -pos).sum() + np.logaddexp(0.0, neg).sum()

    g_pos = expit(pos) - 1.0
    g_neg = expit(neg)
    du = g_pos[:, None] * v + np.einsum("bk,bkd->bd", g_neg, n)
    dv = g_pos[:, None] * u
    dn = g_neg[..., None] * u[:, None, :]

    np.add.at(w_in, centers, -lr * du)
    np.add.at(w_out, contexts, -lr * dv)
    np.add.at(w_out, negatives.ravel(), -lr * dn.reshape(-1, w_out.shape[1]))
    return float(loss / len(centers))


def _corpus_pairs(walks_idx, window):
    centers, contexts = [], []
    for walk in walks_idx:
        for off in range(1, window + 1):
            if len(walk) <= off:
                continue
            a, b = walk[:-off], walk[off:]
            centers.append(a)
            contexts.append(b)
            centers.append(b)
            contexts.append(a)
    if not centers:
        raise DegenerateCorpus("no co-occurrence pairs: all walks have length 1")
    return np.concatenate(centers), np.concatenate(contexts)


def train_skipgram(corpus: WalkCorpus, config: EmbeddingConfig) -> TrainResult:
    ids = tuple(sorted({node for walk in corpus.walks for node in walk}))
    index = {node: i for i, node in enumerate(ids)}
    walks_idx = [
        np.array([index[node] for node in walk], dtype=np.int64)
        for walk in corpus.walks
    ]
    centers, contexts = _corpus_pairs(walks_idx, config.window)

    counts = np.zeros(len(ids))
    for walk in walks_idx:
        np.add.at(counts, walk, 1.0)
    noise = counts**0.75
    noise_cum = np.cumsum(noise / noise.sum())

    init_rng = np.random.default_rng((config.seed, 999))
    dim = config.dim
    w_in = (init_rng.random((len(ids), dim)) - 0.5) / dim
    w_out = np.zeros((len(ids), dim))

    total = len(centers) * config.epochs
    processed = 0
    size = _batch_size(len(ids))
    epoch_losses = []
    for epoch in range(config.epochs):
        rng = np.random.default_rng((config.seed, 1000 + epoch))
        order = rng.permutation(len(centers))
        loss_sum = 0.0
        for lo in range(0, len(order), size):
            batch = order[lo : lo + size]
            negatives = np.searchsorted(
                noise_cum, rng.random((len(batch), config.negatives)), side="right"
            )
            lr = config.learning_rate * max(1e-4, 1.0 - processed / total)
            loss_sum += sgns_batch_step(
                w_in, w_out, centers[batch], contexts[batch], negatives, lr
            ) * len(batch)
            processed += len(batch)
        epoch_losses.append(loss_sum / len(centers))

    table = EmbeddingTable(method="node2vec", ids=ids, vectors=w_in)
    return TrainResult(table=table, epoch_losses=tuple(epoch_losses))
