"""Exact quadratic t-SNE to two dimensions.

Per-point Gaussian bandwidths are found by bisection against the target
perplexity, the joint P is symmetrized, and the map is fit by gradient
descent: momentum plus early exaggeration for the first half, then a
monotone phase with backtracking steps so the divergence never increases
over the final half. No approximation schemes; callers subsample large
inputs instead.
"""

from __future__ import annotations

import numpy as np

from ..errors import PerplexityTooLarge, TooFewPoints
from .tables import EmbeddingTable

_EXAGGERATION = 12.0
_EPS = 1e-12


def _pairwise_sq(points: np.ndarray) -> np.ndarray:
    sq = (points * points).sum(axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _row_probabilities(d_row: np.ndarray, beta: float) -> np.ndarray:
    p = np.exp(-d_row * beta)
    total = p.sum()
    return p / total if total > 0 else np.full_like(p, 1.0 / len(p))


def _entropy(p: np.ndarray) -> float:
    mask = p > 0
    return float(-(p[mask] * np.log(p[mask])).sum())


def _conditional_p(distances: np.ndarray, perplexity: float) -> np.ndarray:
    n = distances.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n))
    others = ~np.eye(n, dtype=bool)
    for i in range(n):
        d_row = distances[i][others[i]]
        lo, hi = 0.0, np.inf
        beta = 1.0
        row = _row_probabilities(d_row, beta)
        for _ in range(64):
            gap = _entropy(row) - target
            if abs(gap) < 1e-7:
                break
            if gap > 0:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (lo + beta) / 2.0
            row = _row_probabilities(d_row, beta)
        p[i][others[i]] = row
    return p


def joint_probabilities(points: np.ndarray, perplexity: float) -> np.ndarray:
    conditional = _conditional_p(_pairwise_sq(points), perplexity)
    joint = (conditional + conditional.T) / (2.0 * points.shape[0])
    return np.maximum(joint, _EPS)


def _kl_and_grad(p: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    w = 1.0 / (1.0 + _pairwise_sq(y))
    np.fill_diagonal(w, 0.0)
    q = np.maximum(w / w.sum(), _EPS)
    kl = float((p * (np.log(p) - np.log(q))).sum())
    coeff = (p - q) * w
    grad = 4.0 * ((np.diag(coeff.sum(axis=1)) - coeff) @ y)
    return kl, grad


def _kl_only(p: np.ndarray, y: np.ndarray) -> float:
    w = 1.0 / (1.0 + _pairwise_sq(y))
    np.fill_diagonal(w, 0.0)
    q = np.maximum(w / w.sum(), _EPS)
    return float((p * (np.log(p) - np.log(q))).sum())


def tsne_embed(
    points: np.ndarray,
    perplexity: float = 30.0,
    iterations: int = 500,
    seed: int = 0,
    kl_trace: list | None = None,
) -> np.ndarray:
    n = points.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if perplexity <= 0 or perplexity >= (n - 1) / 3:
        raise PerplexityTooLarge(
            f"perplexity {perplexity} not in (0, {(n - 1) / 3})"
        )
    p = joint_probabilities(np.asarray(points, dtype=np.float64), perplexity)

    rng = np.random.default_rng((seed, 42))
    y = rng.normal(0.0, 1e-4, (n, 2))
    velocity = np.zeros_like(y)
    lr = max(50.0, n / 12.0)
    exaggerate_until = iterations // 4
    momentum_until = iterations // 2

    for it in range(min(momentum_until, iterations)):
        p_eff = p * _EXAGGERATION if it < exaggerate_until else p
        _, grad = _kl_and_grad(p_eff, y)
        momentum = 0.5 if it < exaggerate_until else 0.8
        velocity = momentum * velocity - lr * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    # monotone phase: plain descent with backtracking
    kl, grad = _kl_and_grad(p, y)
    if kl_trace is not None:
        kl_trace.append(kl)
    step = lr
    for _ in range(iterations - min(momentum_until, iterations)):
        for _ in range(30):
            candidate = y - step * grad
            kl_new = _kl_only(p, candidate)
            if kl_new <= kl:
                break
            step /= 2.0
        else:
            break
        y = candidate - candidate.mean(axis=0)
        kl, grad = _kl_and_grad(p, y)
        if kl_trace is not None:
            kl_trace.append(kl)
        step *= 1.1
    return y


def reduce_tsne(
    table: EmbeddingTable,
    perplexity: float = 30.0,
    iterations: int = 500,
    seed: int = 0,
) -> dict[str, tuple[float, float]]:
    coords = tsne_embed(table.vectors, perplexity, iterations, seed)
    return {
        node_id: (float(x), float(y))
        for node_id, (x, y) in zip(table.ids, coords)
    }
