"""Center-based clustering with an inertia elbow scan, plus silhouette
scoring. Initialization is greedy farthest-point seeding from a seeded
random first pick, so runs are reproducible. Distance matrices are
computed blockwise to keep memory flat on large inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import KTooLarge, SingleCluster

_BLOCK = 256


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 4
    k_max: int = 10
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.k_max < 1 or self.max_iter < 1:
            raise ValueError("k, k_max and max_iter must be positive")


@dataclass(frozen=True)
class KMeansResult:
    assignment: np.ndarray
    centers: np.ndarray
    inertia: float
    iterations: int
    inertia_history: tuple[float, ...]


@dataclass(frozen=True)
class ElbowReport:
    inertias: dict[int, float]

    def best_k(self) -> int:
        """k with the largest relative inertia drop from k-1."""
        ks = sorted(self.inertias)
        best, best_drop = ks[0], -1.0
        for prev, cur in zip(ks, ks[1:]):
            if self.inertias[prev] <= 0:
                continue
            drop = (self.inertias[prev] - self.inertias[cur]) / self.inertias[prev]
            if drop > best_drop:
                best, best_drop = cur, drop
        return best


def _sq_dist_to(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (
        (points * points).sum(axis=1)[:, None]
        + (centers * centers).sum(axis=1)[None, :]
        - 2.0 * points @ centers.T
    )
    np.maximum(d, 0.0, out=d)
    return d


def _farthest_point_seeds(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng((seed, 11))
    first = int(rng.integers(0, len(points)))
    chosen = [first]
    best = _sq_dist_to(points, points[[first]])[:, 0]
    while len(chosen) < k:
        nxt = int(np.argmax(best))
        chosen.append(nxt)
        np.minimum(best, _sq_dist_to(points, points[[nxt]])[:, 0], out=best)
    return points[chosen].copy()


def cluster_kmeans(
    points: np.ndarray, k: int, seed: int = 0, max_iter: int = 100
) -> KMeansResult:
    points = np.asarray(points, dtype=np.float64)
    if k > len(points):
        raise KTooLarge(f"k={k} exceeds {len(points)} points")
    centers = _farthest_point_seeds(points, k, seed)
    assignment = np.full(len(points), -1)
    history = []
    for iteration in range(1, max_iter + 1):
        d = _sq_dist_to(points, centers)
        new_assignment = d.argmin(axis=1)
        history.append(float(d[np.arange(len(points)), new_assignment].sum()))
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        # empty clusters keep their previous center
        for c in range(k):
            mask = assignment == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
    inertia = float(
        _sq_dist_to(points, centers)[np.arange(len(points)), assignment].sum()
    )
    return KMeansResult(
        assignment=assignment,
        centers=centers,
        inertia=inertia,
        iterations=iteration,
        inertia_history=tuple(history),
    )


def elbow_scan(
    points: np.ndarray, k_max: int, seed: int = 0, max_iter: int = 100
) -> ElbowReport:
    k_max = min(k_max, len(points))
    return ElbowReport(
        inertias={
            k: cluster_kmeans(points, k, seed, max_iter).inertia
            for k in range(1, k_max + 1)
        }
    )


def score_silhouette(points: np.ndarray, assignment: np.ndarray) -> float:
    points = np.asarray(points, dtype=np.float64)
    assignment = np.asarray(assignment)
    labels = np.unique(assignment)
    if len(labels) < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    sizes = {c: int((assignment == c).sum()) for c in labels}
    masks = {c: assignment == c for c in labels}

    scores = np.zeros(len(points))
    for lo in range(0, len(points), _BLOCK):
        hi = min(lo + _BLOCK, len(points))
        d = np.sqrt(_sq_dist_to(points[lo:hi], points))
        for row, i in enumerate(range(lo, hi)):
            own = assignment[i]
            if sizes[own] == 1:
                scores[i] = 0.0
                continue
            a = d[row][masks[own]].sum() / (sizes[own] - 1)
            b = min(
                d[row][masks[c]].mean() for c in labels if c != own
            )
            denom = max(a, b)
            scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())
