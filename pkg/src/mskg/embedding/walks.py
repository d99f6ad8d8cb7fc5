"""Biased second-order random walks over the projection.

The transition weight from v to x given the previous node t is
weight(v,x) * bias, with bias 1/p when x = t, 1 when x is adjacent to t,
and 1/q otherwise; weights are renormalized at every step. p = q = 1
collapses to a plain weighted first-order walk, which skips the bias
machinery entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EmbeddingConfig
from .projection import Projection


@dataclass(frozen=True)
class WalkCorpus:
    walks: tuple[tuple[str, ...], ...]
    truncated: int  # walks that stopped at length 1 (isolated start)

    def __len__(self) -> int:
        return len(self.walks)


def _walk_seed(seed: int, start: int, repeat: int) -> np.random.Generator:
    return np.random.default_rng((seed, start, repeat))


def _first_order_batch(proj, starts: np.ndarray, length: int, seed: int):
    """Advance every walk one step at a time, all walks at once.

    Per-node cumulative weights live in one flat array offset by the node
    index, so a single searchsorted over key = node + r resolves every
    walk's next hop. The projection is undirected, so only an isolated
    START can strand a walk; everything else always has a way back.
    """
    n = len(proj)
    lens = np.fromiter((len(nb) for nb in proj.neighbors), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    total = int(indptr[-1])
    nbr_flat = np.concatenate(
        [nb for nb in proj.neighbors if len(nb)] or [np.array([], dtype=np.int64)]
    )
    keyed = np.empty(total)
    for i in range(n):
        if lens[i] == 0:
            continue
        cum = np.cumsum(proj.weights[i])
        cum /= cum[-1]
        cum[-1] = 1.0  # renormalization must not leak into the next row
        keyed[indptr[i] : indptr[i + 1]] = i + cum

    rng = np.random.default_rng((seed, 7))
    draws = rng.random((len(starts), length - 1))
    steps = np.empty((len(starts), length), dtype=np.int64)
    steps[:, 0] = starts
    alive = lens[starts] > 0
    cur = starts.copy()
    for t in range(1, length):
        keys = cur[alive] + draws[alive, t - 1]
        cur[alive] = nbr_flat[np.searchsorted(keyed, keys, side="right")]
        steps[alive, t] = cur[alive]
    return steps, alive


def _second_order_walk(proj, start, length, p, q, rng):
    walk = [start]
    current = start
    previous = -1
    for _ in range(length - 1):
        nbrs = proj.neighbors[current]
        if len(nbrs) == 0:
            break
        w = proj.weights[current].copy()
        if previous >= 0:
            for k, x in enumerate(nbrs):
                if x == previous:
                    w[k] /= p
                elif not proj.adjacent(previous, int(x)):
                    w[k] /= q
        cum = np.cumsum(w)
        nxt = int(nbrs[np.searchsorted(cum, rng.random() * cum[-1], side="right")])
        previous, current = current, nxt
        walk.append(current)
    return walk


def generate_walks(projection: Projection, config: EmbeddingConfig) -> WalkCorpus:
    if len(projection) == 0:
        raise ValueError("projection is empty")
    if config.p == 1.0 and config.q == 1.0:
        starts = np.repeat(np.arange(len(projection)), config.walks_per_node)
        steps, alive = _first_order_batch(
            projection, starts, config.walk_length, config.seed
        )
        ids = projection.ids
        walks = tuple(
            tuple(ids[j] for j in steps[i]) if alive[i] else (ids[steps[i, 0]],)
            for i in range(len(starts))
        )
        return WalkCorpus(walks=walks, truncated=int((~alive).sum()))

    walks = []
    truncated = 0
    for start in range(len(projection)):
        for repeat in range(config.walks_per_node):
            rng = _walk_seed(config.seed, start, repeat)
            walk = _second_order_walk(
                projection, start, config.walk_length, config.p, config.q, rng
            )
            if len(walk) == 1:
                truncated += 1
            walks.append(tuple(projection.ids[i] for i in walk))
    return WalkCorpus(walks=tuple(walks), truncated=truncated)
