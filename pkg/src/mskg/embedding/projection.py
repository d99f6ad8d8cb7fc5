"""Manufacturer-Service projection: the undirected weighted subgraph that
the embedding methods operate on.

Nodes are all Manufacturer and Service nodes of the source graph; edges
come from provides and subclass_of with their weights. Everything is
index-based and sorted so downstream sampling is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph, NodeLabel, RelationType


@dataclass(frozen=True)
class Projection:
    ids: tuple[str, ...]
    labels: tuple[NodeLabel, ...]
    # per node: neighbor indices (sorted) and aligned weights
    neighbors: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    isolated: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def adjacent(self, i: int, j: int) -> bool:
        k = np.searchsorted(self.neighbors[i], j)
        return k < len(self.neighbors[i]) and self.neighbors[i][k] == j


def build_projection(graph: Graph) -> Projection:
    ids = sorted(
        graph.node_ids(NodeLabel.MANUFACTURER) + graph.node_ids(NodeLabel.SERVICE)
    )
    index = {node_id: i for i, node_id in enumerate(ids)}
    labels = tuple(graph.node(node_id).label for node_id in ids)

    adjacency: list[dict[int, float]] = [{} for _ in ids]
    for rel in (RelationType.PROVIDES, RelationType.SUBCLASS_OF):
        for edge in graph.edges(rel):
            a, b = index[edge.src], index[edge.dst]
            w = max(edge.weight, adjacency[a].get(b, 0.0))
            adjacency[a][b] = w
            adjacency[b][a] = w

    neighbors = []
    weights = []
    for bucket in adjacency:
        order = np.array(sorted(bucket), dtype=np.int64)
        neighbors.append(order)
        weights.append(np.array([bucket[j] for j in order], dtype=np.float64))

    isolated = tuple(
        node_id
        for node_id, label, nbrs in zip(ids, labels, neighbors)
        if label is NodeLabel.MANUFACTURER and len(nbrs) == 0
    )
    return Projection(
        ids=tuple(ids),
        labels=labels,
        neighbors=tuple(neighbors),
        weights=tuple(weights),
        isolated=isolated,
        index=index,
    )
