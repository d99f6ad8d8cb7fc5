"""Embedding tables and their on-disk form.

Table file: tab-separated with header "id\tdim0...\tdim<d-1>", one row per
node. The method tag and dimension live in a sidecar JSON record next to
the table (<path>.meta.json) so the TSV stays a plain matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import MissingEmbedding, ShapeMismatch


@dataclass(frozen=True)
class EmbeddingTable:
    method: str
    ids: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids):
            raise ShapeMismatch(
                f"{self.vectors.shape} rows do not match {len(self.ids)} ids"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ShapeMismatch("embedding vectors must be finite")
        object.__setattr__(self, "_row", {i: k for k, i in enumerate(self.ids)})

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._row

    def vector(self, node_id: str) -> np.ndarray:
        row = self._row.get(node_id)
        if row is None:
            raise MissingEmbedding(f"no embedding for {node_id!r}")
        return self.vectors[row]


def write_table(table: EmbeddingTable, path: str) -> None:
    header = "id\t" + "\t".join(f"dim{i}" for i in range(table.dim))
    lines = [header]
    for node_id, row in zip(table.ids, table.vectors):
        lines.append(node_id + "\t" + "\t".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")
    meta = {"method": table.method, "dim": table.dim, "count": len(table)}
    Path(path + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def read_table(path: str) -> EmbeddingTable:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("id\t"):
        raise ShapeMismatch(f"{path} is not an embedding table")
    dim = len(lines[0].split("\t")) - 1
    ids = []
    rows = []
    for line in lines[1:]:
        cells = line.split("\t")
        if len(cells) != dim + 1:
            raise ShapeMismatch(f"row width {len(cells)} != {dim + 1}")
        ids.append(cells[0])
        rows.append([float(x) for x in cells[1:]])
    meta_path = Path(path + ".meta.json")
    method = "unknown"
    if meta_path.exists():
        method = json.loads(meta_path.read_text()).get("method", "unknown")
    return EmbeddingTable(
        method=method, ids=tuple(ids), vectors=np.array(rows, dtype=np.float64)
    )


def write_points(points: dict[str, tuple[float, float]], path: str) -> None:
    lines = ["id\tx\ty"]
    for node_id, (x, y) in points.items():
        lines.append(f"{node_id}\t{x!r}\t{y!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_points(path: str) -> dict[str, tuple[float, float]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "id\tx\ty":
        raise ShapeMismatch(f"{path} is not a coordinates file")
    out = {}
    for line in lines[1:]:
        node_id, x, y = line.split("\t")
        out[node_id] = (float(x), float(y))
    return out
