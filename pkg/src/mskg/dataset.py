"""Load, validate, and export graph datasets.

Canonical on-disk format is one JSON record per line with a "type"
discriminator:

    {"type": "node", "id": ..., "labels": [...], "properties": {"name": ...}}
    {"type": "relationship", "label": ..., "start": {"id": ...},
     "end": {"id": ...}, "properties": {"weight": ...}}

The loader tolerates common field-spelling variants via a small alias
table (see _node_label_of / _endpoint_id / _weight_of):

    node label:  "labels" (list) or "label" (string)
    endpoints:   "start"/"end" as {"id": ...}, as a bare string id,
                 or as top-level "start_id"/"end_id"
    weight:      properties.weight or top-level "weight"; missing
                 weight defaults to 1.0 and is counted in the load report
    name:        properties.name or top-level "name"; defaults to id

Two flat projections are also supported: "edge-table" (TSV src, rel,
dst, weight; node labels recoverable from the relation signature, names
are not carried) and "node-table" (TSV id, label, name, wikidata_id; no
edges). Round trips are exact for canonical-records and exact up to each
projection's information capacity for the tables.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Union

from .errors import (
    ManifestMismatch,
    MissingEndpoint,
    ParseError,
    SchemaViolation,
    UnsupportedFormat,
)
from .graph import SIGNATURES, Edge, Graph, Node, NodeLabel, RelationType

EXPORT_FORMATS = ("canonical-records", "edge-table", "node-table")

_EDGE_HEADER = "src\trel\tdst\tweight"
_NODE_HEADER = "id\tlabel\tname\twikidata_id"

_LABELS_BY_NAME = {lb.value: lb for lb in NodeLabel}
_RELS_BY_NAME = {r.value: r for r in RelationType}


@dataclass(frozen=True)
class Manifest:
    """Expected node counts per label and edge counts per relation type."""

    labels: dict[NodeLabel, int]
    relations: dict[RelationType, int]

    def __post_init__(self):
        for count in list(self.labels.values()) + list(self.relations.values()):
            if count < 0:
                raise ValueError(f"manifest counts must be non-negative, got {count}")

    @property
    def total_entities(self) -> int:
        return sum(self.labels.values())

    @property
    def total_relationships(self) -> int:
        return sum(self.relations.values())

    @classmethod
    def from_toml(cls, path: str) -> "Manifest":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        labels = {
            _LABELS_BY_NAME[k]: int(v) for k, v in raw.get("labels", {}).items()
        }
        relations = {
            _RELS_BY_NAME[k]: int(v) for k, v in raw.get("relations", {}).items()
        }
        return cls(labels=labels, relations=relations)

    @classmethod
    def of_graph(cls, graph: Graph) -> "Manifest":
        return cls(
            labels={lb: graph.node_count(lb) for lb in NodeLabel},
            relations={r: graph.edge_count(r) for r in RelationType},
        )


# Entity and relationship counts of the published dataset.
PUBLISHED_MANIFEST = Manifest(
    labels={
        NodeLabel.MANUFACTURER: 13085,
        NodeLabel.SERVICE: 77,
        NodeLabel.CERTIFICATION: 15,
        NodeLabel.LOCATION: 63,
    },
    relations={
        RelationType.PROVIDES: 39761,
        RelationType.SUBCLASS_OF: 76,
        RelationType.CERTIFIED_WITH: 3968,
        RelationType.LOCATED_IN: 14806,
    },
)


@dataclass(frozen=True)
class ReportRow:
    kind: str
    name: str
    expected: int
    actual: int

    @property
    def delta(self) -> int:
        return self.actual - self.expected


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ReportRow, ...]

    @property
    def zero_delta(self) -> bool:
        return all(r.delta == 0 for r in self.rows)

    def to_text(self) -> str:
        lines = [f"{'kind':<9} {'name':<15} {'expected':>9} {'actual':>9} {'delta':>7}"]
        for r in self.rows:
            lines.append(
                f"{r.kind:<9} {r.name:<15} {r.expected:>9} {r.actual:>9} {r.delta:>+7}"
            )
        return "\n".join(lines)


@dataclass
class LoadReport:
    nodes: int = 0
    relationships: int = 0
    defaulted_weights: int = 0
    defaulted_weight_lines: list[int] = field(default_factory=list)


def validate_manifest(graph: Graph, manifest: Manifest) -> ValidationReport:
    rows = []
    for lb in NodeLabel:
        if lb in manifest.labels:
            rows.append(ReportRow("label", lb.value, manifest.labels[lb], graph.node_count(lb)))
    for rel in RelationType:
        if rel in manifest.relations:
            rows.append(
                ReportRow("relation", rel.value, manifest.relations[rel], graph.edge_count(rel))
            )
    rows.append(ReportRow("total", "entities", manifest.total_entities, graph.node_count()))
    rows.append(
        ReportRow("total", "relationships", manifest.total_relationships, graph.edge_count())
    )
    return ValidationReport(rows=tuple(rows))


# -- canonical record parsing -------------------------------------------------


def _node_label_of(rec: dict, line: int) -> NodeLabel:
    raw = rec.get("labels", rec.get("label"))
    if raw is None:
        raise SchemaViolation(f"line {line}: node record has no label")
    if isinstance(raw, str):
        raw = [raw]
    matched = [_LABELS_BY_NAME[x] for x in raw if x in _LABELS_BY_NAME]
    if len(matched) != 1:
        raise SchemaViolation(
            f"line {line}: expected exactly one recognized node label, got {raw!r}"
        )
    return matched[0]


def _endpoint_id(rec: dict, side: str, line: int) -> str:
    ref = rec.get(side)
    if ref is None:
        ref = rec.get(f"{side}_id")
    if isinstance(ref, dict):
        ref = ref.get("id")
    if not isinstance(ref, str) or not ref:
        raise SchemaViolation(f"line {line}: relationship has no usable {side} reference")
    return ref


def _weight_of(rec: dict) -> Optional[float]:
    props = rec.get("properties") or {}
    w = props.get("weight", rec.get("weight"))
    if w is None:
        return None
    return float(w)


def _parse_node(rec: dict, line: int) -> Node:
    node_id = rec.get("id")
    if node_id is None:
        node_id = (rec.get("properties") or {}).get("id")
    if not isinstance(node_id, str) or not node_id:
        raise SchemaViolation(f"line {line}: node record has no id")
    label = _node_label_of(rec, line)
    props = rec.get("properties") or {}
    name = props.get("name", rec.get("name", node_id))
    wikidata = props.get("wikidata_id", rec.get("wikidata_id"))
    if wikidata is not None and label is not NodeLabel.SERVICE:
        wikidata = None
    return Node(id=node_id, label=label, name=str(name), wikidata_id=wikidata)


def _parse_relationship(rec: dict, line: int) -> tuple[Edge, bool]:
    raw = rec.get("label", rec.get("rel"))
    if raw not in _RELS_BY_NAME:
        raise SchemaViolation(f"line {line}: unknown relation label {raw!r}")
    src = _endpoint_id(rec, "start", line)
    dst = _endpoint_id(rec, "end", line)
    weight = _weight_of(rec)
    defaulted = weight is None
    return Edge(src=src, dst=dst, rel=_RELS_BY_NAME[raw], weight=1.0 if defaulted else weight), defaulted


def _load_canonical(lines, graph: Graph, report: LoadReport) -> None:
    for line_no, line in lines:
        text = line.strip()
        if not text:
            continue
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad record: {exc.msg}", line=line_no) from None
        if not isinstance(rec, dict):
            raise ParseError("record is not an object", line=line_no)
        kind = rec.get("type")
        if kind == "node":
            graph.add_node(_parse_node(rec, line_no))
        elif kind == "relationship":
            edge, defaulted = _parse_relationship(rec, line_no)
            try:
                graph.add_edge(edge)
            except MissingEndpoint as exc:
                raise SchemaViolation(f"line {line_no}: {exc}") from None
            if defaulted:
                report.defaulted_weights += 1
                report.defaulted_weight_lines.append(line_no)
        else:
            raise ParseError(f"unknown record type {kind!r}", line=line_no)


def _label_for_endpoint(rel: RelationType, side: int) -> NodeLabel:
    return SIGNATURES[rel][side]


def _load_edge_table(lines, graph: Graph) -> None:
    for line_no, line in lines:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        parts = text.split("\t")
        if len(parts) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", line=line_no)
        src, rel_name, dst, weight_s = parts
        if rel_name not in _RELS_BY_NAME:
            raise SchemaViolation(f"line {line_no}: unknown relation label {rel_name!r}")
        rel = _RELS_BY_NAME[rel_name]
        try:
            weight = float(weight_s)
        except ValueError:
            raise ParseError(f"bad weight {weight_s!r}", line=line_no) from None
        graph.add_node(Node(id=src, label=_label_for_endpoint(rel, 0), name=src))
        graph.add_node(Node(id=dst, label=_label_for_endpoint(rel, 1), name=dst))
        graph.add_edge(Edge(src, dst, rel, weight))


def _load_node_table(lines, graph: Graph) -> None:
    for line_no, line in lines:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        parts = text.split("\t")
        if len(parts) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", line=line_no)
        node_id, label_name, name, wikidata = parts
        if label_name not in _LABELS_BY_NAME:
            raise SchemaViolation(f"line {line_no}: unknown node label {label_name!r}")
        graph.add_node(
            Node(
                id=node_id,
                label=_LABELS_BY_NAME[label_name],
                name=name,
                wikidata_id=wikidata or None,
            )
        )


def load_dataset(
    path: str,
    manifest: Optional[Manifest] = None,
) -> Graph:
    graph, _ = load_dataset_with_report(path, manifest)
    return graph


def load_dataset_with_report(
    path: str,
    manifest: Optional[Manifest] = None,
) -> tuple[Graph, LoadReport]:
    """Single-pass load; nodes must precede the relationships that use them."""
    graph = Graph()
    report = LoadReport()
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        numbered = enumerate(_rest(first, fh), start=1)
        header = first.rstrip("\n")
        if header == _EDGE_HEADER:
            _load_edge_table(_skip_first(numbered), graph)
        elif header == _NODE_HEADER:
            _load_node_table(_skip_first(numbered), graph)
        else:
            _load_canonical(numbered, graph, report)
    graph.freeze()
    report.nodes = graph.node_count()
    report.relationships = graph.edge_count()
    if manifest is not None:
        validation = validate_manifest(graph, manifest)
        if not validation.zero_delta:
            raise ManifestMismatch(validation)
    return graph, report


def _rest(first, fh):
    yield first
    yield from fh


def _skip_first(numbered):
    next(numbered, None)
    return numbered


# -- export -------------------------------------------------------------------


def _node_record(node: Node) -> dict:
    props: dict[str, object] = {"name": node.name}
    if node.wikidata_id is not None:
        props["wikidata_id"] = node.wikidata_id
    return {"type": "node", "id": node.id, "labels": [node.label.value], "properties": props}


def _rel_record(edge: Edge) -> dict:
    return {
        "type": "relationship",
        "label": edge.rel.value,
        "start": {"id": edge.src},
        "end": {"id": edge.dst},
        "properties": {"weight": edge.weight},
    }


def export_graph(graph: Graph, format: str = "canonical-records") -> bytes:
    if format not in EXPORT_FORMATS:
        raise UnsupportedFormat(f"unknown export format {format!r}")
    buf = io.StringIO()
    if format == "canonical-records":
        for node in graph.nodes():
            buf.write(json.dumps(_node_record(node), ensure_ascii=False))
            buf.write("\n")
        for edge in graph.edges():
            buf.write(json.dumps(_rel_record(edge), ensure_ascii=False))
            buf.write("\n")
    elif format == "edge-table":
        buf.write(_EDGE_HEADER + "\n")
        for edge in graph.edges():
            buf.write(f"{edge.src}\t{edge.rel.value}\t{edge.dst}\t{edge.weight!r}\n")
    else:
        buf.write(_NODE_HEADER + "\n")
        for node in graph.nodes():
            buf.write(
                f"{node.id}\t{node.label.value}\t{node.name}\t{node.wikidata_id or ''}\n"
            )
    return buf.getvalue().encode("utf-8")


def dataset_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
