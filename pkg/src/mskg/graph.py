"""Typed, weighted property graph for manufacturing service discovery.

Four node labels (Manufacturer, Service, Certification, Location), four
relation types with a closed endpoint signature, weighted edges in [0, 1],
and a service hierarchy (subclass_of) kept acyclic on insert.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import (
    CycleIntroduced,
    DuplicateId,
    FrozenGraph,
    MissingEndpoint,
    SchemaViolation,
    UnknownNode,
    WeightOutOfRange,
    WrongLabel,
)


class NodeLabel(str, Enum):
    MANUFACTURER = "Manufacturer"
    SERVICE = "Service"
    CERTIFICATION = "Certification"
    LOCATION = "Location"


class RelationType(str, Enum):
    PROVIDES = "provides"
    CERTIFIED_WITH = "certified_with"
    LOCATED_IN = "located_in"
    SUBCLASS_OF = "subclass_of"


# Closed signature table: relation -> (source label, destination label).
SIGNATURES: dict[RelationType, tuple[NodeLabel, NodeLabel]] = {
    RelationType.PROVIDES: (NodeLabel.MANUFACTURER, NodeLabel.SERVICE),
    RelationType.CERTIFIED_WITH: (NodeLabel.MANUFACTURER, NodeLabel.CERTIFICATION),
    RelationType.LOCATED_IN: (NodeLabel.MANUFACTURER, NodeLabel.LOCATION),
    RelationType.SUBCLASS_OF: (NodeLabel.SERVICE, NodeLabel.SERVICE),
}

# The nine named category roots of the service hierarchy, in the fixed
# reporting order; "other" is a virtual tenth category, not a node.
CATEGORY_ROOTS: tuple[str, ...] = (
    "machining",
    "assembly",
    "joining",
    "inspection",
    "forming",
    "molding",
    "casting",
    "additive manufacturing",
    "heat treatment",
)
OTHER_CATEGORY = "other"
CATEGORIES: tuple[str, ...] = CATEGORY_ROOTS + (OTHER_CATEGORY,)

_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://", re.IGNORECASE)
_WS_RE = re.compile(r"\s+")


def canonical_manufacturer_id(raw: str) -> str:
    """Registrable-domain key: strip scheme, leading www., path, lowercase."""
    s = _SCHEME_RE.sub("", raw.strip()).lower()
    s = s.split("/", 1)[0]
    if s.startswith("www."):
        s = s[4:]
    return s


def canonical_name_id(raw: str) -> str:
    """Lowercased name with internal whitespace collapsed."""
    return _WS_RE.sub(" ", raw.strip().lower())


def canonical_id(label: NodeLabel, raw: str) -> str:
    if label is NodeLabel.MANUFACTURER:
        return canonical_manufacturer_id(raw)
    return canonical_name_id(raw)


@dataclass(frozen=True)
class Node:
    id: str
    label: NodeLabel
    name: str
    wikidata_id: Optional[str] = None

    def __post_init__(self):
        if self.wikidata_id is not None and self.label is not NodeLabel.SERVICE:
            raise SchemaViolation(
                f"wikidata_id only allowed on Service nodes, got {self.label.value} {self.id!r}"
            )


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    rel: RelationType
    weight: float = 1.0


class Graph:
    """Mutable during single-owner construction; immutable after freeze()."""

    def __init__(self):
        self._nodes: dict[str, Node] = {}
        self._by_label: dict[NodeLabel, dict[str, None]] = {lb: {} for lb in NodeLabel}
        # (src, rel) -> {dst: weight}; (dst, rel) -> {src: weight}
        self._out: dict[tuple[str, RelationType], dict[str, float]] = {}
        self._in: dict[tuple[str, RelationType], dict[str, float]] = {}
        self._edge_counts: dict[RelationType, int] = {r: 0 for r in RelationType}
        self._frozen = False

    # -- mutation ----------------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise FrozenGraph("graph is frozen")

    def add_node(self, node: Node) -> str:
        self._check_mutable()
        existing = self._nodes.get(node.id)
        if existing is not None:
            if existing.label is not node.label or existing.name != node.name:
                raise DuplicateId(
                    f"node {node.id!r} already present with conflicting label or name"
                )
            return node.id
        self._nodes[node.id] = node
        self._by_label[node.label][node.id] = None
        return node.id

    def add_edge(self, edge: Edge) -> None:
        self._check_mutable()
        if not (0.0 <= edge.weight <= 1.0):
            raise WeightOutOfRange(f"weight {edge.weight} outside [0, 1]")
        src = self._nodes.get(edge.src)
        dst = self._nodes.get(edge.dst)
        if src is None or dst is None:
            missing = edge.src if src is None else edge.dst
            raise MissingEndpoint(f"endpoint {missing!r} not in graph")
        want = SIGNATURES[edge.rel]
        if (src.label, dst.label) != want:
            raise SchemaViolation(
                f"{edge.rel.value} requires {want[0].value}->{want[1].value}, "
                f"got {src.label.value}->{dst.label.value}"
            )
        if edge.rel is RelationType.SUBCLASS_OF:
            if edge.src == edge.dst or self._reaches(edge.dst, edge.src):
                raise CycleIntroduced(
                    f"subclass_of {edge.src!r}->{edge.dst!r} would create a cycle"
                )
        out_key = (edge.src, edge.rel)
        bucket = self._out.setdefault(out_key, {})
        if edge.dst in bucket:
            # duplicate (src, dst, rel): keep the stronger evidence
            if edge.weight > bucket[edge.dst]:
                bucket[edge.dst] = edge.weight
                self._in[(edge.dst, edge.rel)][edge.src] = edge.weight
            return
        bucket[edge.dst] = edge.weight
        self._in.setdefault((edge.dst, edge.rel), {})[edge.src] = edge.weight
        self._edge_counts[edge.rel] += 1

    def _reaches(self, start: str, target: str) -> bool:
        """True if target is reachable from start via subclass_of edges."""
        stack = [start]
        seen = set()
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self._out.get((cur, RelationType.SUBCLASS_OF), ()))
        return False

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- lookup ------------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def node_ids(self, label: Optional[NodeLabel] = None) -> list[str]:
        if label is None:
            return list(self._nodes)
        return list(self._by_label[label])

    def out_edges(self, src: str, rel: RelationType) -> dict[str, float]:
        return self._out.get((src, rel), {})

    def in_edges(self, dst: str, rel: RelationType) -> dict[str, float]:
        return self._in.get((dst, rel), {})

    def edges(self, rel: Optional[RelationType] = None) -> Iterator[Edge]:
        for (src, r), bucket in self._out.items():
            if rel is not None and r is not rel:
                continue
            for dst, w in bucket.items():
                yield Edge(src, dst, r, w)

    def node_count(self, label: Optional[NodeLabel] = None) -> int:
        if label is None:
            return len(self._nodes)
        return len(self._by_label[label])

    def edge_count(self, rel: Optional[RelationType] = None) -> int:
        if rel is None:
            return sum(self._edge_counts.values())
        return self._edge_counts[rel]

    # -- service hierarchy ---------------------------------------------------

    def rollup_to_categories(self, service_id: str) -> set[str]:
        """Category roots reachable upward from a service via subclass_of.

        Returns {"other"} when no named root is reachable (including for
        unparented non-root services).
        """
        node = self.node(service_id)
        if node.label is not NodeLabel.SERVICE:
            raise WrongLabel(f"{service_id!r} is {node.label.value}, not Service")
        roots = set(CATEGORY_ROOTS)
        found: set[str] = set()
        stack = [service_id]
        seen = set()
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            if cur in roots:
                found.add(cur)
            stack.extend(self._out.get((cur, RelationType.SUBCLASS_OF), ()))
        return found if found else {OTHER_CATEGORY}

    def subclass_closure(self, service_id: str) -> set[str]:
        """service_id plus every transitive subclass below it."""
        self.node(service_id)
        found = {service_id}
        stack = [service_id]
        while stack:
            cur = stack.pop()
            for child in self._in.get((cur, RelationType.SUBCLASS_OF), ()):
                if child not in found:
                    found.add(child)
                    stack.append(child)
        return found

    def is_subclass_of(self, service_id: str, ancestor_id: str) -> bool:
        """True for the service itself or any transitive subclass relation."""
        if service_id == ancestor_id:
            return True
        return self._reaches(service_id, ancestor_id)


def build_graph(nodes: Iterable[Node], edges: Iterable[Edge]) -> Graph:
    g = Graph()
    for n in nodes:
        g.add_node(n)
    for e in edges:
        g.add_edge(e)
    return g
