"""Deterministic MSQL evaluator: backtracking join over graph indices.

Binding semantics: a result row per complete assignment of pattern
variables (anonymous nodes included), so a manufacturer with two
matching edges appears twice; count() counts bindings per group. Rows
are ordered by the ORDER BY item with full-row lexicographic tie-break,
or by the full row when no ORDER BY is given; ints sort before strings,
missing values last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from ..errors import (
    UnboundVariable,
    UnknownLabel,
    UnknownProperty,
    UnknownRelation,
)
from ..graph import Graph, NodeLabel, RelationType, canonical_id
from .ast import (
    BoolChain,
    Comparison,
    CountItem,
    NodePattern,
    NotExists,
    PathPattern,
    PropItem,
    Query,
    VarItem,
)

_LABELS = {lb.value.lower(): lb for lb in NodeLabel}
_RELS = {r.value.lower(): r for r in RelationType}
_PROPS = ("id", "name", "wikidata_id")

Value = Union[str, int, None]


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Value, ...], ...]

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join("" if v is None else str(v) for v in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class _EdgeConstraint:
    left: str
    rel: Optional[RelationType]
    right: str
    direction: str  # "out" | "in" | "any"


def _resolve_label(name: str) -> NodeLabel:
    try:
        return _LABELS[name.lower()]
    except KeyError:
        raise UnknownLabel(f"unknown node label {name!r}") from None


def _resolve_rel(name: str) -> RelationType:
    try:
        return _RELS[name.lower()]
    except KeyError:
        raise UnknownRelation(f"unknown relation type {name!r}") from None


def _check_prop(name: str) -> str:
    if name not in _PROPS:
        raise UnknownProperty(f"unknown property {name!r}")
    return name


class _Compiled:
    """One pattern set lowered to per-var filters and edge constraints."""

    def __init__(self, patterns: tuple[PathPattern, ...], anon_prefix: str):
        self.labels: dict[str, NodeLabel] = {}
        self.conflicted: set[str] = set()
        self.props: list[tuple[str, str, str]] = []
        self.edges: list[_EdgeConstraint] = []
        self.vars: list[str] = []
        counter = 0
        for pattern in patterns:
            names = []
            for node in pattern.nodes:
                name = node.var
                if name is None:
                    name = f"{anon_prefix}{counter}"
                    counter += 1
                names.append(name)
                if name not in self.vars:
                    self.vars.append(name)
                self._apply_node(name, node)
            for i, step in enumerate(pattern.steps):
                rel = _resolve_rel(step.rel) if step.rel else None
                self.edges.append(
                    _EdgeConstraint(names[i], rel, names[i + 1], step.direction)
                )

    def _apply_node(self, name: str, node: NodePattern):
        if node.label:
            label = _resolve_label(node.label)
            prev = self.labels.get(name)
            if prev is not None and prev is not label:
                self.conflicted.add(name)
            self.labels[name] = label
        if node.prop:
            self.props.append((name, _check_prop(node.prop[0]), node.prop[1]))


def _prop_value(graph: Graph, node_id: str, prop: str) -> Optional[str]:
    node = graph.node(node_id)
    if prop == "id":
        return node.id
    if prop == "name":
        return node.name
    return node.wikidata_id


def _prop_matches(graph: Graph, node_id: str, prop: str, literal: Value) -> bool:
    value = _prop_value(graph, node_id, prop)
    if value is None or isinstance(literal, int):
        return False
    node = graph.node(node_id)
    if prop in ("id", "name"):
        return canonical_id(node.label, value) == canonical_id(node.label, literal)
    return value.casefold() == literal.casefold()


def _neighbor_sets(graph: Graph, node_id: str, rel: Optional[RelationType], outgoing: bool):
    rels = [rel] if rel is not None else list(RelationType)
    for r in rels:
        bucket = graph.out_edges(node_id, r) if outgoing else graph.in_edges(node_id, r)
        if bucket:
            yield bucket.keys()


def _edge_candidates(graph: Graph, c: _EdgeConstraint, var: str, other_id: str) -> set[str]:
    """Candidate ids for var given the other endpoint of constraint c."""
    out = set()
    if var == c.left:
        if c.direction in ("out", "any"):
            out.update(*_neighbor_sets(graph, other_id, c.rel, outgoing=False), set())
        if c.direction in ("in", "any"):
            out.update(*_neighbor_sets(graph, other_id, c.rel, outgoing=True), set())
    else:
        if c.direction in ("out", "any"):
            out.update(*_neighbor_sets(graph, other_id, c.rel, outgoing=True), set())
        if c.direction in ("in", "any"):
            out.update(*_neighbor_sets(graph, other_id, c.rel, outgoing=False), set())
    return out


def _edge_holds(graph: Graph, c: _EdgeConstraint, left_id: str, right_id: str) -> bool:
    rels = [c.rel] if c.rel is not None else list(RelationType)
    for r in rels:
        if c.direction in ("out", "any") and right_id in graph.out_edges(left_id, r):
            return True
        if c.direction in ("in", "any") and left_id in graph.out_edges(right_id, r):
            return True
    return False


def _unary_ok(graph: Graph, compiled: _Compiled, var: str, node_id: str) -> bool:
    label = compiled.labels.get(var)
    if label is not None and graph.node(node_id).label is not label:
        return False
    for name, prop, value in compiled.props:
        if name == var and not _prop_matches(graph, node_id, prop, value):
            return False
    return True


def _solve(
    graph: Graph,
    compiled: _Compiled,
    binding: dict[str, str],
) -> Iterator[dict[str, str]]:
    if compiled.conflicted:
        return
    remaining = [v for v in compiled.vars if v not in binding]
    for c in compiled.edges:
        if c.left in binding and c.right in binding:
            if not _edge_holds(graph, c, binding[c.left], binding[c.right]):
                return
    if not remaining:
        yield dict(binding)
        return
    # pick the next variable: prefer one adjacent to a bound var, with the
    # smallest candidate set; otherwise the smallest unary domain
    best_var = None
    best_candidates = None
    for var in remaining:
        cand: Optional[set[str]] = None
        for c in compiled.edges:
            other = None
            if c.left == var and c.right in binding:
                other = binding[c.right]
            elif c.right == var and c.left in binding:
                other = binding[c.left]
            if other is not None:
                s = _edge_candidates(graph, c, var, other)
                cand = s if cand is None else (cand & s)
        if cand is not None and (best_candidates is None or len(cand) < len(best_candidates)):
            best_var, best_candidates = var, cand
    if best_var is None:
        domains = []
        for var in remaining:
            label = compiled.labels.get(var)
            ids = graph.node_ids(label)
            domains.append((len(ids), var, ids))
        domains.sort(key=lambda t: t[0])
        _, best_var, ids = domains[0]
        best_candidates = set(ids)
    for node_id in best_candidates:
        if not _unary_ok(graph, compiled, best_var, node_id):
            continue
        binding[best_var] = node_id
        ok = True
        for c in compiled.edges:
            if c.left in binding and c.right in binding:
                if not _edge_holds(graph, c, binding[c.left], binding[c.right]):
                    ok = False
                    break
        if ok:
            child = {v: binding[v] for v in compiled.vars if v in binding}
            yield from _solve(graph, compiled, child)
        del binding[best_var]


def _eval_where(graph: Graph, term, binding: dict[str, str]) -> bool:
    if isinstance(term, BoolChain):
        value = _eval_where(graph, term.first, binding)
        for op, t in term.rest:
            if op == "AND":
                value = value and _eval_where(graph, t, binding)
            else:
                value = value or _eval_where(graph, t, binding)
        return value
    if isinstance(term, Comparison):
        _check_prop(term.prop)
        hit = _prop_matches(graph, binding[term.var], term.prop, term.literal)
        return hit if term.op == "=" else not hit
    if isinstance(term, NotExists):
        inner = _Compiled((term.pattern,), anon_prefix="_ne_anon")
        shared = {v: binding[v] for v in inner.vars if v in binding}
        for _ in _solve(graph, inner, shared):
            return False
        return True
    raise TypeError(f"unknown WHERE term {term!r}")


def _validate(query: Query):
    for pattern in query.patterns:
        _Compiled((pattern,), anon_prefix="_v")
    def walk(term):
        if term is None:
            return
        if isinstance(term, BoolChain):
            walk(term.first)
            for _, t in term.rest:
                walk(t)
        elif isinstance(term, Comparison):
            _check_prop(term.prop)
        elif isinstance(term, NotExists):
            _Compiled((term.pattern,), anon_prefix="_v")
    walk(query.where)
    for item in list(query.returns) + (
        [query.order_by.item] if query.order_by else []
    ):
        if isinstance(item, PropItem):
            _check_prop(item.prop)


def _sort_key(value: Value):
    if value is None:
        return (2, "")
    if isinstance(value, int):
        return (0, value)
    return (1, value)


def _row_key(row: tuple[Value, ...]):
    return tuple(_sort_key(v) for v in row)


def execute(query: Query, graph: Graph) -> ResultTable:
    _validate(query)
    compiled = _Compiled(query.patterns, anon_prefix="_anon")
    bindings = []
    for b in _solve(graph, compiled, {}):
        if query.where is None or _eval_where(graph, query.where, b):
            bindings.append(b)

    columns = tuple(item.to_text() for item in query.returns)

    def item_value(item, binding) -> Value:
        if isinstance(item, VarItem):
            return binding[item.var]
        if isinstance(item, PropItem):
            return _prop_value(graph, binding[item.var], item.prop)
        raise TypeError(f"not a row item: {item!r}")

    if query.aggregated:
        plain = [
            (i, item) for i, item in enumerate(query.returns)
            if not isinstance(item, CountItem)
        ]
        groups: dict[tuple, int] = {}
        for b in bindings:
            key = tuple(item_value(item, b) for _, item in plain)
            groups[key] = groups.get(key, 0) + 1
        if not plain and not groups:
            groups[()] = 0
        rows = []
        for key, count in groups.items():
            row: list[Value] = []
            it = iter(key)
            for item in query.returns:
                row.append(count if isinstance(item, CountItem) else next(it))
            rows.append(tuple(row))
    else:
        rows = [
            tuple(item_value(item, b) for item in query.returns) for b in bindings
        ]

    if query.order_by is None:
        rows.sort(key=_row_key)
    else:
        text = query.order_by.item.to_text()
        if text in columns:
            idx = columns.index(text)
            rows.sort(key=_row_key)
            rows.sort(
                key=lambda r: _sort_key(r[idx]), reverse=query.order_by.descending
            )
        elif query.aggregated:
            raise UnboundVariable(
                f"ORDER BY {text} must appear in RETURN for grouped queries"
            )
        else:
            item = query.order_by.item
            keyed = [
                (_sort_key(item_value(item, b)), row)
                for b, row in zip(bindings, rows)
            ]
            keyed.sort(key=lambda t: _row_key(t[1]))
            keyed.sort(key=lambda t: t[0], reverse=query.order_by.descending)
            rows = [r for _, r in keyed]
    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(columns=columns, rows=tuple(rows))


def run(text: str, graph: Graph) -> ResultTable:
    from .parser import parse

    return execute(parse(text), graph)
