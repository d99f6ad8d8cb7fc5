"""Syntax tree for MSQL queries.

Construction validates variable scoping (every variable used in WHERE,
RETURN, or ORDER BY must be bound by a MATCH pattern) and rejects
aggregate nesting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import NestedAggregate, UnboundVariable


@dataclass(frozen=True)
class NodePattern:
    var: Optional[str] = None
    label: Optional[str] = None
    prop: Optional[tuple[str, str]] = None  # inline {prop: 'value'} filter

    def to_text(self) -> str:
        inner = self.var or ""
        if self.label:
            inner += f":{self.label}"
        if self.prop:
            inner += f" {{{self.prop[0]}: '{_escape(self.prop[1])}'}}"
        return f"({inner})"


@dataclass(frozen=True)
class Step:
    rel: Optional[str]
    direction: str  # "out" | "in" | "any"

    def to_text(self) -> str:
        body = f":{self.rel}" if self.rel else ""
        if self.direction == "out":
            return f"-[{body}]->"
        if self.direction == "in":
            return f"<-[{body}]-"
        return f"-[{body}]-"


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    steps: tuple[Step, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.steps) + 1:
            raise ValueError("path needs one more node than steps")

    def to_text(self) -> str:
        parts = [self.nodes[0].to_text()]
        for step, node in zip(self.steps, self.nodes[1:]):
            parts.append(step.to_text())
            parts.append(node.to_text())
        return "".join(parts)


@dataclass(frozen=True)
class Comparison:
    var: str
    prop: str
    op: str  # "=" | "<>"
    literal: Union[str, int]

    def to_text(self) -> str:
        if isinstance(self.literal, int):
            lit = str(self.literal)
        else:
            lit = f"'{_escape(self.literal)}'"
        return f"{self.var}.{self.prop} {self.op} {lit}"


@dataclass(frozen=True)
class NotExists:
    pattern: PathPattern

    def to_text(self) -> str:
        return f"NOT EXISTS ({self.pattern.to_text()})"


@dataclass(frozen=True)
class BoolChain:
    """Left-associative chain: first (op1 t1) (op2 t2) ... ops in {AND, OR}."""

    first: "Term"
    rest: tuple[tuple[str, "Term"], ...] = ()

    def to_text(self) -> str:
        parts = [_term_text(self.first)]
        for op, term in self.rest:
            parts.append(op)
            parts.append(_term_text(term))
        return " ".join(parts)


Term = Union[Comparison, NotExists, BoolChain]


def _term_text(term: Term) -> str:
    if isinstance(term, BoolChain):
        return f"({term.to_text()})"
    return term.to_text()


@dataclass(frozen=True)
class VarItem:
    var: str

    def to_text(self) -> str:
        return self.var


@dataclass(frozen=True)
class PropItem:
    var: str
    prop: str

    def to_text(self) -> str:
        return f"{self.var}.{self.prop}"


@dataclass(frozen=True)
class CountItem:
    var: str

    def to_text(self) -> str:
        return f"count({self.var})"


ReturnItem = Union[VarItem, PropItem, CountItem]


@dataclass(frozen=True)
class OrderBy:
    item: ReturnItem
    descending: bool = False

    def to_text(self) -> str:
        return self.item.to_text() + (" DESC" if self.descending else " ASC")


@dataclass(frozen=True)
class Query:
    patterns: tuple[PathPattern, ...]
    where: Optional[Term]
    returns: tuple[ReturnItem, ...]
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None

    def __post_init__(self):
        bound = self.bound_vars()
        for term in _walk_terms(self.where):
            if isinstance(term, Comparison) and term.var not in bound:
                raise UnboundVariable(f"variable {term.var!r} not bound in MATCH")
        items = list(self.returns)
        if self.order_by is not None:
            items.append(self.order_by.item)
        for item in items:
            if isinstance(item, CountItem):
                if item.var not in bound:
                    raise UnboundVariable(f"variable {item.var!r} not bound in MATCH")
            elif item.var not in bound:
                raise UnboundVariable(f"variable {item.var!r} not bound in MATCH")
        if self.order_by is not None and isinstance(self.order_by.item, CountItem):
            if not any(isinstance(i, CountItem) for i in self.returns):
                raise NestedAggregate(
                    "ORDER BY aggregate requires an aggregated RETURN"
                )

    def bound_vars(self) -> set[str]:
        out = set()
        for pattern in self.patterns:
            for node in pattern.nodes:
                if node.var:
                    out.add(node.var)
        return out

    @property
    def aggregated(self) -> bool:
        return any(isinstance(i, CountItem) for i in self.returns)

    def to_text(self) -> str:
        parts = ["MATCH " + ", ".join(p.to_text() for p in self.patterns)]
        if self.where is not None:
            parts.append("WHERE " + self.where.to_text())
        parts.append("RETURN " + ", ".join(i.to_text() for i in self.returns))
        if self.order_by is not None:
            parts.append("ORDER BY " + self.order_by.to_text())
        if self.limit is not None:
            parts.append(f"LIMIT {self.limit}")
        return " ".join(parts)


def _walk_terms(term: Optional[Term]):
    if term is None:
        return
    stack = [term]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, BoolChain):
            stack.append(cur.first)
            stack.extend(t for _, t in cur.rest)


def _escape(text: str) -> str:
    return text.replace("'", "''")
