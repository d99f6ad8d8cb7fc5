"""MSQL: a small declarative graph pattern language.

Patterns with optional labels and relation types, WHERE filters with
negation via NOT EXISTS, count() aggregation with implicit grouping,
ordering, and limits. See parser for the grammar.
"""

from .ast import (
    BoolChain,
    Comparison,
    CountItem,
    NodePattern,
    NotExists,
    OrderBy,
    PathPattern,
    PropItem,
    Query,
    Step,
    VarItem,
)
from .engine import ResultTable, execute, run
from .parser import parse, tokenize

__all__ = [
    "BoolChain",
    "Comparison",
    "CountItem",
    "NodePattern",
    "NotExists",
    "OrderBy",
    "PathPattern",
    "PropItem",
    "Query",
    "ResultTable",
    "Step",
    "VarItem",
    "execute",
    "parse",
    "run",
    "tokenize",
]
