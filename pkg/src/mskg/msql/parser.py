"""Recursive-descent parser for MSQL.

Grammar:

    query  = "MATCH" pattern {"," pattern} ["WHERE" expr]
             "RETURN" item {"," item}
             ["ORDER" "BY" item [("ASC"|"DESC")]] ["LIMIT" INT] ;
    pattern = node { step node } ;
    node   = "(" [VAR] [":" LABEL] ["{" PROP ":" STRING "}"] ")" ;
    step   = "-[" [":" RELTYPE] "]->" | "<-[" [":" RELTYPE] "]-"
           | "-[" [":" RELTYPE] "]-" ;
    expr   = term {("AND"|"OR") term} ;
    term   = VAR "." PROP ("="|"<>") literal
           | "NOT" "EXISTS" "(" pattern ")" | "(" expr ")" ;
    item   = VAR | VAR "." PROP | "count(" VAR ")" ;

Keywords are case-insensitive. Strings are single-quoted with '' as an
escaped quote. Boolean chains are left-associative; AND and OR share one
precedence level, so mixed chains group explicitly with parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MsqlSyntaxError
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

_KEYWORDS = {
    "match", "where", "return", "order", "by", "asc", "desc",
    "limit", "and", "or", "not", "exists", "count",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow_out>\]->)
  | (?P<neq><>)
  | (?P<punct>[()\[\]{},.:=<>-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "string" | "int" | "ident" | "keyword" | punct text
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise MsqlSyntaxError(
                f"unexpected character {text[pos]!r}", line=line, column=col,
                expected=("token",),
            )
        kind = m.lastgroup
        raw = m.group()
        if kind != "ws":
            if kind == "ident":
                folded = raw.lower()
                kind = "keyword" if folded in _KEYWORDS else "ident"
                tokens.append(Token(kind, raw, line, col))
            elif kind in ("string", "int"):
                tokens.append(Token(kind, raw, line, col))
            elif kind == "arrow_out":
                tokens.append(Token("]->", raw, line, col))
            elif kind == "neq":
                tokens.append(Token("<>", raw, line, col))
            else:
                tokens.append(Token(raw, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def error(self, expected: tuple[str, ...]):
        tok = self.cur
        got = tok.text or "end of input"
        raise MsqlSyntaxError(
            f"expected {' or '.join(expected)}, got {got!r}",
            line=tok.line,
            column=tok.col,
            expected=expected,
        )

    def at_keyword(self, word: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.text.lower() == word

    def eat_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.error((word.upper(),))
        return self.advance()

    def eat(self, kind: str) -> Token:
        if self.cur.kind != kind:
            self.error((kind,))
        return self.advance()

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    # -- grammar ----------------------------------------------------------

    def query(self) -> Query:
        self.eat_keyword("match")
        patterns = [self.pattern()]
        while self.cur.kind == ",":
            self.advance()
            patterns.append(self.pattern())
        where = None
        if self.at_keyword("where"):
            self.advance()
            where = self.expr()
        self.eat_keyword("return")
        returns = [self.item()]
        while self.cur.kind == ",":
            self.advance()
            returns.append(self.item())
        order_by = None
        if self.at_keyword("order"):
            self.advance()
            self.eat_keyword("by")
            item = self.item()
            descending = False
            if self.at_keyword("desc"):
                self.advance()
                descending = True
            elif self.at_keyword("asc"):
                self.advance()
            order_by = OrderBy(item=item, descending=descending)
        limit = None
        if self.at_keyword("limit"):
            self.advance()
            limit = int(self.eat("int").text)
        if self.cur.kind != "eof":
            self.error(("end of query",))
        return Query(
            patterns=tuple(patterns),
            where=where,
            returns=tuple(returns),
            order_by=order_by,
            limit=limit,
        )

    def pattern(self) -> PathPattern:
        nodes = [self.node()]
        steps = []
        while self.cur.kind in ("-", "<"):
            steps.append(self.step())
            nodes.append(self.node())
        return PathPattern(nodes=tuple(nodes), steps=tuple(steps))

    def node(self) -> NodePattern:
        self.eat("(")
        var = None
        label = None
        prop = None
        if self.cur.kind == "ident":
            var = self.advance().text
        if self.cur.kind == ":":
            self.advance()
            label = self.eat("ident").text
        if self.cur.kind == "{":
            self.advance()
            key = self.eat("ident").text
            self.eat(":")
            value = self.string_value(self.eat("string"))
            self.eat("}")
            prop = (key, value)
        self.eat(")")
        return NodePattern(var=var, label=label, prop=prop)

    def step(self) -> Step:
        if self.cur.kind == "<":
            self.advance()
            self.eat("-")
            self.eat("[")
            rel = self.rel_name()
            self.eat("]")
            self.eat("-")
            return Step(rel=rel, direction="in")
        self.eat("-")
        self.eat("[")
        rel = self.rel_name()
        if self.cur.kind == "]->":
            self.advance()
            return Step(rel=rel, direction="out")
        self.eat("]")
        if self.cur.kind == "-":
            self.advance()
            return Step(rel=rel, direction="any")
        self.error(("]->", "-"))

    def rel_name(self):
        if self.cur.kind == ":":
            self.advance()
            return self.eat("ident").text
        return None

    def expr(self):
        first = self.term()
        rest = []
        while self.cur.kind == "keyword" and self.cur.text.lower() in ("and", "or"):
            op = self.advance().text.upper()
            rest.append((op, self.term()))
        if not rest:
            return first
        return BoolChain(first=first, rest=tuple(rest))

    def term(self):
        if self.at_keyword("not"):
            self.advance()
            self.eat_keyword("exists")
            self.eat("(")
            pattern = self.pattern()
            self.eat(")")
            return NotExists(pattern=pattern)
        if self.cur.kind == "(":
            self.advance()
            inner = self.expr()
            self.eat(")")
            return inner
        if self.cur.kind == "ident":
            var = self.advance().text
            self.eat(".")
            prop = self.eat("ident").text
            if self.cur.kind == "=":
                op = "="
                self.advance()
            elif self.cur.kind == "<>":
                op = "<>"
                self.advance()
            else:
                self.error(("=", "<>"))
            if self.cur.kind == "string":
                literal = self.string_value(self.advance())
            elif self.cur.kind == "int":
                literal = int(self.advance().text)
            else:
                self.error(("string", "integer"))
            return Comparison(var=var, prop=prop, op=op, literal=literal)
        self.error(("NOT EXISTS", "(", "comparison"))

    def item(self):
        if self.at_keyword("count"):
            self.advance()
            self.eat("(")
            var = self.eat("ident").text
            self.eat(")")
            return CountItem(var=var)
        var = self.eat("ident").text
        if self.cur.kind == ".":
            self.advance()
            prop = self.eat("ident").text
            return PropItem(var=var, prop=prop)
        return VarItem(var=var)

    @staticmethod
    def string_value(tok: Token) -> str:
        return tok.text[1:-1].replace("''", "'")


def parse(text: str) -> Query:
    return _Parser(tokenize(text)).query()
