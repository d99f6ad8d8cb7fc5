"""Key-term lexicon and the canonical text folding it matches under.

Folding: lowercase; runs of whitespace, underscores, and hyphens become
one space; all other punctuation is dropped. Each lexicon term also
matches digit-boundary spelling variants, so "ISO9001", "iso_9001", and
"ISO 9001" all hit the same canonical label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..graph import Graph, NodeLabel, RelationType

ENTITY_TYPES = (NodeLabel.SERVICE, NodeLabel.CERTIFICATION, NodeLabel.LOCATION)

RELATION_FOR_TYPE = {
    NodeLabel.SERVICE: RelationType.PROVIDES,
    NodeLabel.CERTIFICATION: RelationType.CERTIFIED_WITH,
    NodeLabel.LOCATION: RelationType.LOCATED_IN,
}

_JOINERS_RE = re.compile(r"[\s_\-]+")
_DROP_RE = re.compile(r"[^a-z0-9 ]+")
_SPLIT_DIGIT_RE = re.compile(r"(?<=[a-z])(?=[0-9])|(?<=[0-9])(?=[a-z])")
_JOIN_DIGIT_RE = re.compile(r"(?<=[a-z]) (?=[0-9])|(?<=[0-9]) (?=[a-z])")


def fold(text: str) -> str:
    folded = _JOINERS_RE.sub(" ", text.lower())
    folded = _DROP_RE.sub("", folded)
    return _JOINERS_RE.sub(" ", folded).strip()


def fold_tokens(text: str) -> list[str]:
    folded = fold(text)
    return folded.split(" ") if folded else []


def stem(token: str) -> str:
    for suffix in ("ing", "ment"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def stemmed_token_set(text: str) -> frozenset[str]:
    return frozenset(stem(t) for t in fold_tokens(text))


def term_variants(term: str) -> set[str]:
    """Folded spellings that count as the same term."""
    base = fold(term)
    if not base:
        return set()
    variants = {base}
    variants.add(_SPLIT_DIGIT_RE.sub(" ", base))
    variants.add(_JOIN_DIGIT_RE.sub("", base))
    return variants


@dataclass(frozen=True)
class Lexicon:
    """entity type -> folded alias -> canonical label"""

    aliases: Mapping[NodeLabel, Mapping[str, str]]

    @classmethod
    def from_terms(cls, terms: Mapping[NodeLabel, Iterable[str]]) -> "Lexicon":
        aliases: dict[NodeLabel, dict[str, str]] = {}
        for entity_type, labels in terms.items():
            table: dict[str, str] = {}
            for label in labels:
                if not label.strip():
                    raise ValueError("lexicon terms must be non-empty")
                for variant in term_variants(label):
                    existing = table.get(variant)
                    if existing is not None and existing != label:
                        raise ValueError(
                            f"alias {variant!r} maps to both {existing!r} and {label!r}"
                        )
                    table[variant] = label
            aliases[entity_type] = table
        return cls(aliases=aliases)

    @classmethod
    def from_graph(cls, graph: Graph) -> "Lexicon":
        return cls.from_terms(
            {
                entity_type: [
                    graph.node(i).name for i in graph.node_ids(entity_type)
                ]
                for entity_type in ENTITY_TYPES
            }
        )

    def labels(self, entity_type: NodeLabel) -> list[str]:
        return sorted(set(self.aliases.get(entity_type, {}).values()))

    def label_aliases(self, entity_type: NodeLabel) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for alias, label in self.aliases.get(entity_type, {}).items():
            out.setdefault(label, set()).add(alias)
        return out
