"""Two-stage extraction: coarse key-term filtration, then classification.

Stage one splits text into segments (sentence punctuation, commas,
parentheses, newlines), folds each segment, and finds lexicon terms;
every hit becomes a candidate n-gram of the term plus up to three
trailing tokens, capped at nine. Stage two scores each candidate: an
n-gram that is exactly its term asserts the label directly at the
coarse weight; anything wider is scored by the classifier port against
all labels of its entity type. Relations at or above the per-type
cutoff survive, the best score per (manufacturer, label) winning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..graph import NodeLabel
from .lexicon import ENTITY_TYPES, Lexicon, fold_tokens
from .ports import ClassifierPort

_SEGMENT_RE = re.compile(r"[.;:!?,()\n]")


@dataclass(frozen=True)
class ExtractionConfig:
    cutoffs: dict[NodeLabel, float] = field(
        default_factory=lambda: {
            NodeLabel.SERVICE: 0.40,
            NodeLabel.CERTIFICATION: 0.25,
            NodeLabel.LOCATION: 0.40,
        }
    )
    coarse_weight: float = 0.8
    absent_score: float = 0.2
    max_ngram: int = 9
    trailing_context: int = 3

    def __post_init__(self):
        for value in (*self.cutoffs.values(), self.coarse_weight, self.absent_score):
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"extraction weights must be in [0, 1], got {value}")
        if not (1 <= self.max_ngram <= 9):
            raise ValueError("max n-gram length must be in 1..9")


@dataclass(frozen=True)
class Candidate:
    source_id: str
    entity_type: NodeLabel
    ngram: str
    term: str
    label: str

    @property
    def exact(self) -> bool:
        return self.ngram == self.term


@dataclass(frozen=True)
class ScoredRelation:
    manufacturer: str
    entity_type: NodeLabel
    label: str
    score: float
    provenance: str  # "coarse" | "classifier"


def coarse_filter(
    text: str,
    lexicon: Lexicon,
    config: Optional[ExtractionConfig] = None,
    source_id: str = "",
) -> list[Candidate]:
    config = config or ExtractionConfig()
    found: list[tuple[tuple[int, int], Candidate]] = []
    for seg_index, segment in enumerate(_SEGMENT_RE.split(text)):
        tokens = fold_tokens(segment)
        if not tokens:
            continue
        for entity_type in ENTITY_TYPES:
            table = lexicon.aliases.get(entity_type, {})
            for alias, label in table.items():
                alias_tokens = alias.split(" ")
                width = len(alias_tokens)
                if width > len(tokens):
                    continue
                for i in range(len(tokens) - width + 1):
                    if tokens[i : i + width] != alias_tokens:
                        continue
                    end = min(
                        i + width + config.trailing_context,
                        len(tokens),
                        i + config.max_ngram,
                    )
                    ngram = " ".join(tokens[i:end])
                    found.append(
                        (
                            (seg_index, i),
                            Candidate(
                                source_id=source_id,
                                entity_type=entity_type,
                                ngram=ngram,
                                term=alias,
                                label=label,
                            ),
                        )
                    )
    found.sort(key=lambda t: (t[0], t[1].entity_type.value, t[1].label, t[1].term))
    return [c for _, c in found]


def classify(
    candidate: Candidate,
    labels: Sequence[str],
    classifier: ClassifierPort,
) -> dict[str, float]:
    if not labels:
        raise ValueError("labels must be non-empty")
    scores = classifier.score(candidate.ngram, labels)
    return dict(zip(labels, scores))


def build_relations(
    candidates: Iterable[Candidate],
    lexicon: Lexicon,
    classifier: ClassifierPort,
    config: Optional[ExtractionConfig] = None,
    apply_cutoff: bool = True,
) -> list[ScoredRelation]:
    """Score candidates and reduce to the best relation per (manufacturer,
    entity type, label). With apply_cutoff=False the sub-cutoff scores are
    kept, which the evaluation curves need."""
    config = config or ExtractionConfig()
    best: dict[tuple[str, NodeLabel, str], ScoredRelation] = {}

    def offer(relation: ScoredRelation):
        key = (relation.manufacturer, relation.entity_type, relation.label)
        cur = best.get(key)
        if cur is None or relation.score > cur.score or (
            relation.score == cur.score
            and cur.provenance == "classifier"
            and relation.provenance == "coarse"
        ):
            best[key] = relation

    classified: set[tuple[str, NodeLabel, str]] = set()
    for candidate in candidates:
        if candidate.exact:
            offer(
                ScoredRelation(
                    manufacturer=candidate.source_id,
                    entity_type=candidate.entity_type,
                    label=candidate.label,
                    score=config.coarse_weight,
                    provenance="coarse",
                )
            )
            continue
        seen_key = (candidate.source_id, candidate.entity_type, candidate.ngram)
        if seen_key in classified:
            continue
        classified.add(seen_key)
        labels = lexicon.labels(candidate.entity_type)
        for label, score in classify(candidate, labels, classifier).items():
            offer(
                ScoredRelation(
                    manufacturer=candidate.source_id,
                    entity_type=candidate.entity_type,
                    label=label,
                    score=score,
                    provenance="classifier",
                )
            )

    relations = sorted(
        best.values(),
        key=lambda r: (r.manufacturer, r.entity_type.value, r.label),
    )
    if apply_cutoff:
        relations = [
            r for r in relations if r.score >= config.cutoffs[r.entity_type]
        ]
    return relations


def extract_document(
    source_id: str,
    text: str,
    lexicon: Lexicon,
    classifier: ClassifierPort,
    config: Optional[ExtractionConfig] = None,
    apply_cutoff: bool = True,
) -> list[ScoredRelation]:
    candidates = coarse_filter(text, lexicon, config, source_id=source_id)
    return build_relations(candidates, lexicon, classifier, config, apply_cutoff)


def relations_to_records(relations: Iterable[ScoredRelation]) -> list[dict]:
    """Canonical records (nodes then relationships) for merging into a graph."""
    from ..graph import canonical_id
    from .lexicon import RELATION_FOR_TYPE

    nodes: dict[str, dict] = {}
    rels: list[dict] = []
    for r in relations:
        man_id = canonical_id(NodeLabel.MANUFACTURER, r.manufacturer)
        nodes.setdefault(
            man_id,
            {
                "type": "node",
                "id": man_id,
                "labels": [NodeLabel.MANUFACTURER.value],
                "properties": {"name": man_id},
            },
        )
        target_id = canonical_id(r.entity_type, r.label)
        nodes.setdefault(
            target_id,
            {
                "type": "node",
                "id": target_id,
                "labels": [r.entity_type.value],
                "properties": {"name": r.label},
            },
        )
        rels.append(
            {
                "type": "relationship",
                "label": RELATION_FOR_TYPE[r.entity_type].value,
                "start": {"id": man_id},
                "end": {"id": target_id},
                "properties": {"weight": r.score},
            }
        )
    return list(nodes.values()) + rels
