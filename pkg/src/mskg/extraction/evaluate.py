"""Extraction evaluation against gold (manufacturer, entity type, label)
annotations.

The pair universe is scored-union-gold: a gold pair never scored enters
at the absent-relation score (0.2, below every cutoff), and negatives
are restricted to scored candidates; the unscored non-gold space is not
enumerated. Confusion counts apply the per-type cutoffs; curves use the
raw scores.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional

from ..errors import EmptyGold, SingleClass
from ..graph import NodeLabel
from ..metrics import ConfusionCounts, Rates, RocPr, rates, roc_pr
from .lexicon import ENTITY_TYPES
from .pipeline import ExtractionConfig, ScoredRelation

GoldPair = tuple[str, NodeLabel, str]


@dataclass(frozen=True)
class TypeEvaluation:
    entity_type: Optional[NodeLabel]  # None = overall
    counts: ConfusionCounts
    rates: Rates
    curves: Optional[RocPr]  # None when only one class is present


@dataclass(frozen=True)
class ExtractionReport:
    overall: TypeEvaluation
    per_type: dict[NodeLabel, TypeEvaluation]

    def to_text(self) -> str:
        lines = []
        for ev in [self.overall, *self.per_type.values()]:
            name = ev.entity_type.value if ev.entity_type else "overall"
            c = ev.counts
            lines.append(
                f"{name}: TP={c.tp} FP={c.fp} TN={c.tn} FN={c.fn} {ev.rates.to_text()}"
            )
            if ev.curves is not None:
                lines.append(
                    f"{name}: auc_roc={ev.curves.auc_roc:.6f} "
                    f"auc_pr={ev.curves.auc_pr:.6f}"
                )
        return "\n".join(lines)


def evaluate_extraction(
    scored: Iterable[ScoredRelation],
    gold: set[GoldPair],
    config: Optional[ExtractionConfig] = None,
) -> ExtractionReport:
    if not gold:
        raise EmptyGold("gold annotation set is empty")
    config = config or ExtractionConfig()
    score_of: dict[GoldPair, float] = {}
    for r in scored:
        key = (r.manufacturer, r.entity_type, r.label)
        if r.score > score_of.get(key, -1.0):
            score_of[key] = r.score
    universe = set(score_of) | set(gold)

    def evaluate(pairs: set[GoldPair], entity_type: Optional[NodeLabel]):
        tp = fp = tn = fn = 0
        curve_points = []
        for pair in pairs:
            score = score_of.get(pair, config.absent_score)
            is_gold = pair in gold
            predicted = score >= config.cutoffs[pair[1]]
            if predicted and is_gold:
                tp += 1
            elif predicted:
                fp += 1
            elif is_gold:
                fn += 1
            else:
                tn += 1
            curve_points.append((score, is_gold))
        counts = ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)
        try:
            curves = roc_pr(curve_points) if curve_points else None
        except SingleClass:
            curves = None
        return TypeEvaluation(
            entity_type=entity_type, counts=counts, rates=rates(counts), curves=curves
        )

    per_type = {
        t: evaluate({p for p in universe if p[1] is t}, t) for t in ENTITY_TYPES
    }
    return ExtractionReport(overall=evaluate(universe, None), per_type=per_type)


def load_fixture_corpus(directory: str) -> tuple[dict[str, str], set[GoldPair]]:
    """Read <manufacturer-id>.txt documents and gold.tsv annotations."""
    docs: dict[str, str] = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".txt"):
            with open(os.path.join(directory, name), encoding="utf-8") as fh:
                docs[name[: -len(".txt")]] = fh.read()
    gold: set[GoldPair] = set()
    types_by_name = {t.value: t for t in ENTITY_TYPES}
    with open(os.path.join(directory, "gold.tsv"), encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            manufacturer, type_name, label = line.split("\t")
            gold.add((manufacturer, types_by_name[type_name], label))
    return docs, gold


def fixture_corpus_dir() -> str:
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "fixture_corpus")
