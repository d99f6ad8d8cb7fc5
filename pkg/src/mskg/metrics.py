"""Evaluation mathematics: classification rates, ROC/PR curves, P@N, MRR.

All functions are pure. Rates with zero denominators are reported as
None (undefined), never as 0. ROC AUC uses the trapezoid rule over a
threshold sweep with tied scores grouped at one threshold, which equals
the rank-pair probability with ties counted half. PR AUC uses rectangles
under the precision steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .errors import EmptyQuerySet, EmptyRanking, SingleClass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for v in (self.tp, self.tn, self.fp, self.fn):
            if v < 0:
                raise ValueError(f"confusion counts must be non-negative, got {v}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Rates:
    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    def to_text(self) -> str:
        def fmt(v):
            return "undefined" if v is None else f"{v:.6f}"

        return (
            f"accuracy={fmt(self.accuracy)} precision={fmt(self.precision)} "
            f"recall={fmt(self.recall)} f1={fmt(self.f1)}"
        )


def rates(counts: ConfusionCounts) -> Rates:
    c = counts
    accuracy = (c.tp + c.tn) / c.total if c.total > 0 else None
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else None
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Rates(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class RocPr:
    roc: tuple[tuple[float, float], ...]  # (FPR, TPR), threshold descending
    auc_roc: float
    pr: tuple[tuple[float, float], ...]  # (recall, precision)
    auc_pr: float


def roc_pr(scored: Sequence[tuple[float, bool]]) -> RocPr:
    """Threshold sweep over distinct scores, highest first."""
    pos = sum(1 for _, y in scored if y)
    neg = len(scored) - pos
    if pos == 0 or neg == 0:
        raise SingleClass(f"need both classes, got {pos} positive / {neg} negative")
    ordered = sorted(scored, key=lambda t: -t[0])
    roc_points = [(0.0, 0.0)]
    pr_points = []
    auc_roc = 0.0
    auc_pr = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j][0] == ordered[i][0]:
            if ordered[j][1]:
                tp += 1
            else:
                fp += 1
            j += 1
        fpr, tpr = fp / neg, tp / pos
        px, py = roc_points[-1]
        auc_roc += (fpr - px) * (tpr + py) / 2.0
        recall = tp / pos
        precision = tp / (tp + fp)
        pr_points.append((recall, precision))
        auc_pr += (recall - prev_recall) * precision
        prev_recall = recall
        roc_points.append((fpr, tpr))
        i = j
    return RocPr(
        roc=tuple(roc_points),
        auc_roc=auc_roc,
        pr=tuple(pr_points),
        auc_pr=auc_pr,
    )


@dataclass(frozen=True)
class PrecisionAtN:
    n_requested: int
    n_used: int
    truncated: bool
    n_relevant: int
    n_total: int

    @property
    def value(self) -> float:
        return self.n_relevant / self.n_total if self.n_total else 0.0


def precision_at_n(
    target_services: set[str],
    ranked: Sequence[tuple[str, Iterable[str]]],
    is_subclass: Callable[[str, str], bool],
    n: int,
) -> PrecisionAtN:
    """P@N over (manufacturer, service) pairs among the top N results.

    A pair is relevant when its service equals one of the target's
    services or is a transitive subclass of one. Services count once per
    providing manufacturer. Rankings shorter than N are evaluated whole
    and flagged truncated.
    """
    if not ranked:
        raise EmptyRanking("ranking is empty")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    top = ranked[:n]
    n_total = 0
    n_relevant = 0
    for _, services in top:
        for svc in services:
            n_total += 1
            if any(svc == t or is_subclass(svc, t) for t in target_services):
                n_relevant += 1
    return PrecisionAtN(
        n_requested=n,
        n_used=len(top),
        truncated=len(top) < n,
        n_relevant=n_relevant,
        n_total=n_total,
    )


@dataclass(frozen=True)
class MrrResult:
    ranks: tuple[Optional[int], ...]  # 1-based first-relevant rank per query

    @property
    def value(self) -> float:
        return sum(1.0 / r for r in self.ranks if r is not None) / len(self.ranks)


def mean_reciprocal_rank(queries: Sequence[Sequence[bool]]) -> MrrResult:
    """Mean of reciprocal first-relevant ranks; no relevant entry counts 0."""
    if not queries:
        raise EmptyQuerySet("no queries")
    ranks: list[Optional[int]] = []
    for flags in queries:
        rank = next((i + 1 for i, f in enumerate(flags) if f), None)
        ranks.append(rank)
    return MrrResult(ranks=tuple(ranks))


@dataclass(frozen=True)
class QueryEval:
    query_id: str
    p_at_n: dict[int, PrecisionAtN]
    rank: Optional[int]


@dataclass(frozen=True)
class RecEvalReport:
    """Recommendation evaluation over a query set: per-query P@N and MRR."""

    queries: tuple[QueryEval, ...]
    ns: tuple[int, ...]

    def mean_p_at(self, n: int) -> float:
        vals = [q.p_at_n[n].value for q in self.queries]
        return sum(vals) / len(vals)

    @property
    def mrr(self) -> float:
        return MrrResult(ranks=tuple(q.rank for q in self.queries)).value

    def to_text(self) -> str:
        lines = []
        for q in self.queries:
            rank = "none" if q.rank is None else str(q.rank)
            lines.append(f"query {q.query_id}: first_relevant_rank={rank}")
            for n in self.ns:
                p = q.p_at_n[n]
                flag = " (truncated)" if p.truncated else ""
                lines.append(
                    f"  P@{n}: relevant={p.n_relevant} total={p.n_total} "
                    f"value={p.value:.6f}{flag}"
                )
        for n in self.ns:
            lines.append(f"mean P@{n}: {self.mean_p_at(n):.6f}")
        lines.append(f"MRR: {self.mrr:.6f}")
        return "\n".join(lines)
