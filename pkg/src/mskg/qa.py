"""Question router and answer composer.

Questions are routed to one of three handlers: template-translated graph
queries, cosine-similarity recommendations over manufacturer embeddings,
or multi-label capability tagging. Every answer carries the evidence it
was composed from (a result table or a ranked list) and a summary whose
numbers are recomputed from that evidence.
"""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence

import numpy as np

from .classifier import MlpModel, Prediction, predict
from .embedding import EmbeddingTable
from .errors import (
    EmptyRanking,
    MissingEmbedding,
    ModelUnavailable,
    NoTemplateMatch,
    PortOutputInvalid,
    PortUnavailable,
    StageFailure,
    UnknownManufacturer,
)
from .extraction.lexicon import Lexicon, fold
from .graph import CATEGORIES, Graph, NodeLabel, RelationType, canonical_id
from .metrics import (
    QueryEval,
    RecEvalReport,
    mean_reciprocal_rank,
    precision_at_n,
)
from .msql import ResultTable, parse, run


class IntentKind(Enum):
    GRAPH_QUERY = "graph_query"
    SIMILARITY_RECOMMENDATION = "similarity_recommendation"
    MULTI_LABEL_TAGGING = "multi_label_tagging"
    UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class Intent:
    kind: IntentKind
    slots: dict = field(default_factory=dict)

    def __post_init__(self):
        needs_id = (
            IntentKind.SIMILARITY_RECOMMENDATION,
            IntentKind.MULTI_LABEL_TAGGING,
        )
        if self.kind in needs_id and not self.slots.get("manufacturer"):
            raise ValueError(f"{self.kind.value} intent needs a manufacturer slot")


@dataclass(frozen=True)
class AnswerBundle:
    intent: Intent
    summary: str
    provenance: str
    table: ResultTable
    msql: Optional[str] = None
    method: Optional[str] = None
    k: Optional[int] = None
    ranking: Optional[tuple[tuple[str, float], ...]] = None
    prediction: Optional[Prediction] = None


class LanguageModelPort(Protocol):
    def translate(self, question: str, schema: str, examples: Sequence[dict]) -> str:
        """Query text for the question, or raise PortUnavailable."""
        ...


SCHEMA_TEXT = (
    "Nodes: Manufacturer, Service, Certification, Location. "
    "Relations: provides (Manufacturer->Service), "
    "certified_with (Manufacturer->Certification), "
    "located_in (Manufacturer->Location), "
    "subclass_of (Service->Service). "
    "Query form: MATCH pattern[, pattern] [WHERE expr] RETURN items "
    "[ORDER BY item [DESC]] [LIMIT n]."
)

FEW_SHOT_EXAMPLES = (
    {
        "question": "List 50 manufacturers certified with ITAR.",
        "query": "MATCH (m:Manufacturer)-[:certified_with]->"
        "(c0:Certification {name: 'itar'}) RETURN m.name LIMIT 50",
    },
    {
        "question": "How many manufacturers provide welding in each state?",
        "query": "MATCH (m:Manufacturer)-[:provides]->(s:Service {name: 'welding'}),"
        " (m)-[:located_in]->(l:Location) RETURN l.name, count(m)",
    },
)


class HttpLanguageModelPort:
    """External translation service speaking JSON over HTTP."""

    def __init__(self, url: str, model_id: str = "external", timeout: float = 10.0, max_retries: int = 1):
        self.url = url
        self.model_id = model_id
        self.timeout = timeout
        self.max_retries = max_retries

    def translate(self, question: str, schema: str, examples: Sequence[dict]) -> str:
        payload = json.dumps(
            {"question": question, "schema": schema, "examples": list(examples)}
        ).encode("utf-8")
        last_error: Optional[Exception] = None
        for _ in range(self.max_retries + 1):
            request = urllib.request.Request(
                self.url, data=payload, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                text = body.get("query") if isinstance(body, dict) else None
                if not isinstance(text, str) or not text.strip():
                    raise PortOutputInvalid(f"malformed translation response: {body!r}")
                return text
            except PortOutputInvalid:
                raise
            except (urllib.error.URLError, OSError, ValueError) as exc:
                last_error = exc
        raise PortUnavailable(f"translation service at {self.url} failed: {last_error}")


# -- routing -----------------------------------------------------------------

_SIMILAR_RE = re.compile(
    r"(?:(\d+)\s+)?manufacturers?\s+similar\s+to\s+[\"']?([\w./:-]+?)[\"']?[\s,]+based on the services",
    re.IGNORECASE,
)
_TAG_RE = re.compile(
    r"label\s+[\"']?([\w./:-]+?)[\"']?\s+with the following tags",
    re.IGNORECASE,
)
# Generic graph-question cue: lets translate() consult the external port on
# questions shaped like graph queries that no template handles.
_GRAPH_CUE_RE = re.compile(
    r"^(?:list|how many|which|what|is|for)\b.*\b"
    r"(?:manufacturers?|services?|certifications?|certified|locations?|states?)\b"
)


def _clean(question: str) -> str:
    text = question.strip().lower()
    text = re.sub(r"\s+", " ", text)
    return text.rstrip(" ?.!")


def route(question: str) -> Intent:
    """Rule-based intent classification. Deterministic and total."""
    if not question or not question.strip():
        raise ValueError("question must be non-empty")
    m = _SIMILAR_RE.search(question)
    if m:
        k = int(m.group(1)) if m.group(1) else 300
        target = canonical_id(NodeLabel.MANUFACTURER, m.group(2))
        return Intent(
            IntentKind.SIMILARITY_RECOMMENDATION,
            {"manufacturer": target, "k": k},
        )
    m = _TAG_RE.search(question)
    if m:
        target = canonical_id(NodeLabel.MANUFACTURER, m.group(1))
        return Intent(IntentKind.MULTI_LABEL_TAGGING, {"manufacturer": target})
    cleaned = _clean(question)
    for template in _TEMPLATES:
        if template.pattern.search(cleaned):
            return Intent(IntentKind.GRAPH_QUERY, {"template": template.template_id})
    if _GRAPH_CUE_RE.search(cleaned):
        return Intent(IntentKind.GRAPH_QUERY, {})
    return Intent(IntentKind.UNSUPPORTED)


# -- templates ---------------------------------------------------------------


@dataclass(frozen=True)
class _Template:
    template_id: str
    pattern: re.Pattern
    # slot name -> entity type for lexicon resolution; None = verbatim
    slot_types: dict


@dataclass(frozen=True)
class TemplateMatch:
    template_id: str
    msql: str
    slots: dict


_SVC = NodeLabel.SERVICE
_CERT = NodeLabel.CERTIFICATION
_LOC = NodeLabel.LOCATION

_TEMPLATES = (
    _Template(
        "negated-certification-count",
        re.compile(
            r"how many manufacturers located in (?P<loc>.+?),? provide "
            r"(?P<svc>.+?),? but (?:are )?not certified (?:with|by) (?P<cert>.+)$"
        ),
        {"loc": _LOC, "svc": _SVC, "cert": _CERT},
    ),
    _Template(
        "per-state-count",
        re.compile(r"how many manufacturers provide (?P<svc>.+?) in each state$"),
        {"svc": _SVC},
    ),
    _Template(
        "top-state",
        re.compile(
            r"which state has the biggest number of manufacturers which "
            r"provide (?P<svc1>.+?) and (?:provide )?(?P<svc2>.+)$"
        ),
        {"svc1": _SVC, "svc2": _SVC},
    ),
    _Template(
        "top-k-states",
        re.compile(
            r"(?:list )?top (?P<k>\d+) states which have the biggest number of "
            r"manufacturers which provide (?P<svc>.+?) and (?:are )?certified "
            r"(?:with|by) (?P<cert>.+)$"
        ),
        {"svc": _SVC, "cert": _CERT},
    ),
    _Template(
        "most-common-service",
        re.compile(
            r"for manufacturers located in (?P<loc>.+?) and certified "
            r"(?:with|by) (?P<cert>.+?),? what service do they provide the most$"
        ),
        {"loc": _LOC, "cert": _CERT},
    ),
    _Template(
        "top-services-in-state",
        re.compile(
            r"(?:list )?top (?P<k>\d+) (?:manufacturing )?services which "
            r"manufacturers? provides? the most in (?P<loc>.+?) and how many "
            r"manufacturers provide them$"
        ),
        {"loc": _LOC},
    ),
    _Template(
        "services-under-filters",
        re.compile(
            r"list services provided by manufacturers certified (?:with|by) "
            r"(?P<cert>.+?) and located in (?P<loc>.+?) and how many "
            r"manufacturers provide them$"
        ),
        {"cert": _CERT, "loc": _LOC},
    ),
    _Template(
        "same-service-as",
        re.compile(
            r"list (?P<k>\d+) (?:names of )?manufacturers which provide the "
            r"same services? as (?:manufacturer )?[\"']?(?P<man>[\w./:-]+?)[\"']?$"
        ),
        {"man": NodeLabel.MANUFACTURER},
    ),
    _Template(
        "located-service-certification",
        re.compile(
            r"list (?P<k>\d+) (?:names of )?manufacturers located in "
            r"(?P<loc>.+?),? which provide (?P<svc>.+?) and (?:are )?certified "
            r"(?:with|by) (?P<cert>.+)$"
        ),
        {"loc": _LOC, "svc": _SVC, "cert": _CERT},
    ),
    _Template(
        "service-and-certification",
        re.compile(
            r"list (?P<k>\d+) (?:names of )?manufacturers which provide "
            r"(?P<svc>.+?),? (?:as well as|and are|and) certified "
            r"(?:with|by) (?P<cert>.+)$"
        ),
        {"svc": _SVC, "cert": _CERT},
    ),
    _Template(
        "certified-list",
        re.compile(
            r"list (?P<k>\d+) (?:names of )?manufacturers certified "
            r"(?:with|by) (?P<certs>.+)$"
        ),
        {"certs": _CERT},
    ),
    _Template(
        "locations-of",
        re.compile(
            r"what are the locations related to [\"']?(?P<man>[\w./:-]+?)[\"']?$"
        ),
        {"man": NodeLabel.MANUFACTURER},
    ),
    _Template(
        "certification-check",
        re.compile(
            r"is [\"']?(?P<man>[\w./:-]+?)[\"']? certified (?:for|with) (?P<cert>.+)$"
        ),
        {"man": NodeLabel.MANUFACTURER, "cert": _CERT},
    ),
)

_TEMPLATES_BY_ID = {t.template_id: t for t in _TEMPLATES}


class TemplateEngine:
    """Deterministic default translation port backed by the entity lexicon."""

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon

    def translate(self, question: str, schema: str = "", examples: Sequence[dict] = ()) -> str:
        return self.match(question).msql

    def match(self, question: str) -> TemplateMatch:
        cleaned = _clean(question)
        for template in _TEMPLATES:
            m = template.pattern.search(cleaned)
            if m is None:
                continue
            slots = self._resolve_slots(template, m)
            return TemplateMatch(
                template_id=template.template_id,
                msql=self._build(template.template_id, slots),
                slots=slots,
            )
        raise NoTemplateMatch(f"no template matches {question!r}")

    def _resolve_slots(self, template: _Template, m: re.Match) -> dict:
        slots: dict = {}
        for name, raw in m.groupdict().items():
            if raw is None:
                continue
            if name == "k":
                slots["k"] = int(raw)
            elif name == "certs":
                parts = re.split(r",| and ", raw)
                slots["certs"] = tuple(
                    self._resolve(_CERT, part) for part in parts if part.strip()
                )
            elif name == "man":
                slots["man"] = canonical_id(NodeLabel.MANUFACTURER, raw)
            else:
                slots[name] = self._resolve(template.slot_types[name], raw)
        return slots

    def _resolve(self, entity_type: NodeLabel, raw: str) -> str:
        """Map a slot's surface text onto a known entity name.

        Exact alias match first, then the longest alias occurring inside
        the folded text (handles spellings like the parenthesized short
        form in 'American Welding Society (AWS)')."""
        table = self.lexicon.aliases.get(entity_type, {})
        folded = fold(raw)
        if folded in table:
            return table[folded]
        tokens = folded.split(" ")
        best: Optional[tuple[int, str, str]] = None
        for alias, label in table.items():
            alias_tokens = alias.split(" ")
            width = len(alias_tokens)
            for i in range(len(tokens) - width + 1):
                if tokens[i : i + width] == alias_tokens:
                    key = (width, alias, label)
                    if best is None or key > best:
                        best = key
        if best is None:
            raise NoTemplateMatch(
                f"no known {entity_type.value} matches slot text {raw!r}"
            )
        return best[2]

    @staticmethod
    def _lit(entity_type: NodeLabel, name: str) -> str:
        return canonical_id(entity_type, name)

    def _build(self, template_id: str, slots: dict) -> str:
        lit = self._lit
        if template_id == "certified-list":
            patterns = ", ".join(
                ("(m:Manufacturer)" if i == 0 else "(m)")
                + f"-[:certified_with]->(c{i}:Certification {{name: '{lit(_CERT, c)}'}})"
                for i, c in enumerate(slots["certs"])
            )
            return f"MATCH {patterns} RETURN m.name LIMIT {slots['k']}"
        if template_id == "service-and-certification":
            return (
                f"MATCH (m:Manufacturer)-[:provides]->(s:Service {{name: '{lit(_SVC, slots['svc'])}'}}),"
                f" (m)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}})"
                f" RETURN m.name LIMIT {slots['k']}"
            )
        if template_id == "located-service-certification":
            return (
                f"MATCH (m:Manufacturer)-[:located_in]->(l:Location {{name: '{lit(_LOC, slots['loc'])}'}}),"
                f" (m)-[:provides]->(s:Service {{name: '{lit(_SVC, slots['svc'])}'}}),"
                f" (m)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}})"
                f" RETURN m.name LIMIT {slots['k']}"
            )
        if template_id == "per-state-count":
            return (
                f"MATCH (m:Manufacturer)-[:provides]->(s:Service {{name: '{lit(_SVC, slots['svc'])}'}}),"
                f" (m)-[:located_in]->(l:Location)"
                f" RETURN l.name, count(m)"
            )
        if template_id == "negated-certification-count":
            return (
                f"MATCH (m:Manufacturer)-[:located_in]->(l:Location {{name: '{lit(_LOC, slots['loc'])}'}}),"
                f" (m)-[:provides]->(s:Service {{name: '{lit(_SVC, slots['svc'])}'}})"
                f" WHERE NOT EXISTS ((m)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}}))"
                f" RETURN count(m)"
            )
        if template_id == "top-state":
            return (
                f"MATCH (m:Manufacturer)-[:provides]->(s1:Service {{name: '{lit(_SVC, slots['svc1'])}'}}),"
                f" (m)-[:provides]->(s2:Service {{name: '{lit(_SVC, slots['svc2'])}'}}),"
                f" (m)-[:located_in]->(l:Location)"
                f" RETURN l.name, count(m) ORDER BY count(m) DESC LIMIT 1"
            )
        if template_id == "top-k-states":
            return (
                f"MATCH (m:Manufacturer)-[:provides]->(s:Service {{name: '{lit(_SVC, slots['svc'])}'}}),"
                f" (m)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}}),"
                f" (m)-[:located_in]->(l:Location)"
                f" RETURN l.name, count(m) ORDER BY count(m) DESC LIMIT {slots['k']}"
            )
        if template_id == "most-common-service":
            return (
                f"MATCH (m:Manufacturer)-[:located_in]->(l:Location {{name: '{lit(_LOC, slots['loc'])}'}}),"
                f" (m)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}}),"
                f" (m)-[:provides]->(s:Service)"
                f" RETURN s.name, count(m) ORDER BY count(m) DESC LIMIT 1"
            )
        if template_id == "top-services-in-state":
            return (
                f"MATCH (m:Manufacturer)-[:located_in]->(l:Location {{name: '{lit(_LOC, slots['loc'])}'}}),"
                f" (m)-[:provides]->(s:Service)"
                f" RETURN s.name, count(m) ORDER BY count(m) DESC LIMIT {slots['k']}"
            )
        if template_id == "services-under-filters":
            return (
                f"MATCH (m:Manufacturer)-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}}),"
                f" (m)-[:located_in]->(l:Location {{name: '{lit(_LOC, slots['loc'])}'}}),"
                f" (m)-[:provides]->(s:Service)"
                f" RETURN s.name, count(m)"
            )
        if template_id == "same-service-as":
            man = slots["man"]
            return (
                f"MATCH (t:Manufacturer {{name: '{man}'}})-[:provides]->(s:Service)"
                f"<-[:provides]-(m:Manufacturer)"
                f" WHERE m.name <> '{man}'"
                f" RETURN m.name, count(s) ORDER BY count(s) DESC LIMIT {slots['k']}"
            )
        if template_id == "locations-of":
            return (
                f"MATCH (m:Manufacturer {{name: '{slots['man']}'}})-[:located_in]->(l:Location)"
                f" RETURN l.name"
            )
        if template_id == "certification-check":
            return (
                f"MATCH (m:Manufacturer {{name: '{slots['man']}'}})"
                f"-[:certified_with]->(c:Certification {{name: '{lit(_CERT, slots['cert'])}'}})"
                f" RETURN count(m)"
            )
        raise NoTemplateMatch(f"unknown template {template_id!r}")


def translate(
    question: str,
    lexicon: Lexicon,
    port: Optional[LanguageModelPort] = None,
) -> tuple[str, str]:
    """Question -> (MSQL text, provenance). Templates first, then the port.

    Whatever the source, the text must parse; a port result that does not
    parse is rejected."""
    engine = TemplateEngine(lexicon)
    try:
        match = engine.match(question)
        return match.msql, f"template:{match.template_id}"
    except NoTemplateMatch:
        if port is None:
            raise
    text = port.translate(question, SCHEMA_TEXT, FEW_SHOT_EXAMPLES)
    try:
        parse(text)
    except Exception as exc:
        raise PortOutputInvalid(f"external translation does not parse: {exc}") from exc
    model_id = getattr(port, "model_id", "external")
    return text, f"external:{model_id}"


# -- recommendation ----------------------------------------------------------


def recommend(
    manufacturer_id: str,
    k: int,
    table: EmbeddingTable,
    graph: Graph,
    include_self: bool = True,
) -> list[tuple[str, float]]:
    """Top-k manufacturers by cosine similarity to the target's vector.

    Descending similarity, ties broken lexicographically by id; the
    target heads the list at similarity 1.0 unless excluded."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _require_manufacturer(graph, manufacturer_id)
    target = table.vector(manufacturer_id)
    target_norm = float(np.linalg.norm(target))
    if target_norm == 0.0:
        raise MissingEmbedding(f"{manufacturer_id} has a zero embedding vector")
    candidates = [
        i
        for i in table.ids
        if i != manufacturer_id
        and graph.has_node(i)
        and graph.node(i).label is NodeLabel.MANUFACTURER
    ]
    scored: list[tuple[str, float]] = []
    if candidates:
        vectors = np.stack([table.vector(i) for i in candidates])
        norms = np.linalg.norm(vectors, axis=1)
        norms[norms == 0.0] = 1.0
        sims = (vectors @ target) / (norms * target_norm)
        scored = list(zip(candidates, (float(s) for s in sims)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    out = ([(manufacturer_id, 1.0)] if include_self else []) + scored
    return out[:k]


def _require_manufacturer(graph: Graph, manufacturer_id: str) -> None:
    if not graph.has_node(manufacturer_id):
        raise UnknownManufacturer(manufacturer_id)
    if graph.node(manufacturer_id).label is not NodeLabel.MANUFACTURER:
        raise UnknownManufacturer(
            f"{manufacturer_id} is a {graph.node(manufacturer_id).label.value}"
        )


def tag_manufacturer(
    manufacturer_id: str,
    model: Optional[MlpModel],
    table: EmbeddingTable,
    graph: Graph,
    threshold: float = 0.5,
) -> Prediction:
    _require_manufacturer(graph, manufacturer_id)
    if model is None:
        raise ModelUnavailable("no trained model is loaded")
    return predict(model, manufacturer_id, table=table, threshold=threshold)


def evaluate_recommendation(
    manufacturer_id: str,
    ranking: Sequence[tuple[str, float]],
    graph: Graph,
    ns: Sequence[int] = (10, 100, 300),
) -> RecEvalReport:
    """P@N and MRR for one ranking, scored against the service overlap
    oracle. The target itself never counts toward its own evaluation."""
    if not ranking:
        raise EmptyRanking("ranking is empty")
    _require_manufacturer(graph, manufacturer_id)
    target_services = set(graph.out_edges(manufacturer_id, RelationType.PROVIDES))
    evaluated = [
        (mid, tuple(graph.out_edges(mid, RelationType.PROVIDES)))
        for mid, _ in ranking
        if mid != manufacturer_id
    ]
    if not evaluated:
        raise EmptyRanking("ranking holds only the target itself")

    def is_subclass(a: str, b: str) -> bool:
        return graph.is_subclass_of(a, b)

    p_at = {
        n: precision_at_n(target_services, evaluated, is_subclass, n) for n in ns
    }
    flags = [
        any(
            svc in target_services or is_subclass(svc, t)
            for svc in services
            for t in target_services
        )
        for _, services in evaluated
    ]
    rank = mean_reciprocal_rank([flags]).ranks[0]
    query = QueryEval(query_id=manufacturer_id, p_at_n=p_at, rank=rank)
    return RecEvalReport(queries=(query,), ns=tuple(ns))


# -- answer composition --------------------------------------------------------


@dataclass(frozen=True)
class QaContext:
    graph: Graph
    embeddings: dict[str, EmbeddingTable]
    model: Optional[MlpModel] = None
    port: Optional[LanguageModelPort] = None
    default_method: str = "node2vec"
    prebuilt_lexicon: Optional[Lexicon] = None

    def lexicon(self) -> Lexicon:
        if self.prebuilt_lexicon is not None:
            return self.prebuilt_lexicon
        return Lexicon.from_graph(self.graph)


_GUIDANCE = (
    "This question is outside the supported patterns. Supported: listing and "
    "counting manufacturers by service, certification, and location; "
    "manufacturers similar to a given one; capability tagging."
)

_EMPTY_TABLE = ResultTable(columns=(), rows=())


def _summarize(template_id: str, slots: dict, table: ResultTable) -> str:
    rows = table.rows
    if template_id in (
        "certified-list",
        "service-and-certification",
        "located-service-certification",
        "same-service-as",
    ):
        names = [str(r[0]) for r in rows]
        return f"Found {len(names)} manufacturers: " + " ".join(names)
    if template_id == "per-state-count":
        parts = [f"In {r[0]}, there are {r[1]} manufacturers" for r in rows]
        return ". ".join(parts) + ("." if parts else "No matches.")
    if template_id == "negated-certification-count":
        count = rows[0][0] if rows else 0
        return (
            f"There are {count} manufacturers located in {slots['loc']} that "
            f"provide {slots['svc']} but are not certified with {slots['cert']}."
        )
    if template_id == "top-state":
        if not rows:
            return "No state matches."
        return (
            f"{rows[0][0]} has the biggest number of manufacturers which provide "
            f"{slots['svc1']} and {slots['svc2']}, with a total of {rows[0][1]} manufacturers."
        )
    if template_id == "top-k-states":
        names = [str(r[0]) for r in rows]
        return f"The top {len(names)} states are " + ", ".join(names) + "."
    if template_id == "most-common-service":
        if not rows:
            return "No service matches."
        return (
            f"For manufacturers located in {slots['loc']} and certified with "
            f"{slots['cert']}, the service they provide the most is {rows[0][0]}."
        )
    if template_id in ("top-services-in-state", "services-under-filters"):
        parts = [f"{r[0]} - {r[1]} manufacturers" for r in rows]
        return "; ".join(parts) if parts else "No matches."
    if template_id == "locations-of":
        return ", ".join(str(r[0]) for r in rows) if rows else "No locations found."
    if template_id == "certification-check":
        count = rows[0][0] if rows else 0
        return "Yes" if isinstance(count, int) and count > 0 else "No"
    return f"{len(rows)} rows."


def _ranking_table(ranking: Sequence[tuple[str, float]]) -> ResultTable:
    rows = tuple(
        (rank, mid, f"{sim:.6f}")
        for rank, (mid, sim) in enumerate(ranking, start=1)
    )
    return ResultTable(columns=("rank", "manufacturer", "similarity"), rows=rows)


def _prediction_table(prediction: Prediction) -> ResultTable:
    rows = tuple(
        (slot, name, f"{prob:.6f}", bit)
        for slot, (name, prob, bit) in enumerate(
            zip(CATEGORIES, prediction.probabilities, prediction.labels.bits), start=1
        )
    )
    return ResultTable(columns=("slot", "category", "probability", "assigned"), rows=rows)


def answer(question: str, context: QaContext) -> AnswerBundle:
    """Route, execute, and compose an evidence-backed answer."""
    intent = route(question)

    if intent.kind is IntentKind.UNSUPPORTED:
        return AnswerBundle(
            intent=intent,
            summary=_GUIDANCE,
            provenance="router",
            table=_EMPTY_TABLE,
        )

    if intent.kind is IntentKind.GRAPH_QUERY:
        engine = TemplateEngine(context.lexicon())
        template_id, slots = "", {}
        try:
            match = engine.match(question)
            msql = match.msql
            provenance = f"template:{match.template_id}"
            template_id, slots = match.template_id, match.slots
        except NoTemplateMatch:
            if context.port is None:
                return AnswerBundle(
                    intent=Intent(IntentKind.UNSUPPORTED),
                    summary=_GUIDANCE,
                    provenance="router",
                    table=_EMPTY_TABLE,
                )
            try:
                msql = context.port.translate(question, SCHEMA_TEXT, FEW_SHOT_EXAMPLES)
                parse(msql)
            except Exception:
                return AnswerBundle(
                    intent=Intent(IntentKind.UNSUPPORTED),
                    summary=_GUIDANCE,
                    provenance="router",
                    table=_EMPTY_TABLE,
                )
            provenance = f"external:{getattr(context.port, 'model_id', 'external')}"
        try:
            table = run(msql, context.graph)
        except Exception as exc:
            raise StageFailure("execute", exc) from exc
        return AnswerBundle(
            intent=intent,
            summary=_summarize(template_id, slots, table),
            provenance=provenance,
            table=table,
            msql=msql,
        )

    if intent.kind is IntentKind.SIMILARITY_RECOMMENDATION:
        method = context.default_method
        table = context.embeddings.get(method)
        if table is None:
            raise StageFailure(
                "recommend", MissingEmbedding(f"no {method} embeddings loaded")
            )
        k = intent.slots["k"]
        try:
            ranking = recommend(intent.slots["manufacturer"], k, table, context.graph)
        except Exception as exc:
            raise StageFailure("recommend", exc) from exc
        names = [mid for mid, _ in ranking]
        summary = (
            f"Top {len(names)} manufacturers similar to {intent.slots['manufacturer']}"
            f" by {method} embedding similarity: " + " ".join(names)
        )
        return AnswerBundle(
            intent=intent,
            summary=summary,
            provenance=f"recommender:{method}",
            table=_ranking_table(ranking),
            method=method,
            k=k,
            ranking=tuple(ranking),
        )

    method = context.default_method
    table = context.embeddings.get(method)
    if table is None:
        raise StageFailure("tag", MissingEmbedding(f"no {method} embeddings loaded"))
    try:
        prediction = tag_manufacturer(
            intent.slots["manufacturer"], context.model, table, context.graph
        )
    except Exception as exc:
        raise StageFailure("tag", exc) from exc
    assigned = [
        f"{slot}-{name}"
        for slot, (name, bit) in enumerate(
            zip(CATEGORIES, prediction.labels.bits), start=1
        )
        if bit
    ]
    summary = f"{intent.slots['manufacturer']}: " + ", ".join(assigned)
    return AnswerBundle(
        intent=intent,
        summary=summary,
        provenance="classifier:mlp",
        table=_prediction_table(prediction),
        method=method,
        prediction=prediction,
    )
