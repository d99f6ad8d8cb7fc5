"""HTTP service over an immutable graph snapshot.

Every request reads one snapshot reference and serves entirely from it,
so reloads can swap the reference at any moment without a reader seeing
a mixture of old and new state.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Optional
from urllib.parse import parse_qs, unquote, urlparse

from .classifier import CATEGORIES, MlpModel, predict
from .embedding import EmbeddingTable
from .errors import (
    MissingEmbedding,
    ModelUnavailable,
    MskgError,
    StageFailure,
    UnknownManufacturer,
    UnknownNode,
    ValidationFailed,
)
from .extraction.lexicon import Lexicon
from .graph import Graph, NodeLabel, RelationType, canonical_manufacturer_id
from .msql import run
from .qa import IntentKind, LanguageModelPort, QaContext, answer, recommend

log = logging.getLogger(__name__)

_METHODS = ("node2vec", "graphsage")


@dataclass(frozen=True)
class ServeConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    default_method: str = "node2vec"


@dataclass(frozen=True)
class Snapshot:
    """Immutable bundle the server answers from: graph, embeddings,
    optional classifier, optional translation port, build metadata."""

    graph: Graph
    embeddings: dict[str, EmbeddingTable]
    model: Optional[MlpModel] = None
    port: Optional[LanguageModelPort] = None
    metadata: dict = field(default_factory=dict)
    lexicon: Optional[Lexicon] = None
    manufacturer_index: dict = field(default_factory=dict)

    def resolve_manufacturer(self, raw: str) -> Optional[str]:
        """Node id for a raw manufacturer reference, folding scheme,
        www. prefix, and case; None when nothing matches."""
        key = canonical_manufacturer_id(raw)
        if self.manufacturer_index:
            return self.manufacturer_index.get(key)
        if self.graph.has_node(key) and self.graph.node(key).label is NodeLabel.MANUFACTURER:
            return key
        return None

    def context(self, default_method: str = "node2vec") -> QaContext:
        return QaContext(
            graph=self.graph,
            embeddings=self.embeddings,
            model=self.model,
            port=self.port,
            default_method=default_method,
            prebuilt_lexicon=self.lexicon,
        )


def validate_snapshot(snapshot: Snapshot) -> None:
    """Reject bundles the server could not answer from coherently."""
    if not isinstance(snapshot, Snapshot):
        raise ValidationFailed(f"expected a Snapshot, got {type(snapshot).__name__}")
    if not snapshot.graph.frozen:
        raise ValidationFailed("snapshot graph must be frozen")
    for method, table in snapshot.embeddings.items():
        if method not in _METHODS:
            raise ValidationFailed(f"unknown embedding method {method!r}")
        if table.method != method:
            raise ValidationFailed(
                f"table under key {method!r} reports method {table.method!r}"
            )
    if snapshot.model is not None and snapshot.embeddings:
        dims = {t.dim for t in snapshot.embeddings.values()}
        if snapshot.model.w1.shape[0] not in dims:
            raise ValidationFailed(
                f"model expects input dim {snapshot.model.w1.shape[0]}, "
                f"tables provide {sorted(dims)}"
            )


def make_snapshot(
    graph: Graph,
    embeddings: dict[str, EmbeddingTable],
    model: Optional[MlpModel] = None,
    port: Optional[LanguageModelPort] = None,
    metadata: Optional[dict] = None,
) -> Snapshot:
    """Validate and assemble a snapshot, prebuilding the QA lexicon so
    request handling never pays the construction cost."""
    meta = dict(metadata or {})
    meta.setdefault("created", datetime.now(timezone.utc).isoformat())
    meta.setdefault("methods", sorted(embeddings))
    meta.setdefault("model_loaded", model is not None)
    meta.setdefault("entities", graph.node_count())
    meta.setdefault("relationships", graph.edge_count())
    index = {
        canonical_manufacturer_id(mid): mid
        for mid in graph.node_ids(NodeLabel.MANUFACTURER)
    }
    snapshot = Snapshot(
        graph=graph,
        embeddings=dict(embeddings),
        model=model,
        port=port,
        metadata=meta,
        lexicon=Lexicon.from_graph(graph),
        manufacturer_index=index,
    )
    validate_snapshot(snapshot)
    return snapshot


class MskgServer:
    """Threaded HTTP server; `reload` is the only writer and swaps the
    snapshot reference atomically."""

    def __init__(self, config: ServeConfig = ServeConfig(), snapshot: Optional[Snapshot] = None):
        if snapshot is not None:
            validate_snapshot(snapshot)
        self.config = config
        self._snapshot = snapshot
        self._httpd: Optional[_Httpd] = None
        self._thread: Optional[threading.Thread] = None

    @property
    def snapshot(self) -> Optional[Snapshot]:
        return self._snapshot

    def reload(self, snapshot: Snapshot) -> None:
        validate_snapshot(snapshot)
        self._snapshot = snapshot

    @property
    def address(self) -> tuple[str, int]:
        if self._httpd is None:
            return (self.config.host, self.config.port)
        host, port = self._httpd.server_address[:2]
        return (str(host), int(port))

    def start(self) -> tuple[str, int]:
        """Bind and serve on a daemon thread; returns the bound address."""
        if self._httpd is not None:
            raise RuntimeError("server already started")
        self._httpd = _Httpd((self.config.host, self.config.port), self)
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="mskg-server", daemon=True
        )
        self._thread.start()
        return self.address

    def serve_forever(self) -> None:
        """Bind and serve on the calling thread until interrupted."""
        if self._httpd is not None:
            raise RuntimeError("server already started")
        self._httpd = _Httpd((self.config.host, self.config.port), self)
        log.info("serving on %s:%d", *self.address)
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()
            self._httpd = None

    def stop(self) -> None:
        if self._httpd is None:
            return
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()
        self._httpd = None
        self._thread = None

    def __enter__(self) -> "MskgServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


class _Httpd(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    # default backlog of 5 drops connections under concurrent load
    request_queue_size = 128

    def __init__(self, address: tuple[str, int], app: MskgServer):
        self.app = app
        super().__init__(address, _Handler)


def _status_for(exc: MskgError) -> int:
    if isinstance(exc, StageFailure):
        return _status_for(exc.cause) if isinstance(exc.cause, MskgError) else 400
    if isinstance(exc, (UnknownManufacturer, UnknownNode, MissingEmbedding)):
        return 404
    if isinstance(exc, (ModelUnavailable, ValidationFailed)):
        return 503
    return 400


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _Httpd

    # -- plumbing --------------------------------------------------------

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: dict) -> None:
        payload = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _error(self, status: int, message: str) -> None:
        self._send(status, {"error": message})

    def _read_json(self) -> Optional[dict]:
        length = self.headers.get("Content-Length")
        if length is None:
            self._error(400, "missing request body")
            return None
        try:
            raw = self.rfile.read(int(length))
            body = json.loads(raw)
        except (ValueError, json.JSONDecodeError):
            self._error(400, "request body is not valid JSON")
            return None
        if not isinstance(body, dict):
            self._error(400, "request body must be a JSON object")
            return None
        return body

    def _snapshot(self) -> Optional[Snapshot]:
        snap = self.server.app.snapshot
        if snap is None:
            self._error(503, "no snapshot loaded")
        return snap

    # -- routing ---------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        parts = [unquote(p) for p in url.path.strip("/").split("/") if p]
        try:
            if parts == ["health"]:
                self._get_health()
            elif parts == ["graph", "stats"]:
                self._get_stats()
            elif len(parts) == 2 and parts[0] == "manufacturers":
                self._get_manufacturer(parts[1])
            elif len(parts) == 2 and parts[0] == "labels":
                self._get_labels(parts[1])
            elif len(parts) == 2 and parts[0] == "recommend":
                self._get_recommend(parts[1], parse_qs(url.query))
            else:
                self._error(404, f"unknown route {url.path}")
        except MskgError as exc:
            self._error(_status_for(exc), str(exc))

    def do_POST(self) -> None:
        url = urlparse(self.path)
        try:
            if url.path == "/qa":
                self._post_qa()
            elif url.path == "/query":
                self._post_query()
            else:
                self._error(404, f"unknown route {url.path}")
        except MskgError as exc:
            self._error(_status_for(exc), str(exc))

    # -- GET endpoints -----------------------------------------------------

    def _get_health(self) -> None:
        snap = self.server.app.snapshot
        if snap is None:
            self._send(503, {"status": "no-snapshot", "snapshot": None})
            return
        self._send(200, {"status": "ok", "snapshot": snap.metadata})

    def _get_stats(self) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        graph = snap.graph
        self._send(
            200,
            {
                "entities": {lb.value: graph.node_count(lb) for lb in NodeLabel},
                "relationships": {r.value: graph.edge_count(r) for r in RelationType},
                "total_entities": graph.node_count(),
                "total_relationships": graph.edge_count(),
                "dataset_hash": snap.metadata.get("dataset_hash"),
            },
        )

    def _get_manufacturer(self, raw_id: str) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        graph = snap.graph
        mid = snap.resolve_manufacturer(raw_id)
        if mid is None:
            self._error(404, f"unknown manufacturer {raw_id!r}")
            return

        def listing(rel: RelationType) -> list[dict]:
            rows = [
                {"id": dst, "name": graph.node(dst).name, "weight": weight}
                for dst, weight in graph.out_edges(mid, rel).items()
            ]
            return sorted(rows, key=lambda r: r["id"])

        self._send(
            200,
            {
                "id": mid,
                "name": graph.node(mid).name,
                "services": listing(RelationType.PROVIDES),
                "certifications": listing(RelationType.CERTIFIED_WITH),
                "locations": listing(RelationType.LOCATED_IN),
            },
        )

    def _get_labels(self, raw_id: str) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        if snap.model is None:
            self._error(503, "no trained model loaded")
            return
        method = self.server.app.config.default_method
        table = snap.embeddings.get(method)
        if table is None:
            self._error(503, f"no {method} embeddings loaded")
            return
        mid = snap.resolve_manufacturer(raw_id)
        if mid is None:
            self._error(404, f"unknown manufacturer {raw_id!r}")
            return
        prediction = predict(snap.model, mid, table=table)
        self._send(
            200,
            {
                "id": mid,
                "labels": list(prediction.labels.names()),
                "probabilities": list(prediction.probabilities),
                "categories": list(CATEGORIES),
            },
        )

    def _get_recommend(self, raw_id: str, query: dict[str, list[str]]) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        try:
            k = int(query.get("k", ["10"])[0])
        except ValueError:
            self._error(400, "k must be an integer")
            return
        if k < 1:
            self._error(400, f"k must be >= 1, got {k}")
            return
        method = query.get("method", [self.server.app.config.default_method])[0]
        if method not in _METHODS:
            self._error(400, f"method must be one of {_METHODS}, got {method!r}")
            return
        include_raw = query.get("include_self", ["true"])[0].lower()
        if include_raw not in ("true", "false"):
            self._error(400, "include_self must be true or false")
            return
        table = snap.embeddings.get(method)
        if table is None:
            self._error(400, f"no {method} embeddings loaded")
            return
        mid = snap.resolve_manufacturer(raw_id)
        if mid is None:
            self._error(404, f"unknown manufacturer {raw_id!r}")
            return
        ranking = recommend(
            mid, k, table, snap.graph, include_self=include_raw == "true"
        )
        self._send(
            200,
            {
                "id": mid,
                "method": method,
                "k": k,
                "ranking": [
                    {"id": rid, "similarity": score} for rid, score in ranking
                ],
            },
        )

    # -- POST endpoints ----------------------------------------------------

    def _post_qa(self) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        body = self._read_json()
        if body is None:
            return
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            self._error(400, "body must carry a non-empty 'question' string")
            return
        bundle = answer(question, snap.context(self.server.app.config.default_method))
        payload: dict[str, Any] = {
            "intent": bundle.intent.kind.value,
            "summary": bundle.summary,
            "provenance": bundle.provenance,
            "columns": list(bundle.table.columns),
            "rows": [list(row) for row in bundle.table.rows],
        }
        if bundle.msql is not None:
            payload["query"] = bundle.msql
        if bundle.method is not None:
            payload["method"] = bundle.method
        if bundle.k is not None:
            payload["k"] = bundle.k
        if bundle.ranking is not None:
            payload["ranking"] = [
                {"id": rid, "similarity": score} for rid, score in bundle.ranking
            ]
        if bundle.prediction is not None:
            payload["labels"] = list(bundle.prediction.labels.names())
            payload["probabilities"] = list(bundle.prediction.probabilities)
        status = 422 if bundle.intent.kind is IntentKind.UNSUPPORTED else 200
        self._send(status, payload)

    def _post_query(self) -> None:
        snap = self._snapshot()
        if snap is None:
            return
        body = self._read_json()
        if body is None:
            return
        msql = body.get("msql")
        if not isinstance(msql, str) or not msql.strip():
            self._error(400, "body must carry a non-empty 'msql' string")
            return
        table = run(msql, snap.graph)
        self._send(
            200,
            {
                "columns": list(table.columns),
                "rows": [list(row) for row in table.rows],
            },
        )
