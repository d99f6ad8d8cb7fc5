"""Command line entry point driving the pipeline end to end.

Settings resolve in three layers: environment variables (MSKG_SECTION_KEY)
override flags, flags override the config file. Heavy modules are imported
inside the subcommands so --threads can cap BLAS pools before numpy loads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable, Optional

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _truthy(raw: str) -> bool:
    if raw.lower() in ("1", "true", "yes", "on"):
        return True
    if raw.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _load_file_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


class Settings:
    """Layered lookup: environment > flags > config file > default."""

    def __init__(self, args: argparse.Namespace, file_config: dict):
        self.args = args
        self.file = file_config

    def get(self, section: str, key: str, default: Any = None, cast: Callable = str):
        env_name = f"MSKG_{section.upper()}_{key.upper()}"
        raw = os.environ.get(env_name)
        if raw is not None:
            try:
                return cast(raw)
            except ValueError as exc:
                raise SystemExit(f"bad value for {env_name}: {exc}")
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        value = self.file.get(section, {}).get(key)
        if value is not None:
            return cast(value) if isinstance(value, str) and cast is not str else value
        return default


# -- shared loaders ------------------------------------------------------------


def _graph_from(settings: Settings):
    """(graph, source description). No path means the bundled dataset."""
    path = settings.get("paths", "dataset")
    if path:
        from .dataset import load_dataset

        return load_dataset(path), path
    from .synthetic import build_graph

    return build_graph(), "bundled"


def _embedding_config(settings: Settings):
    from .embedding import EmbeddingConfig

    base = EmbeddingConfig()
    return EmbeddingConfig(
        dim=settings.get("embedding", "dim", base.dim, int),
        p=settings.get("embedding", "p", base.p, float),
        q=settings.get("embedding", "q", base.q, float),
        walk_length=settings.get("embedding", "walk_length", base.walk_length, int),
        walks_per_node=settings.get("embedding", "walks_per_node", base.walks_per_node, int),
        window=settings.get("embedding", "window", base.window, int),
        negatives=settings.get("embedding", "negatives", base.negatives, int),
        epochs=settings.get("embedding", "epochs", base.epochs, int),
        learning_rate=settings.get("embedding", "learning_rate", base.learning_rate, float),
        seed=settings.get("embedding", "seed", base.seed, int),
    )


def _train_config(settings: Settings):
    from .classifier import TrainConfig

    base = TrainConfig()
    return TrainConfig(
        learning_rate=settings.get("train", "learning_rate", base.learning_rate, float),
        epochs=settings.get("train", "epochs", base.epochs, int),
        batch=settings.get("train", "batch", base.batch, int),
        threshold=settings.get("train", "threshold", base.threshold, float),
        seed=settings.get("train", "seed", base.seed, int),
    )


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _table_tsv(columns, rows) -> str:
    lines = ["\t".join(columns)]
    for row in rows:
        lines.append("\t".join("" if v is None else str(v) for v in row))
    return "\n".join(lines)


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(settings: Settings) -> int:
    from .dataset import (
        Manifest,
        PUBLISHED_MANIFEST,
        dataset_sha256,
        load_dataset,
        validate_manifest,
    )

    path = settings.get("paths", "dataset")
    if not path:
        print("error: ingest needs --dataset", file=sys.stderr)
        return 2
    manifest_path = settings.get("paths", "manifest")
    manifest = Manifest.from_toml(manifest_path) if manifest_path else PUBLISHED_MANIFEST
    graph = load_dataset(path)
    report = validate_manifest(graph, manifest)
    print(f"dataset: {path}")
    print(f"sha256: {dataset_sha256(path)}")
    print(report.to_text())
    if settings.args.out:
        rows = [(r.kind, r.name, r.expected, r.actual, r.delta) for r in report.rows]
        _emit(
            _table_tsv(("kind", "name", "expected", "actual", "delta"), rows),
            settings.args.out,
        )
    if not report.zero_delta:
        print("error: counts do not match the manifest", file=sys.stderr)
        return 1
    print("zero deltas: dataset matches the manifest")
    return 0


def cmd_extract(settings: Settings) -> int:
    from . import entities
    from .extraction import (
        ExtractionConfig,
        Lexicon,
        LexicalClassifier,
        extract_document,
        fixture_corpus_dir,
        load_fixture_corpus,
        relations_to_records,
    )
    from .graph import NodeLabel

    corpus = settings.get("paths", "corpus") or fixture_corpus_dir()
    docs, _ = load_fixture_corpus(corpus)
    lexicon = Lexicon.from_terms(
        {
            NodeLabel.SERVICE: entities.SERVICES,
            NodeLabel.CERTIFICATION: entities.CERTIFICATIONS,
            NodeLabel.LOCATION: entities.LOCATIONS,
        }
    )
    config = ExtractionConfig()
    relations = []
    for man, text in sorted(docs.items()):
        relations.extend(extract_document(man, text, lexicon, LexicalClassifier(), config))
    records = relations_to_records(relations)
    payload = "\n".join(json.dumps(r, sort_keys=True) for r in records)
    _emit(payload, settings.args.out)
    print(
        f"extracted {len(relations)} relations from {len(docs)} documents",
        file=sys.stderr,
    )
    return 0


def cmd_embed(settings: Settings) -> int:
    from .embedding import build_projection, generate_walks, train_skipgram, write_table
    from .embedding.sage import train_graphsage

    method = settings.get("embedding", "method", "node2vec")
    if method not in ("node2vec", "graphsage"):
        print(f"error: unknown embedding method {method!r}", file=sys.stderr)
        return 2
    graph, source = _graph_from(settings)
    config = _embedding_config(settings)
    projection = build_projection(graph)
    if method == "node2vec":
        result = train_skipgram(generate_walks(projection, config), config)
    else:
        result = train_graphsage(projection, config)
    out = settings.args.out or f"embeddings-{method}.tsv"
    write_table(result.table, out)
    losses = ", ".join(f"{loss:.4f}" for loss in result.epoch_losses)
    print(f"dataset: {source}")
    print(f"method: {method}  nodes: {len(result.table)}  dim: {result.table.dim}")
    print(f"epoch losses: [{losses}]")
    print(f"wrote {out}")
    return 0


def cmd_train(settings: Settings) -> int:
    from .classifier import derive_labels, save_model, train
    from .embedding import read_table
    from .graph import NodeLabel

    embeddings_path = settings.get("paths", "embeddings")
    if not embeddings_path:
        print("error: train needs --embeddings", file=sys.stderr)
        return 2
    graph, source = _graph_from(settings)
    table = read_table(embeddings_path)
    labels = {
        mid: derive_labels(graph, mid)
        for mid in sorted(graph.node_ids(NodeLabel.MANUFACTURER))
        if mid in table
    }
    report = train(table, labels, _train_config(settings))
    out = settings.args.out or "model.npz"
    save_model(report.model, out)
    print(f"dataset: {source}  labeled: {len(labels)}")
    print(f"train:      {report.train.to_text()}")
    print(f"validation: {report.validation.to_text()}")
    print(f"test:       {report.test.to_text()}")
    print(f"wrote {out}")
    return 0


def cmd_query(settings: Settings) -> int:
    from .msql import run

    graph, _ = _graph_from(settings)
    table = run(settings.args.msql, graph)
    _emit(_table_tsv(table.columns, table.rows), settings.args.out)
    return 0


def _qa_context(settings: Settings):
    from .embedding import read_table
    from .qa import HttpLanguageModelPort, QaContext

    graph, _ = _graph_from(settings)
    embeddings = {}
    for spec in settings.args.embeddings or []:
        if "=" not in spec:
            raise SystemExit(f"--embeddings takes method=path, got {spec!r}")
        method, path = spec.split("=", 1)
        embeddings[method] = read_table(path)
    model = None
    model_path = settings.get("paths", "model")
    if model_path:
        from .classifier import load_model

        model = load_model(model_path)
    port = None
    port_url = settings.get("port", "url")
    if port_url:
        port = HttpLanguageModelPort(
            port_url, timeout=settings.get("port", "timeout", 10.0, float)
        )
    return QaContext(
        graph=graph,
        embeddings=embeddings,
        model=model,
        port=port,
        default_method=settings.get("serve", "method", "node2vec"),
    )


def _print_bundle(bundle) -> None:
    print(bundle.summary)
    if bundle.msql:
        print(f"query: {bundle.msql}")
    if bundle.table.columns:
        print(_table_tsv(bundle.table.columns, bundle.table.rows))
    print(f"[{bundle.provenance}]")


def cmd_qa(settings: Settings) -> int:
    from .qa import answer

    context = _qa_context(settings)
    question = settings.args.question
    if question:
        bundle = answer(question, context)
        if settings.args.out:
            payload = {
                "intent": bundle.intent.kind.value,
                "summary": bundle.summary,
                "provenance": bundle.provenance,
                "query": bundle.msql,
                "columns": list(bundle.table.columns),
                "rows": [list(r) for r in bundle.table.rows],
            }
            _emit(json.dumps(payload, indent=2), settings.args.out)
        _print_bundle(bundle)
        return 0
    print("interactive mode; empty line or EOF exits", file=sys.stderr)
    while True:
        try:
            line = input("qa> ")
        except EOFError:
            break
        if not line.strip():
            break
        _print_bundle(answer(line, context))
    return 0


def cmd_recommend(settings: Settings) -> int:
    from .embedding import read_table
    from .qa import recommend

    embeddings_path = settings.get("paths", "embeddings")
    if not embeddings_path:
        print("error: recommend needs --embeddings", file=sys.stderr)
        return 2
    graph, _ = _graph_from(settings)
    table = read_table(embeddings_path)
    ranking = recommend(
        settings.args.manufacturer,
        settings.get("recommend", "k", 10, int),
        table,
        graph,
        include_self=settings.get("recommend", "include_self", True, _truthy),
    )
    rows = [(i + 1, mid, f"{score:.6f}") for i, (mid, score) in enumerate(ranking)]
    _emit(_table_tsv(("rank", "manufacturer", "similarity"), rows), settings.args.out)
    return 0


# -- evaluate ------------------------------------------------------------------


def _evaluate_extraction(settings: Settings, out_dir: str) -> int:
    import numpy as np

    from . import entities
    from .extraction import (
        ExtractionConfig,
        Lexicon,
        LexicalClassifier,
        evaluate_extraction,
        extract_document,
        fixture_corpus_dir,
        load_fixture_corpus,
    )
    from .figures import plot_cutoff_sweep, plot_roc_pr
    from .graph import NodeLabel

    corpus = settings.get("paths", "corpus") or fixture_corpus_dir()
    docs, gold = load_fixture_corpus(corpus)
    lexicon = Lexicon.from_terms(
        {
            NodeLabel.SERVICE: entities.SERVICES,
            NodeLabel.CERTIFICATION: entities.CERTIFICATIONS,
            NodeLabel.LOCATION: entities.LOCATIONS,
        }
    )
    scored = []
    for man, text in sorted(docs.items()):
        scored.extend(
            extract_document(man, text, lexicon, LexicalClassifier(), apply_cutoff=False)
        )
    report = evaluate_extraction(scored, gold)

    def fmt_rate(rate):
        return "" if rate is None else f"{rate:.6f}"

    rows = []
    curves = {}
    for ev in (report.overall, *report.per_type.values()):
        name = ev.entity_type.value if ev.entity_type else "overall"
        c, r = ev.counts, ev.rates
        rows.append(
            (name, c.tp, c.fp, c.tn, c.fn,
             fmt_rate(r.precision), fmt_rate(r.recall), fmt_rate(r.f1),
             "" if ev.curves is None else f"{ev.curves.auc_roc:.6f}",
             "" if ev.curves is None else f"{ev.curves.auc_pr:.6f}")
        )
        if ev.curves is not None:
            curves[name] = ev.curves

    sweep = {}
    grid = [round(c, 2) for c in np.arange(0.05, 1.0, 0.05)]
    for cutoff in grid:
        config = ExtractionConfig(
            cutoffs={t: cutoff for t in ExtractionConfig().cutoffs}
        )
        swept = evaluate_extraction(scored, gold, config)
        for ev in (swept.overall, *swept.per_type.values()):
            name = ev.entity_type.value if ev.entity_type else "overall"
            sweep.setdefault(name, []).append(
                (cutoff, ev.rates.precision, ev.rates.recall)
            )

    tsv = _table_tsv(
        ("entity_type", "tp", "fp", "tn", "fn", "precision", "recall", "f1",
         "auc_roc", "auc_pr"),
        rows,
    )
    report_path = os.path.join(out_dir, "extraction_report.tsv")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(tsv + "\n")
    sweep_rows = [
        (name, cutoff, fmt_rate(p), fmt_rate(r))
        for name, entries in sorted(sweep.items())
        for cutoff, p, r in entries
    ]
    sweep_path = os.path.join(out_dir, "extraction_sweep.tsv")
    with open(sweep_path, "w", encoding="utf-8") as fh:
        fh.write(_table_tsv(("entity_type", "cutoff", "precision", "recall"), sweep_rows) + "\n")
    figures = [
        plot_roc_pr(curves, os.path.join(out_dir, "extraction_curves.png")),
        plot_cutoff_sweep(sweep, os.path.join(out_dir, "extraction_sweep.png")),
    ]
    print(report.to_text())
    print(f"wrote {report_path}, {sweep_path}, {', '.join(figures)}")
    return 0


def _evaluate_recommendation(settings: Settings, out_dir: str) -> int:
    import numpy as np

    from .embedding import read_table
    from .figures import plot_precision_bars
    from .graph import NodeLabel, RelationType
    from .metrics import RecEvalReport
    from .qa import evaluate_recommendation, recommend

    embeddings_path = settings.get("paths", "embeddings")
    if not embeddings_path:
        print("error: evaluate recommendation needs --embeddings", file=sys.stderr)
        return 2
    graph, _ = _graph_from(settings)
    table = read_table(embeddings_path)
    n_queries = settings.get("evaluate", "queries", 20, int)
    max_services = settings.get("evaluate", "max_services", 3, int)
    seed = settings.get("evaluate", "seed", 0, int)
    ns = (10, 100, 300)

    eligible = [
        m
        for m in sorted(graph.node_ids(NodeLabel.MANUFACTURER))
        if len(graph.out_edges(m, RelationType.PROVIDES)) <= max_services and m in table
    ]
    if len(eligible) < n_queries:
        print(
            f"error: only {len(eligible)} manufacturers have <= {max_services} services",
            file=sys.stderr,
        )
        return 1
    rng = np.random.default_rng(seed)
    picks = sorted(rng.choice(len(eligible), size=n_queries, replace=False))
    queries = []
    for idx in picks:
        target = eligible[idx]
        ranking = recommend(target, max(ns), table, graph, include_self=False)
        queries.extend(evaluate_recommendation(target, ranking, graph, ns=ns).queries)
    report = RecEvalReport(queries=tuple(queries), ns=ns)

    rows = [
        (q.query_id, "" if q.rank is None else q.rank,
         *(f"{q.p_at_n[n].value:.6f}" for n in ns))
        for q in report.queries
    ]
    rows.append(("mean", f"{report.mrr:.6f}", *(f"{report.mean_p_at(n):.6f}" for n in ns)))
    report_path = os.path.join(out_dir, "recommendation_report.tsv")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(
            _table_tsv(
                ("query", "first_relevant_rank", *(f"p_at_{n}" for n in ns)), rows
            )
            + "\n"
        )
    figure = plot_precision_bars(
        {n: report.mean_p_at(n) for n in ns},
        report.mrr,
        os.path.join(out_dir, "recommendation_precision.png"),
    )
    for n in ns:
        print(f"mean P@{n}: {report.mean_p_at(n):.6f}")
    print(f"MRR: {report.mrr:.6f}")
    print(f"wrote {report_path}, {figure}")
    return 0


def _evaluate_classifier(settings: Settings, out_dir: str) -> int:
    from .classifier import derive_labels, train
    from .embedding import read_table
    from .figures import plot_loss_curve
    from .graph import NodeLabel

    embeddings_path = settings.get("paths", "embeddings")
    if not embeddings_path:
        print("error: evaluate classifier needs --embeddings", file=sys.stderr)
        return 2
    graph, _ = _graph_from(settings)
    table = read_table(embeddings_path)
    labels = {
        mid: derive_labels(graph, mid)
        for mid in sorted(graph.node_ids(NodeLabel.MANUFACTURER))
        if mid in table
    }
    report = train(table, labels, _train_config(settings))
    rows = []
    for name, split in (
        ("train", report.train),
        ("validation", report.validation),
        ("test", report.test),
    ):
        acc = "" if split.subset_accuracy is None else f"{split.subset_accuracy:.6f}"
        m = split.micro
        rows.append(
            (name, split.size, acc, f"{m.accuracy:.6f}", f"{m.precision:.6f}",
             f"{m.recall:.6f}", f"{m.f1:.6f}")
        )
    report_path = os.path.join(out_dir, "classifier_report.tsv")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(
            _table_tsv(
                ("split", "size", "subset_accuracy", "micro_accuracy",
                 "micro_precision", "micro_recall", "micro_f1"),
                rows,
            )
            + "\n"
        )
    figure = plot_loss_curve(
        report.epoch_losses,
        os.path.join(out_dir, "classifier_loss.png"),
        title="classifier training loss",
    )
    print(f"test: {report.test.to_text()}")
    print(f"wrote {report_path}, {figure}")
    return 0


def cmd_evaluate(settings: Settings) -> int:
    out_dir = settings.get("paths", "out_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    mode = settings.args.what
    if mode == "extraction":
        return _evaluate_extraction(settings, out_dir)
    if mode == "recommendation":
        return _evaluate_recommendation(settings, out_dir)
    return _evaluate_classifier(settings, out_dir)


def cmd_serve(settings: Settings) -> int:
    from .embedding import read_table
    from .qa import HttpLanguageModelPort
    from .server import MskgServer, ServeConfig, make_snapshot

    graph, source = _graph_from(settings)
    embeddings = {}
    for spec in settings.args.embeddings or []:
        if "=" not in spec:
            print(f"error: --embeddings takes method=path, got {spec!r}", file=sys.stderr)
            return 2
        method, path = spec.split("=", 1)
        embeddings[method] = read_table(path)
    model = None
    model_path = settings.get("paths", "model")
    if model_path:
        from .classifier import load_model

        model = load_model(model_path)
    port = None
    port_url = settings.get("port", "url")
    if port_url:
        port = HttpLanguageModelPort(
            port_url, timeout=settings.get("port", "timeout", 10.0, float)
        )
    metadata = {"dataset": source}
    dataset_path = settings.get("paths", "dataset")
    if dataset_path:
        from .dataset import dataset_sha256

        metadata["dataset_hash"] = dataset_sha256(dataset_path)
    snapshot = make_snapshot(graph, embeddings, model=model, port=port, metadata=metadata)
    config = ServeConfig(
        host=settings.get("serve", "host", "127.0.0.1"),
        port=settings.get("serve", "port", 8080, int),
        default_method=settings.get("serve", "method", "node2vec"),
    )
    server = MskgServer(config, snapshot)
    host, port = server.start()
    print(f"serving {source} on http://{host}:{port}", flush=True)
    try:
        import threading

        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_export(settings: Settings) -> int:
    what = settings.args.what
    if what == "coords":
        import numpy as np

        from .embedding import EmbeddingTable, read_table, reduce_tsne

        embeddings_path = settings.get("paths", "embeddings")
        if not embeddings_path:
            print("error: export coords needs --embeddings", file=sys.stderr)
            return 2
        table = read_table(embeddings_path)
        seed = settings.get("tsne", "seed", 0, int)
        sample = settings.get("tsne", "sample", None, int)
        if sample is not None and sample < len(table):
            rng = np.random.default_rng(seed)
            keep = sorted(rng.choice(len(table), size=sample, replace=False))
            table = EmbeddingTable(
                method=table.method,
                ids=tuple(table.ids[i] for i in keep),
                vectors=table.vectors[keep],
            )
        coords = reduce_tsne(
            table,
            perplexity=settings.get("tsne", "perplexity", 30.0, float),
            iterations=settings.get("tsne", "iterations", 500, int),
            seed=seed,
        )
        rows = [(i, f"{x:.6f}", f"{y:.6f}") for i, (x, y) in sorted(coords.items())]
        _emit(_table_tsv(("id", "x", "y"), rows), settings.args.out)
        return 0

    from .dataset import export_graph

    graph, _ = _graph_from(settings)
    payload = export_graph(graph, what)
    if settings.args.out:
        with open(settings.args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from . import __version__

    parser = argparse.ArgumentParser(
        prog="mskg",
        description="Manufacturing service knowledge graph toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"mskg {__version__}")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--threads", type=int, help="cap BLAS worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--dataset", help="dataset records path (default: bundled)")
        if out:
            p.add_argument("--out", help="write machine-readable output here")

    p = sub.add_parser("ingest", help="load a dataset and validate its counts")
    p.add_argument("--manifest", help="expected counts (TOML)")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="extract relations from a document corpus")
    p.add_argument("--corpus", help="directory of <id>.txt documents")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("embed", help="train node embeddings")
    p.add_argument("--method", choices=("node2vec", "graphsage"))
    for name, typ in (
        ("--dim", int), ("--p", float), ("--q", float), ("--walk-length", int),
        ("--walks-per-node", int), ("--window", int), ("--negatives", int),
        ("--epochs", int), ("--learning-rate", float), ("--seed", int),
    ):
        p.add_argument(name, type=typ)
    common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train the capability classifier")
    p.add_argument("--embeddings", help="embedding table path")
    for name, typ in (
        ("--epochs", int), ("--batch", int), ("--learning-rate", float),
        ("--threshold", float), ("--seed", int),
    ):
        p.add_argument(name, type=typ)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("query", help="run one MSQL query")
    p.add_argument("msql", help="query text")
    common(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("qa", help="answer a question (or start a REPL)")
    p.add_argument("question", nargs="?", help="one-shot question")
    p.add_argument("--embeddings", action="append", help="method=path (repeatable)")
    p.add_argument("--model", help="trained model path")
    p.add_argument("--url", help="external translation endpoint")
    p.add_argument("--timeout", type=float, help="translation endpoint timeout")
    p.add_argument("--method", help="default similarity method")
    common(p)
    p.set_defaults(func=cmd_qa)

    p = sub.add_parser("recommend", help="rank similar manufacturers")
    p.add_argument("manufacturer", help="target manufacturer id")
    p.add_argument("--embeddings", help="embedding table path")
    p.add_argument("--k", type=int)
    p.add_argument("--include-self", dest="include_self", type=_truthy)
    common(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="score a pipeline stage, with figures")
    p.add_argument("what", choices=("extraction", "recommendation", "classifier"))
    p.add_argument("--corpus", help="gold corpus directory (extraction)")
    p.add_argument("--embeddings", help="embedding table path")
    p.add_argument("--out-dir", dest="out_dir", help="report directory")
    p.add_argument("--queries", type=int, help="query count (recommendation)")
    p.add_argument("--max-services", dest="max_services", type=int)
    p.add_argument("--seed", type=int)
    for name, typ in (("--epochs", int), ("--batch", int), ("--learning-rate", float)):
        p.add_argument(name, type=typ)
    common(p, out=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--embeddings", action="append", help="method=path (repeatable)")
    p.add_argument("--model", help="trained model path")
    p.add_argument("--url", help="external translation endpoint")
    p.add_argument("--timeout", type=float)
    p.add_argument("--method", help="default similarity method")
    common(p, out=False)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="write the graph or 2-D coordinates")
    p.add_argument(
        "what",
        choices=("canonical-records", "edge-table", "node-table", "coords"),
    )
    p.add_argument("--embeddings", help="embedding table path (coords)")
    p.add_argument("--perplexity", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sample", type=int, help="subsample this many points first")
    common(p)
    p.set_defaults(func=cmd_export)

    return parser


_FLAG_SECTIONS = {
    # map flag destinations onto config sections for layered lookup
    "dataset": "paths", "corpus": "paths", "embeddings": "paths",
    "model": "paths", "manifest": "paths", "out_dir": "paths",
    "host": "serve", "port": "serve", "method": "serve",
    "url": "port", "timeout": "port",
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    threads = os.environ.get("MSKG_THREADS") or args.threads
    if threads:
        for var in _THREAD_ENV_VARS:
            os.environ.setdefault(var, str(threads))

    try:
        file_config = _load_file_config(
            os.environ.get("MSKG_CONFIG") or args.config
        )
    except (OSError, ValueError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    settings = Settings(args, file_config)
    from .errors import MskgError

    try:
        return args.func(settings)
    except MskgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
