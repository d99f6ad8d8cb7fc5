"""Release gates, one test per acceptance criterion.

Every test records a PASS/FAIL line through the ``criterion`` fixture;
the block prints at the end of the run. All checks are hard gates
except the clustering-direction test, which reports its outcome without
failing the build. Structural fixtures and oracles are shared with the
unit suites rather than redefined here.
"""

import itertools
import random
import threading
import time

import numpy as np

from msql_brute import brute_execute
from msql_gen import random_query, random_small_graph
from test_classifier import separable_dataset
from test_embedding import (
    clique_config,
    clique_separation,
    projection_from_edges,
    two_cliques,
    walk_config,
)
from test_extraction import run_fixture_corpus
from test_server import call, embeddings_for, small_graph

from mskg.classifier import TrainConfig, derive_labels, init_model, loss_and_grads, train
from mskg.dataset import (
    PUBLISHED_MANIFEST,
    dataset_sha256,
    load_dataset,
    validate_manifest,
)
from mskg.embedding import (
    cluster_kmeans,
    generate_walks,
    score_silhouette,
    train_graphsage,
    train_skipgram,
)
from mskg.extraction import ExtractionConfig, evaluate_extraction
from mskg.graph import NodeLabel, RelationType
from mskg.metrics import (
    ConfusionCounts,
    mean_reciprocal_rank,
    precision_at_n,
    rates,
    roc_pr,
)
from mskg.msql import run
from mskg.qa import evaluate_recommendation, recommend
from mskg.server import MskgServer, ServeConfig, make_snapshot

EXPECTED_ENTITIES = {
    NodeLabel.MANUFACTURER: 13_085,
    NodeLabel.SERVICE: 77,
    NodeLabel.CERTIFICATION: 15,
    NodeLabel.LOCATION: 63,
}
EXPECTED_RELATIONSHIPS = {
    RelationType.PROVIDES: 39_761,
    RelationType.SUBCLASS_OF: 76,
    RelationType.CERTIFIED_WITH: 3_968,
    RelationType.LOCATED_IN: 14_806,
}


# -- 1: dataset integrity --------------------------------------------------


def test_dataset_integrity(dataset_path, criterion):
    start = time.perf_counter()
    graph = load_dataset(str(dataset_path))
    report = validate_manifest(graph, PUBLISHED_MANIFEST)
    elapsed = time.perf_counter() - start

    deltas = [(r.kind, r.name, r.delta) for r in report.rows if r.delta != 0]
    count_errors = [
        f"{label.value}: {graph.node_count(label)} != {n}"
        for label, n in EXPECTED_ENTITIES.items()
        if graph.node_count(label) != n
    ] + [
        f"{rel.value}: {graph.edge_count(rel)} != {n}"
        for rel, n in EXPECTED_RELATIONSHIPS.items()
        if graph.edge_count(rel) != n
    ]
    ok = report.zero_delta and not deltas and not count_errors and elapsed < 30.0
    criterion(
        "dataset integrity",
        ok,
        f"{graph.node_count():,} entities / {graph.edge_count():,} relationships,"
        f" zero deltas, loaded and validated in {elapsed:.1f}s",
    )
    assert not deltas
    assert not count_errors
    assert report.zero_delta
    assert elapsed < 30.0


# -- 2: pinned query answers -----------------------------------------------


def test_pinned_query_answers(published_graph, dataset_path, criterion):
    g = published_graph
    mismatches = []

    def check(label, got, want):
        if got != want:
            mismatches.append(f"{label}: expected {want!r}, got {got!r}")

    additive = run(
        "MATCH (m:Manufacturer)-[:provides]->(s:Service {name: 'additive manufacturing'}),"
        " (m)-[:located_in]->(l:Location)"
        " RETURN l.name, count(m)",
        g,
    )
    check("michigan additive", dict(additive.rows).get("Michigan"), 25)

    welding = run(
        "MATCH (m:Manufacturer)-[:located_in]->(l:Location {name: 'Michigan'}),"
        " (m)-[:provides]->(s:Service {name: 'welding'})"
        " WHERE NOT EXISTS ((m)-[:certified_with]->(c:Certification {name: 'aws'}))"
        " RETURN count(m)",
        g,
    )
    check("michigan welding without aws", welding.rows, ((173,),))

    combo = run(
        "MATCH (m:Manufacturer)-[:provides]->(s1:Service {name: 'additive manufacturing'}),"
        " (m)-[:provides]->(s2:Service {name: 'casting'}),"
        " (m)-[:located_in]->(l:Location)"
        " RETURN l.name, count(m) ORDER BY count(m) DESC LIMIT 1",
        g,
    )
    check("additive+casting leader", combo.rows, (("California", 9),))

    top5 = run(
        "MATCH (m:Manufacturer)-[:provides]->(s:Service {name: 'injection molding'}),"
        " (m)-[:certified_with]->(c:Certification {name: 'as9100'}),"
        " (m)-[:located_in]->(l:Location)"
        " RETURN l.name, count(m) ORDER BY count(m) DESC LIMIT 5",
        g,
    )
    check(
        "top-5 injection molding + as9100",
        {row[0] for row in top5.rows},
        {"California", "Texas", "Connecticut", "Washington", "Ontario"},
    )

    profile = run(
        "MATCH (m:Manufacturer)-[:certified_with]->(c:Certification {name: 'itar'}),"
        " (m)-[:located_in]->(l:Location {name: 'California'}),"
        " (m)-[:provides]->(s:Service)"
        " RETURN s.name, count(m) ORDER BY count(m) DESC LIMIT 1",
        g,
    )
    check("california itar most common service", profile.rows[0][0], "machining")

    nc = run(
        "MATCH (m:Manufacturer)-[:located_in]->(l:Location {name: 'North Carolina'}),"
        " (m)-[:provides]->(s:Service)"
        " RETURN s.name, count(m) ORDER BY count(m) DESC LIMIT 1",
        g,
    )
    check("north carolina top service", nc.rows, (("machining", 123),))

    # a mismatch is tied to the exact dataset bytes it was observed on
    sha = dataset_sha256(str(dataset_path))
    if mismatches:
        detail = "; ".join(mismatches) + f" [dataset sha256 {sha}]"
    else:
        detail = f"six pinned answers reproduced (dataset sha256 {sha[:12]})"
    criterion("pinned query answers", not mismatches, detail)
    assert not mismatches, detail


# -- 3: metric oracles -----------------------------------------------------


def auc_by_rank_pairs(scored):
    """Probability that a random positive outscores a random negative,
    counting ties as half a win."""
    pos = [s for s, y in scored if y]
    neg = [s for s, y in scored if not y]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def transitive_closure(pairs):
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(closure), list(closure)):
            if b == c and a != d and (a, d) not in closure:
                closure.add((a, d))
                changed = True
    return closure


def test_metric_oracles(criterion):
    worst_auc = 0.0
    rng = np.random.default_rng(41)
    for _ in range(100):
        n = int(rng.integers(2, 201))
        # a small score pool forces plenty of ties
        pool = rng.uniform(0.0, 1.0, size=int(rng.integers(2, 12)))
        scores = rng.choice(pool, size=n)
        labels = rng.integers(0, 2, size=n).astype(bool)
        if labels.all() or not labels.any():
            labels[0], labels[-1] = True, False
        scored = list(zip(scores.tolist(), labels.tolist()))
        worst_auc = max(worst_auc, abs(roc_pr(scored).auc_roc - auc_by_rank_pairs(scored)))
    assert worst_auc <= 1e-9

    py_rng = random.Random(1107)
    services = [f"s{i}" for i in range(8)]
    for trial in range(100):
        closure = transitive_closure(
            (a, b)
            for a, b in itertools.permutations(services, 2)
            if py_rng.random() < 0.15
        )
        targets = set(py_rng.sample(services, py_rng.randint(1, 3)))
        ranked = [
            (f"m{i}", tuple(py_rng.sample(services, py_rng.randint(0, 4))))
            for i in range(py_rng.randint(1, 50))
        ]
        n = py_rng.randint(1, 60)
        got = precision_at_n(targets, ranked, lambda a, b: (a, b) in closure, n)
        relevant = total = 0
        for _, svcs in ranked[:n]:
            for s in svcs:
                total += 1
                if any(s == t or (s, t) in closure for t in targets):
                    relevant += 1
        assert (got.n_relevant, got.n_total) == (relevant, total), trial
        assert got.value == (relevant / total if total else 0.0), trial

        flags_set = [
            [py_rng.random() < 0.3 for _ in range(py_rng.randint(0, 10))]
            for _ in range(py_rng.randint(1, 8))
        ]
        accum = 0.0
        for flags in flags_set:
            first = 0
            for i, f in enumerate(flags):
                if f:
                    first = i + 1
                    break
            accum += (1.0 / first) if first else 0.0
        assert mean_reciprocal_rank(flags_set).value == accum / len(flags_set), trial

    # confusion rates against boolean-mask substitution
    for trial in range(50):
        mrng = np.random.default_rng((5, trial))
        n = int(mrng.integers(1, 400))
        truth = mrng.integers(0, 2, n).astype(bool)
        pred = mrng.integers(0, 2, n).astype(bool)
        got = rates(
            ConfusionCounts(
                tp=int((pred & truth).sum()),
                tn=int((~pred & ~truth).sum()),
                fp=int((pred & ~truth).sum()),
                fn=int((~pred & truth).sum()),
            )
        )
        assert abs(got.accuracy - float((pred == truth).mean())) < 1e-12
        expected_p = float(truth[pred].mean()) if pred.any() else None
        expected_r = float(pred[truth].mean()) if truth.any() else None
        for have, want in ((got.precision, expected_p), (got.recall, expected_r)):
            assert (have is None) == (want is None)
            if have is not None:
                assert abs(have - want) < 1e-12
        if got.f1 is not None:
            direct = 2 * expected_p * expected_r / (expected_p + expected_r)
            assert abs(got.f1 - direct) < 1e-12

    criterion(
        "metric oracles",
        True,
        f"AUC vs rank-pair worst gap {worst_auc:.1e} over 100 instances;"
        " P@N/MRR exact on 100; confusion rates exact on 50",
    )


# -- 4: classifier numerics ------------------------------------------------


def finite_difference_worst_error(trials=20, eps=1e-6):
    worst = 0.0
    for trial in range(trials):
        rng = np.random.default_rng((9, trial))
        model = init_model(seed=trial)
        params = [model.w1.copy(), model.b1.copy(), model.w2.copy(), model.b2.copy()]
        x = rng.normal(0.0, 1.0, (4, 100))
        y = rng.integers(0, 2, (4, 10)).astype(float)
        _, grads = loss_and_grads(params, x, y)
        for p, g in zip(params, grads):
            flat = p.reshape(-1)
            for idx in rng.choice(flat.size, size=min(6, flat.size), replace=False):
                orig = flat[idx]
                flat[idx] = orig + eps
                up, _ = loss_and_grads(params, x, y)
                flat[idx] = orig - eps
                down, _ = loss_and_grads(params, x, y)
                flat[idx] = orig
                numeric = (up - down) / (2 * eps)
                analytic = g.reshape(-1)[idx]
                rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
                worst = max(worst, rel)
    return worst


def test_classifier_numerics(published_graph, embedding_bank, criterion):
    start = time.perf_counter()

    worst_fd = finite_difference_worst_error()

    separable_table, separable_labels = separable_dataset(500, seed=0)
    separable = train(separable_table, separable_labels, TrainConfig(seed=0))

    table = embedding_bank.table("node2vec", 0)
    labels = {
        m: derive_labels(published_graph, m)
        for m in published_graph.node_ids(NodeLabel.MANUFACTURER)
    }
    report = train(table, labels, TrainConfig(seed=0))
    held_out = report.test.subset_accuracy

    elapsed = time.perf_counter() - start
    budget = elapsed + embedding_bank.build_seconds[("node2vec", 0)]
    ok = (
        worst_fd <= 1e-4
        and separable.test.micro.f1 >= 0.99
        and held_out >= 0.90
        and budget < 600.0
    )
    criterion(
        "classifier numerics",
        ok,
        f"FD worst rel error {worst_fd:.1e}; separable micro-F1"
        f" {separable.test.micro.f1:.3f}; held-out subset accuracy"
        f" {held_out:.3f}; {budget:.0f}s including embedding",
    )
    assert worst_fd <= 1e-4
    assert separable.test.micro.f1 >= 0.99
    assert held_out >= 0.90
    assert budget < 600.0


# -- 5: embedding structure ------------------------------------------------


def test_embedding_structure(criterion):
    proj = two_cliques()
    separations = {"node2vec": [], "graphsage": []}
    for seed in range(5):
        config = clique_config(seed)
        skipgram = train_skipgram(generate_walks(proj, config), config)
        separations["node2vec"].append(clique_separation(skipgram.table))
        separations["graphsage"].append(
            clique_separation(train_graphsage(proj, config).table)
        )
    means = {m: float(np.mean(v)) for m, v in separations.items()}

    # weighted triangle AB=1, AC=3, BC=2: first-step closed form
    triangle = projection_from_edges(3, [(0, 1, 1.0), (0, 2, 3.0), (1, 2, 2.0)])
    corpus = generate_walks(
        triangle, walk_config(walk_length=2, walks_per_node=10_000, seed=13)
    )
    closed_form = {
        ("n00", "n01"): 1 / 4,
        ("n00", "n02"): 3 / 4,
        ("n01", "n00"): 1 / 3,
        ("n01", "n02"): 2 / 3,
        ("n02", "n00"): 3 / 5,
        ("n02", "n01"): 2 / 5,
    }
    worst_freq = 0.0
    for start in ("n00", "n01", "n02"):
        walks = [w for w in corpus.walks if w[0] == start]
        assert len(walks) == 10_000
        for dst in ("n00", "n01", "n02"):
            if dst == start:
                continue
            freq = sum(w[1] == dst for w in walks) / len(walks)
            worst_freq = max(worst_freq, abs(freq - closed_form[(start, dst)]))

    ok = all(m >= 0.2 for m in means.values()) and worst_freq <= 0.02
    criterion(
        "embedding structure",
        ok,
        f"clique separation node2vec {means['node2vec']:.2f} / graphsage"
        f" {means['graphsage']:.2f} over 5 seeds; worst walk frequency gap"
        f" {worst_freq:.3f}",
    )
    assert means["node2vec"] >= 0.2
    assert means["graphsage"] >= 0.2
    assert worst_freq <= 0.02


# -- 6: clustering direction (reported, not enforced) ------------------------


def test_clustering_direction(published_graph, embedding_bank, criterion):
    manufacturers = sorted(published_graph.node_ids(NodeLabel.MANUFACTURER))
    outcomes = []
    for seed in (0, 1, 2):
        scores = {}
        for method in ("node2vec", "graphsage"):
            table = embedding_bank.table(method, seed)
            points = np.stack([table.vector(m) for m in manufacturers])
            result = cluster_kmeans(points, 4, seed=seed)
            scores[method] = score_silhouette(points, result.assignment)
        outcomes.append(scores)

    wins = sum(o["graphsage"] >= o["node2vec"] for o in outcomes)
    detail = "; ".join(
        f"seed {s}: graphsage {o['graphsage']:.3f} vs node2vec {o['node2vec']:.3f}"
        for s, o in enumerate(outcomes)
    )
    # directional expectation only: the outcome is reported in the
    # summary either way and never fails the build
    criterion("clustering direction (soft)", wins == 3, f"{wins}/3 seeds; {detail}")


# -- 7: recommendation quality ---------------------------------------------


def test_recommendation_beats_random_baseline(published_graph, embedding_bank, criterion):
    g = published_graph
    table = embedding_bank.table("node2vec", 0)
    manufacturers = sorted(g.node_ids(NodeLabel.MANUFACTURER))
    eligible = [
        m for m in manufacturers if len(g.out_edges(m, RelationType.PROVIDES)) <= 3
    ]
    rng = np.random.default_rng(2026)
    picks = sorted(rng.choice(len(eligible), size=20, replace=False))
    targets = [eligible[i] for i in picks]

    recommender_scores = []
    for mid in targets:
        ranking = recommend(mid, 10, table, g, include_self=False)
        report = evaluate_recommendation(mid, ranking, g, ns=(10,))
        recommender_scores.append(report.queries[0].p_at_n[10].value)
    recommender_mean = float(np.mean(recommender_scores))

    pools = {mid: [m for m in manufacturers if m != mid] for mid in targets}
    baseline_scores = []
    for shuffle in range(100):
        srng = np.random.default_rng((1234, shuffle))
        for mid in targets:
            pool = pools[mid]
            pick = srng.choice(len(pool), size=10, replace=False)
            ranking = [(pool[i], 0.5) for i in pick]
            report = evaluate_recommendation(mid, ranking, g, ns=(10,))
            baseline_scores.append(report.queries[0].p_at_n[10].value)
    baseline_mean = float(np.mean(baseline_scores))

    ratio = recommender_mean / baseline_mean
    criterion(
        "recommendation quality",
        ratio >= 2.0,
        f"P@10 {recommender_mean:.3f} vs random baseline {baseline_mean:.3f}"
        f" over 20 targets with <= 3 services (ratio {ratio:.1f})",
    )
    assert ratio >= 2.0


# -- 8: extraction fixture ---------------------------------------------------


def test_extraction_fixture_quality(criterion):
    scored, gold = run_fixture_corpus()
    config = ExtractionConfig(
        cutoffs={
            NodeLabel.SERVICE: 0.40,
            NodeLabel.CERTIFICATION: 0.25,
            NodeLabel.LOCATION: 0.40,
        }
    )
    report = evaluate_extraction(scored, gold, config)
    precision = report.overall.rates.precision
    recall = report.overall.rates.recall

    # raising a uniform cutoff can only shrink the predicted set
    monotone = True
    previous_predicted, previous_recall = None, None
    for step in range(1, 20):
        cutoff = round(0.05 * step, 2)
        uniform = ExtractionConfig(
            cutoffs={label: cutoff for label in config.cutoffs}
        )
        counts = evaluate_extraction(scored, gold, uniform).overall.counts
        predicted = counts.tp + counts.fp
        swept_recall = counts.tp / (counts.tp + counts.fn)
        if previous_predicted is not None:
            monotone = monotone and predicted <= previous_predicted
            monotone = monotone and swept_recall <= previous_recall + 1e-12
        previous_predicted, previous_recall = predicted, swept_recall

    ok = precision >= 0.90 and recall >= 0.85 and monotone
    criterion(
        "extraction fixture",
        ok,
        f"precision {precision:.3f} / recall {recall:.3f} at the published"
        f" cutoffs; sweep monotone over 19 uniform cutoffs",
    )
    assert precision >= 0.90
    assert recall >= 0.85
    assert monotone


# -- 9: query engine soundness -----------------------------------------------


def result_bytes(table):
    lines = ["\t".join(table.columns)]
    lines.extend("\t".join(repr(v) for v in row) for row in table.rows)
    return "\n".join(lines).encode()


def test_query_engine_soundness(published_graph, criterion):
    from mskg.msql import execute

    rng = random.Random(20260815)
    for trial in range(500):
        g = random_small_graph(rng)
        q = random_query(rng, g)
        got = execute(q, g)
        columns, rows = brute_execute(q, g)
        assert got.columns == columns, trial
        assert list(got.rows) == rows, trial
        assert result_bytes(execute(q, g)) == result_bytes(got), trial

    pinned = [
        "MATCH (m:Manufacturer) RETURN count(m)",
        "MATCH (m:Manufacturer)-[:provides]->(s:Service {name: 'additive manufacturing'}),"
        " (m)-[:located_in]->(l:Location) RETURN l.name, count(m)",
        "MATCH (m:Manufacturer)-[:located_in]->(l:Location {name: 'Michigan'}),"
        " (m)-[:provides]->(s:Service {name: 'welding'})"
        " WHERE NOT EXISTS ((m)-[:certified_with]->(c:Certification {name: 'aws'}))"
        " RETURN count(m)",
        "MATCH (m:Manufacturer)-[:located_in]->(l:Location {name: 'North Carolina'}),"
        " (m)-[:provides]->(s:Service)"
        " RETURN s.name, count(m) ORDER BY count(m) DESC LIMIT 10",
    ]
    for msql in pinned:
        first = result_bytes(run(msql, published_graph))
        second = result_bytes(run(msql, published_graph))
        assert first == second

    criterion(
        "query engine soundness",
        True,
        "500 random graph/query pairs match exhaustive enumeration;"
        " repeat runs byte-identical",
    )


# -- 10: service concurrency --------------------------------------------------


def test_snapshot_swap_under_concurrent_readers(criterion):
    graph_a = small_graph()
    graph_b = small_graph(extra_manufacturer=True)
    snap_a = make_snapshot(graph_a, {"node2vec": embeddings_for(graph_a)})
    snap_b = make_snapshot(graph_b, {"node2vec": embeddings_for(graph_b)})

    def full_stats(g):
        return {
            "entities": {label.value: g.node_count(label) for label in NodeLabel},
            "relationships": {rel.value: g.edge_count(rel) for rel in RelationType},
            "total_entities": g.node_count(),
            "total_relationships": g.edge_count(),
            "dataset_hash": None,
        }

    allowed = (full_stats(graph_a), full_stats(graph_b))
    server = MskgServer(ServeConfig(port=0), snap_a)
    host, port = server.start()
    base = f"http://{host}:{port}"
    results, errors = [], []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            try:
                status, body = call(base, "/graph/stats")
            except Exception as exc:  # noqa: BLE001 - collected for the assert
                errors.append(exc)
                return
            if status != 200:
                errors.append(status)
                return
            results.append(body)
            if len(results) > 400:
                return

    threads = [threading.Thread(target=reader) for _ in range(100)]
    try:
        for t in threads:
            t.start()
        for flip in range(40):
            server.reload(snap_b if flip % 2 == 0 else snap_a)
        stop.set()
        for t in threads:
            t.join(timeout=30)
    finally:
        stop.set()
        server.stop()

    torn = [body for body in results if body not in allowed]
    ok = not errors and results and not torn
    criterion(
        "service concurrency",
        bool(ok),
        f"{len(results)} reads under 100 readers and 40 swaps, none torn",
    )
    assert not errors
    assert results
    assert not torn
