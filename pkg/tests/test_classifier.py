import numpy as np
import pytest

from mskg.classifier import (
    CrossValReport,
    LabelVector,
    MlpModel,
    Prediction,
    TrainConfig,
    cross_validate,
    derive_labels,
    evaluate_predictions,
    init_model,
    load_model,
    loss_and_grads,
    predict,
    save_model,
    train,
)
from mskg.embedding import EmbeddingTable
from mskg.errors import (
    EmptyTrainingSet,
    MissingEmbedding,
    ShapeMismatch,
    TooFewSamples,
    UnknownManufacturer,
)
from mskg.graph import CATEGORIES, Edge, Graph, Node, NodeLabel, RelationType
from mskg.optim import Adam


def separable_dataset(n, seed, margin=4.0, noise=0.1):
    """Three orthogonal signal directions drive slots 0, 5 and 6."""
    rng = np.random.default_rng(seed)
    dirs = np.linalg.qr(rng.normal(0, 1, (100, 3)))[0].T
    y3 = rng.integers(0, 2, (n, 3))
    x = (2 * y3 - 1) @ (margin * dirs) + rng.normal(0, noise, (n, 100))
    bits = np.zeros((n, 10), dtype=int)
    bits[:, 0], bits[:, 5], bits[:, 6] = y3[:, 0], y3[:, 1], y3[:, 2]
    ids = tuple(f"m{i:04d}.com" for i in range(n))
    table = EmbeddingTable(method="node2vec", ids=ids, vectors=x)
    labels = {ids[i]: LabelVector(tuple(bits[i])) for i in range(n)}
    return table, labels


def hierarchy_graph():
    g = Graph()
    for root in ["machining", "molding", "casting", "additive manufacturing"]:
        g.add_node(Node(root, NodeLabel.SERVICE, root, wikidata_id="Q1"))
    children = {
        "milling": "machining",
        "turning": "machining",
        "injection molding": "molding",
        "die casting": "casting",
        "3d printing": "additive manufacturing",
    }
    for child, parent in children.items():
        g.add_node(Node(child, NodeLabel.SERVICE, child, wikidata_id="Q2"))
        g.add_edge(Edge(child, parent, RelationType.SUBCLASS_OF, 1.0))
    g.add_node(Node("stereolithography", NodeLabel.SERVICE, "stereolithography", wikidata_id="Q3"))
    g.add_edge(Edge("stereolithography", "3d printing", RelationType.SUBCLASS_OF, 1.0))
    g.add_node(Node("basket weaving", NodeLabel.SERVICE, "basket weaving", wikidata_id="Q4"))

    g.add_node(Node("root-only.com", NodeLabel.MANUFACTURER, "root-only.com"))
    g.add_edge(Edge("root-only.com", "machining", RelationType.PROVIDES, 0.8))

    g.add_node(Node("wide.com", NodeLabel.MANUFACTURER, "wide.com"))
    for s in ["milling", "turning", "injection molding", "die casting", "3d printing", "stereolithography"]:
        g.add_edge(Edge("wide.com", s, RelationType.PROVIDES, 0.8))

    g.add_node(Node("odd.com", NodeLabel.MANUFACTURER, "odd.com"))
    g.add_edge(Edge("odd.com", "basket weaving", RelationType.PROVIDES, 0.5))

    g.add_node(Node("bare.com", NodeLabel.MANUFACTURER, "bare.com"))
    g.freeze()
    return g


# -- label vectors ---------------------------------------------------------


def test_label_vector_round_trip():
    lv = LabelVector.from_names({"machining", "casting"})
    assert lv.names() == ("machining", "casting")
    assert lv.bits[0] == 1 and lv.bits[6] == 1 and sum(lv.bits) == 2


def test_label_vector_order_is_fixed():
    assert CATEGORIES == (
        "machining",
        "assembly",
        "joining",
        "inspection",
        "forming",
        "molding",
        "casting",
        "additive manufacturing",
        "heat treatment",
        "other",
    )


def test_label_vector_rejects_unknown_names():
    with pytest.raises(ValueError):
        LabelVector.from_names({"welding"})


def test_label_vector_rejects_bad_bits():
    with pytest.raises(ValueError):
        LabelVector((1, 0, 2, 0, 0, 0, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        LabelVector((1, 0))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(split=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(threshold=1.0)


# -- label derivation ------------------------------------------------------


def test_root_service_sets_single_slot():
    lv = derive_labels(hierarchy_graph(), "root-only.com")
    assert lv.names() == ("machining",)


def test_rollup_union_over_six_services():
    lv = derive_labels(hierarchy_graph(), "wide.com")
    assert set(lv.names()) == {"machining", "molding", "casting", "additive manufacturing"}


def test_unrooted_service_maps_to_other():
    lv = derive_labels(hierarchy_graph(), "odd.com")
    assert lv.names() == ("other",)


def test_no_services_gives_all_zero():
    lv = derive_labels(hierarchy_graph(), "bare.com")
    assert sum(lv.bits) == 0


def test_other_slot_consistency():
    g = hierarchy_graph()
    for mid in ["root-only.com", "wide.com", "odd.com", "bare.com"]:
        lv = derive_labels(g, mid)
        has_unrooted = any(
            g.rollup_to_categories(s) == {"other"}
            for s in g.out_edges(mid, RelationType.PROVIDES)
        )
        assert (lv.bits[-1] == 1) == has_unrooted


def test_unknown_manufacturer_rejected():
    g = hierarchy_graph()
    with pytest.raises(UnknownManufacturer):
        derive_labels(g, "nobody.com")
    with pytest.raises(UnknownManufacturer):
        derive_labels(g, "milling")


# -- model mechanics -------------------------------------------------------


def test_model_shapes_validated():
    with pytest.raises(ShapeMismatch):
        MlpModel(np.zeros((100, 21)), np.zeros(20), np.zeros((20, 10)), np.zeros(10))
    with pytest.raises(ShapeMismatch):
        MlpModel(
            np.full((100, 20), np.inf), np.zeros(20), np.zeros((20, 10)), np.zeros(10)
        )


def test_init_model_deterministic_and_bounded():
    a, b = init_model(4), init_model(4)
    assert all(np.array_equal(p, q) for p, q in zip(a.params(), b.params()))
    assert np.abs(a.w1).max() <= np.sqrt(6.0 / 100)
    assert np.all(a.b1 == 0) and np.all(a.b2 == 0)


def test_zero_model_predicts_half_everywhere():
    zero = MlpModel(np.zeros((100, 20)), np.zeros(20), np.zeros((20, 10)), np.zeros(10))
    pred = predict(zero, np.zeros(100))
    assert set(pred.probabilities) == {0.5}
    assert pred.labels.bits == (1,) * 10  # >= convention at the threshold


def test_predict_is_pure():
    model = init_model(0)
    x = np.random.default_rng(1).normal(0, 1, 100)
    assert predict(model, x) == predict(model, x)


def test_predict_resolves_ids_through_table():
    table, labels = separable_dataset(20, seed=2)
    model = init_model(0)
    by_id = predict(model, "m0003.com", table=table)
    by_vec = predict(model, table.vector("m0003.com"))
    assert by_id == by_vec
    with pytest.raises(ValueError):
        predict(model, "m0003.com")


def test_predict_rejects_wrong_width():
    with pytest.raises(ShapeMismatch):
        predict(init_model(0), np.zeros(99))


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    model = init_model(3)
    params = [p.copy() for p in model.params()]
    x = rng.normal(0, 1, (10, 100))
    y = (rng.random((10, 10)) < 0.4).astype(float)
    _, grads = loss_and_grads(params, x, y)
    h = 1e-6
    worst = 0.0
    for p, g in zip(params, grads):
        for ix in np.ndindex(p.shape):
            old = p[ix]
            p[ix] = old + h
            up, _ = loss_and_grads(params, x, y)
            p[ix] = old - h
            down, _ = loss_and_grads(params, x, y)
            p[ix] = old
            numeric = (up - down) / (2 * h)
            worst = max(worst, abs(numeric - g[ix]) / max(abs(numeric), abs(g[ix]), 1e-8))
    assert worst < 1e-4


def test_one_step_reduces_fixed_batch_loss():
    for seed in range(20):
        model = init_model(seed)
        params = [p.copy() for p in model.params()]
        x = np.random.default_rng((seed, 1)).normal(0, 1, (32, 100))
        y = (np.random.default_rng((seed, 2)).random((32, 10)) < 0.3).astype(float)
        before, grads = loss_and_grads(params, x, y)
        Adam(params, lr=1e-3).step(grads)
        after, _ = loss_and_grads(params, x, y)
        assert after < before


# -- training --------------------------------------------------------------


def test_separable_data_reaches_high_f1():
    table, labels = separable_dataset(500, seed=0)
    report = train(table, labels, TrainConfig(seed=0))
    assert report.test.micro.f1 >= 0.99
    assert report.test.size == 50 and report.validation.size == 50
    assert all(np.isfinite(report.epoch_losses))
    assert report.epoch_losses[-1] < report.epoch_losses[0]


def test_trained_model_memorizes_training_points():
    table, labels = separable_dataset(200, seed=1)
    report = train(table, labels, TrainConfig(seed=1))
    hits = sum(
        predict(report.model, table.vector(i)).labels == labels[i] for i in labels
    )
    assert hits >= 0.99 * len(labels)


def test_training_is_deterministic():
    table, labels = separable_dataset(60, seed=4)
    cfg = TrainConfig(epochs=5, seed=9)
    a, b = train(table, labels, cfg), train(table, labels, cfg)
    assert all(np.array_equal(p, q) for p, q in zip(a.model.params(), b.model.params()))
    assert a.epoch_losses == b.epoch_losses


def test_empty_label_map_rejected():
    table, _ = separable_dataset(10, seed=0)
    with pytest.raises(EmptyTrainingSet):
        train(table, {}, TrainConfig())


def test_wrong_embedding_width_rejected():
    table = EmbeddingTable(method="node2vec", ids=("a",), vectors=np.zeros((1, 50)))
    with pytest.raises(ShapeMismatch):
        train(table, {"a": LabelVector((1,) + (0,) * 9)}, TrainConfig())


def test_label_without_embedding_rejected():
    table, labels = separable_dataset(20, seed=0)
    labels["ghost.com"] = LabelVector((1,) + (0,) * 9)
    with pytest.raises(MissingEmbedding):
        train(table, labels, TrainConfig())


def test_evaluate_predictions_micro_counts():
    y = np.zeros((2, 10))
    y[0, 0] = 1
    y[1, 3] = 1
    probs = np.full((2, 10), 0.1)
    probs[0, 0] = 0.9  # true positive
    probs[1, 7] = 0.9  # false positive; slot 3 missed
    m = evaluate_predictions(y, probs, threshold=0.5)
    assert m.subset_accuracy == 0.5
    assert m.micro.precision == 0.5  # 1 TP, 1 FP
    assert m.micro.recall == 0.5  # 1 TP, 1 FN


# -- cross-validation ------------------------------------------------------


def test_folds_partition_each_repeat():
    table, labels = separable_dataset(30, seed=5)
    report = cross_validate(table, labels, TrainConfig(folds=3, repeats=2, epochs=2, seed=1))
    assert len(report.records) == 6
    for repeat in (0, 1):
        seen = [
            i
            for r in report.records
            if r.repeat == repeat
            for i in r.held_out_ids
        ]
        assert sorted(seen) == sorted(labels)  # every sample exactly once


def test_no_overlap_between_train_and_validation():
    table, labels = separable_dataset(30, seed=5)
    report = cross_validate(table, labels, TrainConfig(folds=3, repeats=1, epochs=2, seed=1))
    n = sum(len(r.held_out_ids) for r in report.records)
    assert n == 30
    for r in report.records:
        assert r.metrics.size == len(r.held_out_ids)
        assert r.train_metrics.size == 30 - len(r.held_out_ids)


def test_memorizable_dataset_perfect_on_training_folds():
    table, labels = separable_dataset(30, seed=5)
    report = cross_validate(table, labels, TrainConfig(folds=3, repeats=1, epochs=300, seed=0))
    accs = [r.train_metrics.subset_accuracy for r in report.records]
    assert np.mean(accs) == 1.0


def test_too_few_samples_for_folds():
    table, labels = separable_dataset(9, seed=0)
    with pytest.raises(TooFewSamples):
        cross_validate(table, labels, TrainConfig(folds=10))


def test_summary_reports_mean_and_std():
    table, labels = separable_dataset(30, seed=5)
    report = cross_validate(table, labels, TrainConfig(folds=3, repeats=1, epochs=50, seed=0))
    summary = report.summary()
    assert set(summary) <= {"subset_accuracy", "precision", "recall", "f1"}
    mean, std = summary["subset_accuracy"]
    assert 0.0 <= mean <= 1.0 and std >= 0.0
    assert "folds evaluated: 3" in report.to_text()


# -- model files -----------------------------------------------------------


def test_model_round_trip(tmp_path):
    model = init_model(6)
    path = str(tmp_path / "model.npz")
    save_model(model, path)
    loaded = load_model(path)
    assert all(np.array_equal(p, q) for p, q in zip(model.params(), loaded.params()))


def test_load_rejects_wrong_shapes(tmp_path):
    path = str(tmp_path / "bad.npz")
    np.savez(
        path,
        format=np.array([1]),
        w1=np.zeros((100, 21)),
        b1=np.zeros(20),
        w2=np.zeros((20, 10)),
        b2=np.zeros(10),
    )
    with pytest.raises(ShapeMismatch):
        load_model(path)


def test_load_rejects_unknown_format(tmp_path):
    path = str(tmp_path / "v9.npz")
    np.savez(path, format=np.array([9]))
    with pytest.raises(ShapeMismatch):
        load_model(path)
