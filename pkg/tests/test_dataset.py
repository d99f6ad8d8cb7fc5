import json

import pytest
from hypothesis import given, settings, strategies as st

from mskg.dataset import (
    EXPORT_FORMATS,
    Manifest,
    PUBLISHED_MANIFEST,
    export_graph,
    load_dataset,
    load_dataset_with_report,
    validate_manifest,
)
from mskg.errors import ManifestMismatch, ParseError, SchemaViolation, UnsupportedFormat
from mskg.graph import Edge, Graph, Node, NodeLabel, RelationType


def write(tmp_path, text, name="data.jsonl"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


CANONICAL = "\n".join(
    [
        json.dumps({"type": "node", "id": "acme.com", "labels": ["Manufacturer"], "properties": {"name": "acme.com"}}),
        json.dumps({"type": "node", "id": "milling", "labels": ["Service"], "properties": {"name": "milling", "wikidata_id": "Q1361810"}}),
        json.dumps({"type": "relationship", "label": "provides", "start": {"id": "acme.com"}, "end": {"id": "milling"}, "properties": {"weight": 0.8}}),
    ]
)


class TestLoadCanonical:
    def test_basic_load(self, tmp_path):
        g = load_dataset(write(tmp_path, CANONICAL))
        assert g.frozen
        assert g.node_count() == 2
        assert g.edge_count() == 1
        assert g.out_edges("acme.com", RelationType.PROVIDES)["milling"] == 0.8
        assert g.node("milling").wikidata_id == "Q1361810"

    def test_empty_file(self, tmp_path):
        g = load_dataset(write(tmp_path, ""))
        assert g.frozen
        assert g.node_count() == 0
        assert g.edge_count() == 0

    def test_alias_spellings(self, tmp_path):
        text = "\n".join(
            [
                json.dumps({"type": "node", "id": "a.com", "label": "Manufacturer"}),
                json.dumps({"type": "node", "id": "milling", "label": "Service"}),
                json.dumps({"type": "relationship", "label": "provides", "start": "a.com", "end": "milling", "weight": 0.5}),
                json.dumps({"type": "node", "id": "ohio", "labels": ["Location"], "name": "Ohio"}),
                json.dumps({"type": "relationship", "label": "located_in", "start_id": "a.com", "end_id": "ohio", "properties": {"weight": 1.0}}),
            ]
        )
        g = load_dataset(write(tmp_path, text))
        assert g.node("a.com").name == "a.com"
        assert g.node("ohio").name == "Ohio"
        assert g.out_edges("a.com", RelationType.PROVIDES)["milling"] == 0.5
        assert g.out_edges("a.com", RelationType.LOCATED_IN)["ohio"] == 1.0

    def test_missing_weight_defaults_and_is_flagged(self, tmp_path):
        text = "\n".join(
            [
                json.dumps({"type": "node", "id": "a.com", "labels": ["Manufacturer"]}),
                json.dumps({"type": "node", "id": "milling", "labels": ["Service"]}),
                json.dumps({"type": "relationship", "label": "provides", "start": {"id": "a.com"}, "end": {"id": "milling"}}),
            ]
        )
        g, report = load_dataset_with_report(write(tmp_path, text))
        assert g.out_edges("a.com", RelationType.PROVIDES)["milling"] == 1.0
        assert report.defaulted_weights == 1
        assert report.defaulted_weight_lines == [3]

    def test_dangling_reference(self, tmp_path):
        text = "\n".join(
            [
                json.dumps({"type": "node", "id": "a.com", "labels": ["Manufacturer"]}),
                json.dumps({"type": "relationship", "label": "provides", "start": {"id": "a.com"}, "end": {"id": "ghost"}, "properties": {"weight": 1}}),
            ]
        )
        with pytest.raises(SchemaViolation, match="line 2"):
            load_dataset(write(tmp_path, text))

    def test_bad_json_reports_line(self, tmp_path):
        text = CANONICAL + "\n{not json"
        with pytest.raises(ParseError) as exc:
            load_dataset(write(tmp_path, text))
        assert exc.value.line == 4

    def test_unknown_record_type(self, tmp_path):
        with pytest.raises(ParseError):
            load_dataset(write(tmp_path, json.dumps({"type": "mystery"})))

    def test_unknown_relation_label(self, tmp_path):
        text = "\n".join(
            [
                json.dumps({"type": "node", "id": "a.com", "labels": ["Manufacturer"]}),
                json.dumps({"type": "node", "id": "milling", "labels": ["Service"]}),
                json.dumps({"type": "relationship", "label": "owns", "start": {"id": "a.com"}, "end": {"id": "milling"}}),
            ]
        )
        with pytest.raises(SchemaViolation):
            load_dataset(write(tmp_path, text))

    def test_determinism(self, tmp_path):
        p = write(tmp_path, CANONICAL)
        g1, g2 = load_dataset(p), load_dataset(p)
        assert [n.id for n in g1.nodes()] == [n.id for n in g2.nodes()]
        assert list(g1.edges()) == list(g2.edges())


class TestManifest:
    def test_published_totals(self):
        assert PUBLISHED_MANIFEST.total_entities == 13240
        # per-relation counts are authoritative; their sum, not the
        # separately published rounded total, is the expected grand total
        assert PUBLISHED_MANIFEST.total_relationships == 58611

    def test_empty_graph_deltas_are_full_counts(self):
        g = Graph().freeze()
        report = validate_manifest(g, PUBLISHED_MANIFEST)
        assert not report.zero_delta
        by_name = {(r.kind, r.name): r for r in report.rows}
        assert by_name[("label", "Manufacturer")].delta == -13085
        assert by_name[("total", "relationships")].delta == -58611

    def test_one_extra_service_delta(self, tmp_path):
        g = Graph()
        g.add_node(Node(id="milling", label=NodeLabel.SERVICE, name="milling"))
        g.freeze()
        manifest = Manifest(labels={NodeLabel.SERVICE: 0}, relations={})
        report = validate_manifest(g, manifest)
        by_name = {(r.kind, r.name): r for r in report.rows}
        assert by_name[("label", "Service")].delta == +1

    def test_load_raises_on_mismatch(self, tmp_path):
        with pytest.raises(ManifestMismatch):
            load_dataset(write(tmp_path, CANONICAL), PUBLISHED_MANIFEST)

    def test_mismatch_report_text(self, tmp_path):
        try:
            load_dataset(write(tmp_path, CANONICAL), PUBLISHED_MANIFEST)
        except ManifestMismatch as exc:
            text = str(exc)
            assert "Manufacturer" in text and "delta" in text

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            Manifest(labels={NodeLabel.SERVICE: -1}, relations={})

    def test_from_toml(self, tmp_path):
        p = tmp_path / "counts.toml"
        p.write_text(
            "[labels]\nManufacturer = 2\nService = 1\n\n[relations]\nprovides = 1\n",
            encoding="utf-8",
        )
        m = Manifest.from_toml(str(p))
        assert m.labels[NodeLabel.MANUFACTURER] == 2
        assert m.relations[RelationType.PROVIDES] == 1

    def test_of_graph_matches_validate(self, tmp_path):
        g = load_dataset(write(tmp_path, CANONICAL))
        m = Manifest.of_graph(g)
        assert validate_manifest(g, m).zero_delta


class TestExport:
    def sample(self):
        g = Graph()
        g.add_node(Node(id="acme.com", label=NodeLabel.MANUFACTURER, name="acme.com"))
        g.add_node(Node(id="milling", label=NodeLabel.SERVICE, name="milling", wikidata_id="Q1"))
        g.add_node(Node(id="ohio", label=NodeLabel.LOCATION, name="Ohio"))
        g.add_edge(Edge("acme.com", "milling", RelationType.PROVIDES, 0.8))
        g.add_edge(Edge("acme.com", "ohio", RelationType.LOCATED_IN, 1.0))
        return g.freeze()

    def test_unsupported_format(self):
        with pytest.raises(UnsupportedFormat):
            export_graph(self.sample(), "parquet")

    def test_empty_graph_tables_are_header_only(self):
        g = Graph().freeze()
        assert export_graph(g, "edge-table").decode() == "src\trel\tdst\tweight\n"
        assert export_graph(g, "node-table").decode() == "id\tlabel\tname\twikidata_id\n"
        assert export_graph(g, "canonical-records") == b""

    def test_two_node_one_edge_table(self):
        g = Graph()
        g.add_node(Node(id="a.com", label=NodeLabel.MANUFACTURER, name="a.com"))
        g.add_node(Node(id="milling", label=NodeLabel.SERVICE, name="milling"))
        g.add_edge(Edge("a.com", "milling", RelationType.PROVIDES, 0.5))
        rows = export_graph(g.freeze(), "edge-table").decode().splitlines()
        assert len(rows) == 2
        assert rows[1] == "a.com\tprovides\tmilling\t0.5"

    def test_canonical_round_trip_full_fidelity(self, tmp_path):
        g = self.sample()
        p = tmp_path / "out.jsonl"
        p.write_bytes(export_graph(g, "canonical-records"))
        g2 = load_dataset(str(p))
        assert sorted((n.id, n.label, n.name, n.wikidata_id) for n in g2.nodes()) == sorted(
            (n.id, n.label, n.name, n.wikidata_id) for n in g.nodes()
        )
        assert sorted(map(tuple.__repr__, map(lambda e: (e.src, e.dst, e.rel, e.weight), g2.edges()))) == sorted(
            map(tuple.__repr__, map(lambda e: (e.src, e.dst, e.rel, e.weight), g.edges()))
        )

    def test_edge_table_round_trip(self, tmp_path):
        g = self.sample()
        p = tmp_path / "edges.tsv"
        p.write_bytes(export_graph(g, "edge-table"))
        g2 = load_dataset(str(p))
        # ids, labels, edges, weights survive; names do not
        incident = {"acme.com", "milling", "ohio"}
        assert set(n.id for n in g2.nodes()) == incident
        assert {n.id: n.label for n in g2.nodes()} == {n.id: n.label for n in g.nodes()}
        assert sorted((e.src, e.dst, e.rel, e.weight) for e in g2.edges()) == sorted(
            (e.src, e.dst, e.rel, e.weight) for e in g.edges()
        )

    def test_node_table_round_trip(self, tmp_path):
        g = self.sample()
        p = tmp_path / "nodes.tsv"
        p.write_bytes(export_graph(g, "node-table"))
        g2 = load_dataset(str(p))
        assert sorted((n.id, n.label, n.name, n.wikidata_id) for n in g2.nodes()) == sorted(
            (n.id, n.label, n.name, n.wikidata_id) for n in g.nodes()
        )
        assert g2.edge_count() == 0


_SAFE = st.text(alphabet="abcdefghij", min_size=1, max_size=6)


@st.composite
def random_graphs(draw, with_isolated=True):
    g = Graph()
    n_m = draw(st.integers(1, 4))
    n_s = draw(st.integers(1, 4))
    mans = [f"m{i}.{draw(_SAFE)}" for i in range(n_m)]
    svcs = [f"s{i} {draw(_SAFE)}" for i in range(n_s)]
    for m in mans:
        g.add_node(Node(id=m, label=NodeLabel.MANUFACTURER, name=m))
    for s in svcs:
        g.add_node(Node(id=s, label=NodeLabel.SERVICE, name=s))
    for m in mans:
        for s in svcs:
            if draw(st.booleans()):
                g.add_edge(Edge(m, s, RelationType.PROVIDES, draw(st.floats(0, 1, allow_nan=False))))
    if not with_isolated:
        for m in mans:
            if not g.out_edges(m, RelationType.PROVIDES):
                g.add_edge(Edge(m, svcs[0], RelationType.PROVIDES, 1.0))
        for s in svcs:
            if not g.in_edges(s, RelationType.PROVIDES):
                g.add_edge(Edge(mans[0], s, RelationType.PROVIDES, 1.0))
    return g.freeze()


@settings(max_examples=40, deadline=None)
@given(random_graphs())
def test_canonical_round_trip_property(tmp_path_factory, g):
    p = tmp_path_factory.mktemp("rt") / "g.jsonl"
    p.write_bytes(export_graph(g, "canonical-records"))
    g2 = load_dataset(str(p))
    assert sorted((n.id, n.label, n.name) for n in g2.nodes()) == sorted(
        (n.id, n.label, n.name) for n in g.nodes()
    )
    assert sorted((e.src, e.dst, e.rel, e.weight) for e in g2.edges()) == sorted(
        (e.src, e.dst, e.rel, e.weight) for e in g.edges()
    )


@settings(max_examples=40, deadline=None)
@given(random_graphs(with_isolated=False))
def test_edge_table_round_trip_property(tmp_path_factory, g):
    p = tmp_path_factory.mktemp("rt") / "g.tsv"
    p.write_bytes(export_graph(g, "edge-table"))
    g2 = load_dataset(str(p))
    assert {n.id: n.label for n in g2.nodes()} == {n.id: n.label for n in g.nodes()}
    assert sorted((e.src, e.dst, e.rel, e.weight) for e in g2.edges()) == sorted(
        (e.src, e.dst, e.rel, e.weight) for e in g.edges()
    )


def test_export_formats_constant():
    assert set(EXPORT_FORMATS) == {"canonical-records", "edge-table", "node-table"}
