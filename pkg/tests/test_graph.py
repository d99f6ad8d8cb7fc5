import pytest
from hypothesis import given, strategies as st

from mskg.errors import (
    CycleIntroduced,
    DuplicateId,
    FrozenGraph,
    MissingEndpoint,
    SchemaViolation,
    UnknownNode,
    WeightOutOfRange,
    WrongLabel,
)
from mskg.graph import (
    CATEGORY_ROOTS,
    Edge,
    Graph,
    Node,
    NodeLabel,
    RelationType,
    build_graph,
    canonical_manufacturer_id,
    canonical_name_id,
)


def mk(label, ident, name=None):
    return Node(id=ident, label=label, name=name or ident)


def small_graph():
    g = Graph()
    g.add_node(mk(NodeLabel.MANUFACTURER, "acme.com"))
    g.add_node(mk(NodeLabel.SERVICE, "machining"))
    g.add_node(mk(NodeLabel.SERVICE, "milling"))
    g.add_node(mk(NodeLabel.CERTIFICATION, "iso 9001", "ISO 9001"))
    g.add_node(mk(NodeLabel.LOCATION, "ohio", "Ohio"))
    g.add_edge(Edge("milling", "machining", RelationType.SUBCLASS_OF))
    g.add_edge(Edge("acme.com", "milling", RelationType.PROVIDES, 0.9))
    g.add_edge(Edge("acme.com", "iso 9001", RelationType.CERTIFIED_WITH))
    g.add_edge(Edge("acme.com", "ohio", RelationType.LOCATED_IN))
    return g


class TestCanonicalIds:
    def test_manufacturer_strips_scheme_and_www(self):
        assert canonical_manufacturer_id("https://www.Acme.COM/about") == "acme.com"
        assert canonical_manufacturer_id("acme.com") == "acme.com"
        assert canonical_manufacturer_id("http://acme.com") == "acme.com"

    def test_name_folds_case_and_whitespace(self):
        assert canonical_name_id("  Heat   Treatment ") == "heat treatment"


class TestNodesAndEdges:
    def test_add_node_idempotent(self):
        g = Graph()
        n = mk(NodeLabel.SERVICE, "milling")
        g.add_node(n)
        g.add_node(mk(NodeLabel.SERVICE, "milling"))
        assert g.node_count() == 1

    def test_conflicting_reinsert_rejected(self):
        g = Graph()
        g.add_node(mk(NodeLabel.SERVICE, "milling"))
        with pytest.raises(DuplicateId):
            g.add_node(mk(NodeLabel.LOCATION, "milling"))

    def test_wikidata_id_only_on_services(self):
        Node(id="milling", label=NodeLabel.SERVICE, name="milling", wikidata_id="Q1361810")
        with pytest.raises(SchemaViolation):
            Node(id="ohio", label=NodeLabel.LOCATION, name="Ohio", wikidata_id="Q1397")

    def test_signature_enforced(self):
        g = small_graph()
        with pytest.raises(SchemaViolation):
            g.add_edge(Edge("machining", "acme.com", RelationType.PROVIDES))
        with pytest.raises(SchemaViolation):
            g.add_edge(Edge("acme.com", "ohio", RelationType.CERTIFIED_WITH))

    def test_missing_endpoint(self):
        g = small_graph()
        with pytest.raises(MissingEndpoint):
            g.add_edge(Edge("acme.com", "turning", RelationType.PROVIDES))

    def test_weight_range(self):
        g = small_graph()
        with pytest.raises(WeightOutOfRange):
            g.add_edge(Edge("acme.com", "machining", RelationType.PROVIDES, 1.2))
        with pytest.raises(WeightOutOfRange):
            g.add_edge(Edge("acme.com", "machining", RelationType.PROVIDES, -0.1))

    def test_duplicate_edge_keeps_max_weight(self):
        g = small_graph()
        before = g.edge_count(RelationType.PROVIDES)
        g.add_edge(Edge("acme.com", "milling", RelationType.PROVIDES, 0.4))
        assert g.out_edges("acme.com", RelationType.PROVIDES)["milling"] == 0.9
        g.add_edge(Edge("acme.com", "milling", RelationType.PROVIDES, 0.95))
        assert g.out_edges("acme.com", RelationType.PROVIDES)["milling"] == 0.95
        assert g.edge_count(RelationType.PROVIDES) == before
        assert g.in_edges("milling", RelationType.PROVIDES)["acme.com"] == 0.95

    def test_self_loop_rejected(self):
        g = small_graph()
        with pytest.raises(CycleIntroduced):
            g.add_edge(Edge("machining", "machining", RelationType.SUBCLASS_OF))

    def test_two_cycle_rejected(self):
        g = small_graph()
        with pytest.raises(CycleIntroduced):
            g.add_edge(Edge("machining", "milling", RelationType.SUBCLASS_OF))

    def test_long_cycle_rejected(self):
        g = Graph()
        for s in ("a", "b", "c"):
            g.add_node(mk(NodeLabel.SERVICE, s))
        g.add_edge(Edge("a", "b", RelationType.SUBCLASS_OF))
        g.add_edge(Edge("b", "c", RelationType.SUBCLASS_OF))
        with pytest.raises(CycleIntroduced):
            g.add_edge(Edge("c", "a", RelationType.SUBCLASS_OF))


class TestFreeze:
    def test_freeze_blocks_mutation(self):
        g = small_graph().freeze()
        assert g.frozen
        with pytest.raises(FrozenGraph):
            g.add_node(mk(NodeLabel.SERVICE, "turning"))
        with pytest.raises(FrozenGraph):
            g.add_edge(Edge("acme.com", "machining", RelationType.PROVIDES))

    def test_reads_unchanged_by_freeze(self):
        g = small_graph()
        before = (
            sorted(n.id for n in g.nodes()),
            sorted((e.src, e.dst, e.rel.value, e.weight) for e in g.edges()),
        )
        g.freeze()
        after = (
            sorted(n.id for n in g.nodes()),
            sorted((e.src, e.dst, e.rel.value, e.weight) for e in g.edges()),
        )
        assert before == after


class TestRollup:
    def hierarchy(self):
        g = Graph()
        for s in CATEGORY_ROOTS:
            g.add_node(mk(NodeLabel.SERVICE, s))
        for s in ("milling", "cnc milling", "welding", "plating"):
            g.add_node(mk(NodeLabel.SERVICE, s))
        g.add_edge(Edge("milling", "machining", RelationType.SUBCLASS_OF))
        g.add_edge(Edge("cnc milling", "milling", RelationType.SUBCLASS_OF))
        g.add_edge(Edge("welding", "joining", RelationType.SUBCLASS_OF))
        # dual-parent service
        g.add_edge(Edge("welding", "assembly", RelationType.SUBCLASS_OF))
        return g

    def test_root_maps_to_itself(self):
        g = self.hierarchy()
        assert g.rollup_to_categories("machining") == {"machining"}

    def test_transitive_rollup(self):
        g = self.hierarchy()
        assert g.rollup_to_categories("cnc milling") == {"machining"}

    def test_dual_parent_rollup(self):
        g = self.hierarchy()
        assert g.rollup_to_categories("welding") == {"joining", "assembly"}

    def test_unparented_service_is_other(self):
        g = self.hierarchy()
        assert g.rollup_to_categories("plating") == {"other"}

    def test_rollup_rejects_non_service(self):
        g = small_graph()
        with pytest.raises(WrongLabel):
            g.rollup_to_categories("acme.com")
        with pytest.raises(UnknownNode):
            g.rollup_to_categories("missing")

    def test_subclass_closure(self):
        g = self.hierarchy()
        assert g.subclass_closure("machining") == {"machining", "milling", "cnc milling"}
        assert g.is_subclass_of("cnc milling", "machining")
        assert g.is_subclass_of("machining", "machining")
        assert not g.is_subclass_of("machining", "milling")


@st.composite
def service_dags(draw):
    """Random subclass_of forests over category roots plus extra services."""
    n_extra = draw(st.integers(min_value=0, max_value=12))
    names = [f"svc{i}" for i in range(n_extra)]
    nodes = list(CATEGORY_ROOTS) + names
    edges = []
    for i, name in enumerate(names):
        # parents only among earlier nodes keeps it acyclic
        pool = list(CATEGORY_ROOTS) + names[:i]
        k = draw(st.integers(min_value=0, max_value=min(2, len(pool))))
        for parent in draw(st.permutations(pool)).copy()[:k]:
            edges.append((name, parent))
    return nodes, edges


@given(service_dags())
def test_rollup_union_of_parents(dag):
    nodes, edges = dag
    g = Graph()
    for s in nodes:
        g.add_node(mk(NodeLabel.SERVICE, s))
    for child, parent in edges:
        g.add_edge(Edge(child, parent, RelationType.SUBCLASS_OF))
    parents_of = {}
    for child, parent in edges:
        parents_of.setdefault(child, set()).add(parent)
    for s in nodes:
        got = g.rollup_to_categories(s)
        if s in CATEGORY_ROOTS:
            assert s in got
        parents = parents_of.get(s, set())
        if parents:
            expected = set()
            for p in parents:
                expected |= g.rollup_to_categories(p)
            if s in CATEGORY_ROOTS:
                expected.add(s)
            expected.discard("other")
            if not expected:
                expected = {"other"}
            assert got == expected
        elif s not in CATEGORY_ROOTS:
            assert got == {"other"}


def test_build_graph_convenience():
    g = build_graph(
        [mk(NodeLabel.MANUFACTURER, "a.com"), mk(NodeLabel.SERVICE, "milling")],
        [Edge("a.com", "milling", RelationType.PROVIDES, 0.8)],
    )
    assert g.node_count(NodeLabel.MANUFACTURER) == 1
    assert g.edge_count(RelationType.PROVIDES) == 1
