import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrel.errors import GraphParseError, GraphValidationError, ReferentialIntegrityError
from metrel.graph import NodeAttrs, VersionedGraph, dumps, graph_summary, load_graph, reverse

from graphs import CHAIN, build


def test_minimal_file():
    g = load_graph(b"graph demo 1.0\nnode a pkg\n")
    assert (len(g.nodes), len(g.edges)) == (1, 0)
    assert g.artifact == "demo" and g.version == "1.0"


def test_duplicate_edges_collapse():
    g = load_graph(b"graph demo 1\nnode a p\nnode b p\nedge a b\nedge a b\n")
    assert g.edges == {("a", "b")}


def test_unknown_endpoint():
    with pytest.raises(ReferentialIntegrityError, match="'c'"):
        load_graph(b"graph demo 1\nnode a p\nedge a c\n")


def test_self_loop_rejected():
    with pytest.raises(GraphValidationError):
        load_graph(b"graph demo 1\nnode a p\nedge a a\n")


def test_comments_and_blank_lines():
    text = b"# leading comment\n\ngraph x 2.0  # trailing\nnode a p marker=final val=WMC:17\n   \nnode b q\nedge a b # uses\n"
    g = load_graph(text)
    assert g.nodes["a"].markers == {"final": True}
    assert g.nodes["a"].semantic_values == {"WMC": 17}
    assert g.edges == {("a", "b")}


def test_explicit_false_marker_differs_from_absent():
    g = load_graph(b"graph x 1\nnode a p marker=final:0\nnode b p\n")
    assert g.nodes["a"].markers == {"final": False}
    assert "final" not in g.nodes["b"].markers


@pytest.mark.parametrize(
    "text, line, column",
    [
        (b"node a p\n", 1, 1),
        (b"graph x 1\nnode a\n", 2, 1),
        (b"graph x 1\nnode a p bogus\n", 2, 10),
        (b"graph x 1\nnode a p val=WMC:x\n", 2, 10),
        (b"graph x 1\nnode a p marker=shiny\n", 2, 10),
        (b"graph x 1\nnode a p\nnode a p\n", 3, 6),
        (b"graph x 1\nvertex a\n", 2, 1),
        (b"graph x 1\nedge a\n", 2, 1),
        (b"graph x 1\ngraph x 2\n", 2, 1),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(GraphParseError) as err:
        load_graph(text)
    assert err.value.line == line
    assert err.value.column == column


def test_empty_input_is_parse_error():
    with pytest.raises(GraphParseError):
        load_graph(b"")


def test_invalid_utf8():
    with pytest.raises(GraphParseError):
        load_graph(b"graph x 1\nnode \xff p\n")


def test_reverse_examples():
    assert reverse(build([("a", "b")])).edges == {("b", "a")}
    two_cycle = build([("a", "b"), ("b", "a")])
    assert reverse(two_cycle).edges == two_cycle.edges
    g = build(CHAIN, packages={"a": "x"})
    assert reverse(reverse(g)) == g
    assert reverse(g).nodes == g.nodes


def test_summary():
    g = build([("a", "b"), ("b", "c")], packages={"a": "p1", "b": "p1", "c": "p2"})
    s = graph_summary(g)
    assert (s.types, s.packages, s.edges) == (3, 2, 2)
    empty = VersionedGraph("e", "1", {}, frozenset())
    s = graph_summary(empty)
    assert (s.types, s.packages, s.edges) == (0, 0, 0)


def test_fixture_of_corpus_minimum_scale(fixtures_dir):
    g = load_graph(fixtures_dir / "min42.graph")
    # counted independently from the file text
    text = (fixtures_dir / "min42.graph").read_text()
    declared = {line.split()[1] for line in text.splitlines() if line.startswith("node ")}
    assert len(declared) == 42
    assert graph_summary(g).types == 42


node_ids = st.text(alphabet="abcdefgh.$_0123", min_size=1, max_size=6)


@st.composite
def graphs(draw):
    ids = draw(st.lists(node_ids, min_size=0, max_size=8, unique=True))
    nodes = {}
    for v in ids:
        markers = draw(st.dictionaries(st.sampled_from(["final", "abstract", "pool"]), st.booleans(), max_size=3))
        vals = draw(st.dictionaries(st.sampled_from(["DIT", "WMC"]), st.integers(0, 500), max_size=2))
        nodes[v] = NodeAttrs(draw(st.sampled_from(["p", "q.r", "s"])), markers, vals)
    pairs = [(s, t) for s in ids for t in ids if s != t]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=15)) if pairs else set()
    return VersionedGraph("art", draw(st.sampled_from(["1", "1.2", "20.0-b11"])), nodes, frozenset(edges))


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_round_trip(g):
    assert load_graph(dumps(g).encode()) == g


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_reverse_preserves_sizes(g):
    r = reverse(g)
    assert len(r.nodes) == len(g.nodes) and len(r.edges) == len(g.edges)
    assert r.nodes == g.nodes
    assert graph_summary(g).types == len(set(g.nodes))
