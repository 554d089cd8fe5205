import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graftool.errors import GraphError
from graftool.graph import Graph, canonical_text, from_native, to_native
from graftool.model import parse_model
from graftool.values import EnumValue

MODEL = """
enum Color { red, green, blue }
node class A { x:int; name:string; c:Color; }
node class B extends A { y:float; }
edge class E { w:int; }
"""


@pytest.fixture
def tg():
    return parse_model(MODEL)


@pytest.fixture
def g(tg):
    return Graph(tg)


def test_add_node_and_defaults(g):
    n = g.add_node("A")
    assert g.count_elements("Node") == 1
    assert g.get_attr(n, "x") == 0
    assert g.get_attr(n, "name") == ""
    assert g.get_attr(n, "c") == EnumValue("Color", "red")


def test_ids_are_fresh(g):
    assert g.add_node("A") != g.add_node("A")


def test_add_node_unknown_type(g):
    with pytest.raises(GraphError, match="unknown type"):
        g.add_node("NoSuchType")


def test_add_node_rejects_edge_type(g):
    with pytest.raises(GraphError, match="edge type"):
        g.add_node("E")


def test_self_loop(g):
    n = g.add_node("A")
    e = g.add_edge("E", n, n)
    assert g.source(e) == g.target(e) == n


def test_parallel_edges(g):
    a, b = g.add_node("A"), g.add_node("A")
    e1 = g.add_edge("E", a, b)
    e2 = g.add_edge("E", a, b)
    assert e1 != e2
    assert g.count_elements("E") == 2


def test_add_edge_dead_endpoint(g):
    a, b = g.add_node("A"), g.add_node("A")
    g.delete_node(a)
    with pytest.raises(GraphError):
        g.add_edge("E", a, b)


def test_delete_isolated_node(g):
    n = g.add_node("A")
    assert g.delete_node(n) == 0


def test_delete_node_with_self_loop(g):
    n = g.add_node("A")
    g.add_edge("E", n, n)
    assert g.delete_node(n) == 1


def test_delete_hub_counts_spokes(g):
    # Star fixture: count the edges before deleting the hub.
    hub = g.add_node("A")
    k = 5
    for _ in range(k):
        leaf = g.add_node("A")
        g.add_edge("E", hub, leaf)
    assert len(g.out_edges(hub)) == k
    assert g.delete_node(hub) == k
    g.check_consistency()


def test_dead_id_access(g):
    n = g.add_node("A")
    g.delete_node(n)
    with pytest.raises(GraphError):
        g.get_attr(n, "x")
    with pytest.raises(GraphError):
        g.delete_node(n)


def test_retype_preserves_shared_attribute(g):
    n = g.add_node("A")
    g.set_attr(n, "x", 5)
    g.retype(n, "B")
    assert g.get_attr(n, "x") == 5
    assert g.get_attr(n, "y") == 0.0


def test_retype_to_unrelated_defaults(tg):
    local = parse_model("node class A { x:int; } node class C { z:int; }")
    g = Graph(local)
    n = g.add_node("A")
    g.set_attr(n, "x", 5)
    g.retype(n, "C")
    with pytest.raises(GraphError):
        g.get_attr(n, "x")
    assert g.get_attr(n, "z") == 0


def test_retype_keeps_incidences(g):
    a, b = g.add_node("A"), g.add_node("A")
    e = g.add_edge("E", a, b)
    before = (g.out_edges(a), g.in_edges(b))
    assert g.retype(a, "B") == a
    assert (g.out_edges(a), g.in_edges(b)) == before
    assert g.source(e) == a


def test_retype_kind_mismatch(g):
    n = g.add_node("A")
    with pytest.raises(GraphError):
        g.retype(n, "E")


def test_attr_roundtrip_and_kind_check(g):
    n = g.add_node("A")
    g.set_attr(n, "name", "hello\n\"world\"")
    assert g.get_attr(n, "name") == "hello\n\"world\""
    with pytest.raises(GraphError):
        g.set_attr(n, "x", "not an int")
    with pytest.raises(GraphError):
        g.set_attr(n, "x", True)  # bool is not an int here
    with pytest.raises(GraphError):
        g.get_attr(n, "nope")


def test_count_modes(g):
    for _ in range(3):
        g.add_node("A")
    for _ in range(2):
        g.add_node("B")
    assert g.count_elements("A", "with-subtypes") == 5
    assert g.count_elements("A", "exact") == 3
    assert g.count_elements("Node") == 5


def test_count_empty(g):
    assert g.count_elements("A") == 0


def test_swap_edge_endpoints(g):
    a, b = g.add_node("A"), g.add_node("A")
    e = g.add_edge("E", a, b)
    g.swap_edge_endpoints(e)
    assert g.source(e) == b and g.target(e) == a
    g.check_consistency()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["add_a", "add_b", "edge", "del_node", "del_edge"]),
                          st.integers(0, 7), st.integers(0, 7)), max_size=40))
def test_shadow_list_oracle(ops):
    # Independent shadow bookkeeping of live elements; count_elements over
    # the roots must always agree with it.
    tg = parse_model(MODEL)
    g = Graph(tg)
    live_nodes: list[int] = []
    live_edges: list[int] = []
    for op, i, j in ops:
        if op == "add_a":
            live_nodes.append(g.add_node("A"))
        elif op == "add_b":
            live_nodes.append(g.add_node("B"))
        elif op == "edge" and live_nodes:
            src = live_nodes[i % len(live_nodes)]
            trg = live_nodes[j % len(live_nodes)]
            live_edges.append(g.add_edge("E", src, trg))
        elif op == "del_node" and live_nodes:
            victim = live_nodes.pop(i % len(live_nodes))
            g.delete_node(victim)
            live_edges = [e for e in live_edges if g.is_live(e)]
        elif op == "del_edge" and live_edges:
            g.delete_edge(live_edges.pop(i % len(live_edges)))
        assert g.count_elements("Node", "with-subtypes") == len(live_nodes)
        assert g.count_elements("Edge", "with-subtypes") == len(live_edges)
        g.check_consistency()


def _sample_graph(tg):
    g = Graph(tg)
    a = g.add_node("A")
    b = g.add_node("B")
    g.set_attr(a, "name", "weird \"chars\"\t\n\\ here")
    g.set_attr(b, "y", 2.5)
    g.set_attr(b, "c", EnumValue("Color", "blue"))
    e = g.add_edge("E", a, b)
    g.set_attr(e, "w", -3)
    g.add_edge("E", b, b)
    return g


def test_native_roundtrip_bit_exact(tg):
    g = _sample_graph(tg)
    text = to_native(g)
    g2 = from_native(text, tg)
    assert to_native(g2) == text
    assert canonical_text(g2) == canonical_text(g)


def test_canonical_ignores_id_gaps(tg):
    g1 = _sample_graph(tg)
    g2 = Graph(tg)
    filler = [g2.add_node("A") for _ in range(4)]
    for n in filler:
        g2.delete_node(n)
    a = g2.add_node("A")
    b = g2.add_node("B")
    g2.set_attr(a, "name", "weird \"chars\"\t\n\\ here")
    g2.set_attr(b, "y", 2.5)
    g2.set_attr(b, "c", EnumValue("Color", "blue"))
    e = g2.add_edge("E", a, b)
    g2.set_attr(e, "w", -3)
    g2.add_edge("E", b, b)
    assert canonical_text(g1) == canonical_text(g2)


def test_canonical_type_map(tg):
    g = _sample_graph(tg)
    mapped = canonical_text(g, type_map={"A": "X"})
    assert "node 0 X" in mapped
