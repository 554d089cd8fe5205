import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bruteforce import brute_force_bindings
from graftool.errors import EvalError, MatchError
from graftool.graph import Graph
from graftool.matcher import eval_expr, find_matches
from graftool.model import parse_model
from graftool.ruleast import StrLit, VarRef
from graftool.ruleparser import parse_rules

MODEL = """
node class N { x:int; label:string; }
node class M extends N;
edge class E { w:int; }
edge class F extends E;
"""

TG = parse_model(MODEL, name="m")


def rules(text):
    return parse_rules("using m;\n" + text, None, lambda _name: TG)


def rule(text, name="r"):
    return rules(text).rule(name)


def bindings(matches):
    return [m.frame.bindings for m in matches]


def test_empty_pattern_one_match():
    g = Graph(TG)
    g.add_node("N")
    r = rule("rule r { modify { } }")
    assert len(find_matches(g, r)) == 1
    assert find_matches(g, r)[0].frame.bindings == {}


def test_single_node_pattern_counts_nodes():
    g = Graph(TG)
    ids = [g.add_node("N") for _ in range(5)]
    r = rule("rule r { n:Node; modify { } }")
    got = bindings(find_matches(g, r))
    assert got == [{"n": i} for i in ids]


def test_hom_example_self_loop():
    # One node with one self loop: a --> b has no injective match, one
    # homomorphic match.
    g = Graph(TG)
    n = g.add_node("N")
    g.add_edge("E", n, n)
    without = rule("rule r { a:Node; b:Node; a --> b; modify { } }")
    with_hom = rule("rule r { a:Node; b:Node; hom(a, b); a --> b; modify { } }")
    assert find_matches(g, without) == []
    got = find_matches(g, with_hom)
    assert len(got) == 1
    assert got[0].frame.bindings["a"] == got[0].frame.bindings["b"] == n


def test_subtype_matching():
    g = Graph(TG)
    g.add_node("N")
    g.add_node("M")
    r_base = rule("rule r { n:N; modify { } }")
    r_sub = rule("rule r { n:M; modify { } }")
    assert len(find_matches(g, r_base)) == 2
    assert len(find_matches(g, r_sub)) == 1


def test_edge_type_and_direction():
    g = Graph(TG)
    a, b = g.add_node("N"), g.add_node("N")
    g.add_edge("E", a, b)
    forward = rule("rule r { x:N; y:N; x -e:E-> y; modify { } }")
    backward = rule("rule r { x:N; y:N; y -e:E-> x; modify { } }")
    fm = find_matches(g, forward)
    assert [(m.frame.bindings["x"], m.frame.bindings["y"]) for m in fm] == [(a, b)]
    bm = find_matches(g, backward)
    assert [(m.frame.bindings["x"], m.frame.bindings["y"]) for m in bm] == [(b, a)]


def test_condition_filters():
    g = Graph(TG)
    ids = [g.add_node("N") for _ in range(4)]
    for i, n in enumerate(ids):
        g.set_attr(n, "x", i)
    r = rule("rule r { n:N; if { n.x % 2 == 0; } modify { } }")
    got = [m.frame.bindings["n"] for m in find_matches(g, r)]
    assert got == [ids[0], ids[2]]


def test_negative_blocks_match():
    g = Graph(TG)
    a, b = g.add_node("N"), g.add_node("N")
    g.add_edge("E", a, b)
    r = rule("rule r { n:N; negative { n -:E-> o:N; } modify { } }")
    got = [m.frame.bindings["n"] for m in find_matches(g, r)]
    assert got == [b]


def test_negative_is_homomorphic_against_enclosing():
    # A self loop must satisfy "has a target node" even though the target
    # equals the already matched source.
    g = Graph(TG)
    n = g.add_node("N")
    g.add_edge("E", n, n)
    r = rule(
        """
        rule r {
            s:N;
            s -e:E-> s2:N;
            hom(s, s2);
            negative { s -e2:E-> t:N; if { t.x == 0; } }
            modify { }
        }
        """)
    # The negative finds the loop itself (t = s allowed homomorphically).
    assert find_matches(g, r) == []


def test_independent_requires_extension():
    g = Graph(TG)
    a, b, c = g.add_node("N"), g.add_node("N"), g.add_node("N")
    g.add_edge("E", a, b)
    r = rule("rule r { n:N; independent { n -:E-> o:N; } modify { } }")
    got = [m.frame.bindings["n"] for m in find_matches(g, r)]
    assert got == [a]


def test_alternative_records_first_case():
    g = Graph(TG)
    a, b = g.add_node("N"), g.add_node("N")
    g.add_edge("E", a, b)
    g.add_edge("E", b, a)
    r = rule(
        """
        rule r {
            n:N;
            alternative {
                out { n -:E-> o:N; }
                inc { i:N -:E-> n; }
            }
            modify { }
        }
        """)
    matches = find_matches(g, r)
    assert len(matches) == 2
    choices = [m.frame.nested[0] for m in matches]
    assert all(c.case_name == "out" for c in choices)


def test_alternative_fails_when_no_case():
    g = Graph(TG)
    g.add_node("N")
    r = rule(
        """
        rule r {
            n:N;
            alternative { out { n -:E-> o:N; } }
            modify { }
        }
        """)
    assert find_matches(g, r) == []


def test_iterated_greedy_disjoint_instances():
    g = Graph(TG)
    hub = g.add_node("N")
    leaves = [g.add_node("N") for _ in range(3)]
    for leaf in leaves:
        g.add_edge("E", hub, leaf)
    r = rule(
        """
        rule r {
            h:N;
            if { h.x == 0; }
            iterated { h -e:E-> l:N; }
            modify { }
        }
        """)
    matches = find_matches(g, r)
    # Every node matches h (x defaults to 0); for the hub the iterated eats
    # all three spokes, for leaves it collects zero instances.
    by_h = {m.frame.bindings["h"]: m.frame.nested[0] for m in matches}
    assert len(by_h[hub]) == 3
    seen_edges = {f.bindings["e"] for f in by_h[hub]}
    assert seen_edges == set(g.edges())
    assert all(len(by_h[leaf]) == 0 for leaf in leaves)


def test_iterated_maximality():
    # No further disjoint instance may extend the collected set.
    g = Graph(TG)
    hub = g.add_node("N")
    for _ in range(4):
        leaf = g.add_node("N")
        g.add_edge("E", hub, leaf)
    r = rule("rule r { h:N; iterated { h -e:E-> l:N; } modify { } }",)
    m = find_matches(g, r, limit=1)[0]
    frames = m.frame.nested[0]
    used = set()
    for f in frames:
        used |= f.all_ids()
    remaining = [e for e in g.out_edges(hub)
                 if e not in used and g.target(e) not in used]
    assert remaining == []


def test_multiple_requires_one_instance():
    g = Graph(TG)
    g.add_node("N")
    r = rule("rule r { h:N; multiple { h -e:E-> l:N; } modify { } }")
    assert find_matches(g, r) == []


def test_input_params_prebound():
    g = Graph(TG)
    a, b = g.add_node("N"), g.add_node("N")
    g.add_edge("E", a, b)
    r = rule("rule r(start:N) { start -e:E-> o:N; modify { } }")
    got = find_matches(g, r, inputs=[a])
    assert len(got) == 1 and got[0].frame.bindings["o"] == b
    assert find_matches(g, r, inputs=[b]) == []


def test_input_param_iso_conflict_needs_hom():
    g = Graph(TG)
    a = g.add_node("N")
    plain = rule("rule r(p:N) { n:N; modify { } }")
    hom = rule("rule r(p:N) { n:N; hom(p, n); modify { } }")
    assert find_matches(g, plain, inputs=[a]) == []
    assert len(find_matches(g, hom, inputs=[a])) == 1


def test_input_validation():
    g = Graph(TG)
    a = g.add_node("N")
    g.delete_node(a)
    r = rule("rule r(p:N) { modify { } }")
    with pytest.raises(MatchError, match="deleted"):
        find_matches(g, r, inputs=[a])
    with pytest.raises(MatchError, match="takes"):
        find_matches(g, r)
    scal = rule("rule r(var k:int) { modify { } }")
    with pytest.raises(MatchError, match="must be int"):
        find_matches(g, scal, inputs=["nope"])


def test_limit_and_determinism():
    g = Graph(TG)
    for _ in range(6):
        g.add_node("N")
    r = rule("rule r { a:Node; b:Node; modify { } }")
    first = find_matches(g, r)
    second = find_matches(g, r)
    assert bindings(first) == bindings(second)
    assert bindings(find_matches(g, r, limit=3)) == bindings(first)[:3]


def _random_graph(seed, max_nodes=6, max_edges=8):
    rng = random.Random(seed)
    g = Graph(TG)
    nodes = [g.add_node(rng.choice(["N", "M"])) for _ in range(rng.randint(1, max_nodes))]
    for _ in range(rng.randint(0, max_edges)):
        g.add_edge(rng.choice(["E", "F"]), rng.choice(nodes), rng.choice(nodes))
    return g


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_negative_independent_duality(seed):
    g = _random_graph(seed)
    base = rule("rule r { a:N; b:N; a -e:E-> b; modify { } }")
    neg = rule("rule r { a:N; b:N; a -e:E-> b; negative { b -f:E-> c:N; } modify { } }")
    ind = rule("rule r { a:N; b:N; a -e:E-> b; independent { b -f:E-> c:N; } modify { } }")
    n_base = len(find_matches(g, base))
    assert len(find_matches(g, neg)) + len(find_matches(g, ind)) == n_base


FLAT_PATTERNS = [
    "rule r { a:Node; modify { } }",
    "rule r { a:N; b:M; modify { } }",
    "rule r { a:Node; b:Node; c:Node; modify { } }",
    "rule r { a:Node; b:Node; hom(a, b); modify { } }",
    "rule r { a:Node -e:E-> b:Node; modify { } }",
    "rule r { a:Node -e:E-> b:Node; hom(a, b); modify { } }",
    "rule r { a:Node -e:F-> a2:Node; hom(a, a2); modify { } }",
    "rule r { a:Node; a -e:E-> a; modify { } }",
    "rule r { a:N -e:E-> b:N; b -f:E-> c:N; hom(a, c); modify { } }",
    "rule r { a:N; b:N; a -e:Edge-> b; if { a.x <= b.x; } modify { } }",
    "rule r { a:N; if { a.x % 2 == 0 && a.label != \"z\"; } modify { } }",
]


@pytest.mark.parametrize("src", FLAT_PATTERNS)
def test_matches_equal_brute_force(src):
    r = rule(src)
    for seed in range(12):
        g = _random_graph(seed)
        for n in g.nodes():
            g.set_attr(n, "x", seed * 7 % 5)
        got = [m.frame.bindings for m in find_matches(g, r)]
        expected = brute_force_bindings(g, r)
        assert sorted(got, key=sorted_items) == sorted(expected, key=sorted_items)


def sorted_items(d):
    return tuple(sorted(d.items()))


# --- expression evaluation ------------------------------------------------------


def test_eval_concatenation():
    g = Graph(TG)
    from graftool.ruleast import Binary
    expr = Binary("+", StrLit("Hello "), VarRef("name"))
    assert eval_expr(g, {"name": "World"}, expr) == "Hello World"


def test_eval_modulo():
    g = Graph(TG)
    from graftool.ruleast import Binary, IntLit
    assert eval_expr(g, {}, Binary("%", IntLit(7), IntLit(3))) == 1


def test_eval_division_by_zero():
    g = Graph(TG)
    from graftool.ruleast import Binary, IntLit
    with pytest.raises(EvalError, match="division by zero"):
        eval_expr(g, {}, Binary("/", IntLit(1), IntLit(0)))


def test_eval_truncating_division():
    g = Graph(TG)
    from graftool.ruleast import Binary, IntLit, Unary
    neg7 = Unary("-", IntLit(7))
    assert eval_expr(g, {}, Binary("/", neg7, IntLit(2))) == -3
    assert eval_expr(g, {}, Binary("%", neg7, IntLit(2))) == -1
    assert eval_expr(g, {}, Binary("/", IntLit(7), Unary("-", IntLit(2)))) == -3


def test_eval_string_comparison_is_lexicographic():
    g = Graph(TG)
    from graftool.ruleast import Binary
    assert eval_expr(g, {"a": "abc", "b": "abd"},
                     Binary("<", VarRef("a"), VarRef("b"))) is True
