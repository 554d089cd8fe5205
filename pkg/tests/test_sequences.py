import pytest

from graftool.errors import IterationCapError, SequenceError, SequenceSyntaxError
from graftool.graph import Graph
from graftool.model import parse_model
from graftool.ruleparser import parse_rules
from graftool.sequences import (
    AllBracket,
    AndSeq,
    ElemRef,
    ExecEnv,
    OrSeq,
    Plus,
    RuleCall,
    Star,
    ThenRight,
    VarArg,
    execute,
    parse_sequence,
)

MODEL = """
node class IntResult { _result:int; }
node class N { tag:string; }
"""

TG = parse_model(MODEL, name="m")

RULES = parse_rules(
    """
    using m;

    rule createIntResult : (IntResult) {
        replace {
            res:IntResult;
            eval { res._result = 0; }
            return (res);
        }
    }

    rule countNodes(res:IntResult) {
        n:N;
        modify { eval { res._result = res._result + 1; } }
    }

    rule emitInt {
        ir:IntResult;
        replace { emit("<int>", ir._result, "</int>"); }
    }

    rule addNode {
        replace { n:N; }
    }

    rule dropNode {
        n:N;
        replace { }
    }

    rule neverMatches {
        n:N;
        if { n.tag == "no such tag"; }
        modify { }
    }

    rule alwaysTrue {
        modify { }
    }
    """,
    None, lambda _n: TG)


def env_with(n_nodes=0):
    g = Graph(TG)
    for _ in range(n_nodes):
        g.add_node("N")
    return ExecEnv(g, RULES, validate=True)


def run(env, text):
    return execute(env, parse_sequence(text, RULES))


# --- parsing -------------------------------------------------------------------


def test_parse_then_right_shape():
    expr = parse_sequence("(res)=createIntResult ;> [countNodes(res)] ;> [emitInt]",
                          RULES)
    assert isinstance(expr, ThenRight)
    assert isinstance(expr.left, ThenRight)
    assert isinstance(expr.left.left, RuleCall)
    assert expr.left.left.outs == ("res",)
    inner = expr.left.right
    assert isinstance(inner, AllBracket)
    assert inner.call.args == (VarArg("res"),)
    assert isinstance(expr.right, AllBracket)


def test_parse_star():
    expr = parse_sequence("addNode*", RULES)
    assert isinstance(expr, Star)
    assert isinstance(expr.child, RuleCall)


def test_parse_precedence_and_before_or():
    expr = parse_sequence("addNode & dropNode | alwaysTrue", RULES)
    assert isinstance(expr, OrSeq)
    assert not expr.lazy
    assert isinstance(expr.left, AndSeq)


def test_parse_group_overrides():
    expr = parse_sequence("addNode & (dropNode | alwaysTrue)", RULES)
    assert isinstance(expr, AndSeq)
    assert isinstance(expr.right, OrSeq)


def test_parse_plus_binds_tighter_than_and():
    expr = parse_sequence("addNode+ && dropNode*", RULES)
    assert isinstance(expr, AndSeq) and expr.lazy
    assert isinstance(expr.left, Plus)
    assert isinstance(expr.right, Star)


def test_parse_unknown_rule_rejected():
    with pytest.raises(SequenceSyntaxError, match="unknown rule"):
        parse_sequence("frobnicate", RULES)


def test_parse_arity_checked():
    with pytest.raises(SequenceSyntaxError, match="argument"):
        parse_sequence("countNodes", RULES)


def test_parse_syntax_error_located():
    with pytest.raises(SequenceSyntaxError):
        parse_sequence("addNode ;> ;> dropNode", RULES)


# --- execution -----------------------------------------------------------------


def test_rule_call_true_iff_matched():
    env = env_with(1)
    assert run(env, "dropNode") is True
    assert run(env, "dropNode") is False


def test_star_always_true_zero_applications():
    env = env_with(3)
    assert run(env, "neverMatches*") is True
    assert env.graph.count_elements("N") == 3


def test_plus_requires_one():
    env = env_with(0)
    assert run(env, "neverMatches+") is False
    env2 = env_with(2)
    assert run(env2, "dropNode+") is True
    assert env2.graph.count_elements("N") == 0


def test_star_applies_until_failure():
    env = env_with(5)
    assert run(env, "dropNode*") is True
    assert env.graph.count_elements("N") == 0


def test_lazy_or_short_circuits_observably():
    env = env_with(0)
    assert run(env, "alwaysTrue || addNode") is True
    assert env.graph.count_elements("N") == 0  # right side not executed


def test_strict_or_executes_both():
    env = env_with(0)
    assert run(env, "alwaysTrue | addNode") is True
    assert env.graph.count_elements("N") == 1


def test_lazy_and_short_circuits():
    env = env_with(0)
    assert run(env, "neverMatches && addNode") is False
    assert env.graph.count_elements("N") == 0


def test_strict_and_executes_both():
    env = env_with(0)
    assert run(env, "neverMatches & addNode") is False
    assert env.graph.count_elements("N") == 1


def test_strict_lazy_agree_on_results():
    # With side-effect-free operands the four combinations agree pairwise.
    for left, right in (("alwaysTrue", "alwaysTrue"), ("alwaysTrue", "neverMatches"),
                        ("neverMatches", "alwaysTrue"),
                        ("neverMatches", "neverMatches")):
        strict_and = run(env_with(1), f"{left} & {right}")
        lazy_and = run(env_with(1), f"{left} && {right}")
        strict_or = run(env_with(1), f"{left} | {right}")
        lazy_or = run(env_with(1), f"{left} || {right}")
        assert strict_and == lazy_and
        assert strict_or == lazy_or


def test_then_right_returns_right_result():
    env = env_with(1)
    assert run(env, "dropNode ;> neverMatches") is False
    env2 = env_with(2)
    assert run(env2, "neverMatches ;> dropNode") is True


def test_count_pipeline_with_variable():
    env = env_with(4)
    assert run(env, "(res)=createIntResult ;> [countNodes(res)] ;> [emitInt]")
    assert env.emitted == ["<int>4</int>"]
    assert env.graph.count_elements("IntResult") == 0  # emitInt deletes it


def test_out_assignment_and_variable_passing():
    env = env_with(2)
    run(env, "(res)=createIntResult")
    ref = env.vars["res"]
    assert isinstance(ref, ElemRef)
    assert env.graph.element_type(ref.id) == "IntResult"
    run(env, "[countNodes(res)]")
    assert env.graph.get_attr(ref.id, "_result") == 2


def test_poisoned_variable_read():
    env = env_with(0)
    run(env, "(res)=createIntResult")
    env.graph.delete_node(env.vars["res"].id)
    with pytest.raises(SequenceError, match="deleted"):
        run(env, "[countNodes(res)]")


def test_unset_variable_read():
    env = env_with(0)
    with pytest.raises(SequenceError, match="not set"):
        run(env, "[countNodes(nope)]")


def test_iteration_cap_is_error_not_failure():
    env = env_with(0)
    env.max_iter = 10
    with pytest.raises(IterationCapError):
        run(env, "addNode*")


def test_all_bracket_false_when_no_match():
    env = env_with(0)
    assert run(env, "[dropNode]") is False


def test_all_bracket_in_args_read_once():
    # The variable is read at call time; all applications share the value.
    env = env_with(3)
    run(env, "(res)=createIntResult ;> [countNodes(res)]")
    assert env.graph.get_attr(env.vars["res"].id, "_result") == 3
