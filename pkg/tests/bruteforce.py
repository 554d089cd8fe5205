"""Independent brute-force match enumerator used as the matcher oracle.

Enumerates every assignment of pattern elements to graph elements with
itertools.product and filters by type, injectivity (with hom exemptions),
endpoint consistency, and conditions. No search plan, no backtracking, and
its own expression evaluator, so it shares no logic with the engine's
matcher beyond the graph accessors.
"""

from __future__ import annotations

import itertools

from graftool.graph import Graph
from graftool.ruleast import (
    AttrRef,
    Binary,
    BoolLit,
    EdgeClause,
    EnumLit,
    FloatLit,
    IntLit,
    Rule,
    StrLit,
    Unary,
    VarRef,
)
from graftool.values import EnumValue


def brute_force_bindings(g: Graph, rule: Rule, inputs=None) -> list[dict[str, int]]:
    """All valid top-level bindings for a construct-free pattern."""
    body = rule.pattern
    assert not list(body.constructs()), "oracle handles flat patterns only"
    decls = body.local_decls()
    names = list(decls)
    params = {}
    scalar_params = set()
    for param, value in zip(rule.params, inputs or []):
        params[param.name] = value
        if not param.is_element:
            scalar_params.add(param.name)
    candidates = []
    for name in names:
        kind, type_name = decls[name]
        pool = g.nodes() if kind == "node" else g.edges()
        candidates.append([x for x in pool
                           if g.types.is_subtype(g.element_type(x), type_name)])
    homs = body.hom_groups()

    def exempt(a: str, b: str) -> bool:
        return any(a in grp and b in grp for grp in homs)

    found = []
    for combo in itertools.product(*candidates):
        env = dict(params)
        env.update(zip(names, combo))
        element_names = [n for n in env if n not in scalar_params]
        ok = True
        for a, b in itertools.combinations(element_names, 2):
            if env[a] == env[b] and not exempt(a, b):
                ok = False
                break
        if not ok:
            continue
        for item in body.element_clauses():
            if isinstance(item, EdgeClause):
                eid = env[item.edge.name]
                if g.source(eid) != env[item.src.name] or \
                        g.target(eid) != env[item.trg.name]:
                    ok = False
                    break
        if not ok:
            continue
        for cond in body.conditions():
            if _eval(g, env, cond.expr) is not True:
                ok = False
                break
        if ok:
            found.append(dict(zip(names, combo)))
    return found


def _eval(g: Graph, env, expr):
    if isinstance(expr, (IntLit, FloatLit, StrLit, BoolLit)):
        return expr.value
    if isinstance(expr, EnumLit):
        return EnumValue(expr.enum, expr.item)
    if isinstance(expr, AttrRef):
        return g.get_attr(env[expr.elem], expr.attr)
    if isinstance(expr, VarRef):
        return env[expr.name]
    if isinstance(expr, Unary):
        v = _eval(g, env, expr.operand)
        return (not v) if expr.op == "!" else (-v)
    if isinstance(expr, Binary):
        a = _eval(g, env, expr.left)
        if expr.op == "&&":
            return a and _eval(g, env, expr.right)
        if expr.op == "||":
            return a or _eval(g, env, expr.right)
        b = _eval(g, env, expr.right)
        table = {
            "+": lambda: a + b,
            "-": lambda: a - b,
            "*": lambda: a * b,
            "/": lambda: _trunc_div(a, b),
            "%": lambda: a - _trunc_div(a, b) * b,
            "==": lambda: a == b,
            "!=": lambda: a != b,
            "<": lambda: a < b,
            "<=": lambda: a <= b,
            ">": lambda: a > b,
            ">=": lambda: a >= b,
        }
        return table[expr.op]()
    raise AssertionError(expr)


def _trunc_div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q = abs(a) // abs(b)
        return q if (a < 0) == (b < 0) else -q
    return a / b
