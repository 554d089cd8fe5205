"""Backtracking pattern matcher.

Matching is isomorphic by default: distinct structural pattern elements bind
distinct graph elements unless a hom group exempts the pair. Negative and
independent bodies are application conditions, not structure; their local
elements match homomorphically against everything already bound (so a NAC
like "no target node" is satisfied by a self loop), while staying injective
among themselves.

Search order is static: left to right over the declared elements, preferring
edges connected to something already bound; candidates enumerate in ascending
element id. Two runs over equal graphs yield identical match lists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .errors import EvalError, MatchError
from .graph import Graph
from .ruleast import (
    AlternativeClause,
    AttrRef,
    Binary,
    BoolLit,
    EdgeClause,
    EnumLit,
    Expr,
    FloatLit,
    IndependentClause,
    IntLit,
    IteratedClause,
    NegativeClause,
    NodeClause,
    PatternBody,
    Rule,
    StrLit,
    Unary,
    VarRef,
    expr_idents,
)
from .values import EnumValue


@dataclass
class AltChoice:
    case_index: int
    case_name: str
    frame: "MatchFrame"


@dataclass
class MatchFrame:
    """Bindings of one pattern body plus results of its nested constructs."""

    body: PatternBody = field(repr=False)
    bindings: dict[str, int] = field(default_factory=dict)
    nested: list[object] = field(default_factory=list)  # AltChoice | list[MatchFrame] | None

    def all_ids(self) -> set[int]:
        out = set(self.bindings.values())
        for res in self.nested:
            if isinstance(res, AltChoice):
                out |= res.frame.all_ids()
            elif isinstance(res, list):
                for sub in res:
                    out |= sub.all_ids()
        return out

    def named_bindings(self) -> list[tuple[str, int]]:
        """Flattened (pattern name, element id) pairs, anonymous skipped."""
        out = [(n, v) for n, v in self.bindings.items() if not n.startswith("$")]
        for res in self.nested:
            if isinstance(res, AltChoice):
                out.extend(res.frame.named_bindings())
            elif isinstance(res, list):
                for sub in res:
                    out.extend(sub.named_bindings())
        return out


@dataclass
class Match:
    rule: Rule
    frame: MatchFrame
    inputs: dict[str, object]

    def bound_ids(self) -> set[int]:
        ids = self.frame.all_ids()
        for value in self.inputs.values():
            if isinstance(value, int) and not isinstance(value, bool):
                ids.add(value)
        return ids

    def named_bindings(self) -> list[tuple[str, int]]:
        return self.frame.named_bindings()

    def is_valid(self, g: Graph) -> bool:
        return all(g.is_live(i) for i in self.bound_ids())


def find_matches(g: Graph, rule: Rule, inputs: list | None = None,
                 limit: int | None = None) -> list[Match]:
    """All matches of `rule` in deterministic order, or the first `limit`."""
    env = _bind_inputs(g, rule, inputs or [])
    scalars = frozenset(p.name for p in rule.params if not p.is_element)
    frames = _match_body(g, rule.pattern, env, [], iso_enclosing=True,
                         forbidden=frozenset(), scalar_names=scalars)
    if limit is not None:
        frames = itertools.islice(frames, limit)
    return [Match(rule, frame, dict(env)) for frame in frames]


def _bind_inputs(g: Graph, rule: Rule, inputs: list) -> dict[str, object]:
    if len(inputs) != len(rule.params):
        raise MatchError(f"rule {rule.name} takes {len(rule.params)} input(s), "
                         f"got {len(inputs)}")
    env: dict[str, object] = {}
    for param, value in zip(rule.params, inputs):
        if param.is_element:
            if isinstance(value, bool) or not isinstance(value, int):
                raise MatchError(f"input {param.name} must be a graph element")
            if not g.is_live(value):
                raise MatchError(f"input {param.name} references a deleted element")
            actual = g.element_type(value)
            want_kind = g.types.kind_of(param.type_name)
            got_kind = "node" if g.is_node(value) else "edge"
            if want_kind != got_kind or not g.types.is_subtype(actual, param.type_name):
                raise MatchError(f"input {param.name}: {actual} is not a "
                                 f"{param.type_name}")
        else:
            _check_scalar_input(param, value)
        env[param.name] = value
    return env


def _check_scalar_input(param, value) -> None:
    base = param.scalar_kind.base
    ok = {
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float": lambda v: isinstance(v, float),
        "boolean": lambda v: isinstance(v, bool),
        "string": lambda v: isinstance(v, str),
    }[base](value)
    if not ok:
        raise MatchError(f"input {param.name} must be {base}, got {value!r}")


# --- search plan ----------------------------------------------------------------


def _build_plan(body: PatternBody, pre_bound: set[str]):
    """Static step list binding every locally declared element."""
    decls = body.local_decls()
    steps: list[tuple] = []
    bound = set(pre_bound)
    pending: list = list(body.element_clauses())

    def edge_ready(clause: EdgeClause) -> tuple | None:
        if clause.edge.name in bound:
            return ("edge", clause, "bound")
        if clause.src.name in bound:
            return ("edge", clause, "src")
        if clause.trg.name in bound:
            return ("edge", clause, "trg")
        return None

    while pending:
        chosen = None
        for clause in pending:
            if isinstance(clause, EdgeClause):
                step = edge_ready(clause)
                if step is not None:
                    chosen = (clause, step)
                    break
        if chosen is None:
            clause = pending[0]
            if isinstance(clause, NodeClause):
                if clause.ref.name in bound or not clause.ref.is_decl:
                    pending.pop(0)
                    continue
                chosen = (clause, ("node", clause.ref.name, clause.ref.type_name))
            else:
                chosen = (clause, ("edge", clause, "scan"))
        clause, step = chosen
        pending.remove(clause)
        steps.append(step)
        if isinstance(clause, EdgeClause):
            bound.update({clause.edge.name, clause.src.name, clause.trg.name})
        else:
            bound.add(clause.ref.name)
    # Declared nodes not covered by any step (already bound via an edge) are fine;
    # declared nodes never mentioned in steps still need scans.
    for name, (kind, type_name) in decls.items():
        if kind == "node" and name not in bound:
            steps.append(("node", name, type_name))
            bound.add(name)
    return steps, decls


# --- body matching ----------------------------------------------------------------


def _match_body(g: Graph, body: PatternBody, enclosing: dict[str, object],
                enclosing_homs: list[frozenset[str]], iso_enclosing: bool,
                forbidden: frozenset[int],
                scalar_names: frozenset[str] = frozenset()) -> Iterator[MatchFrame]:
    homs = enclosing_homs + body.hom_groups()
    steps, decls = _build_plan(body, set(enclosing))
    local: dict[str, int] = {}
    conditions = [(cond, expr_idents(cond.expr)) for cond in body.conditions()]
    checked: set[int] = set()

    def hom_exempt(a: str, b: str) -> bool:
        return any(a in group and b in group for group in homs)

    def conflicts(name: str, gid: int) -> bool:
        for other, val in local.items():
            if val == gid and other != name and not hom_exempt(name, other):
                return True
        if iso_enclosing:
            for other, val in enclosing.items():
                if other not in scalar_names and val == gid \
                        and not hom_exempt(name, other):
                    return True
        return False

    def lookup(name: str):
        if name in local:
            return local[name]
        return enclosing.get(name)

    def type_ok(name: str, gid: int) -> bool:
        kind, declared = decls[name]
        actual = g.element_type(gid)
        return g.types.is_subtype(actual, declared)

    def try_bind(name: str, gid: int) -> bool:
        if gid in forbidden or not type_ok(name, gid) or conflicts(name, gid):
            return False
        local[name] = gid
        return True

    def conds_ok() -> bool:
        env = dict(enclosing)
        env.update(local)
        for idx, (cond, idents) in enumerate(conditions):
            if idx in checked:
                continue
            if idents <= set(env):
                checked.add(idx)
                if eval_expr(g, env, cond.expr) is not True:
                    return False
        return True

    def run(step_idx: int) -> Iterator[MatchFrame]:
        if step_idx == len(steps):
            if conds_ok():
                yield from _run_constructs()
            return
        step = steps[step_idx]
        newly: list[str] = []
        checked_before = set(checked)

        def undo():
            for n in newly:
                local.pop(n, None)
            checked.clear()
            checked.update(checked_before)

        if step[0] == "node":
            _, name, _type_name = step
            for gid in g.nodes_of_type(_type_name):
                if try_bind(name, gid):
                    newly.append(name)
                    if conds_ok():
                        yield from run(step_idx + 1)
                undo()
                newly.clear()
            return

        _, clause, via = step
        edge_name = clause.edge.name
        if via == "bound":
            candidates = [lookup(edge_name)]
        elif via == "src":
            candidates = [e for e in g.out_edges(lookup(clause.src.name))]
        elif via == "trg":
            candidates = [e for e in g.in_edges(lookup(clause.trg.name))]
        else:
            declared = clause.edge.type_name or "Edge"
            candidates = g.edges_of_type(declared)

        for eid in candidates:
            ok = True
            if via != "bound":
                if edge_name in decls:
                    if not try_bind(edge_name, eid):
                        continue
                    newly.append(edge_name)
                else:
                    bound_val = lookup(edge_name)
                    if bound_val != eid:
                        continue
            for endpoint, actual in ((clause.src, g.source(eid)),
                                     (clause.trg, g.target(eid))):
                name = endpoint.name
                current = lookup(name)
                if current is not None:
                    if current != actual:
                        ok = False
                        break
                else:
                    if name in decls and try_bind(name, actual):
                        newly.append(name)
                    else:
                        ok = False
                        break
            if ok and conds_ok():
                yield from run(step_idx + 1)
            undo()
            newly.clear()

    def _run_constructs() -> Iterator[MatchFrame]:
        env = dict(enclosing)
        env.update(local)
        nested: list[object] = []
        for item in body.constructs():
            if isinstance(item, NegativeClause):
                hit = next(iter(_match_body(g, item.body, env, homs,
                                            iso_enclosing=False,
                                            forbidden=frozenset(),
                                            scalar_names=scalar_names)), None)
                if hit is not None:
                    return
                nested.append(None)
            elif isinstance(item, IndependentClause):
                hit = next(iter(_match_body(g, item.body, env, homs,
                                            iso_enclosing=False,
                                            forbidden=frozenset(),
                                            scalar_names=scalar_names)), None)
                if hit is None:
                    return
                nested.append(None)
            elif isinstance(item, AlternativeClause):
                choice = None
                for idx, case in enumerate(item.cases):
                    hit = next(iter(_match_body(g, case.body, env, homs,
                                                iso_enclosing=True,
                                                forbidden=forbidden,
                                                scalar_names=scalar_names)), None)
                    if hit is not None:
                        choice = AltChoice(idx, case.name, hit)
                        break
                if choice is None:
                    return
                nested.append(choice)
            elif isinstance(item, IteratedClause):
                consumed = set(forbidden)
                frames: list[MatchFrame] = []
                while True:
                    hit = next(iter(_match_body(g, item.body, env, homs,
                                                iso_enclosing=True,
                                                forbidden=frozenset(consumed),
                                                scalar_names=scalar_names)), None)
                    if hit is None:
                        break
                    frames.append(hit)
                    consumed |= hit.all_ids()
                if item.require_one and not frames:
                    return
                nested.append(frames)
        yield MatchFrame(body, dict(local), nested)

    yield from run(0)


# --- expression evaluation ---------------------------------------------------------


def eval_expr(g: Graph, env: dict[str, object], expr: Expr):
    """Strict evaluation; && and || short-circuit, / and % are C-like on ints."""
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, FloatLit):
        return expr.value
    if isinstance(expr, StrLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, EnumLit):
        return EnumValue(expr.enum, expr.item)
    if isinstance(expr, AttrRef):
        elem = env[expr.elem]
        return g.get_attr(elem, expr.attr)
    if isinstance(expr, VarRef):
        return env[expr.name]
    if isinstance(expr, Unary):
        val = eval_expr(g, env, expr.operand)
        if expr.op == "!":
            return not val
        return -val
    if isinstance(expr, Binary):
        op = expr.op
        if op == "&&":
            return eval_expr(g, env, expr.left) and eval_expr(g, env, expr.right)
        if op == "||":
            return eval_expr(g, env, expr.left) or eval_expr(g, env, expr.right)
        left = eval_expr(g, env, expr.left)
        right = eval_expr(g, env, expr.right)
        return _binary(op, left, right)
    raise EvalError(f"cannot evaluate {expr!r}")


def _binary(op: str, left, right):
    if op == "+":
        if isinstance(left, str) and isinstance(right, str):
            return left + right
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if isinstance(left, int) and isinstance(right, int):
            return _int_div(left, right)
        if right == 0.0:
            raise EvalError("division by zero")
        return left / right
    if op == "%":
        return left - _int_div(left, right) * right
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise EvalError(f"unknown operator {op}")


def _int_div(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q
