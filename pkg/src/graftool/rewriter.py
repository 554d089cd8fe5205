"""Applies a rule's rewrite part to a match.

Execution order is fixed: (1) create, (2) retype, (3) eval plus return
caching, (4) emit, (5) delete with SPO incident-edge removal. Nested
iterated/multiple instances and chosen alternative cases run their own
rewrite parts; their units execute in rule-text order, the rule's own
rewrite part last, and every phase sweeps all units before the next phase
starts. Deleting is therefore always the final structural effect, and
values read by eval/emit/return see the post-create, pre-delete graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import RewriteError
from .graph import Graph
from .matcher import AltChoice, Match, MatchFrame, eval_expr, find_matches
from .ruleast import (
    AlternativeClause,
    DeleteStmt,
    EmitStmt,
    EvalStmt,
    IteratedClause,
    ReturnStmt,
    RewritePart,
    Rule,
    RwEdgeClause,
    RwNodeClause,
)
from .values import EnumValue, format_literal


@dataclass
class RewriteOutcome:
    returned: list = field(default_factory=list)
    emitted: list[str] = field(default_factory=list)
    created: list[int] = field(default_factory=list)
    deleted: list[int] = field(default_factory=list)
    retyped: list[int] = field(default_factory=list)


@dataclass
class AllOutcome:
    applied: int = 0
    emitted: list[str] = field(default_factory=list)
    returned: list | None = None  # out values of the last application


class ApplyObserver:
    """Callback surface for debuggers; every hook is optional."""

    def match_found(self, match: Match) -> None:
        pass

    def pre_apply(self, match: Match) -> None:
        pass

    def post_apply(self, match: Match, outcome: RewriteOutcome) -> None:
        pass


@dataclass
class _Unit:
    rewrite: RewritePart
    frame: MatchFrame
    env: dict[str, object]


def _collect_units(rule: Rule, match: Match) -> list[_Unit]:
    units: list[_Unit] = []

    def walk(frame: MatchFrame, enclosing: dict[str, object],
             rewrite: RewritePart | None):
        env = dict(enclosing)
        env.update(frame.bindings)
        for item, res in zip(frame.body.constructs(), frame.nested):
            if isinstance(item, AlternativeClause) and isinstance(res, AltChoice):
                case = item.cases[res.case_index]
                walk(res.frame, env, case.rewrite)
            elif isinstance(item, IteratedClause) and isinstance(res, list):
                for sub in res:
                    walk(sub, env, item.rewrite)
        if rewrite is not None:
            units.append(_Unit(rewrite, frame, env))

    walk(match.frame, dict(match.inputs), rule.rewrite)
    return units


def apply(g: Graph, rule: Rule, match: Match, validate: bool = False) -> RewriteOutcome:
    """Apply one match; raises RewriteError if any bound element died."""
    if not match.is_valid(g):
        raise RewriteError(f"stale match for rule {rule.name}")
    outcome = RewriteOutcome()
    units = _collect_units(rule, match)

    # (1) create
    for unit in units:
        for item in unit.rewrite.items:
            if isinstance(item, RwNodeClause):
                _prepare_node_ref(g, item.ref, unit.env, outcome)
            elif isinstance(item, RwEdgeClause):
                _prepare_node_ref(g, item.src, unit.env, outcome)
                _prepare_node_ref(g, item.trg, unit.env, outcome)
                edge = item.edge
                if edge.retype_of is not None:
                    unit.env[edge.name] = unit.env[edge.retype_of]
                elif edge.type_name is not None:
                    eid = g.add_edge(edge.type_name, unit.env[item.src.name],
                                     unit.env[item.trg.name])
                    unit.env[edge.name] = eid
                    outcome.created.append(eid)

    # (2) retype
    for unit in units:
        for item in unit.rewrite.items:
            if isinstance(item, RwNodeClause):
                _retype_node_ref(g, item.ref, unit.env, outcome)
            elif isinstance(item, RwEdgeClause):
                _retype_node_ref(g, item.src, unit.env, outcome)
                _retype_node_ref(g, item.trg, unit.env, outcome)
                edge = item.edge
                if edge.retype_of is not None:
                    eid = unit.env[edge.name]
                    want = (unit.env[item.src.name], unit.env[item.trg.name])
                    actual = (g.source(eid), g.target(eid))
                    if want == actual:
                        g.retype(eid, edge.type_name)
                    elif want == (actual[1], actual[0]):
                        g.retype(eid, edge.type_name)
                        g.swap_edge_endpoints(eid)
                    else:
                        raise RewriteError(
                            f"retyped edge {edge.name} must keep or swap the "
                            "endpoints of its matched edge")
                    outcome.retyped.append(eid)

    # (3) eval, then cache returns
    for unit in units:
        for item in unit.rewrite.items:
            if isinstance(item, EvalStmt):
                for assign in item.assignments:
                    elem = unit.env[assign.elem]
                    value = eval_expr(g, unit.env, assign.expr)
                    declared = g.types.attr_kind(g.element_type(elem), assign.attr)
                    if declared.base == "float" and isinstance(value, int) \
                            and not isinstance(value, bool):
                        value = float(value)
                    g.set_attr(elem, assign.attr, value)
    top = units[-1]
    ret = top.rewrite.return_stmt()
    if ret is not None:
        outcome.returned = [eval_expr(g, top.env, expr) for expr in ret.exprs]

    # (4) emit
    for unit in units:
        for item in unit.rewrite.items:
            if isinstance(item, EmitStmt):
                chunk = "".join(emit_text(eval_expr(g, unit.env, arg))
                                for arg in item.args)
                outcome.emitted.append(chunk)

    # (5) delete
    victims: set[int] = set()
    for unit in units:
        if unit.rewrite.mode == "replace":
            kept = unit.rewrite.referenced_names()
            for name, gid in unit.frame.bindings.items():
                if name not in kept:
                    victims.add(gid)
            if validate:
                local_ids = set(unit.frame.bindings.values())
                kept_ids = {unit.env[n] for n in kept if n in unit.frame.bindings}
                dead_ids = {gid for n, gid in unit.frame.bindings.items()
                            if n not in kept}
                assert kept_ids | dead_ids == local_ids
                assert not (set(outcome.created) & local_ids)
        for item in unit.rewrite.items:
            if isinstance(item, DeleteStmt):
                for name in item.names:
                    victims.add(unit.env[name])
    _delete_all(g, victims, outcome)

    if validate:
        g.check_consistency()
    return outcome


def _prepare_node_ref(g: Graph, ref, env: dict[str, object],
                      outcome: RewriteOutcome) -> None:
    if ref.retype_of is not None:
        env[ref.name] = env[ref.retype_of]
    elif ref.type_name is not None:
        nid = g.add_node(ref.type_name)
        env[ref.name] = nid
        outcome.created.append(nid)


def _retype_node_ref(g: Graph, ref, env: dict[str, object],
                     outcome: RewriteOutcome) -> None:
    if ref.retype_of is not None:
        gid = env[ref.name]
        g.retype(gid, ref.type_name)
        outcome.retyped.append(gid)


def _delete_all(g: Graph, victims: set[int], outcome: RewriteOutcome) -> None:
    edge_victims = sorted(v for v in victims if g.is_edge(v))
    node_victims = sorted(v for v in victims if g.is_node(v))
    for eid in edge_victims:
        if g.is_live(eid):
            g.delete_edge(eid)
            outcome.deleted.append(eid)
    for nid in node_victims:
        if not g.is_live(nid):
            continue
        incident = sorted(set(g.out_edges(nid)) | set(g.in_edges(nid)))
        g.delete_node(nid)
        outcome.deleted.extend(incident)
        outcome.deleted.append(nid)


def apply_all(g: Graph, rule: Rule, inputs: list | None = None,
              validate: bool = False,
              observer: ApplyObserver | None = None) -> AllOutcome:
    """Collect all matches first, then apply each, skipping invalidated ones.

    A match any of whose bound elements has been deleted by an earlier
    application is skipped entirely. Returns the applied count, emitted
    chunks in application order, and the out values of the last application.
    """
    matches = find_matches(g, rule, inputs)
    if observer is not None:
        for m in matches:
            observer.match_found(m)
    result = AllOutcome()
    for m in matches:
        if not m.is_valid(g):
            continue
        if observer is not None:
            observer.pre_apply(m)
        outcome = apply(g, rule, m, validate=validate)
        if observer is not None:
            observer.post_apply(m, outcome)
        result.applied += 1
        result.emitted.extend(outcome.emitted)
        if outcome.returned:
            result.returned = outcome.returned
    return result


def emit_text(value) -> str:
    """Text form of a value in emitted output."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, EnumValue):
        return f"{value.enum}::{value.item}"
    return format_literal(value)
