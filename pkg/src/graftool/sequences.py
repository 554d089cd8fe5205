"""Extended graph rewrite sequences: parsing and execution.

Sequence results are booleans: a rule call succeeds iff it matched, an
all-bracket iff at least one collected match was applied. Star loops until
failure and always succeeds; plus additionally demands one success. `&`/`|`
always run both sides, `&&`/`||` short-circuit, and `;>` runs both and
returns the right result. Precedence, tightest first: postfix `*`/`+`,
then `&&`/`&`, then `||`/`|`, then `;>`; all binary operators associate
left. Parentheses group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import IterationCapError, SequenceError, SequenceSyntaxError
from .graph import Graph
from .lexing import TokenStream, tokenize
from .matcher import Match, find_matches
from .rewriter import AllOutcome, ApplyObserver, RewriteOutcome, apply, apply_all
from .ruleast import Rule, RuleSet


@dataclass(frozen=True)
class LitArg:
    value: object


@dataclass(frozen=True)
class VarArg:
    name: str


@dataclass(frozen=True)
class RuleCall:
    name: str
    args: tuple = ()
    outs: tuple[str, ...] = ()


@dataclass(frozen=True)
class AllBracket:
    call: RuleCall


@dataclass(frozen=True)
class Star:
    child: "SequenceExpr"


@dataclass(frozen=True)
class Plus:
    child: "SequenceExpr"


@dataclass(frozen=True)
class AndSeq:
    left: "SequenceExpr"
    right: "SequenceExpr"
    lazy: bool


@dataclass(frozen=True)
class OrSeq:
    left: "SequenceExpr"
    right: "SequenceExpr"
    lazy: bool


@dataclass(frozen=True)
class ThenRight:
    left: "SequenceExpr"
    right: "SequenceExpr"


SequenceExpr = object


def parse_sequence(text: str, rules: RuleSet | None = None) -> SequenceExpr:
    """Parse sequence text; with `rules` given, calls are validated."""
    ts = TokenStream(tokenize(text), error_cls=SequenceSyntaxError)
    expr = _parse_then(ts, rules)
    if not ts.at("EOF"):
        ts.error(f"unexpected {ts.peek().text!r} after sequence")
    return expr


def _parse_then(ts, rules):
    left = _parse_or(ts, rules)
    while ts.accept_sym(";>"):
        left = ThenRight(left, _parse_or(ts, rules))
    return left


def _parse_or(ts, rules):
    left = _parse_and(ts, rules)
    while True:
        if ts.accept_sym("||"):
            left = OrSeq(left, _parse_and(ts, rules), lazy=True)
        elif ts.accept_sym("|"):
            left = OrSeq(left, _parse_and(ts, rules), lazy=False)
        else:
            return left


def _parse_and(ts, rules):
    left = _parse_postfix(ts, rules)
    while True:
        if ts.accept_sym("&&"):
            left = AndSeq(left, _parse_postfix(ts, rules), lazy=True)
        elif ts.accept_sym("&"):
            left = AndSeq(left, _parse_postfix(ts, rules), lazy=False)
        else:
            return left


def _parse_postfix(ts, rules):
    expr = _parse_atom(ts, rules)
    while True:
        if ts.accept_sym("*"):
            expr = Star(expr)
        elif ts.accept_sym("+"):
            expr = Plus(expr)
        else:
            return expr


def _looks_like_assignment(ts) -> bool:
    if not ts.at_sym("("):
        return False
    i = 1
    if ts.peek(i).kind != "IDENT":
        return False
    i += 1
    while ts.peek(i).text == ",":
        i += 1
        if ts.peek(i).kind != "IDENT":
            return False
        i += 1
    return ts.peek(i).text == ")" and ts.peek(i + 1).text == "="


def _parse_atom(ts, rules):
    if _looks_like_assignment(ts):
        ts.expect_sym("(")
        outs = [ts.expect_ident().text]
        while ts.accept_sym(","):
            outs.append(ts.expect_ident().text)
        ts.expect_sym(")")
        ts.expect_sym("=")
        if ts.accept_sym("["):
            call = _parse_call(ts, rules, tuple(outs))
            ts.expect_sym("]")
            return AllBracket(call)
        return _parse_call(ts, rules, tuple(outs))
    if ts.accept_sym("("):
        expr = _parse_then(ts, rules)
        ts.expect_sym(")")
        return expr
    if ts.accept_sym("["):
        call = _parse_call(ts, rules, ())
        ts.expect_sym("]")
        return AllBracket(call)
    return _parse_call(ts, rules, ())


def _parse_call(ts, rules: RuleSet | None, outs: tuple[str, ...]) -> RuleCall:
    name_tok = ts.expect_ident()
    args: list = []
    if ts.accept_sym("("):
        while not ts.accept_sym(")"):
            if args:
                ts.expect_sym(",")
            args.append(_parse_arg(ts))
    call = RuleCall(name_tok.text, tuple(args), outs)
    if rules is not None:
        _validate_call(ts, rules, call, name_tok)
    return call


def _parse_arg(ts):
    tok = ts.peek()
    if tok.kind == "IDENT":
        if tok.text in ("true", "false"):
            ts.next()
            return LitArg(tok.text == "true")
        ts.next()
        return VarArg(tok.text)
    if tok.kind in ("INT", "FLOAT", "STRING"):
        ts.next()
        return LitArg(tok.value)
    if ts.accept_sym("-"):
        num = ts.next()
        if num.kind not in ("INT", "FLOAT"):
            ts.error("expected a number after -", num)
        return LitArg(-num.value)
    ts.error("expected an argument")


def _validate_call(ts, rules: RuleSet, call: RuleCall, name_tok) -> None:
    rule = rules.rules.get(call.name)
    if rule is None:
        ts.error(f"unknown rule {call.name}", name_tok)
    if len(call.args) != len(rule.params):
        ts.error(f"rule {call.name} takes {len(rule.params)} argument(s), "
                 f"got {len(call.args)}", name_tok)
    if call.outs and len(call.outs) != len(rule.outs):
        ts.error(f"rule {call.name} returns {len(rule.outs)} value(s), "
                 f"got {len(call.outs)} assignment target(s)", name_tok)
    for arg, param in zip(call.args, rule.params):
        if isinstance(arg, LitArg):
            if param.is_element:
                ts.error(f"argument for {param.name} must be a variable holding "
                         "a graph element", name_tok)
            base = param.scalar_kind.base
            ok = {"int": lambda v: isinstance(v, int) and not isinstance(v, bool),
                  "float": lambda v: isinstance(v, float),
                  "boolean": lambda v: isinstance(v, bool),
                  "string": lambda v: isinstance(v, str)}[base](arg.value)
            if not ok:
                ts.error(f"argument for {param.name} must be {base}", name_tok)


# --- execution ---------------------------------------------------------------------


@dataclass(frozen=True)
class ElemRef:
    """A graph element held in a sequence variable."""

    id: int


class SequenceHook:
    """Debugger callback surface; hooks may raise SequenceAborted."""

    def match_found(self, rule: Rule, match: Match) -> None:
        pass

    def pre_apply(self, rule: Rule, match: Match) -> None:
        pass

    def post_apply(self, rule: Rule, outcome: RewriteOutcome) -> None:
        pass


@dataclass
class ExecEnv:
    graph: Graph
    rules: RuleSet
    vars: dict[str, object] = field(default_factory=dict)
    emit: object = None  # callable(str); defaults to collecting in .emitted
    hook: SequenceHook | None = None
    max_iter: int = 1_000_000
    validate: bool = False
    emitted: list[str] = field(default_factory=list)

    def send(self, chunk: str) -> None:
        if self.emit is not None:
            self.emit(chunk)
        else:
            self.emitted.append(chunk)


class _HookObserver(ApplyObserver):
    def __init__(self, env: ExecEnv, rule: Rule):
        self.env = env
        self.rule = rule

    def match_found(self, match: Match) -> None:
        self.env.hook.match_found(self.rule, match)

    def pre_apply(self, match: Match) -> None:
        self.env.hook.pre_apply(self.rule, match)

    def post_apply(self, match: Match, outcome: RewriteOutcome) -> None:
        self.env.hook.post_apply(self.rule, outcome)


def execute(env: ExecEnv, expr: SequenceExpr) -> bool:
    """Run a sequence, returning success; errors raise, failure returns False."""
    if isinstance(expr, RuleCall):
        return _exec_call(env, expr)
    if isinstance(expr, AllBracket):
        return _exec_all(env, expr)
    if isinstance(expr, Star):
        _loop(env, expr.child)
        return True
    if isinstance(expr, Plus):
        return _loop(env, expr.child) > 0
    if isinstance(expr, AndSeq):
        left = execute(env, expr.left)
        if expr.lazy and not left:
            return False
        right = execute(env, expr.right)
        return left and right
    if isinstance(expr, OrSeq):
        left = execute(env, expr.left)
        if expr.lazy and left:
            return True
        right = execute(env, expr.right)
        return left or right
    if isinstance(expr, ThenRight):
        execute(env, expr.left)
        return execute(env, expr.right)
    raise SequenceError(f"cannot execute {expr!r}")


def _loop(env: ExecEnv, child: SequenceExpr) -> int:
    iterations = 0
    while True:
        if iterations >= env.max_iter:
            raise IterationCapError(
                f"iteration cap of {env.max_iter} exceeded")
        if not execute(env, child):
            return iterations
        iterations += 1


def _rule_for(env: ExecEnv, call: RuleCall) -> Rule:
    rule = env.rules.rules.get(call.name)
    if rule is None:
        raise SequenceError(f"unknown rule {call.name}")
    if len(call.outs) not in (0, len(rule.outs)):
        raise SequenceError(f"rule {call.name} returns {len(rule.outs)} value(s)")
    return rule


def _resolve_args(env: ExecEnv, call: RuleCall) -> list:
    values = []
    for arg in call.args:
        if isinstance(arg, LitArg):
            values.append(arg.value)
            continue
        if arg.name not in env.vars:
            raise SequenceError(f"variable {arg.name} is not set")
        value = env.vars[arg.name]
        if isinstance(value, ElemRef):
            if not env.graph.is_live(value.id):
                raise SequenceError(f"variable {arg.name} references a deleted "
                                    "element")
            values.append(value.id)
        else:
            values.append(value)
    return values


def _assign_outs(env: ExecEnv, rule: Rule, call: RuleCall, returned) -> None:
    if not call.outs or returned is None:
        return
    for name, decl, value in zip(call.outs, rule.outs, returned):
        env.vars[name] = ElemRef(value) if decl.is_element else value


def _exec_call(env: ExecEnv, call: RuleCall) -> bool:
    rule = _rule_for(env, call)
    args = _resolve_args(env, call)
    matches = find_matches(env.graph, rule, args, limit=1)
    if not matches:
        return False
    match = matches[0]
    if env.hook is not None:
        env.hook.match_found(rule, match)
        env.hook.pre_apply(rule, match)
    outcome = apply(env.graph, rule, match, validate=env.validate)
    if env.hook is not None:
        env.hook.post_apply(rule, outcome)
    for chunk in outcome.emitted:
        env.send(chunk)
    _assign_outs(env, rule, call, outcome.returned or None)
    return True


def _exec_all(env: ExecEnv, bracket: AllBracket) -> bool:
    call = bracket.call
    rule = _rule_for(env, call)
    args = _resolve_args(env, call)
    observer = _HookObserver(env, rule) if env.hook is not None else None
    result: AllOutcome = apply_all(env.graph, rule, args,
                                   validate=env.validate, observer=observer)
    for chunk in result.emitted:
        env.send(chunk)
    _assign_outs(env, rule, call, result.returned)
    return result.applied > 0
