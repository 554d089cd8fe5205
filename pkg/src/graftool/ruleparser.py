"""Parser and static checks for rule files (`.grg` with `#include`d `.gri`).

`#include` directives are spliced textually before lexing; every token keeps
its origin file and line, so errors point at the right place. parse_rules
raises on syntax errors, unresolved names, bad types, and arity problems;
softer semantic findings (kind mismatches, mode violations) come back as
diagnostics from check_rule and, under strict parsing, fail the parse too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import Diagnostic, RuleError
from .lexing import Loc, Token, TokenStream, tokenize
from .model import AttrKind, BOOLEAN, FLOAT, INT, STRING, TypeGraph
from .ruleast import (
    AlternativeCase,
    AlternativeClause,
    AttrRef,
    Binary,
    BoolLit,
    CondClause,
    DeleteStmt,
    EdgeClause,
    EdgePart,
    EmitStmt,
    EnumLit,
    EvalAssign,
    EvalStmt,
    Expr,
    FloatLit,
    HomClause,
    IndependentClause,
    IntLit,
    IteratedClause,
    NegativeClause,
    NodeClause,
    NodeRef,
    OutDecl,
    Param,
    PatternBody,
    PatternItem,
    ReturnStmt,
    RewritePart,
    Rule,
    RuleSet,
    RwEdgeClause,
    RwNodeClause,
    StrLit,
    Unary,
    VarRef,
)

_KEYWORDS = {
    "using", "rule", "var", "replace", "modify", "negative", "independent",
    "alternative", "iterated", "multiple", "hom", "if", "eval", "emit",
    "delete", "return", "true", "false",
}

_SCALARS = {"int": INT, "float": FLOAT, "boolean": BOOLEAN, "string": STRING}


def splice_includes(text: str, filename: str,
                    resolver: Callable[[str], str] | None,
                    _stack: tuple[str, ...] = ()) -> tuple[str, list[tuple[str, int]]]:
    """Inline #include directives, returning text plus per-line origins."""
    if filename in _stack:
        chain = " -> ".join(_stack + (filename,))
        raise RuleError(f"include cycle: {chain}")
    lines: list[str] = []
    origin: list[tuple[str, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            if not stripped.startswith("#include"):
                raise RuleError(f"unknown directive {stripped.split()[0]!r}",
                                lineno, 1, filename)
            rest = stripped[len("#include"):].strip()
            if not (rest.startswith('"') and rest.endswith('"') and len(rest) >= 2):
                raise RuleError("#include expects a quoted file name",
                                lineno, 1, filename)
            name = rest[1:-1]
            if resolver is None:
                raise RuleError(f"cannot resolve #include {name!r}: no resolver",
                                lineno, 1, filename)
            try:
                included = resolver(name)
            except RuleError:
                raise
            except Exception as exc:
                raise RuleError(f"cannot read include {name!r}: {exc}",
                                lineno, 1, filename) from exc
            sub_text, sub_origin = splice_includes(included, name, resolver,
                                                   _stack + (filename,))
            lines.extend(sub_text.splitlines())
            origin.extend(sub_origin)
        else:
            lines.append(line)
            origin.append((filename, lineno))
    return "\n".join(lines), origin


def parse_rules(text: str,
                include_resolver: Callable[[str], str] | None = None,
                model_resolver: Callable[[str], TypeGraph] | None = None,
                filename: str = "<rules>",
                strict: bool = True) -> RuleSet:
    """Parse rule source into a fully resolved RuleSet.

    With strict=True (the default) any error-severity diagnostic fails the
    parse; strict=False keeps the RuleSet so check_rule can report them.
    """
    spliced, origin = splice_includes(text, filename, include_resolver)
    ts = TokenStream(tokenize(spliced, filename, origin), error_cls=RuleError)
    parser = _Parser(ts)
    model_name, raw_rules = parser.parse_file()
    if model_resolver is None:
        raise RuleError(f"cannot resolve model {model_name!r}: no model resolver")
    try:
        tg = model_resolver(model_name)
    except Exception as exc:
        raise RuleError(f"cannot resolve model {model_name!r}: {exc}") from exc
    rules: dict[str, Rule] = {}
    for rule in raw_rules:
        if rule.name in rules:
            _fail(f"duplicate rule name {rule.name}", rule.loc)
        rules[rule.name] = rule
    rs = RuleSet(model_name, tg, rules, filename)
    for rule in rules.values():
        _resolve_rule(rule, tg)
    if strict:
        problems = [d for name in rules for d in check_rule(rs, name)
                    if d.severity == "error"]
        if problems:
            first = problems[0]
            raise RuleError(f"{len(problems)} error(s), first: {first.message}",
                            first.line, first.col, filename, diagnostics=problems)
    return rs


def check_rule(rs: RuleSet, name: str) -> list[Diagnostic]:
    """Semantic diagnostics for one rule; empty list iff well-formed."""
    if name not in rs.rules:
        raise RuleError(f"unknown rule {name}")
    checker = _Checker(rs.types)
    checker.check(rs.rules[name])
    return checker.diagnostics


def _fail(message: str, loc: Loc | None):
    raise RuleError(message, loc.line if loc else None,
                    loc.col if loc else None, loc.file if loc else None)


# --- parsing -------------------------------------------------------------------


class _Parser:
    def __init__(self, ts: TokenStream):
        self.ts = ts
        self._anon = 0

    def _fresh(self) -> str:
        self._anon += 1
        return f"${self._anon}"

    def parse_file(self) -> tuple[str, list[Rule]]:
        ts = self.ts
        ts.expect_word("using")
        model = ts.expect_ident().text
        ts.expect_sym(";")
        rules: list[Rule] = []
        while not ts.at("EOF"):
            if ts.at_word("using"):
                ts.error("only one using clause is allowed")
            rules.append(self.parse_rule())
        return model, rules

    def parse_rule(self) -> Rule:
        ts = self.ts
        ts.expect_word("rule")
        name_tok = self.ident("rule name")
        params: list[Param] = []
        if ts.accept_sym("("):
            while not ts.accept_sym(")"):
                if params:
                    ts.expect_sym(",")
                if ts.accept_word("var"):
                    pname = self.ident("parameter name")
                    ts.expect_sym(":")
                    kind_tok = ts.expect_ident()
                    if kind_tok.text not in _SCALARS:
                        ts.error(f"unknown scalar kind {kind_tok.text!r}", kind_tok)
                    params.append(Param(pname.text, scalar_kind=_SCALARS[kind_tok.text],
                                        loc=pname.loc))
                else:
                    pname = self.ident("parameter name")
                    ts.expect_sym(":")
                    ptype = ts.expect_ident()
                    params.append(Param(pname.text, type_name=ptype.text,
                                        loc=pname.loc))
        outs: list[OutDecl] = []
        if ts.accept_sym(":"):
            ts.expect_sym("(")
            while not ts.accept_sym(")"):
                if outs:
                    ts.expect_sym(",")
                out_tok = ts.expect_ident()
                if out_tok.text in _SCALARS:
                    outs.append(OutDecl(scalar_kind=_SCALARS[out_tok.text]))
                else:
                    outs.append(OutDecl(type_name=out_tok.text))
        ts.expect_sym("{")
        body, rewrite = self.parse_body(top_level=True)
        if rewrite is None:
            ts.error(f"rule {name_tok.text} has no replace or modify part", name_tok)
        return Rule(name_tok.text, tuple(params), tuple(outs), body, rewrite,
                    loc=name_tok.loc)

    def ident(self, what: str) -> Token:
        tok = self.ts.expect_ident()
        if tok.text in _KEYWORDS:
            self.ts.error(f"keyword {tok.text!r} cannot be used as {what}", tok)
        return tok

    def parse_body(self, top_level: bool = False,
                   simple: bool = False) -> tuple[PatternBody, RewritePart | None]:
        """Parse pattern items up to the closing brace.

        `simple` bodies (negative/independent) allow no nested constructs and
        no rewrite part.
        """
        ts = self.ts
        items: list[PatternItem] = []
        rewrite: RewritePart | None = None
        while True:
            if ts.accept_sym("}"):
                break
            if ts.at_word("replace") or ts.at_word("modify"):
                if simple:
                    ts.error("negative/independent bodies cannot rewrite")
                rewrite = self.parse_rewrite()
                ts.expect_sym("}")
                break
            if ts.at_word("if"):
                tok = ts.next()
                ts.expect_sym("{")
                expr = self.parse_expr()
                ts.accept_sym(";")
                ts.expect_sym("}")
                items.append(CondClause(expr, loc=tok.loc))
            elif ts.at_word("hom"):
                tok = ts.next()
                ts.expect_sym("(")
                names = [self.ident("hom element").text]
                while ts.accept_sym(","):
                    names.append(self.ident("hom element").text)
                ts.expect_sym(")")
                ts.expect_sym(";")
                items.append(HomClause(tuple(names), loc=tok.loc))
            elif ts.at_word("negative") or ts.at_word("independent"):
                tok = ts.next()
                if simple:
                    ts.error("nested conditions inside negative/independent "
                             "are not supported", tok)
                ts.expect_sym("{")
                body, _ = self.parse_body(simple=True)
                cls = NegativeClause if tok.text == "negative" else IndependentClause
                items.append(cls(body, loc=tok.loc))
            elif ts.at_word("alternative"):
                tok = ts.next()
                if simple:
                    ts.error("nested constructs inside negative/independent "
                             "are not supported", tok)
                ts.expect_sym("{")
                cases: list[AlternativeCase] = []
                while not ts.accept_sym("}"):
                    case_tok = self.ident("alternative case name")
                    ts.expect_sym("{")
                    body, rw = self.parse_body()
                    cases.append(AlternativeCase(case_tok.text, body, rw,
                                                 loc=case_tok.loc))
                if not cases:
                    ts.error("alternative needs at least one case", tok)
                items.append(AlternativeClause(tuple(cases), loc=tok.loc))
            elif ts.at_word("iterated") or ts.at_word("multiple"):
                tok = ts.next()
                if simple:
                    ts.error("nested constructs inside negative/independent "
                             "are not supported", tok)
                ts.expect_sym("{")
                body, rw = self.parse_body()
                items.append(IteratedClause(body, rw, tok.text == "multiple",
                                            loc=tok.loc))
            elif ts.at_word("eval") or ts.at_word("emit") or ts.at_word("delete") \
                    or ts.at_word("return"):
                ts.error(f"{ts.peek().text!r} is only allowed inside a "
                         "replace or modify part")
            else:
                items.append(self.parse_element_clause())
        return PatternBody(tuple(items)), rewrite

    def parse_element_clause(self):
        src = self.parse_node_ref()
        ts = self.ts
        if ts.accept_sym(";"):
            return NodeClause(src)
        edge = self.parse_edge_part()
        trg = self.parse_node_ref()
        ts.expect_sym(";")
        return EdgeClause(src, edge, trg)

    def parse_node_ref(self) -> NodeRef:
        ts = self.ts
        if ts.at_sym(":"):
            tok = ts.next()
            type_tok = ts.expect_ident()
            retype = self._maybe_retype()
            return NodeRef(self._fresh(), type_tok.text, retype, loc=tok.loc)
        name_tok = self.ident("element name")
        if ts.accept_sym(":"):
            type_tok = ts.expect_ident()
            retype = self._maybe_retype()
            return NodeRef(name_tok.text, type_tok.text, retype, loc=name_tok.loc)
        return NodeRef(name_tok.text, loc=name_tok.loc)

    def _maybe_retype(self) -> str | None:
        ts = self.ts
        if ts.accept_sym("<"):
            inner = self.ident("retype source").text
            ts.expect_sym(">")
            return inner
        return None

    def parse_edge_part(self) -> EdgePart:
        ts = self.ts
        if ts.at_sym("-->"):
            tok = ts.next()
            return EdgePart(self._fresh(), "Edge", loc=tok.loc)
        tok = ts.expect_sym("-")
        name: str | None = None
        type_name: str | None = None
        retype: str | None = None
        if ts.at("IDENT"):
            name = self.ident("edge name").text
        if ts.accept_sym(":"):
            type_name = ts.expect_ident().text
            retype = self._maybe_retype()
        if name is None and type_name is None:
            ts.error("expected edge name or type")
        ts.expect_sym("->")
        return EdgePart(name or self._fresh(), type_name, retype, loc=tok.loc)

    def parse_rewrite(self) -> RewritePart:
        ts = self.ts
        mode = ts.expect_ident().text
        ts.expect_sym("{")
        items: list = []
        while not ts.accept_sym("}"):
            if ts.at_word("eval"):
                ts.next()
                ts.expect_sym("{")
                assigns: list[EvalAssign] = []
                while not ts.accept_sym("}"):
                    elem = self.ident("element name")
                    ts.expect_sym(".")
                    attr = ts.expect_ident().text
                    ts.expect_sym("=")
                    expr = self.parse_expr()
                    ts.expect_sym(";")
                    assigns.append(EvalAssign(elem.text, attr, expr, loc=elem.loc))
                items.append(EvalStmt(tuple(assigns)))
            elif ts.at_word("emit"):
                tok = ts.next()
                ts.expect_sym("(")
                args = [self.parse_expr()]
                while ts.accept_sym(","):
                    args.append(self.parse_expr())
                ts.expect_sym(")")
                ts.expect_sym(";")
                items.append(EmitStmt(tuple(args), loc=tok.loc))
            elif ts.at_word("delete"):
                tok = ts.next()
                ts.expect_sym("(")
                names = [self.ident("element name").text]
                while ts.accept_sym(","):
                    names.append(self.ident("element name").text)
                ts.expect_sym(")")
                ts.expect_sym(";")
                items.append(DeleteStmt(tuple(names), loc=tok.loc))
            elif ts.at_word("return"):
                tok = ts.next()
                ts.expect_sym("(")
                exprs = [self.parse_expr()]
                while ts.accept_sym(","):
                    exprs.append(self.parse_expr())
                ts.expect_sym(")")
                ts.expect_sym(";")
                items.append(ReturnStmt(tuple(exprs), loc=tok.loc))
            else:
                clause = self.parse_element_clause()
                if isinstance(clause, NodeClause):
                    items.append(RwNodeClause(clause.ref))
                else:
                    items.append(RwEdgeClause(clause.src, clause.edge, clause.trg))
        return RewritePart(mode, tuple(items))

    # expressions, precedence climbing

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.ts.at_sym("||"):
            tok = self.ts.next()
            left = Binary("||", left, self.parse_and(), loc=tok.loc)
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self.ts.at_sym("&&"):
            tok = self.ts.next()
            left = Binary("&&", left, self.parse_cmp(), loc=tok.loc)
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.ts.at_sym(op):
                tok = self.ts.next()
                return Binary(op, left, self.parse_add(), loc=tok.loc)
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.ts.at_sym("+") or self.ts.at_sym("-"):
            tok = self.ts.next()
            left = Binary(tok.text, left, self.parse_mul(), loc=tok.loc)
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.ts.at_sym("*") or self.ts.at_sym("/") or self.ts.at_sym("%"):
            tok = self.ts.next()
            left = Binary(tok.text, left, self.parse_unary(), loc=tok.loc)
        return left

    def parse_unary(self) -> Expr:
        ts = self.ts
        if ts.at_sym("!"):
            tok = ts.next()
            return Unary("!", self.parse_unary(), loc=tok.loc)
        if ts.at_sym("-"):
            tok = ts.next()
            return Unary("-", self.parse_unary(), loc=tok.loc)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "INT":
            ts.next()
            return IntLit(tok.value, loc=tok.loc)
        if tok.kind == "FLOAT":
            ts.next()
            return FloatLit(tok.value, loc=tok.loc)
        if tok.kind == "STRING":
            ts.next()
            return StrLit(tok.value, loc=tok.loc)
        if ts.accept_sym("("):
            expr = self.parse_expr()
            ts.expect_sym(")")
            return expr
        if tok.kind == "IDENT":
            if tok.text == "true" or tok.text == "false":
                ts.next()
                return BoolLit(tok.text == "true", loc=tok.loc)
            ts.next()
            if ts.accept_sym("::"):
                item = ts.expect_ident()
                return EnumLit(tok.text, item.text, loc=tok.loc)
            if ts.accept_sym("."):
                attr = ts.expect_ident()
                return AttrRef(tok.text, attr.text, loc=tok.loc)
            if tok.text in _KEYWORDS:
                ts.error(f"keyword {tok.text!r} cannot appear in an expression", tok)
            return VarRef(tok.text, loc=tok.loc)
        ts.error("expected an expression")


# --- name resolution (raises RuleError) ------------------------------------------


@dataclass
class _Sym:
    kind: str       # "node" | "edge" | "scalar"
    type_name: str | None = None
    scalar: AttrKind | None = None
    origin: str = "pattern"  # "param" | "pattern" | "created" | "retyped"


class _Scope:
    def __init__(self, parent: "_Scope | None" = None):
        self.parent = parent
        self.names: dict[str, _Sym] = {}

    def lookup(self, name: str) -> _Sym | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None

    def declare(self, name: str, sym: _Sym, loc: Loc | None):
        if self.lookup(name) is not None:
            _fail(f"duplicate declaration of {name}", loc)
        self.names[name] = sym


def _resolve_rule(rule: Rule, tg: TypeGraph) -> None:
    root = _Scope()
    for p in rule.params:
        if p.is_element:
            if not tg.has_type(p.type_name):
                _fail(f"unknown type {p.type_name}", p.loc)
            root.declare(p.name, _Sym(tg.kind_of(p.type_name), p.type_name,
                                      origin="param"), p.loc)
        else:
            root.declare(p.name, _Sym("scalar", scalar=p.scalar_kind,
                                      origin="param"), p.loc)
    for out in rule.outs:
        if out.is_element and not tg.has_type(out.type_name):
            _fail(f"unknown type {out.type_name}", rule.loc)
    pattern_scope = _resolve_body(rule.pattern, _Scope(root), tg)
    _resolve_rewrite(rule.rewrite, pattern_scope, tg, rule, top_level=True)


def _element_type_checked(tg: TypeGraph, type_name: str, want: str, loc: Loc | None):
    if not tg.has_type(type_name):
        _fail(f"unknown type {type_name}", loc)
    kind = tg.kind_of(type_name)
    if kind != want:
        _fail(f"{type_name} is an {kind} type, expected a {want} type", loc)


def _resolve_node_ref(ref: NodeRef, scope: _Scope, tg: TypeGraph,
                      in_rewrite: bool) -> None:
    if ref.retype_of is not None:
        if not in_rewrite:
            _fail("retyping is only allowed in replace/modify parts", ref.loc)
        _element_type_checked(tg, ref.type_name, "node", ref.loc)
        target = scope.lookup(ref.retype_of)
        if target is None:
            _fail(f"undeclared identifier {ref.retype_of}", ref.loc)
        if target.origin not in ("pattern", "param") or target.kind != "node":
            _fail(f"retype source {ref.retype_of} must be a matched node", ref.loc)
        scope.declare(ref.name, _Sym("node", ref.type_name, origin="retyped"), ref.loc)
    elif ref.type_name is not None:
        _element_type_checked(tg, ref.type_name, "node", ref.loc)
        scope.declare(ref.name, _Sym("node", ref.type_name,
                                     origin="created" if in_rewrite else "pattern"),
                      ref.loc)
    else:
        sym = scope.lookup(ref.name)
        if sym is None:
            _fail(f"undeclared identifier {ref.name}", ref.loc)
        if sym.kind != "node":
            _fail(f"{ref.name} is not a node", ref.loc)


def _resolve_edge_part(edge: EdgePart, scope: _Scope, tg: TypeGraph,
                       in_rewrite: bool) -> None:
    if edge.retype_of is not None:
        if not in_rewrite:
            _fail("retyping is only allowed in replace/modify parts", edge.loc)
        _element_type_checked(tg, edge.type_name, "edge", edge.loc)
        target = scope.lookup(edge.retype_of)
        if target is None:
            _fail(f"undeclared identifier {edge.retype_of}", edge.loc)
        if target.origin not in ("pattern", "param") or target.kind != "edge":
            _fail(f"retype source {edge.retype_of} must be a matched edge", edge.loc)
        scope.declare(edge.name, _Sym("edge", edge.type_name, origin="retyped"),
                      edge.loc)
    elif edge.type_name is not None:
        _element_type_checked(tg, edge.type_name, "edge", edge.loc)
        scope.declare(edge.name, _Sym("edge", edge.type_name,
                                      origin="created" if in_rewrite else "pattern"),
                      edge.loc)
    else:
        sym = scope.lookup(edge.name)
        if sym is None:
            _fail(f"undeclared identifier {edge.name}", edge.loc)
        if sym.kind != "edge":
            _fail(f"{edge.name} is not an edge", edge.loc)


def _resolve_expr(expr: Expr, scope: _Scope, tg: TypeGraph) -> None:
    if isinstance(expr, AttrRef):
        sym = scope.lookup(expr.elem)
        if sym is None:
            _fail(f"undeclared identifier {expr.elem}", expr.loc)
        if sym.kind == "scalar":
            _fail(f"{expr.elem} is a scalar, it has no attributes", expr.loc)
        if not tg.has_attr(sym.type_name, expr.attr):
            _fail(f"type {sym.type_name} has no attribute {expr.attr}", expr.loc)
    elif isinstance(expr, VarRef):
        if scope.lookup(expr.name) is None:
            _fail(f"undeclared identifier {expr.name}", expr.loc)
    elif isinstance(expr, EnumLit):
        if expr.enum not in tg.enums:
            _fail(f"unknown enum {expr.enum}", expr.loc)
        if not any(n == expr.item for n, _ in tg.enums[expr.enum].items):
            _fail(f"enum {expr.enum} has no item {expr.item}", expr.loc)
    elif isinstance(expr, Unary):
        _resolve_expr(expr.operand, scope, tg)
    elif isinstance(expr, Binary):
        _resolve_expr(expr.left, scope, tg)
        _resolve_expr(expr.right, scope, tg)


def _resolve_body(body: PatternBody, scope: _Scope, tg: TypeGraph) -> _Scope:
    for item in body.items:
        if isinstance(item, NodeClause):
            _resolve_node_ref(item.ref, scope, tg, in_rewrite=False)
        elif isinstance(item, EdgeClause):
            _resolve_node_ref(item.src, scope, tg, in_rewrite=False)
            _resolve_edge_part(item.edge, scope, tg, in_rewrite=False)
            _resolve_node_ref(item.trg, scope, tg, in_rewrite=False)
        elif isinstance(item, CondClause):
            _resolve_expr(item.expr, scope, tg)
        elif isinstance(item, HomClause):
            for name in item.names:
                if scope.lookup(name) is None:
                    _fail(f"undeclared identifier {name}", item.loc)
        elif isinstance(item, (NegativeClause, IndependentClause)):
            _resolve_body(item.body, _Scope(scope), tg)
        elif isinstance(item, AlternativeClause):
            for case in item.cases:
                case_scope = _resolve_body(case.body, _Scope(scope), tg)
                if case.rewrite is not None:
                    _resolve_rewrite(case.rewrite, case_scope, tg, None,
                                     top_level=False)
        elif isinstance(item, IteratedClause):
            iter_scope = _resolve_body(item.body, _Scope(scope), tg)
            if item.rewrite is not None:
                _resolve_rewrite(item.rewrite, iter_scope, tg, None,
                                 top_level=False)
    return scope


def _resolve_rewrite(rw: RewritePart, pattern_scope: _Scope, tg: TypeGraph,
                     rule: Rule | None, top_level: bool) -> None:
    scope = _Scope(pattern_scope)
    returns: list[ReturnStmt] = []
    for item in rw.items:
        if isinstance(item, RwNodeClause):
            _resolve_node_ref(item.ref, scope, tg, in_rewrite=True)
        elif isinstance(item, RwEdgeClause):
            _resolve_node_ref(item.src, scope, tg, in_rewrite=True)
            _resolve_edge_part(item.edge, scope, tg, in_rewrite=True)
            _resolve_node_ref(item.trg, scope, tg, in_rewrite=True)
        elif isinstance(item, DeleteStmt):
            for name in item.names:
                sym = scope.lookup(name)
                if sym is None:
                    _fail(f"undeclared identifier {name}", item.loc)
                if sym.origin not in ("pattern", "param"):
                    _fail(f"delete({name}): only matched elements can be deleted",
                          item.loc)
        elif isinstance(item, EvalStmt):
            for assign in item.assignments:
                sym = scope.lookup(assign.elem)
                if sym is None:
                    _fail(f"undeclared identifier {assign.elem}", assign.loc)
                if sym.kind == "scalar":
                    _fail(f"{assign.elem} is a scalar, it has no attributes",
                          assign.loc)
                if not tg.has_attr(sym.type_name, assign.attr):
                    _fail(f"type {sym.type_name} has no attribute {assign.attr}",
                          assign.loc)
                _resolve_expr(assign.expr, scope, tg)
        elif isinstance(item, EmitStmt):
            for arg in item.args:
                _resolve_expr(arg, scope, tg)
        elif isinstance(item, ReturnStmt):
            if not top_level:
                _fail("return is only allowed in the rule's own rewrite part",
                      item.loc)
            returns.append(item)
            for expr in item.exprs:
                _resolve_expr(expr, scope, tg)
    if top_level and rule is not None:
        if len(returns) > 1:
            _fail("at most one return statement is allowed", returns[1].loc)
        want = len(rule.outs)
        got = len(returns[0].exprs) if returns else 0
        if want != got:
            loc = returns[0].loc if returns else rule.loc
            _fail(f"rule declares {want} out value(s) but returns {got}", loc)


# --- semantic checking (collects diagnostics) -------------------------------------


@dataclass
class _ElemType:
    """Static type of an element-valued expression."""

    kind: str
    type_name: str


class _Checker:
    def __init__(self, tg: TypeGraph):
        self.tg = tg
        self.diagnostics: list[Diagnostic] = []

    def diag(self, message: str, loc: Loc | None, severity: str = "error"):
        self.diagnostics.append(Diagnostic(severity, message,
                                           loc.line if loc else None,
                                           loc.col if loc else None))

    def check(self, rule: Rule) -> None:
        root = _Scope()
        for p in rule.params:
            if p.is_element:
                root.declare(p.name, _Sym(self.tg.kind_of(p.type_name), p.type_name,
                                          origin="param"), p.loc)
            else:
                root.declare(p.name, _Sym("scalar", scalar=p.scalar_kind,
                                          origin="param"), p.loc)
        scope = self._walk_body(rule.pattern, _Scope(root))
        self._walk_rewrite(rule.rewrite, scope, rule)

    def _walk_body(self, body: PatternBody, scope: _Scope) -> _Scope:
        for item in body.items:
            if isinstance(item, NodeClause):
                self._add_ref(item.ref, scope, "node", in_rewrite=False)
            elif isinstance(item, EdgeClause):
                self._add_ref(item.src, scope, "node", in_rewrite=False)
                self._add_edge(item.edge, scope, in_rewrite=False)
                self._add_ref(item.trg, scope, "node", in_rewrite=False)
            elif isinstance(item, CondClause):
                kind = self.infer(item.expr, scope)
                if isinstance(kind, AttrKind) and kind.base != "boolean":
                    self.diag(f"if condition must be boolean, got {kind}", item.loc)
                elif isinstance(kind, _ElemType):
                    self.diag("if condition must be boolean, got an element",
                              item.loc)
            elif isinstance(item, HomClause):
                kinds = set()
                for name in item.names:
                    sym = scope.lookup(name)
                    if sym is not None:
                        kinds.add(sym.kind)
                if len(kinds) > 1:
                    self.diag("hom group mixes nodes and edges", item.loc)
            elif isinstance(item, (NegativeClause, IndependentClause)):
                self._walk_body(item.body, _Scope(scope))
            elif isinstance(item, AlternativeClause):
                for case in item.cases:
                    case_scope = self._walk_body(case.body, _Scope(scope))
                    if case.rewrite is not None:
                        self._walk_rewrite(case.rewrite, case_scope, None)
            elif isinstance(item, IteratedClause):
                iter_scope = self._walk_body(item.body, _Scope(scope))
                if item.rewrite is not None:
                    self._walk_rewrite(item.rewrite, iter_scope, None)
        return scope

    def _add_ref(self, ref: NodeRef, scope: _Scope, kind: str, in_rewrite: bool):
        if ref.retype_of is not None or ref.type_name is not None:
            origin = ("retyped" if ref.retype_of is not None
                      else "created" if in_rewrite else "pattern")
            scope.names[ref.name] = _Sym(kind, ref.type_name, origin=origin)

    def _add_edge(self, edge: EdgePart, scope: _Scope, in_rewrite: bool):
        if edge.retype_of is not None or edge.type_name is not None:
            origin = ("retyped" if edge.retype_of is not None
                      else "created" if in_rewrite else "pattern")
            scope.names[edge.name] = _Sym("edge", edge.type_name, origin=origin)

    def _walk_rewrite(self, rw: RewritePart, pattern_scope: _Scope,
                      rule: Rule | None) -> None:
        scope = _Scope(pattern_scope)
        for item in rw.items:
            if isinstance(item, RwNodeClause):
                self._add_ref(item.ref, scope, "node", in_rewrite=True)
            elif isinstance(item, RwEdgeClause):
                self._add_ref(item.src, scope, "node", in_rewrite=True)
                self._add_edge(item.edge, scope, in_rewrite=True)
                self._add_ref(item.trg, scope, "node", in_rewrite=True)
            elif isinstance(item, DeleteStmt):
                if rw.mode == "replace":
                    self.diag("delete() is not allowed in replace mode; implicit "
                              "deletion applies to unreferenced elements", item.loc)
            elif isinstance(item, EvalStmt):
                for assign in item.assignments:
                    sym = scope.lookup(assign.elem)
                    if sym is None or sym.kind == "scalar":
                        continue  # resolution already reported
                    declared = self.tg.attr_kind(sym.type_name, assign.attr)
                    got = self.infer(assign.expr, scope)
                    if isinstance(got, _ElemType):
                        self.diag(f"cannot assign an element to {assign.elem}."
                                  f"{assign.attr}", assign.loc)
                    elif got is not None and not _assignable(declared, got):
                        self.diag(f"cannot assign {got} to {assign.elem}."
                                  f"{assign.attr} of kind {declared}", assign.loc)
            elif isinstance(item, EmitStmt):
                for arg in item.args:
                    got = self.infer(arg, scope)
                    if isinstance(got, _ElemType):
                        self.diag("emit arguments must be scalar values", item.loc)
                    elif isinstance(got, AttrKind) and not got.is_scalar_or_enum():
                        self.diag(f"emit argument of kind {got} is not printable",
                                  item.loc)
            elif isinstance(item, ReturnStmt) and rule is not None:
                for expr, out in zip(item.exprs, rule.outs):
                    got = self.infer(expr, scope)
                    if out.is_element:
                        if not isinstance(got, _ElemType):
                            self.diag(f"return value for out {out.type_name} "
                                      "must be an element", item.loc)
                        elif not self.tg.is_subtype(got.type_name, out.type_name):
                            self.diag(f"returned {got.type_name} is not a subtype "
                                      f"of {out.type_name}", item.loc)
                    else:
                        if isinstance(got, _ElemType):
                            self.diag("return value must be scalar", item.loc)
                        elif got is not None and not _assignable(out.scalar_kind, got):
                            self.diag(f"returned {got} does not match out kind "
                                      f"{out.scalar_kind}", item.loc)

    def infer(self, expr: Expr, scope: _Scope):
        """Static kind of an expression, an _ElemType, or None on any error."""
        tg = self.tg
        if isinstance(expr, IntLit):
            return INT
        if isinstance(expr, FloatLit):
            return FLOAT
        if isinstance(expr, StrLit):
            return STRING
        if isinstance(expr, BoolLit):
            return BOOLEAN
        if isinstance(expr, EnumLit):
            return AttrKind("enum", enum_name=expr.enum)
        if isinstance(expr, AttrRef):
            sym = scope.lookup(expr.elem)
            if sym is None or sym.kind == "scalar":
                return None
            return tg.attr_kind(sym.type_name, expr.attr)
        if isinstance(expr, VarRef):
            sym = scope.lookup(expr.name)
            if sym is None:
                return None
            if sym.kind == "scalar":
                return sym.scalar
            return _ElemType(sym.kind, sym.type_name)
        if isinstance(expr, Unary):
            inner = self.infer(expr.operand, scope)
            if inner is None:
                return None
            if expr.op == "!":
                if not (isinstance(inner, AttrKind) and inner.base == "boolean"):
                    self.diag("! needs a boolean operand", expr.loc)
                    return None
                return BOOLEAN
            if not (isinstance(inner, AttrKind) and inner.base in ("int", "float")):
                self.diag("unary - needs a numeric operand", expr.loc)
                return None
            return inner
        if isinstance(expr, Binary):
            return self._infer_binary(expr, scope)
        return None

    def _infer_binary(self, expr: Binary, scope: _Scope):
        left = self.infer(expr.left, scope)
        right = self.infer(expr.right, scope)
        if left is None or right is None:
            return None
        if isinstance(left, _ElemType) or isinstance(right, _ElemType):
            self.diag(f"operator {expr.op} cannot be applied to elements", expr.loc)
            return None
        op = expr.op
        numeric = {"int", "float"}
        if op in ("&&", "||"):
            if left.base == right.base == "boolean":
                return BOOLEAN
            self.diag(f"{op} needs boolean operands", expr.loc)
            return None
        if op == "+":
            if left.base == right.base == "string":
                return STRING
            if left.base in numeric and right.base in numeric:
                return FLOAT if "float" in (left.base, right.base) else INT
            self.diag(f"+ needs two numbers or two strings, got {left} and {right}",
                      expr.loc)
            return None
        if op in ("-", "*", "/"):
            if left.base in numeric and right.base in numeric:
                return FLOAT if "float" in (left.base, right.base) else INT
            self.diag(f"{op} needs numeric operands, got {left} and {right}",
                      expr.loc)
            return None
        if op == "%":
            if left.base == right.base == "int":
                return INT
            self.diag("% needs integer operands", expr.loc)
            return None
        if op in ("<", "<=", ">", ">="):
            if (left.base in numeric and right.base in numeric) or \
                    left.base == right.base == "string":
                return BOOLEAN
            self.diag(f"{op} compares numbers or strings, got {left} and {right}",
                      expr.loc)
            return None
        if op in ("==", "!="):
            comparable = (
                (left.base in numeric and right.base in numeric)
                or left.base == right.base == "string"
                or left.base == right.base == "boolean"
                or (left.base == right.base == "enum"
                    and left.enum_name == right.enum_name))
            if comparable:
                return BOOLEAN
            self.diag(f"{op} cannot compare {left} with {right}", expr.loc)
            return None
        return None


def _assignable(declared: AttrKind, got: AttrKind) -> bool:
    if declared == got:
        return True
    # ints widen to float slots
    return declared.base == "float" and got.base == "int"
