"""AST for the rule language: patterns, nested constructs, rewrites, expressions.

Anonymous pattern elements get generated names starting with "$", which the
surface syntax cannot produce; printers turn them back into anonymous form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .lexing import Loc
from .model import AttrKind, TypeGraph

# --- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FloatLit:
    value: float
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StrLit:
    value: str
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EnumLit:
    enum: str
    item: str
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AttrRef:
    elem: str
    attr: str
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VarRef:
    name: str
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "!" | "-"
    operand: "Expr"
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc | None = field(default=None, compare=False)


Expr = Union[IntLit, FloatLit, StrLit, BoolLit, EnumLit, AttrRef, VarRef, Unary, Binary]


def expr_idents(expr: Expr) -> set[str]:
    """Names of elements and variables an expression reads."""
    if isinstance(expr, AttrRef):
        return {expr.elem}
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, Unary):
        return expr_idents(expr.operand)
    if isinstance(expr, Binary):
        return expr_idents(expr.left) | expr_idents(expr.right)
    return set()


# --- pattern -----------------------------------------------------------------


@dataclass(frozen=True)
class NodeRef:
    """Node occurrence: declaration (type set), reference, or rewrite retype."""

    name: str
    type_name: Optional[str] = None
    retype_of: Optional[str] = None
    loc: Loc | None = field(default=None, compare=False)

    @property
    def is_decl(self) -> bool:
        return self.type_name is not None and self.retype_of is None

    @property
    def anonymous(self) -> bool:
        return self.name.startswith("$")


@dataclass(frozen=True)
class EdgePart:
    name: str
    type_name: Optional[str] = None
    retype_of: Optional[str] = None
    loc: Loc | None = field(default=None, compare=False)

    @property
    def is_decl(self) -> bool:
        return self.type_name is not None and self.retype_of is None

    @property
    def anonymous(self) -> bool:
        return self.name.startswith("$")


@dataclass(frozen=True)
class NodeClause:
    ref: NodeRef


@dataclass(frozen=True)
class EdgeClause:
    src: NodeRef
    edge: EdgePart
    trg: NodeRef


@dataclass(frozen=True)
class CondClause:
    expr: Expr
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class HomClause:
    names: tuple[str, ...]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class NegativeClause:
    body: "PatternBody"
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IndependentClause:
    body: "PatternBody"
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AlternativeCase:
    name: str
    body: "PatternBody"
    rewrite: Optional["RewritePart"]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AlternativeClause:
    cases: tuple[AlternativeCase, ...]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IteratedClause:
    body: "PatternBody"
    rewrite: Optional["RewritePart"]
    require_one: bool  # multiple {...} demands at least one instance
    loc: Loc | None = field(default=None, compare=False)


PatternItem = Union[NodeClause, EdgeClause, CondClause, HomClause,
                    NegativeClause, IndependentClause, AlternativeClause,
                    IteratedClause]


@dataclass(frozen=True)
class PatternBody:
    items: tuple[PatternItem, ...]

    def element_clauses(self):
        for item in self.items:
            if isinstance(item, (NodeClause, EdgeClause)):
                yield item

    def constructs(self):
        for item in self.items:
            if isinstance(item, (NegativeClause, IndependentClause,
                                 AlternativeClause, IteratedClause)):
                yield item

    def conditions(self):
        for item in self.items:
            if isinstance(item, CondClause):
                yield item

    def hom_groups(self) -> list[frozenset[str]]:
        return [frozenset(item.names) for item in self.items
                if isinstance(item, HomClause)]

    def local_decls(self) -> dict[str, tuple[str, str]]:
        """Locally declared elements: name -> (element kind, type name)."""
        out: dict[str, tuple[str, str]] = {}
        for item in self.items:
            if isinstance(item, NodeClause):
                if item.ref.is_decl:
                    out[item.ref.name] = ("node", item.ref.type_name)
            elif isinstance(item, EdgeClause):
                for ref in (item.src, item.trg):
                    if ref.is_decl:
                        out[ref.name] = ("node", ref.type_name)
                if item.edge.is_decl:
                    out[item.edge.name] = ("edge", item.edge.type_name)
        return out


# --- rewrite -----------------------------------------------------------------


@dataclass(frozen=True)
class RwNodeClause:
    ref: NodeRef


@dataclass(frozen=True)
class RwEdgeClause:
    src: NodeRef
    edge: EdgePart
    trg: NodeRef


@dataclass(frozen=True)
class DeleteStmt:
    names: tuple[str, ...]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EvalAssign:
    elem: str
    attr: str
    expr: Expr
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EvalStmt:
    assignments: tuple[EvalAssign, ...]


@dataclass(frozen=True)
class EmitStmt:
    args: tuple[Expr, ...]
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ReturnStmt:
    exprs: tuple[Expr, ...]
    loc: Loc | None = field(default=None, compare=False)


RewriteItem = Union[RwNodeClause, RwEdgeClause, DeleteStmt, EvalStmt,
                    EmitStmt, ReturnStmt]


@dataclass(frozen=True)
class RewritePart:
    mode: str  # "replace" | "modify"
    items: tuple[RewriteItem, ...]

    def referenced_names(self) -> set[str]:
        """Element names structurally referenced (kept or retyped)."""
        out: set[str] = set()
        for item in self.items:
            if isinstance(item, RwNodeClause):
                ref = item.ref
                if ref.retype_of is not None:
                    out.add(ref.retype_of)
                elif ref.type_name is None:
                    out.add(ref.name)
            elif isinstance(item, RwEdgeClause):
                for ref in (item.src, item.trg):
                    if ref.retype_of is not None:
                        out.add(ref.retype_of)
                    elif ref.type_name is None:
                        out.add(ref.name)
                edge = item.edge
                if edge.retype_of is not None:
                    out.add(edge.retype_of)
                elif edge.type_name is None:
                    out.add(edge.name)
        return out

    def return_stmt(self) -> ReturnStmt | None:
        for item in self.items:
            if isinstance(item, ReturnStmt):
                return item
        return None


# --- rule and rule set ---------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type_name: Optional[str] = None       # element parameter
    scalar_kind: Optional[AttrKind] = None  # `var` parameter
    loc: Loc | None = field(default=None, compare=False)

    @property
    def is_element(self) -> bool:
        return self.type_name is not None


@dataclass(frozen=True)
class OutDecl:
    type_name: Optional[str] = None
    scalar_kind: Optional[AttrKind] = None

    @property
    def is_element(self) -> bool:
        return self.type_name is not None


@dataclass(frozen=True)
class Rule:
    name: str
    params: tuple[Param, ...]
    outs: tuple[OutDecl, ...]
    pattern: PatternBody
    rewrite: RewritePart
    loc: Loc | None = field(default=None, compare=False)


@dataclass
class RuleSet:
    model_name: str
    types: TypeGraph
    rules: dict[str, Rule]
    filename: str | None = None

    def rule(self, name: str) -> Rule:
        return self.rules[name]


# --- pretty printing -----------------------------------------------------------

_PRECEDENCE = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3,
               ">=": 3, "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}


def format_expr(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, FloatLit):
        return repr(expr.value)
    if isinstance(expr, StrLit):
        escaped = (expr.value.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f'"{escaped}"'
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, EnumLit):
        return f"{expr.enum}::{expr.item}"
    if isinstance(expr, AttrRef):
        return f"{expr.elem}.{expr.attr}"
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, Unary):
        return f"{expr.op}{format_expr(expr.operand, 6)}"
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        inner = (f"{format_expr(expr.left, prec)} {expr.op} "
                 f"{format_expr(expr.right, prec + 1)}")
        return f"({inner})" if prec < parent_prec else inner
    raise TypeError(f"not an expression: {expr!r}")


def _format_node_ref(ref: NodeRef) -> str:
    if ref.retype_of is not None:
        return f"{'' if ref.anonymous else ref.name}:{ref.type_name}<{ref.retype_of}>"
    if ref.type_name is None:
        return ref.name
    return f"{'' if ref.anonymous else ref.name}:{ref.type_name}"


def _format_edge_clause(src: NodeRef, edge: EdgePart, trg: NodeRef) -> str:
    left, right = _format_node_ref(src), _format_node_ref(trg)
    if edge.retype_of is not None:
        mid = f"-{'' if edge.anonymous else edge.name}:{edge.type_name}<{edge.retype_of}>->"
    elif edge.type_name is None:
        mid = f"-{edge.name}->"
    elif edge.anonymous and edge.type_name == "Edge":
        mid = "-->"
    else:
        mid = f"-{'' if edge.anonymous else edge.name}:{edge.type_name}->"
    return f"{left} {mid} {right}"


def _format_body(body: PatternBody, indent: str, out: list[str]) -> None:
    for item in body.items:
        if isinstance(item, NodeClause):
            out.append(f"{indent}{_format_node_ref(item.ref)};")
        elif isinstance(item, EdgeClause):
            out.append(f"{indent}{_format_edge_clause(item.src, item.edge, item.trg)};")
        elif isinstance(item, CondClause):
            out.append(f"{indent}if {{ {format_expr(item.expr)}; }}")
        elif isinstance(item, HomClause):
            out.append(f"{indent}hom({', '.join(item.names)});")
        elif isinstance(item, NegativeClause):
            out.append(f"{indent}negative {{")
            _format_body(item.body, indent + "    ", out)
            out.append(f"{indent}}}")
        elif isinstance(item, IndependentClause):
            out.append(f"{indent}independent {{")
            _format_body(item.body, indent + "    ", out)
            out.append(f"{indent}}}")
        elif isinstance(item, AlternativeClause):
            out.append(f"{indent}alternative {{")
            for case in item.cases:
                out.append(f"{indent}    {case.name} {{")
                _format_body(case.body, indent + "        ", out)
                if case.rewrite is not None:
                    _format_rewrite(case.rewrite, indent + "        ", out)
                out.append(f"{indent}    }}")
            out.append(f"{indent}}}")
        elif isinstance(item, IteratedClause):
            out.append(f"{indent}{'multiple' if item.require_one else 'iterated'} {{")
            _format_body(item.body, indent + "    ", out)
            if item.rewrite is not None:
                _format_rewrite(item.rewrite, indent + "    ", out)
            out.append(f"{indent}}}")


def _format_rewrite(rw: RewritePart, indent: str, out: list[str]) -> None:
    out.append(f"{indent}{rw.mode} {{")
    inner = indent + "    "
    for item in rw.items:
        if isinstance(item, RwNodeClause):
            out.append(f"{inner}{_format_node_ref(item.ref)};")
        elif isinstance(item, RwEdgeClause):
            out.append(f"{inner}{_format_edge_clause(item.src, item.edge, item.trg)};")
        elif isinstance(item, DeleteStmt):
            out.append(f"{inner}delete({', '.join(item.names)});")
        elif isinstance(item, EvalStmt):
            out.append(f"{inner}eval {{")
            for a in item.assignments:
                out.append(f"{inner}    {a.elem}.{a.attr} = {format_expr(a.expr)};")
            out.append(f"{inner}}}")
        elif isinstance(item, EmitStmt):
            args = ", ".join(format_expr(a) for a in item.args)
            out.append(f"{inner}emit({args});")
        elif isinstance(item, ReturnStmt):
            exprs = ", ".join(format_expr(e) for e in item.exprs)
            out.append(f"{inner}return ({exprs});")
    out.append(f"{indent}}}")


def format_rules(rs: RuleSet) -> str:
    """Canonical source form; parse(format(parse(x))) equals parse(x)."""
    out: list[str] = [f"using {rs.model_name};", ""]
    for rule in rs.rules.values():
        head = f"rule {rule.name}"
        if rule.params:
            bits = []
            for p in rule.params:
                if p.is_element:
                    bits.append(f"{p.name}:{p.type_name}")
                else:
                    bits.append(f"var {p.name}:{p.scalar_kind}")
            head += f"({', '.join(bits)})"
        if rule.outs:
            outs = ", ".join(o.type_name if o.is_element else str(o.scalar_kind)
                             for o in rule.outs)
            head += f" : ({outs})"
        out.append(head + " {")
        _format_body(rule.pattern, "    ", out)
        _format_rewrite(rule.rewrite, "    ", out)
        out.append("}")
        out.append("")
    return "\n".join(out)
