"""The metamodel layer: attribute kinds, node/edge type hierarchies, enums.

A TypeGraph is built either from `.gm` model text (parse_model) or from an
Ecore document (see ecore.py). It is immutable after construction and safe
to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelError
from .lexing import Loc, TokenStream, tokenize

NODE_ROOT = "Node"
EDGE_ROOT = "Edge"

_SCALAR_KINDS = ("int", "float", "boolean", "string")


@dataclass(frozen=True)
class AttrKind:
    """Kind of an attribute slot: a scalar, an enum, or a one-level container."""

    base: str  # int|float|boolean|string|enum|set|map|array
    enum_name: str | None = None
    elem: "AttrKind | None" = None  # set/array element, map value
    key: "AttrKind | None" = None   # map key

    def __post_init__(self):
        if self.base in ("set", "array"):
            if self.elem is None or not self.elem.is_scalar_or_enum():
                raise ModelError(f"{self.base} kinds may only contain scalar kinds")
        if self.base == "map":
            ok = (self.key is not None and self.key.is_scalar_or_enum()
                  and self.elem is not None and self.elem.is_scalar_or_enum())
            if not ok:
                raise ModelError("map kinds may only contain scalar kinds")
        if self.base == "enum" and not self.enum_name:
            raise ModelError("enum kind needs an enum name")

    def is_scalar_or_enum(self) -> bool:
        return self.base in _SCALAR_KINDS or self.base == "enum"

    def __str__(self) -> str:
        if self.base == "enum":
            return self.enum_name or "enum"
        if self.base == "set":
            return f"set<{self.elem}>"
        if self.base == "array":
            return f"array<{self.elem}>"
        if self.base == "map":
            return f"map<{self.key},{self.elem}>"
        return self.base


INT = AttrKind("int")
FLOAT = AttrKind("float")
BOOLEAN = AttrKind("boolean")
STRING = AttrKind("string")


def enum_kind(name: str) -> AttrKind:
    return AttrKind("enum", enum_name=name)


@dataclass(frozen=True)
class TypeDescriptor:
    """Declaration of one node or edge type."""

    kind: str  # "node" | "edge"
    name: str
    supertypes: tuple[str, ...] = ()
    attributes: tuple[tuple[str, AttrKind], ...] = ()
    # Ecore-derived metadata; recorded, never enforced by the store.
    source_type: str | None = None
    target_type: str | None = None
    containment: bool = False
    loc: Loc | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EnumDescriptor:
    name: str
    items: tuple[tuple[str, int], ...]
    loc: Loc | None = field(default=None, compare=False)

    def __post_init__(self):
        names = [n for n, _ in self.items]
        values = [v for _, v in self.items]
        if len(set(names)) != len(names):
            raise ModelError(f"enum {self.name}: duplicate item name")
        if len(set(values)) != len(values):
            raise ModelError(f"enum {self.name}: duplicate item value")

    def value_of(self, item: str) -> int:
        for n, v in self.items:
            if n == item:
                return v
        raise ModelError(f"enum {self.name} has no item {item}")


class TypeGraph:
    """Immutable registry of node types, edge types, and enums.

    The built-in roots Node and Edge are always present; every user type
    transitively derives the root of its kind.
    """

    def __init__(self, types: list[TypeDescriptor], enums: list[EnumDescriptor],
                 name: str = ""):
        self.name = name
        self.node_types: dict[str, TypeDescriptor] = {}
        self.edge_types: dict[str, TypeDescriptor] = {}
        self.enums: dict[str, EnumDescriptor] = {}
        self._install_roots()
        for en in enums:
            self._declare(en.name, en.loc)
            self.enums[en.name] = en
        for td in types:
            self._declare(td.name, td.loc)
            if td.kind == "node":
                self.node_types[td.name] = td
            elif td.kind == "edge":
                self.edge_types[td.name] = td
            else:
                raise ModelError(f"bad type kind {td.kind!r}")
        self._resolve()

    def _install_roots(self):
        self.node_types[NODE_ROOT] = TypeDescriptor("node", NODE_ROOT)
        self.edge_types[EDGE_ROOT] = TypeDescriptor("edge", EDGE_ROOT)

    def _declare(self, name: str, loc: Loc | None):
        if name in self.node_types or name in self.edge_types or name in self.enums:
            raise ModelError(f"duplicate declaration of {name}",
                             loc.line if loc else None, loc.col if loc else None,
                             loc.file if loc else None)

    def _resolve(self):
        # Default each user type onto its root, check supertype references,
        # then compute ancestor closures and validate attribute uniqueness.
        for table, root, kind in ((self.node_types, NODE_ROOT, "node"),
                                  (self.edge_types, EDGE_ROOT, "edge")):
            for name, td in list(table.items()):
                if name == root:
                    continue
                supers = td.supertypes or (root,)
                for sup in supers:
                    if sup not in table:
                        other = "edge" if kind == "node" else "node"
                        if sup in (self.edge_types if kind == "node" else self.node_types):
                            self._fail(td, f"{name}: supertype {sup} is a {other} type")
                        self._fail(td, f"{name}: unknown supertype {sup}")
                if td.supertypes != supers:
                    table[name] = TypeDescriptor(td.kind, td.name, supers, td.attributes,
                                                 td.source_type, td.target_type,
                                                 td.containment, td.loc)
        self._ancestors: dict[str, frozenset[str]] = {}
        for table in (self.node_types, self.edge_types):
            for name in table:
                self._close(name, table, [])
        for table in (self.node_types, self.edge_types):
            for name in table:
                self._check_attr_paths(name, table)
        # Validate attribute kinds (enum references must exist).
        for table in (self.node_types, self.edge_types):
            for td in table.values():
                seen = set()
                for attr, kind in td.attributes:
                    if attr in seen:
                        self._fail(td, f"{td.name}: duplicate attribute {attr}")
                    seen.add(attr)
                    self._check_kind(td, kind)

    def _check_kind(self, td: TypeDescriptor, kind: AttrKind):
        if kind.base == "enum" and kind.enum_name not in self.enums:
            self._fail(td, f"{td.name}: unknown enum {kind.enum_name}")
        for sub in (kind.elem, kind.key):
            if sub is not None:
                self._check_kind(td, sub)

    def _close(self, name: str, table: dict[str, TypeDescriptor],
               stack: list[str]) -> frozenset[str]:
        if name in self._ancestors:
            return self._ancestors[name]
        if name in stack:
            cycle = " -> ".join(stack[stack.index(name):] + [name])
            td = table[name]
            self._fail(td, f"inheritance cycle: {cycle}")
        stack.append(name)
        acc = {name}
        for sup in table[name].supertypes:
            acc |= self._close(sup, table, stack)
        stack.pop()
        self._ancestors[name] = frozenset(acc)
        return self._ancestors[name]

    def _check_attr_paths(self, name: str, table: dict[str, TypeDescriptor]):
        declared: dict[str, str] = {}
        for anc in self._ancestors[name]:
            for attr, _ in table[anc].attributes:
                if attr in declared and declared[attr] != anc:
                    self._fail(table[name],
                               f"{name}: attribute {attr} declared by both "
                               f"{declared[attr]} and {anc}")
                declared[attr] = anc

    @staticmethod
    def _fail(td: TypeDescriptor, message: str):
        loc = td.loc
        raise ModelError(message, loc.line if loc else None,
                         loc.col if loc else None, loc.file if loc else None)

    # --- queries -----------------------------------------------------------

    def has_type(self, name: str) -> bool:
        return name in self.node_types or name in self.edge_types

    def kind_of(self, name: str) -> str:
        if name in self.node_types:
            return "node"
        if name in self.edge_types:
            return "edge"
        raise ModelError(f"unknown type {name}")

    def descriptor(self, name: str) -> TypeDescriptor:
        td = self.node_types.get(name) or self.edge_types.get(name)
        if td is None:
            raise ModelError(f"unknown type {name}")
        return td

    def is_subtype(self, sub: str, sup: str) -> bool:
        ks, kp = self.kind_of(sub), self.kind_of(sup)
        if ks != kp:
            raise ModelError(f"is_subtype across kinds: {sub} is a {ks}, {sup} a {kp}")
        return sup in self._ancestors[sub]

    def all_attributes(self, name: str) -> list[tuple[str, AttrKind]]:
        """Attributes of `name` and its supertypes, supertype-first.

        Depth-first over supertypes in declaration order; the first visit of
        a type wins, so a diamond contributes each attribute once.
        """
        table = self.node_types if name in self.node_types else self.edge_types
        if name not in table:
            raise ModelError(f"unknown type {name}")
        out: list[tuple[str, AttrKind]] = []
        seen: set[str] = set()

        def visit(t: str):
            if t in seen:
                return
            seen.add(t)
            for sup in table[t].supertypes:
                visit(sup)
            out.extend(table[t].attributes)

        visit(name)
        return out

    def attr_kind(self, type_name: str, attr: str) -> AttrKind:
        for name, kind in self.all_attributes(type_name):
            if name == attr:
                return kind
        raise ModelError(f"type {type_name} has no attribute {attr}")

    def has_attr(self, type_name: str, attr: str) -> bool:
        return any(n == attr for n, _ in self.all_attributes(type_name))

    def linearize(self, name: str) -> list[str]:
        """`name` followed by its supertypes, depth-first, first visit wins."""
        table = self.node_types if name in self.node_types else self.edge_types
        if name not in table:
            raise ModelError(f"unknown type {name}")
        out: list[str] = []
        seen: set[str] = set()

        def visit(t: str):
            if t in seen:
                return
            seen.add(t)
            out.append(t)
            for sup in table[t].supertypes:
                visit(sup)

        visit(name)
        return out

    def subtypes_of(self, name: str) -> frozenset[str]:
        table = self.node_types if name in self.node_types else self.edge_types
        if name not in table:
            raise ModelError(f"unknown type {name}")
        return frozenset(t for t in table if name in self._ancestors[t])

    def __eq__(self, other):
        return (isinstance(other, TypeGraph)
                and self.node_types == other.node_types
                and self.edge_types == other.edge_types
                and self.enums == other.enums)

    def __hash__(self):  # pragma: no cover - not used as dict key
        return hash(self.name)


# --- .gm parsing -------------------------------------------------------------

_KIND_WORDS = {"int": INT, "float": FLOAT, "boolean": BOOLEAN, "string": STRING}


def parse_model(text: str, name: str = "", filename: str | None = None) -> TypeGraph:
    """Parse `.gm` model source into a TypeGraph.

    Declarations may reference each other in any order within the file.
    """
    ts = TokenStream(tokenize(text, filename), error_cls=ModelError)
    types: list[TypeDescriptor] = []
    enums: list[EnumDescriptor] = []
    while not ts.at("EOF"):
        if ts.at_word("node") or ts.at_word("edge"):
            types.append(_parse_class(ts))
        elif ts.at_word("enum"):
            enums.append(_parse_enum(ts))
        else:
            ts.error("expected 'node', 'edge', or 'enum' declaration")
    return TypeGraph(types, enums, name=name)


def _parse_class(ts: TokenStream) -> TypeDescriptor:
    kind = ts.expect_ident().text
    ts.expect_word("class")
    name_tok = ts.expect_ident()
    supers: list[str] = []
    if ts.accept_word("extends"):
        supers.append(ts.expect_ident().text)
        while ts.accept_sym(","):
            supers.append(ts.expect_ident().text)
    source = target = None
    containment = False
    if kind == "edge" and ts.accept_word("connect"):
        source = ts.expect_ident().text
        ts.expect_sym("->")
        target = ts.expect_ident().text
    if kind == "edge" and ts.accept_word("containment"):
        containment = True
    attrs: list[tuple[str, AttrKind]] = []
    if ts.accept_sym("{"):
        while not ts.accept_sym("}"):
            attr_name = ts.expect_ident().text
            ts.expect_sym(":")
            attrs.append((attr_name, _parse_kind(ts)))
            ts.expect_sym(";")
    else:
        ts.expect_sym(";")
    return TypeDescriptor(kind, name_tok.text, tuple(supers), tuple(attrs),
                          source, target, containment, loc=name_tok.loc)


def _parse_kind(ts: TokenStream) -> AttrKind:
    tok = ts.expect_ident()
    word = tok.text
    if word in _KIND_WORDS:
        return _KIND_WORDS[word]
    if word in ("set", "array"):
        ts.expect_sym("<")
        elem = _parse_kind(ts)
        ts.expect_sym(">")
        try:
            return AttrKind(word, elem=elem)
        except ModelError as exc:
            ts.error(str(exc), tok)
    if word == "map":
        ts.expect_sym("<")
        key = _parse_kind(ts)
        ts.expect_sym(",")
        val = _parse_kind(ts)
        ts.expect_sym(">")
        try:
            return AttrKind("map", key=key, elem=val)
        except ModelError as exc:
            ts.error(str(exc), tok)
    return enum_kind(word)


def _parse_enum(ts: TokenStream) -> EnumDescriptor:
    ts.expect_word("enum")
    name_tok = ts.expect_ident()
    ts.expect_sym("{")
    items: list[tuple[str, int]] = []
    next_value = 0
    while True:
        item = ts.expect_ident().text
        if ts.accept_sym("="):
            neg = ts.accept_sym("-")
            value = int(ts.expect("INT").value)
            if neg:
                value = -value
        else:
            value = next_value
        items.append((item, value))
        next_value = value + 1
        if ts.accept_sym(","):
            if ts.accept_sym("}"):
                break
            continue
        ts.expect_sym("}")
        break
    try:
        return EnumDescriptor(name_tok.text, tuple(items), loc=name_tok.loc)
    except ModelError as exc:
        ts.error(str(exc), name_tok)


def print_model(tg: TypeGraph) -> str:
    """Emit a TypeGraph back as `.gm` source; parse(print(parse(x))) is stable."""
    lines: list[str] = []
    for en in sorted(tg.enums.values(), key=lambda e: e.name):
        items = ", ".join(f"{n} = {v}" for n, v in en.items)
        lines.append(f"enum {en.name} {{ {items} }}")
    for table, root in ((tg.node_types, NODE_ROOT), (tg.edge_types, EDGE_ROOT)):
        for name in sorted(table):
            if name == root:
                continue
            td = table[name]
            head = f"{td.kind} class {td.name}"
            if td.supertypes != (root,):
                head += " extends " + ", ".join(td.supertypes)
            if td.source_type or td.target_type:
                head += f" connect {td.source_type} -> {td.target_type}"
            if td.containment:
                head += " containment"
            if td.attributes:
                lines.append(head + " {")
                for attr, kind in td.attributes:
                    lines.append(f"    {attr} : {kind};")
                lines.append("}")
            else:
                lines.append(head + ";")
    return "\n".join(lines) + ("\n" if lines else "")
