"""Attribute values: defaults, kind checks, and the literal text format.

A value is a plain Python object tagged by its declared AttrKind:
int, float, bool, str, EnumValue, set, dict, or list. The literal format
is shared by the native graph serialization and emitted text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphError
from .lexing import TokenStream, tokenize
from .model import AttrKind, TypeGraph


@dataclass(frozen=True)
class EnumValue:
    enum: str
    item: str

    def __str__(self) -> str:
        return f"{self.enum}::{self.item}"


def default_value(tg: TypeGraph, kind: AttrKind):
    if kind.base == "int":
        return 0
    if kind.base == "float":
        return 0.0
    if kind.base == "boolean":
        return False
    if kind.base == "string":
        return ""
    if kind.base == "enum":
        en = tg.enums[kind.enum_name]
        return EnumValue(en.name, en.items[0][0])
    if kind.base == "set":
        return set()
    if kind.base == "map":
        return {}
    if kind.base == "array":
        return []
    raise GraphError(f"no default for kind {kind}")


def check_value(tg: TypeGraph, kind: AttrKind, value) -> None:
    """Raise GraphError unless `value` carries the tag `kind` expects."""
    ok = True
    if kind.base == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind.base == "float":
        ok = isinstance(value, float)
    elif kind.base == "boolean":
        ok = isinstance(value, bool)
    elif kind.base == "string":
        ok = isinstance(value, str)
    elif kind.base == "enum":
        ok = (isinstance(value, EnumValue) and value.enum == kind.enum_name
              and any(n == value.item for n, _ in tg.enums[kind.enum_name].items))
    elif kind.base == "set":
        ok = isinstance(value, (set, frozenset))
        if ok:
            for v in value:
                check_value(tg, kind.elem, v)
    elif kind.base == "array":
        ok = isinstance(value, list)
        if ok:
            for v in value:
                check_value(tg, kind.elem, v)
    elif kind.base == "map":
        ok = isinstance(value, dict)
        if ok:
            for k, v in value.items():
                check_value(tg, kind.key, k)
                check_value(tg, kind.elem, v)
    if not ok:
        raise GraphError(f"value {value!r} does not have kind {kind}")


def format_literal(value) -> str:
    """Deterministic text form of a value; inverse of parse_literal."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        escaped = (value.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f'"{escaped}"'
    if isinstance(value, EnumValue):
        return f"{value.enum}::{value.item}"
    if isinstance(value, (set, frozenset)):
        inner = sorted(format_literal(v) for v in value)
        return "set{" + ",".join(inner) + "}"
    if isinstance(value, list):
        return "array[" + ",".join(format_literal(v) for v in value) + "]"
    if isinstance(value, dict):
        pairs = sorted((format_literal(k), format_literal(v)) for k, v in value.items())
        return "map{" + ",".join(f"{k}:{v}" for k, v in pairs) + "}"
    raise GraphError(f"cannot format value {value!r}")


def parse_literal(text: str, kind: AttrKind, tg: TypeGraph):
    ts = TokenStream(tokenize(text))
    value = _parse_literal(ts, kind, tg)
    if not ts.at("EOF"):
        raise GraphError(f"trailing text in literal {text!r}")
    return value


def _parse_literal(ts: TokenStream, kind: AttrKind, tg: TypeGraph):
    if kind.base in ("int", "float"):
        neg = ts.accept_sym("-")
        tok = ts.next()
        if kind.base == "int" and tok.kind == "INT":
            return -tok.value if neg else tok.value
        if kind.base == "float" and tok.kind in ("FLOAT", "INT"):
            v = float(tok.value)
            return -v if neg else v
    elif kind.base == "boolean":
        tok = ts.next()
        if tok.text in ("true", "false"):
            return tok.text == "true"
    elif kind.base == "string":
        tok = ts.next()
        if tok.kind == "STRING":
            return tok.value
    elif kind.base == "enum":
        name = ts.expect_ident().text
        ts.expect_sym("::")
        item = ts.expect_ident().text
        value = EnumValue(name, item)
        check_value(tg, kind, value)
        return value
    elif kind.base == "set":
        ts.expect_word("set")
        ts.expect_sym("{")
        out = set()
        while not ts.accept_sym("}"):
            if out:
                ts.expect_sym(",")
            out.add(_freeze(_parse_literal(ts, kind.elem, tg)))
        return out
    elif kind.base == "array":
        ts.expect_word("array")
        ts.expect_sym("[")
        items = []
        while not ts.accept_sym("]"):
            if items:
                ts.expect_sym(",")
            items.append(_parse_literal(ts, kind.elem, tg))
        return items
    elif kind.base == "map":
        ts.expect_word("map")
        ts.expect_sym("{")
        out = {}
        while not ts.accept_sym("}"):
            if out:
                ts.expect_sym(",")
            k = _freeze(_parse_literal(ts, kind.key, tg))
            ts.expect_sym(":")
            out[k] = _parse_literal(ts, kind.elem, tg)
        return out
    raise GraphError(f"bad literal for kind {kind}")


def _freeze(value):
    return frozenset(value) if isinstance(value, set) else value


def parse_scalar_text(text: str, kind: AttrKind, tg: TypeGraph):
    """Parse a bare XMI attribute string (no quoting) by declared kind."""
    try:
        if kind.base == "int":
            return int(text)
        if kind.base == "float":
            return float(text)
        if kind.base == "boolean":
            if text in ("true", "false"):
                return text == "true"
            raise ValueError(text)
        if kind.base == "string":
            return text
        if kind.base == "enum":
            value = EnumValue(kind.enum_name, text)
            check_value(tg, kind, value)
            return value
    except (ValueError, GraphError) as exc:
        raise GraphError(f"cannot parse {text!r} as {kind}: {exc}") from exc
    raise GraphError(f"cannot parse container kind {kind} from attribute text")
