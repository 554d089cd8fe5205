"""Graph export: DOT, GXL, and the native text format, plus styling hints.

All exporters are byte-deterministic for a given graph: elements are
emitted in ascending id order and attributes sorted by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .errors import ShellError
from .graph import Graph, to_native
from .model import TypeGraph
from .values import EnumValue, default_value, format_literal

LAYOUTS = ("hierarchic", "organic", "circular")


@dataclass
class StyleHints:
    """Display hints collected from `dump` commands; never affect semantics."""

    node_color: dict[str, str] = field(default_factory=dict)
    node_shape: dict[str, str] = field(default_factory=dict)
    node_label: dict[str, str] = field(default_factory=dict)  # attr name or "" = off
    edge_color: dict[str, str] = field(default_factory=dict)
    edge_style: dict[str, str] = field(default_factory=dict)
    edge_label: dict[str, str] = field(default_factory=dict)
    containment: list[tuple[str, str]] = field(default_factory=list)
    layout: str = "organic"

    def for_type(self, table: dict[str, str], tg: TypeGraph,
                 type_name: str) -> str | None:
        """Nearest hint along the supertype chain, most specific first."""
        for anc in tg.linearize(type_name):
            if anc in table:
                return table[anc]
        return None

    def set_layout(self, name: str) -> None:
        if name not in LAYOUTS:
            raise ShellError(f"unknown layout {name!r}, expected one of "
                             f"{', '.join(LAYOUTS)}")
        self.layout = name

    def add_containment(self, container_type: str, edge_type: str) -> None:
        pair = (container_type, edge_type)
        if pair not in self.containment:
            self.containment.append(pair)

    def to_payload(self) -> dict:
        return {
            "node_color": dict(self.node_color),
            "node_shape": dict(self.node_shape),
            "node_label": dict(self.node_label),
            "edge_color": dict(self.edge_color),
            "edge_style": dict(self.edge_style),
            "edge_label": dict(self.edge_label),
            "containment": [list(p) for p in self.containment],
            "layout": self.layout,
        }


def to_dot(g: Graph, hints: StyleHints | None = None) -> str:
    hints = hints or StyleHints()
    tg = g.types
    lines = ["digraph G {"]
    for nid in g.nodes():
        type_name = g.element_type(nid)
        attrs = [f'label="{type_name}#{nid}"']
        color = hints.for_type(hints.node_color, tg, type_name)
        if color:
            attrs.append(f'color="{color}"')
        shape = hints.for_type(hints.node_shape, tg, type_name)
        if shape:
            attrs.append(f'shape="{shape}"')
        lines.append(f'    n{nid} [{", ".join(attrs)}];')
    for eid in g.edges():
        type_name = g.element_type(eid)
        attrs = [f'label="{type_name}#{eid}"']
        color = hints.for_type(hints.edge_color, tg, type_name)
        if color:
            attrs.append(f'color="{color}"')
        style = hints.for_type(hints.edge_style, tg, type_name)
        if style:
            attrs.append(f'style="{style}"')
        lines.append(f'    n{g.source(eid)} -> n{g.target(eid)} '
                     f'[{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _gxl_value(value) -> str:
    if isinstance(value, bool):
        return f"<bool>{'true' if value else 'false'}</bool>"
    if isinstance(value, int):
        return f"<int>{value}</int>"
    if isinstance(value, float):
        return f"<float>{value!r}</float>"
    if isinstance(value, str):
        return f"<string>{escape(value)}</string>"
    if isinstance(value, EnumValue):
        return f"<string>{escape(str(value))}</string>"
    return f"<string>{escape(format_literal(value))}</string>"


def _gxl_attrs(g: Graph, elem: int) -> list[str]:
    type_name = g.element_type(elem)
    defaults = {name: default_value(g.types, kind)
                for name, kind in g.types.all_attributes(type_name)}
    out = []
    attrs = g.attrs_of(elem)
    for name in sorted(attrs):
        if attrs[name] != defaults[name]:
            out.append(f'      <attr name={quoteattr(name)}>'
                       f'{_gxl_value(attrs[name])}</attr>')
    return out


def to_gxl(g: Graph) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<gxl xmlns:xlink="http://www.w3.org/1999/xlink">',
        '  <graph id="graph" edgeids="true" edgemode="directed">',
    ]
    for nid in g.nodes():
        body = _gxl_attrs(g, nid)
        lines.append(f'    <node id="n{nid}">')
        lines.append(f'      <type xlink:href="#{escape(g.element_type(nid))}"/>')
        lines.extend(body)
        lines.append('    </node>')
    for eid in g.edges():
        body = _gxl_attrs(g, eid)
        lines.append(f'    <edge id="e{eid}" from="n{g.source(eid)}" '
                     f'to="n{g.target(eid)}">')
        lines.append(f'      <type xlink:href="#{escape(g.element_type(eid))}"/>')
        lines.extend(body)
        lines.append('    </edge>')
    lines.append('  </graph>')
    lines.append('</gxl>')
    return "\n".join(lines) + "\n"


def export_graph(g: Graph, path, hints: StyleHints | None = None) -> None:
    """Write the graph to `path`; the extension picks dot, gxl, or native."""
    text = render_export(g, str(path), hints)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def render_export(g: Graph, path: str, hints: StyleHints | None = None) -> str:
    lowered = path.lower()
    if lowered.endswith(".dot"):
        return to_dot(g, hints)
    if lowered.endswith(".gxl"):
        return to_gxl(g)
    return to_native(g)
