"""The attributed typed multigraph store.

Element ids are 64-bit monotone counters, never reused, stable across
retyping. All enumeration orders are ascending id so that matching and
serialization are reproducible. A Graph is single-writer; concurrent
read-only enumeration between mutations is fine.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import GraphError
from .model import TypeGraph
from .values import check_value, default_value, format_literal, parse_literal

ElementId = int


@dataclass
class NodeRecord:
    id: int
    type_name: str
    attrs: dict[str, object] = field(default_factory=dict)


@dataclass
class EdgeRecord:
    id: int
    type_name: str
    src: int
    trg: int
    attrs: dict[str, object] = field(default_factory=dict)


class Graph:
    def __init__(self, types: TypeGraph):
        self.types = types
        self._nodes: dict[int, NodeRecord] = {}
        self._edges: dict[int, EdgeRecord] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self._next_id = 0

    # --- structure ---------------------------------------------------------

    def add_node(self, type_name: str) -> int:
        self._require_kind(type_name, "node")
        nid = self._fresh_id()
        self._nodes[nid] = NodeRecord(nid, type_name, self._defaults(type_name))
        self._out[nid] = []
        self._in[nid] = []
        return nid

    def add_edge(self, type_name: str, src: int, trg: int) -> int:
        self._require_kind(type_name, "edge")
        if src not in self._nodes:
            raise GraphError(f"edge source {src} is not a live node")
        if trg not in self._nodes:
            raise GraphError(f"edge target {trg} is not a live node")
        eid = self._fresh_id()
        self._edges[eid] = EdgeRecord(eid, type_name, src, trg, self._defaults(type_name))
        self._out[src].append(eid)
        self._in[trg].append(eid)
        return eid

    def delete_node(self, nid: int) -> int:
        rec = self._nodes.get(nid)
        if rec is None:
            raise GraphError(f"delete_node: {nid} is not a live node")
        incident = sorted(set(self._out[nid]) | set(self._in[nid]))
        for eid in incident:
            self.delete_edge(eid)
        del self._nodes[nid]
        del self._out[nid]
        del self._in[nid]
        return len(incident)

    def delete_edge(self, eid: int) -> None:
        rec = self._edges.get(eid)
        if rec is None:
            raise GraphError(f"delete_edge: {eid} is not a live edge")
        self._out[rec.src].remove(eid)
        self._in[rec.trg].remove(eid)
        del self._edges[eid]

    def retype(self, elem: int, type_name: str) -> int:
        """Change an element's type in place, preserving identity and incidences.

        Attributes whose (name, kind) exist on both old and new type keep
        their values; everything else is default-initialized.
        """
        rec = self._nodes.get(elem) or self._edges.get(elem)
        if rec is None:
            raise GraphError(f"retype: {elem} is not a live element")
        kind = "node" if elem in self._nodes else "edge"
        self._require_kind(type_name, kind)
        old_kinds = dict(self.types.all_attributes(rec.type_name))
        fresh = self._defaults(type_name)
        new_kinds = dict(self.types.all_attributes(type_name))
        for name, value in rec.attrs.items():
            if name in new_kinds and new_kinds[name] == old_kinds[name]:
                fresh[name] = value
        rec.type_name = type_name
        rec.attrs = fresh
        return elem

    def swap_edge_endpoints(self, eid: int) -> None:
        rec = self._edges.get(eid)
        if rec is None:
            raise GraphError(f"swap_edge_endpoints: {eid} is not a live edge")
        self._out[rec.src].remove(eid)
        self._in[rec.trg].remove(eid)
        rec.src, rec.trg = rec.trg, rec.src
        self._insert_sorted(self._out[rec.src], eid)
        self._insert_sorted(self._in[rec.trg], eid)

    @staticmethod
    def _insert_sorted(lst: list[int], eid: int) -> None:
        # Incidence lists stay ascending by id even when edges re-enter.
        bisect.insort(lst, eid)

    # --- attributes --------------------------------------------------------

    def get_attr(self, elem: int, name: str):
        rec = self._record(elem)
        if name not in rec.attrs:
            raise GraphError(f"type {rec.type_name} has no attribute {name}")
        return rec.attrs[name]

    def set_attr(self, elem: int, name: str, value) -> None:
        rec = self._record(elem)
        if name not in rec.attrs:
            raise GraphError(f"type {rec.type_name} has no attribute {name}")
        kind = self.types.attr_kind(rec.type_name, name)
        check_value(self.types, kind, value)
        rec.attrs[name] = value

    # --- queries -----------------------------------------------------------

    def is_live(self, elem: int) -> bool:
        return elem in self._nodes or elem in self._edges

    def is_node(self, elem: int) -> bool:
        return elem in self._nodes

    def is_edge(self, elem: int) -> bool:
        return elem in self._edges

    def element_type(self, elem: int) -> str:
        return self._record(elem).type_name

    def source(self, eid: int) -> int:
        return self._edge_record(eid).src

    def target(self, eid: int) -> int:
        return self._edge_record(eid).trg

    def nodes(self) -> list[int]:
        return list(self._nodes)

    def edges(self) -> list[int]:
        return list(self._edges)

    def out_edges(self, nid: int) -> list[int]:
        if nid not in self._nodes:
            raise GraphError(f"{nid} is not a live node")
        return list(self._out[nid])

    def in_edges(self, nid: int) -> list[int]:
        if nid not in self._nodes:
            raise GraphError(f"{nid} is not a live node")
        return list(self._in[nid])

    def nodes_of_type(self, type_name: str, with_subtypes: bool = True) -> list[int]:
        self._require_kind(type_name, "node")
        if with_subtypes:
            ok = self.types.subtypes_of(type_name)
            return [i for i, r in self._nodes.items() if r.type_name in ok]
        return [i for i, r in self._nodes.items() if r.type_name == type_name]

    def edges_of_type(self, type_name: str, with_subtypes: bool = True) -> list[int]:
        self._require_kind(type_name, "edge")
        if with_subtypes:
            ok = self.types.subtypes_of(type_name)
            return [i for i, r in self._edges.items() if r.type_name in ok]
        return [i for i, r in self._edges.items() if r.type_name == type_name]

    def count_elements(self, type_name: str, mode: str = "with-subtypes") -> int:
        if mode not in ("exact", "with-subtypes"):
            raise GraphError(f"bad count mode {mode!r}")
        with_subtypes = mode == "with-subtypes"
        if type_name in self.types.node_types:
            return len(self.nodes_of_type(type_name, with_subtypes))
        if type_name in self.types.edge_types:
            return len(self.edges_of_type(type_name, with_subtypes))
        raise GraphError(f"unknown type {type_name}")

    def attrs_of(self, elem: int) -> dict[str, object]:
        return dict(self._record(elem).attrs)

    def check_consistency(self) -> None:
        """Assert the store invariants; used after rewrites in test builds."""
        for eid, rec in self._edges.items():
            if rec.src not in self._nodes or rec.trg not in self._nodes:
                raise GraphError(f"edge {eid} has a dead endpoint")
            if eid not in self._out[rec.src] or eid not in self._in[rec.trg]:
                raise GraphError(f"edge {eid} missing from incidence lists")
        for nid in self._nodes:
            for eid in self._out[nid]:
                if self._edges[eid].src != nid:
                    raise GraphError(f"incidence list of {nid} is stale")
            for eid in self._in[nid]:
                if self._edges[eid].trg != nid:
                    raise GraphError(f"incidence list of {nid} is stale")
        for rec in list(self._nodes.values()) + list(self._edges.values()):
            declared = dict(self.types.all_attributes(rec.type_name))
            if set(declared) != set(rec.attrs):
                raise GraphError(f"element {rec.id} attribute set is stale")
            for name, value in rec.attrs.items():
                check_value(self.types, declared[name], value)

    # --- internals ---------------------------------------------------------

    def _fresh_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def _defaults(self, type_name: str) -> dict[str, object]:
        return {name: default_value(self.types, kind)
                for name, kind in self.types.all_attributes(type_name)}

    def _require_kind(self, type_name: str, kind: str):
        if not self.types.has_type(type_name):
            raise GraphError(f"unknown type {type_name}")
        actual = self.types.kind_of(type_name)
        if actual != kind:
            raise GraphError(f"{type_name} is an {actual} type, expected {kind}")

    def _record(self, elem: int):
        rec = self._nodes.get(elem) or self._edges.get(elem)
        if rec is None:
            raise GraphError(f"{elem} is not a live element")
        return rec

    def _edge_record(self, eid: int) -> EdgeRecord:
        rec = self._edges.get(eid)
        if rec is None:
            raise GraphError(f"{eid} is not a live edge")
        return rec

    # Restoration path for the native format: creates an element under a
    # caller-chosen id, keeping the counter ahead of it.
    def _restore_node(self, nid: int, type_name: str):
        self._require_kind(type_name, "node")
        if self.is_live(nid):
            raise GraphError(f"id {nid} already in use")
        self._nodes[nid] = NodeRecord(nid, type_name, self._defaults(type_name))
        self._out[nid] = []
        self._in[nid] = []
        self._next_id = max(self._next_id, nid + 1)

    def _restore_edge(self, eid: int, type_name: str, src: int, trg: int):
        self._require_kind(type_name, "edge")
        if self.is_live(eid):
            raise GraphError(f"id {eid} already in use")
        if src not in self._nodes or trg not in self._nodes:
            raise GraphError(f"edge {eid} references a missing node")
        self._edges[eid] = EdgeRecord(eid, type_name, src, trg, self._defaults(type_name))
        self._insert_sorted(self._out[src], eid)
        self._insert_sorted(self._in[trg], eid)
        self._next_id = max(self._next_id, eid + 1)


# --- native text format ------------------------------------------------------

def to_native(g: Graph) -> str:
    """Line-oriented text form; bit-exact round-trip with from_native."""
    lines = []
    for nid in g.nodes():
        lines.append(f"node {nid} {g.element_type(nid)}")
    for eid in g.edges():
        lines.append(f"edge {eid} {g.element_type(eid)} {g.source(eid)} {g.target(eid)}")
    for elem in g.nodes() + g.edges():
        type_name = g.element_type(elem)
        defaults = {name: default_value(g.types, kind)
                    for name, kind in g.types.all_attributes(type_name)}
        attrs = g.attrs_of(elem)
        for name in sorted(attrs):
            if attrs[name] != defaults[name]:
                lines.append(f"attr {elem} {name} {format_literal(attrs[name])}")
    return "".join(line + "\n" for line in lines)


def from_native(text: str, types: TypeGraph) -> Graph:
    g = Graph(types)
    pending_attrs: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=3)
        try:
            if parts[0] == "node" and len(parts) == 3:
                g._restore_node(int(parts[1]), parts[2])
            elif parts[0] == "edge":
                head, rest = parts[:3], parts[3].split()
                if len(rest) != 2:
                    raise GraphError("edge line needs source and target")
                g._restore_edge(int(head[1]), head[2], int(rest[0]), int(rest[1]))
            elif parts[0] == "attr" and len(parts) == 4:
                pending_attrs.append((int(parts[1]), parts[2], parts[3]))
            else:
                raise GraphError(f"unrecognized line {line!r}")
        except (ValueError, IndexError) as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
    for elem, name, literal in pending_attrs:
        kind = types.attr_kind(g.element_type(elem), name)
        g.set_attr(elem, name, parse_literal(literal, kind, types))
    return g


def canonical_text(g: Graph, type_map: dict[str, str] | None = None) -> str:
    """Deterministic serialization used for graph equality in tests.

    Ids are renumbered consecutively in ascending original order, so two
    graphs produced by the same creation history compare equal regardless
    of absolute id values. `type_map` substitutes type names on the way
    out, which lets migration tests compare modulo retyping.
    """
    remap: dict[int, int] = {}
    for elem in sorted(g.nodes()) + sorted(g.edges()):
        remap[elem] = len(remap)
    tmap = type_map or {}
    lines = []
    for nid in sorted(g.nodes()):
        t = g.element_type(nid)
        lines.append(f"node {remap[nid]} {tmap.get(t, t)}")
    for eid in sorted(g.edges()):
        t = g.element_type(eid)
        lines.append(f"edge {remap[eid]} {tmap.get(t, t)} "
                     f"{remap[g.source(eid)]} {remap[g.target(eid)]}")
    for elem in sorted(g.nodes()) + sorted(g.edges()):
        type_name = g.element_type(elem)
        defaults = {name: default_value(g.types, kind)
                    for name, kind in g.types.all_attributes(type_name)}
        attrs = g.attrs_of(elem)
        for name in sorted(attrs):
            if attrs[name] != defaults[name]:
                lines.append(f"attr {remap[elem]} {name} {format_literal(attrs[name])}")
    return "".join(line + "\n" for line in lines)
