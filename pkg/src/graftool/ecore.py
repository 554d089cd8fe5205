"""Ecore metamodel import and XMI instance import.

The supported Ecore subset is EPackage (including nested and multi-root
documents), EClass, EAttribute, EReference, EEnum, and eSuperTypes.
Name mangling: classes are prefixed with their package path, attributes
with an underscore, references with their owning class name. Every
reference edge type gets an `_index : int` attribute so instance import
can record XMI ordering.

Instance documents must be single-file, with intra-document references
written as position paths (`//@ref.0/@sub.1`) and namespace URIs equal
to the mangled package path.
"""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import EcoreError, GraphError
from .graph import Graph
from .model import (
    BOOLEAN,
    FLOAT,
    INT,
    STRING,
    AttrKind,
    EnumDescriptor,
    TypeDescriptor,
    TypeGraph,
    enum_kind,
)
from .values import parse_scalar_text

ECORE_NS = "http://www.eclipse.org/emf/2002/Ecore"
XMI_NS_2 = "http://www.omg.org/XMI"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"

_DATATYPE_KINDS = {
    "EString": STRING,
    "EInt": INT,
    "EIntegerObject": INT,
    "ELong": INT,
    "EShort": INT,
    "EBoolean": BOOLEAN,
    "EBooleanObject": BOOLEAN,
    "EDouble": FLOAT,
    "EFloat": FLOAT,
}

_UNSUPPORTED_FEATURES = {
    "EOperation": "EOperation",
    "EAnnotation": "EAnnotation",
    "ETypeParameter": "generics (ETypeParameter)",
    "EGenericType": "generics (EGenericType)",
}

_IGNORED_REF_FLAGS = ("lowerBound", "upperBound", "ordered", "unique",
                      "eOpposite", "resolveProxies", "derived", "transient",
                      "volatile", "defaultValueLiteral", "iD", "unsettable",
                      "changeable")


@dataclass
class EcoreModel:
    """Result of an Ecore import: the type graph plus import diagnostics."""

    types: TypeGraph
    name: str
    notes: list[str] = field(default_factory=list)


@dataclass
class _Classifier:
    kind: str               # "class" | "enum" | "datatype"
    mangled: str
    pkg_path: tuple[str, ...]
    elem: ET.Element | None


def import_ecore(document: str, stem: str = "model") -> EcoreModel:
    """Build a TypeGraph from an Ecore document.

    The model identity is `<stem>__ecore`, matching the name rule files
    reference in their `using` clause.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise EcoreError(f"not well-formed XML: {exc}") from exc

    packages = _collect_packages(root)
    if not packages:
        raise EcoreError("document contains no EPackage")

    notes: list[str] = []
    registry: dict[tuple[str, ...], _Classifier] = {}
    single_root = len(packages) == 1

    def scan(pkg: ET.Element, path: tuple[str, ...]):
        name = pkg.get("name")
        if not name:
            raise EcoreError("EPackage without a name")
        here = path + (name,)
        for child in pkg:
            tag = _localname(child.tag)
            if tag == "eSubpackages":
                scan(child, here)
            elif tag == "eClassifiers":
                xsi = _xsi_type(child)
                if xsi == "EClass":
                    kind = "class"
                elif xsi == "EEnum":
                    kind = "enum"
                elif xsi == "EDataType":
                    kind = "datatype"
                else:
                    raise EcoreError(f"unsupported Ecore feature: {xsi or tag}")
                cname = child.get("name")
                if not cname:
                    raise EcoreError("classifier without a name")
                mangled = "_".join(here + (cname,))
                key_full = here + (cname,)
                registry[key_full] = _Classifier(kind, mangled, here, child)
                if single_root:
                    registry.setdefault(key_full[1:], registry[key_full])
            elif tag in _UNSUPPORTED_FEATURES:
                raise EcoreError(f"unsupported Ecore feature: {_UNSUPPORTED_FEATURES[tag]}")

    for pkg in packages:
        scan(pkg, ())

    def resolve(fragment: str, what: str) -> _Classifier:
        if not fragment.startswith("#//"):
            raise EcoreError(f"unsupported {what} reference {fragment!r} "
                             "(only intra-document #// paths)")
        key = tuple(fragment[3:].split("/"))
        hit = registry.get(key)
        if hit is None:
            raise EcoreError(f"cannot resolve {what} reference {fragment!r}")
        return hit

    types: list[TypeDescriptor] = []
    enums: list[EnumDescriptor] = []
    for cls in _unique(registry):
        if cls.kind == "enum":
            enums.append(_build_enum(cls))
        elif cls.kind == "class":
            node_td, edge_tds = _build_class(cls, resolve, notes)
            types.append(node_td)
            types.extend(edge_tds)

    tg = TypeGraph(types, enums, name=f"{stem}__ecore")
    return EcoreModel(tg, f"{stem}__ecore", notes)


def _unique(registry: dict) -> list[_Classifier]:
    seen: set[int] = set()
    out = []
    for cls in registry.values():
        if id(cls) not in seen:
            seen.add(id(cls))
            out.append(cls)
    return out


def _collect_packages(root: ET.Element) -> list[ET.Element]:
    if _localname(root.tag) == "EPackage":
        return [root]
    if _localname(root.tag) == "XMI":
        return [c for c in root if _localname(c.tag) == "EPackage"]
    raise EcoreError(f"unexpected document root {root.tag!r}")


def _build_enum(cls: _Classifier) -> EnumDescriptor:
    items: list[tuple[str, int]] = []
    next_value = 0
    for lit in cls.elem:
        tag = _localname(lit.tag)
        if tag != "eLiterals":
            raise EcoreError(f"unsupported Ecore feature inside EEnum: {tag}")
        name = lit.get("name")
        if not name:
            raise EcoreError(f"enum {cls.mangled}: literal without a name")
        value = int(lit.get("value", next_value))
        items.append((name, value))
        next_value = value + 1
    return EnumDescriptor(cls.mangled, tuple(items))


def _build_class(cls: _Classifier, resolve, notes: list[str]):
    elem = cls.elem
    supers: list[str] = []
    for frag in (elem.get("eSuperTypes") or "").split():
        sup = resolve(frag, "eSuperTypes")
        if sup.kind != "class":
            raise EcoreError(f"{cls.mangled}: supertype {frag!r} is not an EClass")
        supers.append(sup.mangled)
    if elem.get("abstract") or elem.get("interface"):
        notes.append(f"{cls.mangled}: abstract/interface flag ignored")

    attrs: list[tuple[str, AttrKind]] = []
    edge_tds: list[TypeDescriptor] = []
    for feat in elem:
        tag = _localname(feat.tag)
        if tag == "eSuperTypes":
            frag = feat.get("href") or ""
            sup = resolve(frag, "eSuperTypes")
            supers.append(sup.mangled)
            continue
        if tag in _UNSUPPORTED_FEATURES:
            raise EcoreError(f"unsupported Ecore feature: {_UNSUPPORTED_FEATURES[tag]}")
        if tag != "eStructuralFeatures":
            raise EcoreError(f"unsupported Ecore feature inside EClass: {tag}")
        xsi = _xsi_type(feat)
        fname = feat.get("name")
        if not fname:
            raise EcoreError(f"{cls.mangled}: feature without a name")
        if xsi == "EAttribute":
            attrs.append((f"_{fname}", _attribute_kind(cls, feat, resolve)))
        elif xsi == "EReference":
            ignored = [f for f in _IGNORED_REF_FLAGS if feat.get(f) is not None]
            if ignored:
                notes.append(f"{cls.mangled}.{fname}: ignored {', '.join(ignored)}")
            target = _feature_type(feat, resolve, f"{cls.mangled}.{fname}")
            if target.kind != "class":
                raise EcoreError(f"{cls.mangled}.{fname}: reference target must be an EClass")
            containment = feat.get("containment") == "true"
            edge_tds.append(TypeDescriptor(
                "edge", f"{cls.mangled}_{fname}",
                attributes=(("_index", INT),),
                source_type=cls.mangled, target_type=target.mangled,
                containment=containment))
        else:
            raise EcoreError(f"unsupported Ecore feature: {xsi or tag}")
    node_td = TypeDescriptor("node", cls.mangled, tuple(supers), tuple(attrs))
    return node_td, edge_tds


def _attribute_kind(cls: _Classifier, feat: ET.Element, resolve) -> AttrKind:
    where = f"{cls.mangled}._{feat.get('name')}"
    etype = feat.get("eType")
    if etype:
        if "#//" in etype and etype.split()[0].startswith("ecore:EDataType"):
            builtin = etype.rsplit("#//", 1)[1]
            if builtin in _DATATYPE_KINDS:
                return _DATATYPE_KINDS[builtin]
            raise EcoreError(f"{where}: unsupported data type {builtin}")
        if etype.startswith("#//"):
            target = resolve(etype, where)
            if target.kind == "enum":
                return enum_kind(target.mangled)
            raise EcoreError(f"{where}: attribute type must be a data type or EEnum")
        raise EcoreError(f"{where}: unsupported eType form {etype!r}")
    for child in feat:
        if _localname(child.tag) == "eType":
            href = child.get("href") or ""
            if href.startswith(f"{ECORE_NS}#//"):
                builtin = href.rsplit("#//", 1)[1]
                if builtin in _DATATYPE_KINDS:
                    return _DATATYPE_KINDS[builtin]
                raise EcoreError(f"{where}: unsupported data type {builtin}")
            if href.startswith("#//"):
                target = resolve(href, where)
                if target.kind == "enum":
                    return enum_kind(target.mangled)
            raise EcoreError(f"{where}: unsupported eType href {href!r}")
    raise EcoreError(f"{where}: attribute without eType")


def _feature_type(feat: ET.Element, resolve, where: str) -> _Classifier:
    etype = feat.get("eType")
    if etype:
        return resolve(etype, where)
    for child in feat:
        if _localname(child.tag) == "eType":
            href = child.get("href") or ""
            return resolve(href, where)
    raise EcoreError(f"{where}: reference without eType")


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xsi_type(elem: ET.Element) -> str | None:
    raw = elem.get(f"{{{XSI_NS}}}type")
    if raw is None:
        return None
    return raw.split(":", 1)[-1]


# --- XMI instance import -----------------------------------------------------

def import_instance(document: str, tg: TypeGraph, g: Graph) -> int:
    """Populate `g` from an XMI instance document; returns elements created.

    One node per XMI element, one edge per containment or reference link.
    Reference edges get `_index` set from their position, preserving the
    document's ordering.
    """
    ns_map: dict[str, str] = {}
    events = ET.iterparse(io.StringIO(document), events=("start-ns", "start"))
    root = None
    try:
        for event, payload in events:
            if event == "start-ns":
                prefix, uri = payload
                ns_map[prefix] = uri
            elif root is None:
                root = payload
    except ET.ParseError as exc:
        raise EcoreError(f"not well-formed XML: {exc}") from exc
    if root is None:
        raise EcoreError("empty instance document")

    created_nodes: dict[int, int] = {}
    count = 0

    def node_type_for(elem: ET.Element, parent_type: str | None) -> str:
        xsi = elem.get(f"{{{XSI_NS}}}type")
        if xsi is not None:
            prefix, _, cname = xsi.rpartition(":")
            pkg = ns_map.get(prefix, prefix)
            tname = f"{pkg}_{cname}"
            if tname not in tg.node_types:
                raise EcoreError(f"instance tag resolves to unknown type {tname}")
            return tname
        if parent_type is None:
            if not elem.tag.startswith("{"):
                raise EcoreError("instance root must carry a package namespace")
            pkg = elem.tag.rsplit("}", 1)[0].lstrip("{")
            tname = f"{pkg}_{_localname(elem.tag)}"
            if tname not in tg.node_types:
                raise EcoreError(f"instance root resolves to unknown type {tname}")
            return tname
        edge_td = _edge_type_for(tg, parent_type, _localname(elem.tag))
        return edge_td.target_type

    def create_nodes(elem: ET.Element, parent_type: str | None):
        nonlocal count
        tname = node_type_for(elem, parent_type)
        created_nodes[id(elem)] = g.add_node(tname)
        count += 1
        for child in elem:
            create_nodes(child, tname)

    create_nodes(root, None)

    def resolve_path(path: str) -> ET.Element:
        if not path.startswith("//@"):
            raise EcoreError(f"unsupported reference path {path!r}")
        current = root
        for step in path[2:].split("/"):
            if not step.startswith("@") or "." not in step:
                raise EcoreError(f"unsupported reference path {path!r}")
            name, _, idx = step[1:].rpartition(".")
            same = [c for c in current if _localname(c.tag) == name]
            try:
                current = same[int(idx)]
            except (IndexError, ValueError) as exc:
                raise EcoreError(f"dangling reference path {path!r}") from exc
        return current

    def wire(elem: ET.Element):
        nonlocal count
        nid = created_nodes[id(elem)]
        tname = g.element_type(nid)
        for raw_name, raw_value in elem.attrib.items():
            if raw_name.startswith("{") or raw_name == "xmlns":
                continue  # xmi:version, xsi:type and friends
            attr = f"_{raw_name}"
            if tg.has_attr(tname, attr):
                kind = tg.attr_kind(tname, attr)
                try:
                    g.set_attr(nid, attr, parse_scalar_text(raw_value, kind, tg))
                except GraphError as exc:
                    raise EcoreError(f"attribute {raw_name}: {exc}") from exc
                continue
            edge_td = _edge_type_for(tg, tname, raw_name, optional=True)
            if edge_td is None:
                raise EcoreError(f"{tname} has no attribute or reference {raw_name!r}")
            for index, path in enumerate(raw_value.split()):
                target = resolve_path(path)
                eid = g.add_edge(edge_td.name, nid, created_nodes[id(target)])
                g.set_attr(eid, "_index", index)
                count += 1
        position: dict[str, int] = {}
        for child in elem:
            ref = _localname(child.tag)
            edge_td = _edge_type_for(tg, tname, ref)
            index = position.get(ref, 0)
            position[ref] = index + 1
            eid = g.add_edge(edge_td.name, nid, created_nodes[id(child)])
            g.set_attr(eid, "_index", index)
            count += 1
            wire(child)

    wire(root)
    return count


def _edge_type_for(tg: TypeGraph, owner_type: str, ref: str, optional: bool = False):
    """Find the edge type for reference `ref` declared on `owner_type` or an ancestor."""
    for anc in _ancestors_in_order(tg, owner_type):
        name = f"{anc}_{ref}"
        if name in tg.edge_types:
            return tg.edge_types[name]
    if optional:
        return None
    raise EcoreError(f"type {owner_type} has no reference {ref!r}")


def _ancestors_in_order(tg: TypeGraph, type_name: str) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()

    def visit(t: str):
        if t in seen:
            return
        seen.add(t)
        out.append(t)
        for sup in tg.node_types[t].supertypes:
            visit(sup)

    visit(type_name)
    return out
