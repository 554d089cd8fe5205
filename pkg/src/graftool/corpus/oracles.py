"""Committed oracle programs for the task corpus.

Every expected value a corpus case asserts is computed here, from the
fixture XML or by direct graph-store construction, never by running the
rules under test. Count oracles enumerate exhaustively; the relation
oracles use boolean matrix composition.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from itertools import permutations


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_graph_instance(xml_text: str):
    """(node names, edge list) where an edge is (src index | None, trg | None)."""
    root = ET.fromstring(xml_text)
    names = [child.get("name") or "" for child in root
             if _local(child.tag) == "nodes"]
    edges = []
    for child in root:
        if _local(child.tag) != "edges":
            continue
        src = child.get("src")
        trg = child.get("trg")
        to_index = lambda ref: (int(ref.rsplit(".", 1)[1])
                                if ref is not None else None)
        edges.append((to_index(src), to_index(trg)))
    return names, edges


def count_nodes(xml_text: str) -> int:
    names, _ = parse_graph_instance(xml_text)
    return len(names)


def count_looping_edges(xml_text: str) -> int:
    _, edges = parse_graph_instance(xml_text)
    return sum(1 for s, t in edges if s is not None and s == t)


def count_dangling_edges(xml_text: str) -> int:
    # An edge with a source but no target, or a target but no source; an
    # edge with neither end is not counted (neither alternative matches).
    _, edges = parse_graph_instance(xml_text)
    return sum(1 for s, t in edges if (s is None) != (t is None))


def count_isolated_nodes(xml_text: str) -> int:
    names, edges = parse_graph_instance(xml_text)
    touched = set()
    for s, t in edges:
        if s is not None:
            touched.add(s)
        if t is not None:
            touched.add(t)
    return sum(1 for i in range(len(names)) if i not in touched)


def count_three_cycles(xml_text: str) -> int:
    """Bindings of the 3-cycle pattern: ordered distinct node triples, with
    parallel edge multiplicities multiplied in."""
    names, edges = parse_graph_instance(xml_text)
    mult: dict[tuple[int, int], int] = {}
    for s, t in edges:
        if s is not None and t is not None:
            mult[(s, t)] = mult.get((s, t), 0) + 1
    total = 0
    for a, b, c in permutations(range(len(names)), 3):
        total += (mult.get((a, b), 0) * mult.get((b, c), 0)
                  * mult.get((c, a), 0))
    return total


def expected_count_report(xml_text: str) -> str:
    """The exact emitted file for the count script, all five subtasks."""
    values = [
        count_nodes(xml_text),
        count_looping_edges(xml_text),
        count_dangling_edges(xml_text),
        count_isolated_nodes(xml_text),
        count_three_cycles(xml_text),
    ]
    line = ('<result:IntResult xmi:version="2.0" '
            'xmlns:xmi="http://www.omg.org/XMI" xmlns:result="result" '
            'result="{}"/>\n')
    return "".join(line.format(v) for v in values)


def hello_concatenation(xml_text: str) -> str:
    root = ET.fromstring(xml_text)
    text = name = None
    for child in root:
        if _local(child.tag) == "greetingMessage":
            text = child.get("text")
        elif _local(child.tag) == "person":
            name = child.get("name")
    assert text is not None and name is not None
    return text + name


def expected_hello_report(xml_text: str) -> str:
    return ('<result:StringResult xmi:version="2.0" '
            'xmlns:xmi="http://www.omg.org/XMI" xmlns:result="result" '
            f'result="{hello_concatenation(xml_text)}"/>\n')


def reverse_canonical(initial_canonical: str) -> str:
    """Expected canonical form after reversing: every src reference edge
    becomes a trg reference edge and vice versa; nothing else changes."""
    swap = {"graph1_Edge_src": "graph1_Edge_trg",
            "graph1_Edge_trg": "graph1_Edge_src"}
    out = []
    for line in initial_canonical.splitlines():
        parts = line.split(" ")
        if parts and parts[0] == "edge" and parts[2] in swap:
            parts[2] = swap[parts[2]]
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


SIMPLE_MIGRATION_TYPE_MAP = {
    "graph1_Graph": "graph2_Graph",
    "graph1_Node": "graph2_Node",
    "graph1_Edge": "graph2_Edge",
    "graph1_Graph_nodes": "graph2_Graph_gcs",
    "graph1_Graph_edges": "graph2_Graph_gcs",
    "graph1_Edge_src": "graph2_Edge_src",
    "graph1_Edge_trg": "graph2_Edge_trg",
}


def expected_links_to(xml_text: str) -> dict[str, list[str]]:
    """Per source node name, migrated linksTo target names in original edge
    order; the expected indices are 0..len-1 in this order."""
    names, edges = parse_graph_instance(xml_text)
    per_node: dict[str, list[str]] = {name: [] for name in names}
    for s, t in edges:
        if s is not None and t is not None:
            per_node[names[s]].append(names[t])
    return per_node


def deleted_element_names(xml_text: str, victim: str):
    """(node index of the victim, set of edge positions incident to it)."""
    names, edges = parse_graph_instance(xml_text)
    idx = names.index(victim)
    incident = {pos for pos, (s, t) in enumerate(edges)
                if s == idx or t == idx}
    return idx, incident


def relation_from_instance(xml_text: str):
    """(node count, edge multiset as dict pair -> multiplicity)."""
    root = ET.fromstring(xml_text)
    children = [c for c in root if _local(c.tag) == "nodes"]
    pairs: dict[tuple[int, int], int] = {}
    for i, child in enumerate(children):
        for ref in (child.get("to") or "").split():
            j = int(ref.rsplit(".", 1)[1])
            pairs[(i, j)] = pairs.get((i, j), 0) + 1
    return len(children), pairs


def compose(rel: set[tuple[int, int]]) -> set[tuple[int, int]]:
    by_src: dict[int, set[int]] = {}
    for a, b in rel:
        by_src.setdefault(a, set()).add(b)
    out = set()
    for a, b in rel:
        for c in by_src.get(b, ()):
            out.add((a, c))
    return out


def transitive_closure(rel: set[tuple[int, int]]) -> set[tuple[int, int]]:
    closure = set(rel)
    while True:
        grown = closure | compose(closure)
        if grown == closure:
            return closure
        closure = grown
