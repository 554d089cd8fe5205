"""The shipped task corpus: fixtures, scripts, and oracle-checked cases.

Each case runs one `.grs` script from the bundled data directory against a
temporary output directory, then compares what the run produced (emitted
files, exports, the final graph) with values computed by the committed
oracle programs in oracles.py. Rewrite validation is always on, so the
store invariants are checked after every rewrite of every case.
"""

from __future__ import annotations

import io
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import oracles
from ..ecore import import_ecore, import_instance
from ..graph import Graph, canonical_text, from_native, to_native
from ..shellio import Shell

DATA_DIR = Path(__file__).resolve().parent / "data"


@dataclass
class CaseRun:
    status: int
    shell: Shell
    out_dir: Path
    stdout: str

    def out_file(self, name: str) -> str:
        return (self.out_dir / name).read_text(encoding="utf-8")


@dataclass
class TaskCase:
    name: str
    script: str
    check: Callable[[CaseRun], list[str]]
    fixtures: tuple[str, ...] = ()


@dataclass
class CaseReport:
    name: str
    ok: bool
    problems: list[str] = field(default_factory=list)


def _run_script(script: str, out_dir: Path, debug=None,
                force_debug: bool = False) -> CaseRun:
    stdout = io.StringIO()
    shell = Shell(out_dir=out_dir, debug=debug, force_debug=force_debug,
                  stdout=stdout, validate=True)
    status = shell.run_script(DATA_DIR / script)
    return CaseRun(status, shell, out_dir, stdout.getvalue())


def run_case(name: str, out_dir=None, debug=None,
             force_debug: bool = False) -> CaseReport:
    case = CASES[name]
    if out_dir is None:
        with tempfile.TemporaryDirectory(prefix=f"graftool-{name}-") as tmp:
            return _check_case(case, Path(tmp), debug, force_debug)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _check_case(case, out_dir, debug, force_debug)


def _check_case(case: TaskCase, out_dir: Path, debug,
                force_debug: bool) -> CaseReport:
    run = _run_script(case.script, out_dir, debug, force_debug)
    problems: list[str] = []
    if run.status != 0:
        problems.append(f"script exited with status {run.status}")
    else:
        problems.extend(case.check(run))
    return CaseReport(case.name, not problems, problems)


def _fixture(name: str) -> str:
    return (DATA_DIR / name).read_text(encoding="utf-8")


def _import_fixture(ecore_name: str, instance_name: str | None) -> Graph:
    model = import_ecore(_fixture(ecore_name), stem=Path(ecore_name).stem)
    g = Graph(model.types)
    if instance_name is not None:
        import_instance(_fixture(instance_name), model.types, g)
    return g


def _diff(what: str, got: str, want: str) -> list[str]:
    if got == want:
        return []
    got_lines = got.splitlines()
    want_lines = want.splitlines()
    detail = next((f"line {i + 1}: got {g!r}, want {w!r}"
                   for i, (g, w) in enumerate(zip(got_lines, want_lines))
                   if g != w),
                  f"lengths differ: got {len(got_lines)}, want {len(want_lines)} lines")
    return [f"{what} mismatch: {detail}"]


# --- case checks ---------------------------------------------------------------


def _check_hello_create(run: CaseRun) -> list[str]:
    model = import_ecore(_fixture("helloworld.ecore"), stem="helloworld")
    expected = Graph(model.types)
    nid = expected.add_node("helloworld_Greeting")
    expected.set_attr(nid, "_text", "Hello World")
    return _diff("final graph", canonical_text(run.shell.graph),
                 canonical_text(expected))


def _check_hello_create_ext(run: CaseRun) -> list[str]:
    model = import_ecore(_fixture("helloworldext.ecore"), stem="helloworldext")
    expected = Graph(model.types)
    greeting = expected.add_node("helloworldext_Greeting")
    message = expected.add_node("helloworldext_GreetingMessage")
    person = expected.add_node("helloworldext_Person")
    expected.add_edge("helloworldext_Greeting_greetingMessage", greeting, message)
    expected.add_edge("helloworldext_Greeting_person", greeting, person)
    expected.set_attr(message, "_text", "Hello World from ")
    expected.set_attr(person, "_name", "TTC Participants!")
    problems = _diff("final graph", canonical_text(run.shell.graph),
                     canonical_text(expected))
    exported = run.out_file("created.native")
    problems += _diff("native round-trip", to_native(
        from_native(exported, run.shell.graph.types)), exported)
    return problems


def _check_hello_text(run: CaseRun) -> list[str]:
    want = oracles.expected_hello_report(_fixture("hello-instance.xmi"))
    return _diff("emitted file", run.out_file("HelloWorldResult.xmi"), want)


def _check_count(run: CaseRun) -> list[str]:
    want = oracles.expected_count_report(_fixture("graph-instance.xmi"))
    return _diff("emitted counts", run.out_file("counts.xmi"), want)


def _check_reverse(run: CaseRun) -> list[str]:
    initial = _import_fixture("graph1.ecore", "graph-instance.xmi")
    want = oracles.reverse_canonical(canonical_text(initial))
    problems = _diff("final graph", canonical_text(run.shell.graph), want)
    problems += _diff("export", run.out_file("reversed.native"),
                      to_native(run.shell.graph))
    return problems


def _check_migration_simple(run: CaseRun) -> list[str]:
    initial = _import_fixture("migration1.ecore", "graph-instance.xmi")
    want = canonical_text(initial, type_map=oracles.SIMPLE_MIGRATION_TYPE_MAP)
    problems = _diff("final graph", canonical_text(run.shell.graph), want)
    g = run.shell.graph
    tg = g.types
    for nid in g.nodes():
        t = g.element_type(nid)
        if t == "graph2_Graph":
            continue
        if not tg.is_subtype(t, "graph2_GraphComponent"):
            problems.append(f"node {nid} has type {t}, not a GraphComponent")
    return problems


def _check_migration_more(run: CaseRun) -> list[str]:
    problems: list[str] = []
    g = run.shell.graph
    expected = oracles.expected_links_to(_fixture("graph-instance.xmi"))
    by_name = {g.get_attr(n, "_name"): n for n in g.nodes_of_type("graph3_Node")}
    for src_name, target_names in expected.items():
        nid = by_name[src_name]
        outgoing = [e for e in g.out_edges(nid)
                    if g.element_type(e) == "graph3_Node_linksTo"]
        indices = sorted(g.get_attr(e, "_index") for e in outgoing)
        if indices != list(range(len(target_names))):
            problems.append(f"{src_name}: linksTo indices {indices}, want "
                            f"0..{len(target_names) - 1}")
            continue
        ordered = sorted(outgoing, key=lambda e: g.get_attr(e, "_index"))
        got_targets = [g.get_attr(g.target(e), "_name") for e in ordered]
        if got_targets != target_names:
            problems.append(f"{src_name}: targets {got_targets}, want "
                            f"{target_names} (original order)")
    leftovers = [t for t in ("graph1_Graph", "graph1_Node", "graph1_Edge",
                             "graph1_Graph_nodes", "graph1_Graph_edges",
                             "graph1_Edge_src", "graph1_Edge_trg")
                 if g.count_elements(t, "exact")]
    if leftovers:
        problems.append(f"unmigrated elements of types: {leftovers}")
    return problems


def _check_delete(run: CaseRun) -> list[str]:
    oracle_graph = _import_fixture("graph1.ecore", "graph-instance.xmi")
    victim = next(n for n in oracle_graph.nodes_of_type("graph1_Node")
                  if oracle_graph.get_attr(n, "_name") == "n1")
    doomed_edges = [en for en in oracle_graph.nodes_of_type("graph1_Edge")
                    if any(oracle_graph.target(e) == victim
                           for e in oracle_graph.out_edges(en))]
    for en in doomed_edges:
        oracle_graph.delete_node(en)
    oracle_graph.delete_node(victim)
    problems = _diff("final graph", canonical_text(run.shell.graph),
                     canonical_text(oracle_graph))
    run.shell.graph.check_consistency()
    return problems


def _relation_of(g: Graph) -> dict[tuple[int, int], int]:
    order = {nid: i for i, nid in enumerate(g.nodes_of_type("rel_RNode"))}
    pairs: dict[tuple[int, int], int] = {}
    for e in g.edges_of_type("rel_RNode_to"):
        key = (order[g.source(e)], order[g.target(e)])
        pairs[key] = pairs.get(key, 0) + 1
    return pairs


def _check_transitive(run: CaseRun) -> list[str]:
    _, orig = oracles.relation_from_instance(_fixture("rel-instance.xmi"))
    base = set(orig)
    want_relation = base | oracles.compose(base)
    got = _relation_of(run.shell.graph)
    problems = []
    if set(got) != want_relation:
        problems.append(f"relation is {sorted(got)}, want {sorted(want_relation)}")
    inserted = sum(got.values()) - sum(orig.values())
    if inserted != len(want_relation - base):
        problems.append(f"{inserted} edges inserted, want "
                        f"{len(want_relation - base)} (duplicates?)")
    return problems


def _check_transitive_closure(run: CaseRun) -> list[str]:
    _, orig = oracles.relation_from_instance(_fixture("rel-instance.xmi"))
    base = set(orig)
    want_relation = oracles.transitive_closure(base)
    got = _relation_of(run.shell.graph)
    problems = []
    if set(got) != want_relation:
        problems.append(f"relation is {sorted(got)}, want {sorted(want_relation)}")
    inserted = sum(got.values()) - sum(orig.values())
    if inserted != len(want_relation - base):
        problems.append(f"{inserted} edges inserted, want "
                        f"{len(want_relation - base)} (duplicates?)")
    return problems


CASES: dict[str, TaskCase] = {case.name: case for case in [
    TaskCase("hello-create", "HelloWorld.grs", _check_hello_create,
             ("helloworld.ecore", "HelloWorld.grg")),
    TaskCase("hello-create-ext", "HelloWorldExtCreate.grs",
             _check_hello_create_ext,
             ("helloworldext.ecore", "HelloWorldExt.grg", "Emitter.gri")),
    TaskCase("hello-text", "HelloWorldExt.grs", _check_hello_text,
             ("helloworldext.ecore", "hello-instance.xmi", "HelloWorldExt.grg",
              "Emitter.gri")),
    TaskCase("count", "Count.grs", _check_count,
             ("graph1.ecore", "graph-instance.xmi", "Count.grg", "Emitter.gri",
              "layout.grsi")),
    TaskCase("reverse", "Reverse.grs", _check_reverse,
             ("graph1.ecore", "graph-instance.xmi", "Reverse.grg")),
    TaskCase("migration-simple", "SimpleToEvolved.grs", _check_migration_simple,
             ("migration1.ecore", "graph-instance.xmi", "SimpleToEvolved.grg")),
    TaskCase("migration-more", "SimpleToMoreEvolved.grs", _check_migration_more,
             ("migration2.ecore", "graph-instance.xmi",
              "SimpleToMoreEvolved.grg")),
    TaskCase("delete", "Delete.grs", _check_delete,
             ("graph1.ecore", "graph-instance.xmi", "Delete.grg")),
    TaskCase("transitive", "Transitive.grs", _check_transitive,
             ("rel.ecore", "rel-instance.xmi", "Transitive.grg")),
    TaskCase("transitive-closure", "TransitiveClosure.grs",
             _check_transitive_closure,
             ("rel.ecore", "rel-instance.xmi", "Transitive.grg")),
]}
