import xml.etree.ElementTree as ET

import pytest

from graftool.corpus import CASES, DATA_DIR, run_case
from graftool.corpus import oracles

FIXTURE = (DATA_DIR / "graph-instance.xmi").read_text()


@pytest.mark.parametrize("name", sorted(CASES))
def test_case_passes(name, tmp_path):
    report = run_case(name, out_dir=tmp_path)
    assert report.ok, report.problems


def test_fixture_files_exist():
    for case in CASES.values():
        for fixture in case.fixtures + (case.script,):
            assert (DATA_DIR / fixture).is_file(), fixture


def test_count_oracles_on_shipped_fixture():
    # Spot-check the committed oracle values against hand counts of the
    # shipped instance: 8 nodes, one loop at n4, two half-dangling edges,
    # n7/n8 isolated, and a 3-cycle doubled by one parallel edge.
    assert oracles.count_nodes(FIXTURE) == 8
    assert oracles.count_looping_edges(FIXTURE) == 1
    assert oracles.count_dangling_edges(FIXTURE) == 2
    assert oracles.count_isolated_nodes(FIXTURE) == 2
    assert oracles.count_three_cycles(FIXTURE) == 6


def test_cycle_oracle_brute_force_cross_check():
    # Re-derive the cycle count with an unrelated enumeration over edge
    # position triples.
    _, edges = oracles.parse_graph_instance(FIXTURE)
    wellformed = [(i, s, t) for i, (s, t) in enumerate(edges)
                  if s is not None and t is not None]
    count = 0
    for i, s1, t1 in wellformed:
        for j, s2, t2 in wellformed:
            for k, s3, t3 in wellformed:
                if len({i, j, k}) == 3 and t1 == s2 and t2 == s3 and t3 == s1 \
                        and len({s1, s2, s3}) == 3:
                    count += 1
    assert oracles.count_three_cycles(FIXTURE) == count


def test_hello_oracle_matches_instance():
    xml = (DATA_DIR / "hello-instance.xmi").read_text()
    assert oracles.hello_concatenation(xml) == \
        "Hello World from TTC Participants!"
    root = ET.fromstring(oracles.expected_hello_report(xml))
    assert root.get("result") == "Hello World from TTC Participants!"


def test_relation_oracle():
    n, pairs = oracles.relation_from_instance(
        (DATA_DIR / "rel-instance.xmi").read_text())
    assert n == 4
    assert pairs == {(0, 1): 2, (0, 2): 1, (1, 2): 1, (2, 0): 1}
    base = set(pairs)
    assert oracles.compose(base) == {(0, 2), (0, 0), (1, 0), (2, 1), (2, 2)}
    closure = oracles.transitive_closure(base)
    assert closure == {(a, b) for a in range(3) for b in range(3)}


def test_unknown_case_raises():
    with pytest.raises(KeyError):
        run_case("no-such-case")
