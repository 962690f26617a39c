import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vinesem._util import CycleError, UsageError
from vinesem.graph import DagSpec, load_dag, read_dag, topo_sort

TABLE_ORDER = ("pip3", "plc", "pip2", "pkc", "pka", "p38", "jnk", "raf", "mek", "erk", "akt")


def test_consent_graph_order(dag):
    assert len(dag.nodes) == 11 and len(dag.edges) == 20
    assert topo_sort(dag) == TABLE_ORDER


def test_consent_parents(dag):
    assert set(dag.parents("akt")) == {"erk", "pka", "pip3"}
    assert set(dag.parents("mek")) == {"raf", "pka", "pkc"}
    assert dag.parents("pip3") == ()
    assert set(dag.children("pka")) == {"p38", "jnk", "raf", "mek", "erk", "akt"}


def test_two_cycle_rejected():
    with pytest.raises(CycleError, match="->"):
        load_dag([("a", "b"), ("b", "a")])


def test_longer_cycle_names_an_edge():
    with pytest.raises(CycleError) as info:
        load_dag([("x", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
    msg = str(info.value)
    assert any(f"{p}->{c}" in msg for p, c in [("a", "b"), ("b", "c"), ("c", "a")])


def test_self_loop_rejected():
    with pytest.raises(CycleError):
        load_dag([("a", "a")])


def test_empty_edges_keep_declaration_order():
    assert topo_sort(load_dag([], nodes=["x", "y", "z"])) == ("x", "y", "z")


@pytest.mark.parametrize("edges, nodes", [
    ([("a", "q")], ["a", "b"]),
    ([("a", "b"), ("a", "b")], None),
    ([("a", "b", "c")], None),
    ([], ["a", "a"]),
])
def test_usage_errors(edges, nodes):
    with pytest.raises(UsageError):
        load_dag(edges, nodes)


def test_read_dag_reports_json_line(tmp_path):
    p = tmp_path / "g.json"
    p.write_text('{"nodes": ["a", "b"],\n "edges": [["a", "b"],]}')
    with pytest.raises(UsageError, match="line 2"):
        read_dag(p)


def test_roundtrip(dag, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps(dag.to_dict()))
    assert read_dag(p) == dag
    assert DagSpec.from_dict(dag.to_dict()) == dag


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9).flatmap(lambda k: st.tuples(
    st.just(k),
    st.lists(st.tuples(st.integers(0, k - 1), st.integers(0, k - 1)), max_size=20),
    st.permutations(range(k)),
)))
def test_topological_order_respects_edges(case):
    k, pairs, perm = case
    # orient every edge from lower to higher index so the graph is acyclic
    edges = sorted({(f"n{min(a, b)}", f"n{max(a, b)}") for a, b in pairs if a != b})
    dag = load_dag(edges, nodes=[f"n{i}" for i in perm])
    order = topo_sort(dag)
    pos = {v: i for i, v in enumerate(order)}
    assert sorted(order) == sorted(dag.nodes)
    assert all(pos[p] < pos[c] for p, c in dag.edges)
