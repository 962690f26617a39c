"""Directed acyclic graphs: parsing, validation and topological order."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ._util import CycleError, UsageError


@dataclass(frozen=True)
class DagSpec:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def parents(self, node: str) -> tuple[str, ...]:
        """Parents of ``node`` in declared node order."""
        ps = {p for p, c in self.edges if c == node}
        return tuple(v for v in self.nodes if v in ps)

    def children(self, node: str) -> tuple[str, ...]:
        cs = {c for p, c in self.edges if p == node}
        return tuple(v for v in self.nodes if v in cs)

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> DagSpec:
        return load_dag(d.get("edges", []), d.get("nodes"))


def load_dag(edges, nodes=None) -> DagSpec:
    """Validate an edge list (and optional node list) and build a :class:`DagSpec`.

    Without ``nodes`` the node order is that of first appearance in ``edges``.
    """
    edge_list = []
    for e in edges:
        if len(e) != 2:
            raise UsageError(f"edge must be a (parent, child) pair, got {e!r}")
        edge_list.append((str(e[0]), str(e[1])))
    if nodes is None:
        seen = {}
        for p, c in edge_list:
            seen.setdefault(p, None)
            seen.setdefault(c, None)
        nodes = tuple(seen)
    else:
        nodes = tuple(str(v) for v in nodes)
        if len(set(nodes)) != len(nodes):
            raise UsageError("duplicate node names")
    known = set(nodes)
    for p, c in edge_list:
        for v in (p, c):
            if v not in known:
                raise UsageError(f"edge {p}->{c} names unknown node {v!r}")
        if p == c:
            raise CycleError(f"self-loop on {p}")
    if len(set(edge_list)) != len(edge_list):
        raise UsageError("duplicate edges")
    dag = DagSpec(nodes, tuple(edge_list))
    topo_sort(dag)
    return dag


def read_dag(path) -> DagSpec:
    """Read ``{"nodes": [...], "edges": [[parent, child], ...]}`` from a JSON file."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(d, dict) or "edges" not in d:
        raise UsageError(f"{path}: expected an object with an 'edges' field")
    return DagSpec.from_dict(d)


def topo_sort(dag: DagSpec) -> tuple[str, ...]:
    """Kahn's algorithm; among ready nodes the earliest declared one goes first."""
    indeg = {v: 0 for v in dag.nodes}
    for _, c in dag.edges:
        indeg[c] += 1
    rank = {v: k for k, v in enumerate(dag.nodes)}
    order = []
    ready = [v for v in dag.nodes if indeg[v] == 0]
    while ready:
        v = min(ready, key=rank.__getitem__)
        ready.remove(v)
        order.append(v)
        for c in dag.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) < len(dag.nodes):
        left = set(dag.nodes) - set(order)
        p, c = next((p, c) for p, c in dag.edges if p in left and c in left)
        raise CycleError(f"graph has a cycle through edge {p}->{c}")
    return tuple(order)
