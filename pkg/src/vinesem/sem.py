"""Structural equation models with D-vine regressions as node conditionals.

Each node's density given its DAG parents is its margin times the product of
the response-row copulas of a D-vine regression over a forward-selected
subset of the parents.  Fitting follows inference for margins: margins
first, then copulas on the PIT-transformed data.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._util import EPS, UsageError
from .dvine import CRITERIA, DVineRegModel, copula_families, fit_dvine_reg
from .graph import DagSpec, topo_sort
from .margins import KINDS, MarginModel, fit_margin, margin_gof

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemConfig:
    margins: str = "gaussian"
    copulas: str = "gaussian"
    criterion: str = "caic"
    pair_criterion: str = "aic"

    def __post_init__(self):
        if self.margins not in KINDS:
            raise UsageError(f"margin kind must be one of {KINDS}, got {self.margins!r}")
        if self.criterion not in CRITERIA:
            raise UsageError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        copula_families(self.copulas)


@dataclass(frozen=True)
class SemModel:
    dag: DagSpec
    order: tuple[str, ...]
    margins: dict
    regs: dict
    config: SemConfig
    n: int
    root_data: dict

    def pit(self, x) -> dict:
        """PIT of every node column present in ``x``; values hitting the clamp are counted."""
        out = {}
        clamped = 0
        for v, m in self.margins.items():
            if v in x:
                u = m.pit(np.asarray(x[v], dtype=float))
                clamped += int(np.count_nonzero((u <= EPS) | (u >= 1.0 - EPS)))
                out[v] = u
        if clamped:
            log.info("PIT clamped %d value(s) to [%g, 1 - %g]", clamped, EPS, EPS)
        return out

    def node_logdensity(self, node: str, x, u=None) -> np.ndarray:
        """log f(x_node | parents) = log margin density + log copula factor."""
        u = self.pit(x) if u is None else u
        reg = self.regs[node]
        lf = self.margins[node].logpdf(np.asarray(x[node], dtype=float))
        return lf + reg.cond_copula_logdensity(u[node], {p: u[p] for p in reg.order})

    def to_dict(self) -> dict:
        return {
            "kind": "sem",
            "dag": self.dag.to_dict(),
            "config": asdict(self.config),
            "n": self.n,
            "margins": {k: v.to_dict() for k, v in self.margins.items()},
            "regs": {k: v.to_dict() for k, v in self.regs.items()},
            "root_data": {k: v.tolist() for k, v in self.root_data.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> SemModel:
        dag = DagSpec.from_dict(d["dag"])
        return cls(
            dag,
            topo_sort(dag),
            {k: MarginModel.from_dict(v) for k, v in d["margins"].items()},
            {k: DVineRegModel.from_dict(v) for k, v in d["regs"].items()},
            SemConfig(**d["config"]),
            int(d["n"]),
            {k: np.asarray(v, dtype=float) for k, v in d["root_data"].items()},
        )


def _columns(data, dag: DagSpec) -> dict:
    missing = [v for v in dag.nodes if v not in data]
    if missing:
        raise UsageError(f"data lack column(s) for node(s) {missing}")
    cols = {v: np.asarray(data[v], dtype=float).ravel() for v in dag.nodes}
    n = {c.size for c in cols.values()}
    if len(n) != 1:
        raise UsageError("data columns differ in length")
    if n.pop() < 30:
        raise UsageError("need at least 30 observations")
    return cols


def fit_sem(data, dag: DagSpec, config: SemConfig | None = None, threads: int = 1) -> SemModel:
    """Fit margins, then a D-vine regression of each non-root node on its parents."""
    config = config or SemConfig()
    cols = _columns(data, dag)
    n = cols[dag.nodes[0]].size

    def margin_job(v):
        return v, fit_margin(cols[v], config.margins)

    def reg_job(v):
        parents = dag.parents(v)
        cand = {p: u[p] for p in parents}
        return v, fit_dvine_reg(u[v], cand, config.criterion, config.copulas, v, config.pair_criterion)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        margins = dict(pool.map(margin_job, dag.nodes))
        u = {v: margins[v].pit(cols[v]) for v in dag.nodes}
        regs = dict(pool.map(reg_job, dag.nodes))
    roots = {v: np.sort(cols[v]) for v in dag.nodes if not dag.parents(v)}
    return SemModel(dag, topo_sort(dag), margins, regs, config, n, roots)


def pruned_edges(model: SemModel) -> list[tuple[str, str]]:
    """DAG edges whose parent was not selected into the child's D-vine."""
    out = []
    for p, c in model.dag.edges:
        if p not in model.regs[c].order:
            out.append((p, c))
    return out


def retained_edges(model: SemModel) -> list[tuple[str, str]]:
    return [(p, c) for p, c in model.dag.edges if p in model.regs[c].order]


def joint_logdensity(model: SemModel, x) -> np.ndarray:
    """Sum over nodes of the log conditional densities."""
    missing = [v for v in model.dag.nodes if v not in x]
    if missing:
        raise UsageError(f"missing value(s) for node(s) {missing}")
    u = model.pit(x)
    return sum(model.node_logdensity(v, x, u) for v in model.order)


@dataclass(frozen=True)
class GofRow:
    node: str
    loglik: float
    aic: float
    bic: float
    edf: float


def _row(node, ll, edf, n) -> GofRow:
    return GofRow(node, ll, -2.0 * ll + 2.0 * edf, -2.0 * ll + math.log(n) * edf, edf)


def _total(rows, n) -> GofRow:
    ll = sum(r.loglik for r in rows)
    edf = sum(r.edf for r in rows)
    return _row("total", ll, edf, n)


def margins_table(model: SemModel, data=None) -> list[GofRow]:
    """Margin-only fit statistics per node plus a total row."""
    rows = []
    for v in model.order:
        x = None if data is None else np.asarray(data[v], dtype=float)
        ll, _, _, edf = margin_gof(model.margins[v], x)
        rows.append(_row(v, ll, edf, model.n))
    return rows + [_total(rows, model.n)]


def copula_table(model: SemModel) -> list[tuple[str, tuple[str, ...], GofRow]]:
    """Copula-scale fit statistics (non-root nodes) with the selected parent orders, plus a total."""
    rows = []
    for v in model.order:
        if not model.dag.parents(v):
            continue
        reg = model.regs[v]
        rows.append((v, reg.order, _row(v, reg.cll, reg.edf, model.n)))
    total = _total([r for _, _, r in rows], model.n)
    return rows + [("total", (), total)]


def gof_table(model: SemModel, data=None) -> list[GofRow]:
    """Original-scale statistics: margin plus copula contributions per node, plus a total."""
    marg = {r.node: r for r in margins_table(model, data)}
    rows = []
    for v in model.order:
        reg = model.regs[v]
        rows.append(_row(v, marg[v].loglik + reg.cll, marg[v].edf + reg.edf, model.n))
    return rows + [_total(rows, model.n)]
