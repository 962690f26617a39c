"""Linear Gaussian Bayesian network on a fixed DAG."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import DegenerateDataError, UsageError
from .graph import DagSpec, topo_sort

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LgbnNode:
    """Conditional normal ``N(intercept + coef . parents, sd**2)``."""

    parents: tuple[str, ...]
    intercept: float
    coef: np.ndarray
    sd: float
    loglik: float

    @property
    def edf(self) -> int:
        return len(self.parents) + 2

    def mean(self, parent_values) -> np.ndarray:
        out = np.asarray(self.intercept, dtype=float)
        for b, p in zip(self.coef, self.parents):
            out = out + b * np.asarray(parent_values[p], dtype=float)
        return out

    def to_dict(self) -> dict:
        return {"parents": list(self.parents), "intercept": self.intercept,
                "coef": self.coef.tolist(), "sd": self.sd, "loglik": self.loglik}

    @classmethod
    def from_dict(cls, d: dict) -> LgbnNode:
        return cls(tuple(d["parents"]), float(d["intercept"]), np.asarray(d["coef"], dtype=float),
                   float(d["sd"]), float(d["loglik"]))


@dataclass(frozen=True)
class LgbnModel:
    dag: DagSpec
    order: tuple[str, ...]
    nodes: dict
    n: int

    def cond_params(self, node: str, parent_values) -> tuple[np.ndarray, float]:
        """Conditional mean and sd of ``node`` given values of its parents."""
        spec = self.nodes[node]
        missing = [p for p in spec.parents if p not in parent_values]
        if missing:
            raise UsageError(f"missing parent value(s) {missing} for node {node}")
        return spec.mean(parent_values), spec.sd

    def logdensity(self, x) -> np.ndarray:
        """Joint log-density as the sum of the node conditionals."""
        out = 0.0
        for node in self.order:
            mu, sd = self.cond_params(node, x)
            z = (np.asarray(x[node], dtype=float) - mu) / sd
            out = out - 0.5 * z * z - math.log(sd) - _LOG_SQRT_2PI
        return out

    def coefficient_matrix(self) -> np.ndarray:
        """``A[i, j]`` = coefficient of node ``i`` in the equation of node ``j`` (declared node order)."""
        names = self.dag.nodes
        idx = {v: k for k, v in enumerate(names)}
        A = np.zeros((len(names), len(names)))
        for child, spec in self.nodes.items():
            for b, p in zip(spec.coef, spec.parents):
                A[idx[p], idx[child]] = b
        return A

    def implied_moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean vector and covariance of the implied multivariate normal (declared node order).

        With ``x = b0 + A' x + e`` the precision is ``(I - A) W^-1 (I - A)'``
        where ``W`` holds the residual variances.
        """
        names = self.dag.nodes
        A = self.coefficient_matrix()
        I_A = np.eye(len(names)) - A
        w = np.array([self.nodes[v].sd ** 2 for v in names])
        prec = I_A @ np.diag(1.0 / w) @ I_A.T
        b0 = np.array([self.nodes[v].intercept for v in names])
        mean = np.linalg.solve(I_A.T, b0)
        return mean, np.linalg.inv(prec)

    @property
    def loglik(self) -> float:
        return float(sum(s.loglik for s in self.nodes.values()))

    @property
    def edf(self) -> int:
        return int(sum(s.edf for s in self.nodes.values()))

    def gof_rows(self) -> list[tuple[str, float, float, float, float]]:
        """Per-node (node, loglik, aic, bic, edf) in topological order."""
        rows = []
        for node in self.order:
            s = self.nodes[node]
            rows.append((node, s.loglik, -2 * s.loglik + 2 * s.edf, -2 * s.loglik + math.log(self.n) * s.edf, s.edf))
        return rows

    def to_dict(self) -> dict:
        return {"kind": "lgbn", "dag": self.dag.to_dict(), "n": self.n,
                "nodes": {k: v.to_dict() for k, v in self.nodes.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> LgbnModel:
        dag = DagSpec.from_dict(d["dag"])
        nodes = {k: LgbnNode.from_dict(v) for k, v in d["nodes"].items()}
        return cls(dag, topo_sort(dag), nodes, int(d["n"]))


def fit_lgbn(data, dag: DagSpec) -> LgbnModel:
    """Least-squares fit of every node on its DAG parents, with ML residual variance."""
    missing = [v for v in dag.nodes if v not in data]
    if missing:
        raise UsageError(f"data lack column(s) {missing}")
    cols = {v: np.asarray(data[v], dtype=float) for v in dag.nodes}
    n = cols[dag.nodes[0]].size
    nodes = {}
    for v in dag.nodes:
        parents = dag.parents(v)
        if n <= len(parents) + 1:
            raise UsageError(f"node {v}: n={n} too small for {len(parents)} parents")
        X = np.column_stack([np.ones(n)] + [cols[p] for p in parents])
        beta, _, rank, _ = np.linalg.lstsq(X, cols[v], rcond=None)
        if rank < X.shape[1]:
            raise DegenerateDataError(f"node {v}: collinear parents {parents}")
        resid = cols[v] - X @ beta
        sd = math.sqrt(float(np.mean(resid * resid)))
        if sd == 0.0:
            raise DegenerateDataError(f"node {v}: zero residual variance")
        ll = -0.5 * n * (1.0 + math.log(2.0 * math.pi) + 2.0 * math.log(sd))
        nodes[v] = LgbnNode(parents, float(beta[0]), beta[1:].copy(), sd, ll)
    return LgbnModel(dag, topo_sort(dag), nodes, n)
