"""Forward sampling, conditional sampling and conditional-median paths.

Every node draws from its own random stream, spawned from the run seed by
the node's position in the declared node list, so a node's draws do not
depend on how many variates other nodes consumed.
"""

from __future__ import annotations

import numpy as np

from ._util import UsageError
from .lgbn import LgbnModel
from .sem import SemModel


def node_streams(nodes, seed: int) -> dict:
    """One independent generator per node."""
    children = np.random.SeedSequence(int(seed)).spawn(len(nodes))
    return {v: np.random.default_rng(ss) for v, ss in zip(nodes, children)}


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise UsageError(f"sample size must be >= 1, got {n}")
    return n


def sample_sem(model: SemModel, n: int, seed: int = 0) -> dict:
    """Simulate ``n`` rows by inverting each node's conditional law in topological order."""
    n = _check_n(n)
    rngs = node_streams(model.dag.nodes, seed)
    x, u = {}, {}
    for v in model.order:
        w = rngs[v].uniform(size=n)
        reg = model.regs[v]
        u[v] = reg.cond_quantile(w, {p: u[p] for p in reg.order})
        x[v] = model.margins[v].pit_inv(u[v])
    return {v: x[v] for v in model.dag.nodes}


def sample_lgbn(model: LgbnModel, n: int, seed: int = 0) -> dict:
    """Simulate ``n`` rows from the linear Gaussian network."""
    n = _check_n(n)
    rngs = node_streams(model.dag.nodes, seed)
    x = {}
    for v in model.order:
        mean, sd = model.cond_params(v, x)
        x[v] = mean + sd * rngs[v].standard_normal(n)
    return {v: x[v] for v in model.dag.nodes}


def sample_node_given_parents(model: SemModel, node: str, parent_values: dict, n: int, seed: int = 0) -> np.ndarray:
    """Draw ``n`` values of ``node`` with its selected parents fixed.

    Parents that the D-vine did not select, and any other extra entries, are
    ignored.
    """
    n = _check_n(n)
    if node not in model.regs:
        raise UsageError(f"unknown node {node!r}")
    reg = model.regs[node]
    missing = [p for p in reg.order if p not in parent_values]
    if missing:
        raise UsageError(f"node {node} needs value(s) for selected parent(s) {missing}")
    x_u = {p: model.margins[p].pit(np.full(n, float(parent_values[p]))) for p in reg.order}
    rng = node_streams(model.dag.nodes, seed)[node]
    w = rng.uniform(size=n)
    return model.margins[node].pit_inv(reg.cond_quantile(w, x_u))


def cond_median_path(model: SemModel, alpha: float) -> dict:
    """Roots at their empirical ``alpha`` quantile, every other node at its conditional median."""
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}")
    x, u = {}, {}
    for v in model.order:
        if v in model.root_data:
            x[v] = float(np.quantile(model.root_data[v], alpha))
            u[v] = model.margins[v].pit(np.array([x[v]]))
        else:
            reg = model.regs[v]
            u[v] = reg.cond_quantile(np.array([0.5]), {p: u[p] for p in reg.order})
            x[v] = float(model.margins[v].pit_inv(u[v])[0])
    return {v: x[v] for v in model.order}


def lgbn_mean_path(model: LgbnModel, root_values: dict) -> dict:
    """Propagate conditional means from given root values in topological order."""
    x = {}
    for v in model.order:
        if not model.nodes[v].parents:
            if v not in root_values:
                raise UsageError(f"missing value for root {v}")
            x[v] = float(root_values[v])
        else:
            x[v] = float(model.cond_params(v, x)[0])
    return x
