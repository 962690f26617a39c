"""D-vine copula regression with greedy forward covariate selection.

The vine is the path ``response - x1 - x2 - ... - xm`` where ``x1`` is the
first selected covariate.  Node 0 is the response.  In tree ``t`` the edge
``(i, i + t)`` couples

    a[t][i]     = F(u_i     | u_{i+1}, ..., u_{i+t-1})
    b[t][i + t] = F(u_{i+t} | u_{i+1}, ..., u_{i+t-1})

and the next tree's arguments follow from the two h-functions of that edge.
The response row consists of the edges ``(0, s)`` in tree ``s``; their
product is the conditional copula density of the response given the first
``s`` covariates, and ``a[m + 1][0]`` is its conditional distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import UsageError, clamp
from .copula import PairCopula, copula_logpdf, hfunc, hinv, select_pair_family

CRITERIA = ("cll", "caic", "cbic")
COPULA_SETS = {
    "gaussian": ("gaussian",),
    "parametric": ("independence", "bb8", "clayton", "frank", "gaussian", "gumbel", "joe"),
    "pnp": ("independence", "bb8", "clayton", "frank", "gaussian", "gumbel", "joe", "nonparametric"),
}


def copula_families(config) -> tuple[str, ...]:
    """Family set for a named copula configuration, or an explicit iterable of families."""
    if isinstance(config, str):
        try:
            return COPULA_SETS[config]
        except KeyError:
            raise UsageError(f"copula config must be one of {tuple(COPULA_SETS)}, got {config!r}") from None
    return tuple(config)


def penalized(cll: float, edf: float, n: int, criterion: str) -> float:
    """Criterion to be maximized: cll, or minus cAIC / cBIC."""
    if criterion == "cll":
        return cll
    if criterion == "caic":
        return -(-2.0 * cll + 2.0 * edf)
    if criterion == "cbic":
        return -(-2.0 * cll + math.log(n) * edf)
    raise UsageError(f"criterion must be one of {CRITERIA}, got {criterion!r}")


@dataclass(frozen=True)
class DVineRegModel:
    """Fitted D-vine regression of one response on an ordered covariate list.

    ``pairs[(t, i)]`` is the copula of edge ``(i, i + t)`` in tree ``t``
    (nodes numbered with the response as 0 and covariates from 1 in order).
    """

    response: str
    order: tuple[str, ...]
    pairs: dict = field(repr=False)
    criterion: str = "caic"
    trace: tuple[tuple[str, float], ...] = ()
    n: int = 0

    @property
    def m(self) -> int:
        return len(self.order)

    def response_row(self) -> list[PairCopula]:
        return [self.pairs[(s, 0)] for s in range(1, self.m + 1)]

    @property
    def edf(self) -> float:
        return float(sum(p.edf for p in self.response_row()))

    @property
    def cll(self) -> float:
        """Conditional copula log-likelihood at fit time (sum of response-row pair logliks)."""
        return float(sum(p.loglik for p in self.response_row()))

    def _cov_matrix(self, x_u) -> np.ndarray:
        missing = [c for c in self.order if c not in x_u]
        if missing:
            raise UsageError(f"missing selected covariate(s) {missing} for response {self.response}")
        cols = [np.atleast_1d(np.asarray(x_u[c], dtype=float)) for c in self.order]
        if not cols:
            return np.empty((1, 0))
        return clamp(np.column_stack(np.broadcast_arrays(*cols)))

    # -- recursion ----------------------------------------------------------
    def _covariate_args(self, X: np.ndarray):
        """``b[s]`` = F(x_s | x_1..x_{s-1}) for s = 1..m, using covariates only."""
        m = self.m
        a = {(1, i): X[:, i - 1] for i in range(1, m + 1)}
        b = {(1, i): X[:, i - 1] for i in range(1, m + 1)}
        for t in range(1, m):
            for i in range(1, m - t + 1):
                cop = self.pairs[(t, i)]
                a[(t + 1, i)] = hfunc(cop, "given_second", a[(t, i)], b[(t, i + t)])
                b[(t + 1, i + t)] = hfunc(cop, "given_first", a[(t, i)], b[(t, i + t)])
        return [b[(s, s)] for s in range(1, m + 1)]

    def _response_args(self, y_u, X):
        """Arguments ``(a_s, b_s)`` of every response-row copula and the final cdf."""
        bs = self._covariate_args(X)
        a = clamp(np.asarray(y_u, dtype=float))
        args = []
        for s in range(1, self.m + 1):
            cop = self.pairs[(s, 0)]
            args.append((a, bs[s - 1]))
            a = hfunc(cop, "given_second", a, bs[s - 1])
        return args, a

    # -- conditional distribution -------------------------------------------
    def cond_cdf(self, y_u, x_u):
        """F(y | selected covariates) on the copula scale."""
        X = self._cov_matrix(x_u)
        y = np.asarray(y_u, dtype=float)
        if self.m == 0:
            return clamp(y)
        _, out = self._response_args(y, X)
        return out

    def cond_quantile(self, alpha, x_u):
        """Inverse of :meth:`cond_cdf` in the response, by reversed h-inverses."""
        X = self._cov_matrix(x_u)
        q = clamp(np.asarray(alpha, dtype=float))
        if self.m == 0:
            return q
        bs = self._covariate_args(X)
        for s in range(self.m, 0, -1):
            q = hinv(self.pairs[(s, 0)], "given_second", q, bs[s - 1])
        return q

    def cond_copula_logdensity(self, y_u, x_u):
        """Log of the product of response-row copula densities."""
        X = self._cov_matrix(x_u)
        y = np.asarray(y_u, dtype=float)
        if self.m == 0:
            return np.zeros(y.shape)
        args, _ = self._response_args(y, X)
        out = 0.0
        for s, (a, b) in enumerate(args, start=1):
            out = out + copula_logpdf(self.pairs[(s, 0)], a, b)
        return out

    def cond_pdf(self, y_u, x_u, margin_density_at_y):
        """Conditional density of the response on its original scale."""
        return np.exp(self.cond_copula_logdensity(y_u, x_u)) * np.asarray(margin_density_at_y, dtype=float)

    def cll_on(self, resp_u, x_u) -> float:
        """Conditional copula log-likelihood re-evaluated on data."""
        return float(np.sum(self.cond_copula_logdensity(resp_u, x_u)))

    def caic(self) -> float:
        return -2.0 * self.cll + 2.0 * self.edf

    def cbic(self) -> float:
        return -2.0 * self.cll + math.log(self.n) * self.edf

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "response": self.response,
            "order": list(self.order),
            "pairs": [{"tree": t, "edge": i, "copula": p.to_dict()} for (t, i), p in sorted(self.pairs.items())],
            "criterion": self.criterion,
            "trace": [[c, v] for c, v in self.trace],
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> DVineRegModel:
        pairs = {(e["tree"], e["edge"]): PairCopula.from_dict(e["copula"]) for e in d["pairs"]}
        trace = tuple((c, float(v)) for c, v in d["trace"])
        return cls(d["response"], tuple(d["order"]), pairs, d["criterion"], trace, int(d["n"]))


def _check_inputs(resp_u, cand_u):
    y = np.asarray(resp_u, dtype=float).ravel()
    n = y.size
    if n < 30:
        raise UsageError(f"D-vine regression needs n >= 30, got {n}")
    out = {}
    for name, col in cand_u.items():
        col = np.asarray(col, dtype=float).ravel()
        if col.size != n:
            raise UsageError(f"covariate {name!r} has length {col.size}, response has {n}")
        out[name] = col
    for name, col in [("response", y), *out.items()]:
        if not np.all((col > 0.0) & (col < 1.0)):
            raise UsageError(f"{name} values must lie strictly inside (0, 1)")
    return clamp(y), {k: clamp(v) for k, v in out.items()}


def _extend(state, x_new, families, pair_criterion):
    """Append one covariate to a D-vine state; returns the new state and the fresh response-row copula.

    ``state`` holds the pair dictionary and the list ``a`` with
    ``a[i]`` = F(u_i | u_{i+1}, ..., u_{k-1}) for the existing nodes ``0..k-1``.
    """
    pairs, a_last = state
    k = len(a_last)  # nodes 0..k-1 exist; new node index k
    new_pairs = dict(pairs)
    new_a = list(a_last)
    b = x_new
    cop = None
    for t in range(1, k + 1):
        i = k - t
        cop = select_pair_family(new_a[i], b, families, pair_criterion)
        new_pairs[(t, i)] = cop
        a_next = hfunc(cop, "given_second", new_a[i], b)
        b = hfunc(cop, "given_first", new_a[i], b)
        new_a[i] = a_next
    new_a.append(x_new)
    return (new_pairs, new_a), cop


def fit_dvine_reg(
    resp_u,
    cand_u: dict,
    criterion: str = "caic",
    copulas="parametric",
    response: str = "y",
    pair_criterion: str = "aic",
) -> DVineRegModel:
    """Forward-select covariates for a D-vine regression.

    At each step every unselected candidate is tried as the next covariate;
    the new pair copulas it requires are fitted by family selection and the
    candidate giving the best criterion is kept if it strictly improves on
    the current model.  Ties go to the earlier candidate in ``cand_u``.
    """
    if criterion not in CRITERIA:
        raise UsageError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    families = copula_families(copulas)
    y, cands = _check_inputs(resp_u, cand_u)
    n = y.size

    # a[i] for i = 0..k-1: conditional of node i given nodes i+1..k-1
    state = ({}, [y])
    order: list[str] = []
    cll, edf = 0.0, 0.0
    current = penalized(cll, edf, n, criterion)
    trace = []
    while len(order) < len(cands):
        best = None
        for name, col in cands.items():
            if name in order:
                continue
            new_state, cop = _extend(state, col, families, pair_criterion)
            value = penalized(cll + cop.loglik, edf + cop.edf, n, criterion)
            if best is None or value > best[0]:
                best = (value, name, new_state, cop)
        value, name, new_state, cop = best
        if not value > current:
            break
        state, current = new_state, value
        cll, edf = cll + cop.loglik, edf + cop.edf
        order.append(name)
        trace.append((name, float(value)))
    return DVineRegModel(response, tuple(order), state[0], criterion, tuple(trace), n)
