"""Univariate margins: Gaussian, Gaussian mixture (EM + BIC) and kernel density."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._util import DegenerateDataError, UsageError, clamp, invert_cdf

log = logging.getLogger(__name__)

KINDS = ("gaussian", "mixture", "kde")
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MarginModel:
    """A fitted univariate distribution.

    ``weights``, ``means`` and ``sds`` describe a normal mixture; a Gaussian
    margin is the one-component case.  For ``kind="kde"`` the stored sample and
    ``bandwidth`` define an equal-weight mixture of normal kernels.
    """

    kind: str
    weights: np.ndarray
    means: np.ndarray
    sds: np.ndarray
    edf: float
    loglik: float
    n: int
    bandwidth: float | None = None
    converged: bool = True
    bic_by_k: dict = field(default_factory=dict, compare=False)

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.edf

    @property
    def bic(self) -> float:
        return -2.0 * self.loglik + math.log(self.n) * self.edf

    @property
    def k(self) -> int:
        return int(self.weights.size)

    # -- evaluation -------------------------------------------------------
    def _components(self, x):
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.means) / self.sds
        return x, z

    def logpdf(self, x):
        x, z = self._components(x)
        lw = np.log(self.weights) - np.log(self.sds) - _LOG_SQRT_2PI
        return special.logsumexp(lw - 0.5 * z * z, axis=-1)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        _, z = self._components(x)
        return np.sum(self.weights * special.ndtr(z), axis=-1)

    def pit(self, x):
        """Probability integral transform, clamped to ``[EPS, 1 - EPS]``."""
        return clamp(self.cdf(x))

    def pit_inv(self, u):
        u = clamp(u)
        if self.k == 1:
            return self.means[0] + self.sds[0] * special.ndtri(u)
        # at 7 sd beyond every component the CDF is below the clamp level
        lo = float(np.min(self.means - 7.0 * self.sds))
        hi = float(np.max(self.means + 7.0 * self.sds))
        return invert_cdf(self.cdf, self.pdf, u, lo, hi)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.k, size=n, p=self.weights)
        return rng.normal(self.means[comp], self.sds[comp])

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind, "edf": self.edf, "loglik": self.loglik, "n": self.n}
        if self.kind == "kde":
            d["bandwidth"] = self.bandwidth
            d["sample"] = self.means.tolist()
        else:
            d["weights"] = self.weights.tolist()
            d["means"] = self.means.tolist()
            d["sds"] = self.sds.tolist()
            d["converged"] = self.converged
        return d

    @classmethod
    def from_dict(cls, d: dict) -> MarginModel:
        if d["kind"] == "kde":
            sample = np.asarray(d["sample"], dtype=float)
            m = sample.size
            return cls("kde", np.full(m, 1.0 / m), sample, np.full(m, d["bandwidth"]),
                       d["edf"], d["loglik"], d["n"], d["bandwidth"])
        return cls(d["kind"], np.asarray(d["weights"]), np.asarray(d["means"]), np.asarray(d["sds"]),
                   d["edf"], d["loglik"], d["n"], converged=d.get("converged", True))


def _check_sample(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 20:
        raise UsageError(f"margin fit needs n >= 20, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise UsageError("margin data contain non-finite values")
    if np.ptp(x) == 0.0:
        raise DegenerateDataError("constant column")
    return x


def fit_gaussian(x) -> MarginModel:
    x = _check_sample(x)
    mu, sd = x.mean(), x.std()
    ll = float(np.sum(-0.5 * ((x - mu) / sd) ** 2 - math.log(sd) - _LOG_SQRT_2PI))
    return MarginModel("gaussian", np.ones(1), np.array([mu]), np.array([sd]), 2.0, ll, x.size)


def _em(x, means, sds, weights, tol=1e-8, maxiter=500):
    """Batched EM for 1-d normal mixtures.

    ``means``, ``sds`` and ``weights`` have shape (runs, k); every run is
    iterated until its log-likelihood change falls below ``tol`` (relative)
    or ``maxiter`` is reached.  Returns the final parameters, per-run
    log-likelihoods and convergence flags.
    """
    n = x.size
    floor = 1e-3 * x.std()
    runs = means.shape[0]
    prev = np.full(runs, -np.inf)
    converged = np.zeros(runs, dtype=bool)
    xs = x[None, None, :]

    # arrays are laid out (runs, k, n) so reductions over the data are contiguous
    def loglik_terms(w, mu, sd):
        z = (xs - mu[:, :, None]) / sd[:, :, None]
        return (np.log(w) - np.log(sd) - _LOG_SQRT_2PI)[:, :, None] - 0.5 * z * z

    for _ in range(maxiter):
        lp = loglik_terms(weights, means, sds)
        top = lp.max(axis=1, keepdims=True)
        e = np.exp(lp - top)
        s = e.sum(axis=1, keepdims=True)
        ll = (top + np.log(s)).sum(axis=(1, 2))
        done = np.abs(ll - prev) < tol * np.maximum(1.0, np.abs(ll))
        converged |= done
        if converged.all():
            break
        prev = ll
        active = ~converged
        resp = e[active] / s[active]
        nk = resp.sum(axis=2) + 1e-12
        weights[active] = nk / n
        mu = (resp @ x) / nk
        means[active] = mu
        var = np.einsum("rkn,rkn->rk", resp, (xs - mu[:, :, None]) ** 2) / nk
        sds[active] = np.maximum(np.sqrt(var), floor)
    ll = special.logsumexp(loglik_terms(weights, means, sds), axis=1).sum(axis=1)
    return weights, means, sds, ll, converged


def fit_mixture(x, kmax: int = 5, restarts: int = 10, seed: int = 0) -> MarginModel:
    """Normal mixture with the number of components chosen by BIC."""
    x = _check_sample(x)
    if kmax < 1:
        raise UsageError("kmax must be >= 1")
    n = x.size
    rng = np.random.default_rng(seed)
    best = None
    bic_by_k = {}
    for k in range(1, kmax + 1):
        if k == 1:
            g = fit_gaussian(x)
            cand = (g.weights, g.means, g.sds, g.loglik, True)
        else:
            base = np.quantile(x, (np.arange(k) + 0.5) / k)
            jitter = rng.normal(0.0, 0.5 * x.std() / k, size=(restarts, k))
            jitter[0] = 0.0
            w, mu, sd, ll, conv = _em(
                x,
                np.sort(base + jitter, axis=1),
                np.full((restarts, k), x.std() / k),
                np.full((restarts, k), 1.0 / k),
            )
            ll = np.where(np.isfinite(ll), ll, -np.inf)
            r = int(np.argmax(ll))
            cand = (w[r], mu[r], sd[r], float(ll[r]), bool(conv[r]))
        edf = 3.0 * k - 1.0
        bic = -2.0 * cand[3] + math.log(n) * edf
        bic_by_k[k] = bic
        if best is None or bic < best[0]:
            best = (bic, k, cand)
    _, k, (w, mu, sd, ll, conv) = best
    if not conv:
        log.warning("EM did not converge for k=%d; returning best iterate", k)
    order = np.argsort(mu)
    return MarginModel("mixture", w[order], mu[order], sd[order], 3.0 * k - 1.0, ll, n,
                       converged=conv, bic_by_k=bic_by_k)


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * x.size ** (-0.2)


def fit_kde(x, bandwidth: float | None = None, loglik: str = "insample") -> MarginModel:
    """Gaussian-kernel density with Silverman's rule bandwidth.

    The log-likelihood is in-sample by default; ``loglik="loo"`` leaves each
    point's own kernel out.
    """
    if loglik not in ("insample", "loo"):
        raise UsageError(f"loglik must be 'insample' or 'loo', got {loglik!r}")
    x = _check_sample(x)
    n = x.size
    h = float(bandwidth) if bandwidth is not None else silverman_bandwidth(x)
    d = (x[:, None] - x[None, :]) / h
    k = np.exp(-0.5 * d * d)
    sums = k.sum(axis=1)
    if loglik == "loo":
        dens = (sums - 1.0) / ((n - 1) * h * math.sqrt(2.0 * math.pi))
    else:
        dens = sums / (n * h * math.sqrt(2.0 * math.pi))
    ll = float(np.sum(np.log(np.maximum(dens, 1e-300))))
    edf = float(np.sum(1.0 / sums))
    return MarginModel("kde", np.full(n, 1.0 / n), x.copy(), np.full(n, h), edf, ll, n, h)


def fit_margin(x, kind: str = "gaussian", **options) -> MarginModel:
    if kind == "gaussian":
        return fit_gaussian(x)
    if kind == "mixture":
        return fit_mixture(x, **options)
    if kind == "kde":
        return fit_kde(x, **options)
    raise UsageError(f"margin kind must be one of {KINDS}, got {kind!r}")


def margin_gof(model: MarginModel, x=None) -> tuple[float, float, float, float]:
    """(loglik, AIC, BIC, edf) of a fitted margin.

    With ``x`` given the log-likelihood is re-evaluated on it; otherwise the
    value stored at fit time is used.  Kernel margins always report the stored
    value so a leave-one-out fit keeps its own convention.
    """
    if x is None or model.kind == "kde":
        ll, n = model.loglik, model.n
    else:
        x = np.asarray(x, dtype=float)
        ll, n = float(np.sum(model.logpdf(x))), x.size
    return ll, -2.0 * ll + 2.0 * model.edf, -2.0 * ll + math.log(n) * model.edf, model.edf
