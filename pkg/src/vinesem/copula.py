"""Parametric bivariate copula families.

Every family is implemented at rotation 0 through four vectorized kernels
(log-density, CDF, h-function ``dC(u, v)/dv`` and its inverse in ``u``).
Rotations are obtained by reflecting arguments::

    c90(u, v) = c0(1 - u, v)    c180(u, v) = c0(1 - u, 1 - v)    c270(u, v) = c0(u, 1 - v)

All base families are exchangeable, so conditioning on the first argument is
handled by swapping arguments (which maps rotation 90 <-> 270).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate, optimize, special, stats

from ._util import (
    EPS,
    DegenerateDataError,
    DomainError,
    UnsupportedError,
    UsageError,
    clamp,
    invert_increasing,
)

if TYPE_CHECKING:
    from .npcop import NpCopula

FAMILIES = ("independence", "gaussian", "clayton", "gumbel", "frank", "joe", "bb8", "nonparametric")
PARAMETRIC = ("bb8", "clayton", "frank", "gaussian", "gumbel", "joe")
ROTATABLE = ("clayton", "gumbel", "joe", "bb8")
ROTATIONS = (0, 90, 180, 270)
N_PARAMS = {"independence": 0, "gaussian": 1, "clayton": 1, "gumbel": 1, "frank": 1, "joe": 1, "bb8": 2}

# parameter boxes used for validation and optimization
BOUNDS = {
    "gaussian": [(-0.9999, 0.9999)],
    "clayton": [(1e-6, 28.0)],
    "gumbel": [(1.0, 50.0)],
    "joe": [(1.0, 50.0)],
    "frank": [(-35.0, 35.0)],
    "bb8": [(1.0, 8.0), (1e-4, 1.0)],
}

FRANK_INDEP = 1e-5


@dataclass(frozen=True)
class PairCopula:
    """A fitted (or specified) bivariate copula."""

    family: str
    rotation: int = 0
    params: tuple[float, ...] = ()
    edf: float | None = None
    loglik: float = 0.0
    np_fit: NpCopula | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.edf is None:
            object.__setattr__(self, "edf", float(N_PARAMS.get(self.family, 0)))
        check_spec(self)

    @property
    def n_params(self) -> float:
        return self.edf

    def pdf(self, u, v):
        return copula_pdf(self, u, v)

    def logpdf(self, u, v):
        return copula_logpdf(self, u, v)

    def cdf(self, u, v):
        return copula_cdf(self, u, v)

    def tau(self) -> float:
        return kendall_tau(self)

    def to_dict(self) -> dict:
        d = {
            "family": self.family,
            "rotation": int(self.rotation),
            "params": list(self.params),
            "edf": float(self.edf),
            "loglik": float(self.loglik),
        }
        if self.np_fit is not None:
            d["np"] = self.np_fit.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> PairCopula:
        np_fit = None
        if d["family"] == "nonparametric":
            from .npcop import NpCopula

            np_fit = NpCopula.from_dict(d["np"])
        return cls(d["family"], int(d["rotation"]), tuple(d["params"]), d["edf"], d["loglik"], np_fit)


def check_spec(spec: PairCopula) -> None:
    fam = spec.family
    if fam not in FAMILIES:
        raise DomainError(f"unknown copula family {fam!r}")
    if spec.rotation not in ROTATIONS:
        raise DomainError(f"rotation must be one of {ROTATIONS}, got {spec.rotation}")
    if spec.rotation != 0 and fam not in ROTATABLE:
        raise DomainError(f"family {fam} does not take rotation {spec.rotation}")
    if fam == "nonparametric":
        if spec.np_fit is None:
            raise DomainError("nonparametric spec needs a fitted estimator")
        return
    p = spec.params
    if len(p) != N_PARAMS[fam]:
        raise DomainError(f"{fam} takes {N_PARAMS[fam]} parameter(s), got {len(p)}")
    if fam == "gaussian" and not -1.0 < p[0] < 1.0:
        raise DomainError(f"gaussian rho must be in (-1, 1), got {p[0]}")
    if fam == "clayton" and not 0.0 < p[0] <= 28.0:
        raise DomainError(f"clayton theta must be in (0, 28], got {p[0]}")
    if fam in ("gumbel", "joe") and not 1.0 <= p[0] <= 50.0:
        raise DomainError(f"{fam} theta must be in [1, 50], got {p[0]}")
    if fam == "frank" and not (-35.0 <= p[0] <= 35.0 and p[0] != 0.0):
        raise DomainError(f"frank theta must be in [-35, 35] without 0, got {p[0]}")
    if fam == "bb8" and not (1.0 <= p[0] <= 8.0 and 0.0 < p[1] <= 1.0):
        raise DomainError(f"bb8 needs theta in [1, 8] and delta in (0, 1], got {p}")


# ---------------------------------------------------------------------------
# rotation-0 kernels


def _log_sum_exp2(a, b):
    return np.logaddexp(a, b)


def _logpdf0(fam, p, u, v):
    if fam == "independence":
        return np.zeros(np.broadcast(u, v).shape)
    if fam == "gaussian":
        rho = p[0]
        x, y = special.ndtri(u), special.ndtri(v)
        r2 = 1.0 - rho * rho
        return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
    if fam == "clayton":
        th = p[0]
        lu, lv = np.log(u), np.log(v)
        a, b = -th * lu, -th * lv
        m = np.maximum(a, b)
        ls = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
        return math.log1p(th) - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * ls
    if fam == "gumbel":
        th = p[0]
        lx, ly = np.log(-np.log(u)), np.log(-np.log(v))
        ls = _log_sum_exp2(th * lx, th * ly)
        A = np.exp(ls / th)
        return (
            -A
            + (th - 1.0) * (lx + ly)
            - np.log(u)
            - np.log(v)
            + (2.0 / th - 2.0) * ls
            + np.log1p((th - 1.0) / A)
        )
    if fam == "frank":
        th = p[0]
        if abs(th) < FRANK_INDEP:
            return np.zeros(np.broadcast(u, v).shape)
        em = -math.expm1(-th)
        den = em - special.expm1(-th * u) * special.expm1(-th * v)
        return math.log(th * em) - th * (u + v) - 2.0 * np.log(np.abs(den))
    if fam == "joe":
        th = p[0]
        lub, lvb = np.log1p(-u), np.log1p(-v)
        a, b = np.exp(th * lub), np.exp(th * lvb)
        s = a + b - a * b
        return (1.0 / th - 2.0) * np.log(s) + (th - 1.0) * (lub + lvb) + np.log(th - 1.0 + s)
    if fam == "bb8":
        th, de = p
        la, lb = np.log1p(-de * u), np.log1p(-de * v)
        a, b = np.exp(th * la), np.exp(th * lb)
        c = (1.0 - de) ** th
        eta = 1.0 - c
        w = (a + b - a * b - c) / eta
        w = np.maximum(w, 1e-300)
        return (
            math.log(de / eta)
            + (th - 1.0) * (la + lb)
            + (1.0 / th - 2.0) * np.log(w)
            + np.log(th - 1.0 + w)
        )
    raise DomainError(fam)


def _bvn_cdf(h, k, rho):
    """Standard bivariate normal CDF via Owen's T function."""
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    sq = math.sqrt(1.0 - rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (k - rho * h) / (h * sq)
        ak = (h - rho * k) / (k * sq)
    # h == 0 or k == 0: slope is +-inf with the sign of the numerator
    ah = np.where(h == 0.0, np.copysign(np.inf, k - rho * h), ah)
    ak = np.where(k == 0.0, np.copysign(np.inf, h - rho * k), ak)
    beta = np.where((h * k > 0) | ((h * k == 0) & (h + k >= 0)), 0.0, 0.5)
    out = 0.5 * special.ndtr(h) + 0.5 * special.ndtr(k) - special.owens_t(h, ah) - special.owens_t(k, ak) - beta
    both0 = (h == 0.0) & (k == 0.0)
    out = np.where(both0, 0.25 + math.asin(rho) / (2.0 * math.pi), out)
    return np.clip(out, 0.0, 1.0)


def _cdf0(fam, p, u, v):
    if fam == "independence":
        return u * v
    if fam == "gaussian":
        return _bvn_cdf(special.ndtri(u), special.ndtri(v), p[0])
    if fam == "clayton":
        th = p[0]
        return np.maximum(u ** -th + v ** -th - 1.0, 1.0) ** (-1.0 / th)
    if fam == "gumbel":
        th = p[0]
        s = (-np.log(u)) ** th + (-np.log(v)) ** th
        return np.exp(-(s ** (1.0 / th)))
    if fam == "frank":
        th = p[0]
        if abs(th) < FRANK_INDEP:
            return u * v
        return -np.log1p(special.expm1(-th * u) * special.expm1(-th * v) / math.expm1(-th)) / th
    if fam == "joe":
        th = p[0]
        a, b = (1.0 - u) ** th, (1.0 - v) ** th
        return 1.0 - (a + b - a * b) ** (1.0 / th)
    if fam == "bb8":
        th, de = p
        a, b = (1.0 - de * u) ** th, (1.0 - de * v) ** th
        c = (1.0 - de) ** th
        w = np.maximum((a + b - a * b - c) / (1.0 - c), 0.0)
        return (1.0 - w ** (1.0 / th)) / de
    raise DomainError(fam)


def _h0(fam, p, u, v):
    """dC0(u, v)/dv, the distribution of U given V = v."""
    if fam == "independence":
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)
    if fam == "gaussian":
        rho = p[0]
        return special.ndtr((special.ndtri(u) - rho * special.ndtri(v)) / math.sqrt(1.0 - rho * rho))
    if fam == "clayton":
        th = p[0]
        lu, lv = np.log(u), np.log(v)
        a, b = -th * lu, -th * lv
        m = np.maximum(a, b)
        ls = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
        return np.exp(-(th + 1.0) * lv - (1.0 + 1.0 / th) * ls)
    if fam == "gumbel":
        th = p[0]
        x, y = -np.log(u), -np.log(v)
        lx, ly = np.log(x), np.log(y)
        ls = _log_sum_exp2(th * lx, th * ly)
        A = np.exp(ls / th)
        return np.exp(-A + y + (th - 1.0) * ly + (1.0 / th - 1.0) * ls)
    if fam == "frank":
        th = p[0]
        if abs(th) < FRANK_INDEP:
            return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)
        eu, ev = special.expm1(-th * u), special.expm1(-th * v)
        return np.exp(-th * v) * eu / (math.expm1(-th) + eu * ev)
    if fam == "joe":
        th = p[0]
        a, b = (1.0 - u) ** th, (1.0 - v) ** th
        s = a + b - a * b
        return (1.0 - v) ** (th - 1.0) * (1.0 - a) * s ** (1.0 / th - 1.0)
    if fam == "bb8":
        th, de = p
        a, b = (1.0 - de * u) ** th, (1.0 - de * v) ** th
        c = (1.0 - de) ** th
        eta = 1.0 - c
        w = np.maximum((a + b - a * b - c) / eta, 1e-300)
        return (1.0 - a) * (1.0 - de * v) ** (th - 1.0) * w ** (1.0 / th - 1.0) / eta
    raise DomainError(fam)


def _hinv0(fam, p, q, v):
    """Inverse of ``_h0`` in its first argument."""
    if fam == "independence":
        return np.broadcast_to(q, np.broadcast(q, v).shape).astype(float)
    if fam == "gaussian":
        rho = p[0]
        return special.ndtr(special.ndtri(q) * math.sqrt(1.0 - rho * rho) + rho * special.ndtri(v))
    if fam == "clayton":
        th = p[0]
        # u^-th = 1 + v^-th (q^(-th/(1+th)) - 1), factored to avoid cancellation
        t = 1.0 + np.exp(-th * np.log(v)) * np.expm1(-th / (1.0 + th) * np.log(q))
        return np.exp(-np.log(t) / th)
    if fam == "frank" and abs(p[0]) >= FRANK_INDEP:
        th = p[0]
        ev = np.exp(-th * v)
        return -np.log1p(-(-math.expm1(-th)) / ((1.0 / q - 1.0) * ev + 1.0)) / th
    if fam == "frank":
        return np.broadcast_to(q, np.broadcast(q, v).shape).astype(float)
    q, v = np.broadcast_arrays(np.asarray(q, float), np.asarray(v, float))
    return invert_increasing(lambda x: _h0(fam, p, x, v), q, EPS, 1.0 - EPS)


# ---------------------------------------------------------------------------
# public evaluation with rotations


def _args(spec, u, v):
    check_spec(spec)
    return clamp(u), clamp(v)


def _reflect(rot, u, v):
    if rot == 90:
        return 1.0 - u, v
    if rot == 180:
        return 1.0 - u, 1.0 - v
    if rot == 270:
        return u, 1.0 - v
    return u, v


def copula_logpdf(spec: PairCopula, u, v):
    u, v = _args(spec, u, v)
    if spec.family == "nonparametric":
        return np.log(spec.np_fit.pdf(u, v))
    a, b = _reflect(spec.rotation, u, v)
    return _logpdf0(spec.family, spec.params, clamp(a), clamp(b))


def copula_pdf(spec: PairCopula, u, v):
    """Copula density c(u, v)."""
    return np.exp(copula_logpdf(spec, u, v))


def copula_cdf(spec: PairCopula, u, v):
    """Copula distribution function C(u, v); exact at the unit-square boundary."""
    check_spec(spec)
    u = np.clip(np.asarray(u, float), 0.0, 1.0)
    v = np.clip(np.asarray(v, float), 0.0, 1.0)
    uc, vc = clamp(u), clamp(v)
    if spec.family == "nonparametric":
        out = spec.np_fit.cdf(uc, vc)
    else:
        fam, p, rot = spec.family, spec.params, spec.rotation
        if rot == 0:
            out = _cdf0(fam, p, uc, vc)
        elif rot == 90:
            out = vc - _cdf0(fam, p, clamp(1.0 - uc), vc)
        elif rot == 180:
            out = uc + vc - 1.0 + _cdf0(fam, p, clamp(1.0 - uc), clamp(1.0 - vc))
        else:
            out = uc - _cdf0(fam, p, uc, clamp(1.0 - vc))
    out = np.clip(out, np.maximum(u + v - 1.0, 0.0), np.minimum(u, v))
    out = np.where(u >= 1.0, v, out)
    out = np.where(v >= 1.0, u, out)
    return np.where((u <= 0.0) | (v <= 0.0), 0.0, out)


def _swapped(spec: PairCopula) -> PairCopula:
    if spec.rotation in (90, 270):
        return replace(spec, rotation=360 - spec.rotation)
    return spec


def _h2(spec, u, v):
    if spec.family == "nonparametric":
        return spec.np_fit.hfunc2(u, v)
    fam, p, rot = spec.family, spec.params, spec.rotation
    if rot == 0:
        return _h0(fam, p, u, v)
    if rot == 90:
        return 1.0 - _h0(fam, p, clamp(1.0 - u), v)
    if rot == 180:
        return 1.0 - _h0(fam, p, clamp(1.0 - u), clamp(1.0 - v))
    return _h0(fam, p, u, clamp(1.0 - v))


def _hinv2(spec, q, v):
    if spec.family == "nonparametric":
        return spec.np_fit.hinv2(q, v)
    fam, p, rot = spec.family, spec.params, spec.rotation
    if rot == 0:
        return _hinv0(fam, p, q, v)
    if rot == 90:
        return 1.0 - _hinv0(fam, p, clamp(1.0 - q), v)
    if rot == 180:
        return 1.0 - _hinv0(fam, p, clamp(1.0 - q), clamp(1.0 - v))
    return _hinv0(fam, p, q, clamp(1.0 - v))


def hfunc(spec: PairCopula, direction: str, u, v):
    """Conditional distribution from the copula.

    ``direction="given_second"`` returns ``P(U <= u | V = v) = dC(u, v)/dv``;
    ``direction="given_first"`` returns ``P(V <= v | U = u) = dC(u, v)/du``.
    """
    u, v = _args(spec, u, v)
    if direction == "given_second":
        out = _h2(spec, u, v)
    elif direction == "given_first":
        if spec.family == "nonparametric":
            out = spec.np_fit.hfunc1(u, v)
        else:
            out = _h2(_swapped(spec), v, u)
    else:
        raise UsageError(f"direction must be given_first or given_second, got {direction!r}")
    return clamp(out)


def hinv(spec: PairCopula, direction: str, p, cond):
    """Invert :func:`hfunc` in the free argument.

    For ``given_second`` this solves ``hfunc(spec, "given_second", u, cond) = p``
    for ``u``; for ``given_first`` it solves ``hfunc(spec, "given_first", cond, v) = p``
    for ``v``.
    """
    p, cond = _args(spec, p, cond)
    if direction == "given_second":
        out = _hinv2(spec, p, cond)
    elif direction == "given_first":
        if spec.family == "nonparametric":
            out = spec.np_fit.hinv1(p, cond)
        else:
            out = _hinv2(_swapped(spec), p, cond)
    else:
        raise UsageError(f"direction must be given_first or given_second, got {direction!r}")
    return clamp(out)


# ---------------------------------------------------------------------------
# Kendall's tau


def _archimedean_tau(phi_over_dphi) -> float:
    val, _ = integrate.quad(phi_over_dphi, 0.0, 1.0, epsabs=1e-12, epsrel=1e-10, limit=200)
    return 1.0 + 4.0 * val


def _tau0(fam: str, p) -> float:
    if fam == "independence":
        return 0.0
    if fam == "gaussian":
        return 2.0 / math.pi * math.asin(p[0])
    if fam == "clayton":
        return p[0] / (p[0] + 2.0)
    if fam == "gumbel":
        return 1.0 - 1.0 / p[0]
    if fam == "frank":
        th = p[0]
        if abs(th) < FRANK_INDEP:
            return 0.0
        a = abs(th)
        d1, _ = integrate.quad(lambda t: t / math.expm1(t) if t > 0 else 1.0, 0.0, a, epsabs=1e-13, epsrel=1e-12)
        tau = 1.0 - 4.0 / a + 4.0 * d1 / (a * a)
        return math.copysign(tau, th)
    if fam == "joe":
        th = p[0]
        if th == 1.0:
            return 0.0
        # generator phi(t) = -log(1 - (1-t)^th)
        def ratio(t):
            s = 1.0 - t
            st = s ** th
            if st >= 1.0:
                return 0.0
            return math.log1p(-st) * (1.0 - st) / (th * s ** (th - 1.0))

        return _archimedean_tau(ratio)
    if fam == "bb8":
        th, de = p
        if th == 1.0:
            return 0.0
        eta = 1.0 - (1.0 - de) ** th

        # generator phi(t) = -log((1 - (1 - de t)^th) / eta)
        def ratio(t):
            s = 1.0 - de * t
            st = s ** th
            x = 1.0 - st
            if x <= 0.0:
                return 0.0
            return math.log(x / eta) * x / (th * de * s ** (th - 1.0))

        return _archimedean_tau(ratio)
    raise DomainError(fam)


def kendall_tau(spec: PairCopula) -> float:
    """Population Kendall's tau of the copula."""
    check_spec(spec)
    if spec.family == "nonparametric":
        return spec.np_fit.tau()
    t = _tau0(spec.family, spec.params)
    return -t if spec.rotation in (90, 270) else t


def param_from_tau(family: str, rotation: int, tau: float) -> tuple[float, ...]:
    """Parameter vector of a one-parameter family with the given Kendall's tau."""
    if family == "bb8":
        raise UnsupportedError("bb8 has two parameters; tau does not identify them")
    if family in ("independence", "nonparametric"):
        raise UnsupportedError(f"{family} has no tau inversion")
    if family not in N_PARAMS:
        raise DomainError(f"unknown family {family!r}")
    t = -tau if rotation in (90, 270) else tau
    if family == "gaussian":
        if not -1.0 < t < 1.0:
            raise DomainError(f"tau {tau} unattainable for gaussian")
        return (math.sin(math.pi * t / 2.0),)
    lo, hi = BOUNDS[family][0]
    if family == "clayton":
        if not 0.0 < t <= 28.0 / 30.0:
            raise DomainError(f"tau {tau} unattainable for clayton rotation {rotation}")
        return (2.0 * t / (1.0 - t),)
    if family == "gumbel":
        if not 0.0 <= t <= 1.0 - 1.0 / 50.0:
            raise DomainError(f"tau {tau} unattainable for gumbel rotation {rotation}")
        return (1.0 / (1.0 - t),)
    if family == "frank" and t == 0.0:
        raise DomainError("frank with tau 0 is the independence copula")
    if family == "joe" and t == 0.0:
        return (1.0,)
    tlo, thi = _tau0(family, (lo,)), _tau0(family, (hi,))
    if not tlo <= t <= thi:
        raise DomainError(f"tau {tau} unattainable for {family} rotation {rotation}")
    root = optimize.brentq(lambda x: _tau0(family, (x,)) - t, lo, hi, xtol=1e-13, rtol=1e-14, maxiter=500)
    return (root,)


# ---------------------------------------------------------------------------
# estimation


def _as_pairs(u, v):
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise UsageError(f"u and v differ in length ({u.size} vs {v.size})")
    return clamp(u), clamp(v)


def _loglik(fam, rot, params, u, v):
    a, b = _reflect(rot, u, v)
    ll = _logpdf0(fam, params, clamp(a), clamp(b))
    s = float(np.sum(ll))
    return s if np.isfinite(s) else -np.inf


def fit_pair_mle(u, v, family: str, rotation: int = 0) -> PairCopula:
    """Maximum-likelihood fit of one parametric family on pseudo-observations."""
    u, v = _as_pairs(u, v)
    if u.size < 10:
        raise UsageError(f"need at least 10 pairs, got {u.size}")
    inside = (u > EPS) & (u < 1 - EPS) & (v > EPS) & (v < 1 - EPS)
    if not inside.any():
        raise DegenerateDataError("all pseudo-observations lie on the boundary")
    if family == "independence":
        return PairCopula("independence", 0, (), 0.0, 0.0)
    if family not in PARAMETRIC:
        raise UsageError(f"fit_pair_mle needs a parametric family, got {family!r}")
    if rotation != 0 and family not in ROTATABLE:
        raise DomainError(f"family {family} does not take rotation {rotation}")

    if family == "bb8":
        params, ll = _fit_bb8(u, v, rotation)
    else:
        (lo, hi), = BOUNDS[family]
        res = optimize.minimize_scalar(
            lambda x: -_loglik(family, rotation, (x,), u, v),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-8, "maxiter": 500},
        )
        params, ll = (float(res.x),), -float(res.fun)
        # starting value from the empirical tau, kept if it beats the bounded search
        try:
            tau_hat = stats.kendalltau(u, v)[0]
            start = param_from_tau(family, rotation, tau_hat)
            if lo <= start[0] <= hi:
                ll0 = _loglik(family, rotation, start, u, v)
                if ll0 > ll:
                    params, ll = start, ll0
        except (DomainError, UnsupportedError, ValueError):
            pass
        if family == "frank" and abs(params[0]) < FRANK_INDEP:
            params = (math.copysign(FRANK_INDEP, params[0] if params[0] != 0 else 1.0),)
    return PairCopula(family, rotation, params, float(N_PARAMS[family]), ll)


def _fit_bb8(u, v, rotation):
    (tlo, thi), (dlo, dhi) = BOUNDS["bb8"]

    def unpack(z):
        th = tlo + (thi - tlo) * special.expit(z[0])
        de = dlo + (dhi - dlo) * special.expit(z[1])
        return th, de

    def nll(z):
        return -_loglik("bb8", rotation, unpack(z), u, v)

    best = None
    for z0 in ([-1.0, 2.0], [0.0, 0.0], [-2.5, 4.0]):
        res = optimize.minimize(nll, z0, method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 500})
        if best is None or res.fun < best.fun:
            best = res
    return tuple(float(x) for x in unpack(best.x)), -float(best.fun)


def criterion_value(spec: PairCopula, n: int, criterion: str = "aic") -> float:
    if criterion == "aic":
        return -2.0 * spec.loglik + 2.0 * spec.edf
    if criterion == "bic":
        return -2.0 * spec.loglik + math.log(n) * spec.edf
    if criterion == "loglik":
        return -spec.loglik
    raise UsageError(f"unknown selection criterion {criterion!r}")


def candidate_list(families) -> list[tuple[str, int]]:
    """Fixed enumeration order: independence, parametric alphabetical, nonparametric."""
    fams = set(families)
    unknown = fams - set(FAMILIES)
    if unknown:
        raise UsageError(f"unknown families {sorted(unknown)}")
    out: list[tuple[str, int]] = []
    if "independence" in fams:
        out.append(("independence", 0))
    for fam in PARAMETRIC:
        if fam in fams:
            rots = ROTATIONS if fam in ROTATABLE else (0,)
            out.extend((fam, r) for r in rots)
    if "nonparametric" in fams:
        out.append(("nonparametric", 0))
    return out


def select_pair_family(u, v, candidates, criterion: str = "aic") -> PairCopula:
    """Fit every candidate (family x rotation) and keep the best by ``criterion``."""
    u, v = _as_pairs(u, v)
    cands = candidate_list(candidates)
    if not cands:
        raise UsageError("empty candidate family set")
    best, best_crit = None, np.inf
    for fam, rot in cands:
        if fam == "nonparametric":
            from .npcop import fit_np_pair

            fit = fit_np_pair(u, v)
            spec = PairCopula("nonparametric", 0, (), fit.edf, fit.loglik, fit)
        else:
            spec = fit_pair_mle(u, v, fam, rot)
        crit = criterion_value(spec, u.size, criterion)
        if crit < best_crit:
            best, best_crit = spec, crit
    if best is None:
        raise DegenerateDataError("no candidate produced a finite criterion")
    return best


def simulate_pairs(spec: PairCopula, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` pairs ``(u, v)`` by conditional inversion."""
    v = rng.uniform(size=n)
    p = rng.uniform(size=n)
    u = hinv(spec, "given_second", p, v)
    return np.column_stack([u, clamp(v)])
