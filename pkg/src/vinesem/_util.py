"""Shared numerics: clamping, vectorized bracketing inversion, error types."""

from __future__ import annotations

import numpy as np

EPS = 1e-10


class VinesemError(Exception):
    """Base class for library errors."""


class DomainError(VinesemError, ValueError):
    """A parameter lies outside its family domain."""


class UnsupportedError(VinesemError, NotImplementedError):
    pass


class DegenerateDataError(VinesemError, ValueError):
    pass


class InsufficientDataError(VinesemError, ValueError):
    pass


class UsageError(VinesemError, ValueError):
    """Bad input from the caller (shapes, names, missing values)."""


class CycleError(VinesemError, ValueError):
    pass


class NumericError(VinesemError, ArithmeticError):
    pass


def clamp(u, eps: float = EPS):
    return np.clip(np.asarray(u, dtype=float), eps, 1.0 - eps)


def invert_increasing(f, target, lo, hi, xtol: float = 1e-14, maxiter: int = 200):
    """Solve ``f(x) = target`` elementwise for nondecreasing ``f`` by bisection.

    ``lo`` and ``hi`` must bracket the solution (values outside the range of
    ``f`` on ``[lo, hi]`` end up at the nearest endpoint).
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        below = f(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= xtol * np.maximum(1.0, np.abs(mid))):
            return 0.5 * (lo + hi)
    raise NumericError(f"bisection did not converge in {maxiter} iterations")


def invert_cdf(cdf, pdf, target, lo: float, hi: float, grid: int = 2049, xtol: float = 1e-12, maxiter: int = 100):
    """Invert a continuous increasing CDF elementwise.

    The CDF is tabulated on ``grid`` points of ``[lo, hi]`` to bracket each
    target, then safeguarded Newton steps (falling back to bisection whenever
    a step leaves the bracket) refine the root.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    t = target.ravel()
    xs = np.linspace(lo, hi, grid)
    Fs = np.maximum.accumulate(cdf(xs))
    k = np.clip(np.searchsorted(Fs, t, side="left"), 1, grid - 1)
    a, b = xs[k - 1], xs[k]
    Fa, Fb = Fs[k - 1], Fs[k]
    x = np.where(Fb > Fa, a + (t - Fa) / np.where(Fb > Fa, Fb - Fa, 1.0) * (b - a), 0.5 * (a + b))
    x = np.clip(x, a, b)
    active = np.ones(t.size, dtype=bool)
    for _ in range(maxiter):
        xa = x[active]
        g = cdf(xa) - t[active]
        lo_a, hi_a = a[active], b[active]
        lo_a = np.where(g < 0, xa, lo_a)
        hi_a = np.where(g < 0, hi_a, xa)
        d = pdf(xa)
        step = np.where(d > 0, g / np.where(d > 0, d, 1.0), np.inf)
        xn = xa - step
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
        xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
        a[active], b[active] = lo_a, hi_a
        done = (np.abs(xn - xa) <= xtol * np.maximum(1.0, np.abs(xn))) | (hi_a - lo_a <= xtol * np.maximum(1.0, np.abs(xn)))
        x[active] = xn
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            return x.reshape(shape)
    raise NumericError(f"CDF inversion did not converge in {maxiter} iterations")
