"""Nonparametric pair copula: Gaussian-kernel transformation estimator.

The pseudo-observations are mapped to the z-scale, ``z = Phi^-1(u)``, a
bivariate Gaussian kernel density is fitted there, and the copula density is
recovered as ``f_z(z1, z2) / (phi(z1) phi(z2))``.  The estimate is tabulated on
a cell-centred ``GRID x GRID`` grid of the unit square and rescaled so both
families of conditional densities integrate to one; h-functions and their
inverses come from cumulative sums over that grid.
"""

from __future__ import annotations

import base64
import math

import numpy as np
from scipy import ndimage, signal, special

from ._util import InsufficientDataError, UsageError, clamp

GRID = 201
MIN_N = 30
_LOG_2PI = math.log(2.0 * math.pi)


def _centers(m: int = GRID) -> np.ndarray:
    return (np.arange(m) + 0.5) / m


def _bandwidth(z: np.ndarray) -> np.ndarray:
    n = z.shape[0]
    cov = np.cov(z, rowvar=False)
    # keep the matrix positive definite for near-comonotone data
    ev_min = np.linalg.eigvalsh(cov).min()
    if ev_min < 1e-6 * np.trace(cov):
        cov = cov + (1e-6 * np.trace(cov) - ev_min) * np.eye(2)
    return cov * n ** (-1.0 / 3.0)


def _kernel_sums(points: np.ndarray, z: np.ndarray, prec: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Sum over data of exp(-0.5 d' P d) for every evaluation point."""
    out = np.empty(points.shape[0])
    p11, p12, p22 = prec[0, 0], prec[0, 1], prec[1, 1]
    for s in range(0, points.shape[0], chunk):
        pt = points[s : s + chunk]
        dx = pt[:, 0:1] - z[None, :, 0]
        dy = pt[:, 1:2] - z[None, :, 1]
        q = p11 * dx * dx + 2.0 * p12 * dx * dy + p22 * dy * dy
        out[s : s + chunk] = np.exp(-0.5 * q).sum(axis=1)
    return out


def _direct_density_on_grid(z: np.ndarray, H: np.ndarray, zg: np.ndarray) -> np.ndarray:
    prec = np.linalg.inv(H)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(H)))
    pts = np.column_stack([np.repeat(zg, zg.size), np.tile(zg, zg.size)])
    return norm * _kernel_sums(pts, z, prec, chunk=256).reshape(zg.size, zg.size) / z.shape[0]


def _binned_density_on_grid(z: np.ndarray, H: np.ndarray, zg: np.ndarray, max_mesh: int = 1500) -> np.ndarray:
    """Kernel density of ``z`` at the tensor grid ``zg x zg``.

    Linear binning on a fine uniform mesh, FFT convolution with the kernel,
    cubic-spline interpolation back to the requested grid.  A nearly singular
    bandwidth would need a huge mesh; direct summation is used instead.
    """
    n = z.shape[0]
    sd_max = math.sqrt(np.linalg.eigvalsh(H).max())
    sd_min = math.sqrt(np.linalg.eigvalsh(H).min())
    step = min(sd_min / 6.0, 0.02)
    reach = 6.0 * sd_max
    lo = zg[0] - reach - 2 * step
    size = int(math.ceil((zg[-1] - zg[0] + 2 * reach + 4 * step) / step)) + 1
    if size > max_mesh:
        return _direct_density_on_grid(z, H, zg)
    # linear binning of the points that can reach the evaluation window
    t = (z - lo) / step
    keep = np.all((t >= 0) & (t <= size - 2), axis=1)
    t = t[keep]
    i0 = np.floor(t).astype(int)
    f = t - i0
    counts = np.zeros((size, size))
    for dx, wx in ((0, 1 - f[:, 0]), (1, f[:, 0])):
        for dy, wy in ((0, 1 - f[:, 1]), (1, f[:, 1])):
            np.add.at(counts, (i0[:, 0] + dx, i0[:, 1] + dy), wx * wy)
    half = int(math.ceil(reach / step))
    off = np.arange(-half, half + 1) * step
    prec = np.linalg.inv(H)
    q = prec[0, 0] * off[:, None] ** 2 + 2 * prec[0, 1] * off[:, None] * off[None, :] + prec[1, 1] * off[None, :] ** 2
    kern = np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(np.linalg.det(H)))
    dens = signal.fftconvolve(counts, kern, mode="same") / n
    idx = (zg - lo) / step
    coords = np.array(np.meshgrid(idx, idx, indexing="ij"))
    return np.maximum(ndimage.map_coordinates(dens, coords, order=3, mode="nearest"), 0.0)


def _sinkhorn(raw: np.ndarray, tol: float = 1e-13, maxiter: int = 2000):
    """Scale rows/columns so every row and column of the cell grid averages to 1."""
    m = raw.shape[0]
    r = np.ones(m)
    s = np.ones(m)
    for _ in range(maxiter):
        r = 1.0 / ((raw * s[None, :]).mean(axis=1))
        col = (raw * r[:, None]).mean(axis=0)
        s = 1.0 / col
        row_err = np.abs((raw * r[:, None] * s[None, :]).mean(axis=1) - 1.0).max()
        if row_err < tol:
            break
    return r, s


def _interp_index(x: np.ndarray, m: int):
    """Linear position of ``x`` among the cell centres: (left index, weight)."""
    t = np.clip(x * m - 0.5, 0.0, m - 1.0)
    j0 = np.minimum(np.floor(t).astype(int), m - 2)
    return j0, t - j0


def _edge_interp(cum: np.ndarray, x: np.ndarray):
    """Evaluate cumulative tables (edges along the last axis) at ``x``, piecewise linearly."""
    m = cum.shape[-1] - 1
    s = np.clip(x * m, 0.0, float(m))
    e0 = np.minimum(np.floor(s).astype(int), m - 1)
    f = s - e0
    return e0, f


class NpCopula:
    """Fitted transformation-kernel copula estimator (immutable after construction)."""

    def __init__(self, density: np.ndarray, bandwidth: np.ndarray, edf: float, loglik: float, n: int):
        self.density = np.asarray(density, dtype=float)
        self.density.setflags(write=False)
        self.bandwidth = np.asarray(bandwidth, dtype=float)
        self.edf = float(edf)
        self.loglik = float(loglik)
        self.n = int(n)
        m = self.density.shape[0]
        self.m = m
        d = self.density
        zeros_c = np.zeros((1, m))
        # cum_u[e, j]: integral over u in [0, e/m] at column j, normalized per column
        cum_u = np.vstack([zeros_c, np.cumsum(d, axis=0) / m])
        self._cum_u = cum_u / cum_u[-1:, :]
        cum_v = np.hstack([zeros_c.T, np.cumsum(d, axis=1) / m])
        self._cum_v = cum_v / cum_v[:, -1:]
        cdf = np.zeros((m + 1, m + 1))
        cdf[1:, 1:] = np.cumsum(np.cumsum(d, axis=0), axis=1) / (m * m)
        self._cdf = cdf / cdf[-1, -1]

    # -- evaluation -------------------------------------------------------
    def pdf(self, u, v):
        u, v = np.broadcast_arrays(clamp(u), clamp(v))
        i0, wi = _interp_index(u, self.m)
        j0, wj = _interp_index(v, self.m)
        d = self.density
        return (
            (1 - wi) * (1 - wj) * d[i0, j0]
            + wi * (1 - wj) * d[i0 + 1, j0]
            + (1 - wi) * wj * d[i0, j0 + 1]
            + wi * wj * d[i0 + 1, j0 + 1]
        )

    def cdf(self, u, v):
        u, v = np.broadcast_arrays(clamp(u), clamp(v))
        e0, f = _edge_interp(self._cdf[0], u)
        g0, g = _edge_interp(self._cdf[0], v)
        c = self._cdf
        return (
            (1 - f) * (1 - g) * c[e0, g0]
            + f * (1 - g) * c[e0 + 1, g0]
            + (1 - f) * g * c[e0, g0 + 1]
            + f * g * c[e0 + 1, g0 + 1]
        )

    def _conditional_table(self, cum: np.ndarray, cond: np.ndarray) -> np.ndarray:
        """Cumulative table (n x m+1) of the free argument at each conditioning value."""
        j0, w = _interp_index(cond, self.m)
        return (1 - w)[:, None] * cum[j0] + w[:, None] * cum[j0 + 1]

    def _h(self, cum, x, cond):
        x, cond = np.broadcast_arrays(clamp(x), clamp(cond))
        shape = x.shape
        x, cond = x.ravel(), cond.ravel()
        tab = self._conditional_table(cum, cond)
        e0, f = _edge_interp(tab[0], x)
        rows = np.arange(x.size)
        out = (1 - f) * tab[rows, e0] + f * tab[rows, e0 + 1]
        return clamp(out).reshape(shape)

    def _hinv(self, cum, q, cond):
        q, cond = np.broadcast_arrays(clamp(q), clamp(cond))
        shape = q.shape
        q, cond = q.ravel(), cond.ravel()
        tab = self._conditional_table(cum, cond)
        rows = np.arange(q.size)
        e0 = np.clip((tab <= q[:, None]).sum(axis=1) - 1, 0, self.m - 1)
        lo, hi = tab[rows, e0], tab[rows, e0 + 1]
        frac = np.where(hi > lo, (q - lo) / np.where(hi > lo, hi - lo, 1.0), 0.0)
        return clamp((e0 + np.clip(frac, 0.0, 1.0)) / self.m).reshape(shape)

    def hfunc2(self, u, v):
        """P(U <= u | V = v)."""
        return self._h(self._cum_u.T, u, v)

    def hfunc1(self, u, v):
        """P(V <= v | U = u)."""
        return self._h(self._cum_v, v, u)

    def hinv2(self, q, v):
        return self._hinv(self._cum_u.T, q, v)

    def hinv1(self, q, u):
        return self._hinv(self._cum_v, q, u)

    def tau(self) -> float:
        g = _centers(self.m)
        C = self.cdf(g[:, None], g[None, :])
        return float(4.0 * np.mean(C * self.density) - 1.0)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "grid": self.m,
            "density_b64": base64.b64encode(self.density.astype("<f8").tobytes()).decode("ascii"),
            "bandwidth": self.bandwidth.tolist(),
            "edf": self.edf,
            "loglik": self.loglik,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> NpCopula:
        m = int(d["grid"])
        dens = np.frombuffer(base64.b64decode(d["density_b64"]), dtype="<f8").reshape(m, m)
        return cls(dens.copy(), np.array(d["bandwidth"]), d["edf"], d["loglik"], d["n"])


def fit_np_pair(u, v, grid: int = GRID, loglik: str = "insample") -> NpCopula:
    """Fit the transformation kernel estimator to pseudo-observations.

    ``loglik="insample"`` sums the log of the tabulated density at the data;
    ``"loo"`` drops each point's own kernel before evaluating it.  The
    effective degrees of freedom are the trace of the smoother either way.
    """
    if loglik not in ("insample", "loo"):
        raise UsageError(f"loglik must be 'insample' or 'loo', got {loglik!r}")
    u = clamp(np.asarray(u, dtype=float).ravel())
    v = clamp(np.asarray(v, dtype=float).ravel())
    n = u.size
    if n < MIN_N:
        raise InsufficientDataError(f"nonparametric pair copula needs n >= {MIN_N}, got {n}")
    z = np.column_stack([special.ndtri(u), special.ndtri(v)])
    H = _bandwidth(z)
    prec = np.linalg.inv(H)
    norm = 1.0 / (2.0 * math.pi * math.sqrt(np.linalg.det(H)))

    g = _centers(grid)
    zg = special.ndtri(g)
    fz = _binned_density_on_grid(z, H, zg)
    log_phi = -0.5 * zg * zg - 0.5 * _LOG_2PI
    raw = fz * np.exp(-(log_phi[:, None] + log_phi[None, :]))
    raw = np.maximum(raw, 1e-300)
    r, s = _sinkhorn(raw)
    dens = raw * r[:, None] * s[None, :]

    sums = _kernel_sums(z, z, prec)
    edf = float(np.sum(1.0 / sums))
    if loglik == "loo":
        # leave-one-out density at the data, carried through the same rescaling
        f_loo = norm * (sums - 1.0) / (n - 1)
        log_phi_d = -0.5 * (z * z).sum(axis=1) - _LOG_2PI
        scale = np.interp(u, g, r) * np.interp(v, g, s)
        c_loo = np.maximum(f_loo * np.exp(-log_phi_d) * scale, 1e-300)
        ll = float(np.sum(np.log(c_loo)))
        return NpCopula(dens, H, edf, ll, n)
    fit = NpCopula(dens, H, edf, 0.0, n)
    fit.loglik = float(np.sum(np.log(np.maximum(fit.pdf(u, v), 1e-300))))
    return fit
