"""Acceptance criteria on the bundled reference data.

Each test evaluates one criterion at its stated tolerance, records a single
PASS/FAIL line with the measured values, and asserts.  The lines are printed
in the terminal summary (see conftest) and when this file is run directly.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from oracles import implied_normal
from vinesem.copula import PairCopula, copula_cdf, copula_pdf, hfunc, hinv, kendall_tau, simulate_pairs
from vinesem.datasets import consent_dag, reference_data
from vinesem.dvine import fit_dvine_reg
from vinesem.lgbn import fit_lgbn
from vinesem.margins import fit_gaussian, fit_margin, margin_gof
from vinesem.sem import SemConfig, copula_table, fit_sem, gof_table, joint_logdensity, pruned_edges, retained_edges
from vinesem.simulate import cond_median_path, lgbn_mean_path, sample_sem

RESULTS: list[str] = []


def record(label: str, checks: list[tuple[str, bool]]) -> None:
    ok = all(c for _, c in checks)
    detail = "; ".join(f"{'ok' if c else 'MISS'} {name}" for name, c in checks)
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, detail


def within(value, target, tol):
    return abs(value - target) <= tol


@pytest.fixture(scope="module")
def timed_lgbn(ref_data, dag):
    t0 = time.perf_counter()
    model = fit_lgbn(ref_data, dag)
    return model, time.perf_counter() - t0


@pytest.fixture(scope="module")
def timed_gauss(ref_data, dag):
    t0 = time.perf_counter()
    model = fit_sem(ref_data, dag, SemConfig("gaussian", "gaussian", "caic"))
    return model, time.perf_counter() - t0


def test_criterion_1_lgbn(timed_lgbn):
    model, secs = timed_lgbn
    ll, k = model.loglik, model.edf
    aic, bic = -2 * ll + 2 * k, -2 * ll + math.log(model.n) * k
    akt = model.nodes["akt"].loglik
    record("1 LGBN reproduction", [
        (f"loglik {ll:.2f} vs -9189.29+-1", within(ll, -9189.29, 1.0)),
        (f"AIC {aic:.2f} vs 18462.58+-2", within(aic, 18462.58, 2.0)),
        (f"BIC {bic:.2f} vs 18666.37+-2", within(bic, 18666.37, 2.0)),
        (f"params {k} == 42", k == 42),
        (f"akt loglik {akt:.2f} vs -196.03+-0.5", within(akt, -196.03, 0.5)),
        (f"runtime {secs:.3f}s < 1s", secs < 1.0),
    ])


def test_criterion_2_gaussian_sem(timed_gauss, timed_lgbn, ref_data):
    model, secs = timed_gauss
    cop = copula_table(model)[-1][2]
    f_total = gof_table(model, ref_data)[-1].loglik
    lgbn_ll = timed_lgbn[0].loglik
    kept = len(retained_edges(model))
    record("2 gaussian-config SEM", [
        (f"copula loglik {cop.loglik:.2f} vs 1497.84+-5", within(cop.loglik, 1497.84, 5)),
        (f"AIC_C {cop.aic:.2f} vs -2971.68+-10", within(cop.aic, -2971.68, 10)),
        (f"|F loglik {f_total:.2f} - LGBN {lgbn_ll:.2f}| < 10", abs(f_total - lgbn_ll) < 10),
        (f"retained edges {kept} == 12", kept == 12),
        (f"runtime {secs:.2f}s < 10s", secs < 10.0),
    ])


def test_criterion_3_pnp_pruning(pnp_sem):
    removed = set(pruned_edges(pnp_sem))
    expected = {("mek", "erk"), ("plc", "pkc"), ("pip3", "akt")}
    kept = len(retained_edges(pnp_sem))
    deviation = len(removed ^ expected)
    shown = ", ".join(f"{p}->{c}" for p, c in sorted(removed))
    record("3 pnp edge pruning", [
        (f"retained {kept} == 17", kept == 17),
        (f"removed {{{shown}}} differs from the expected set by {deviation} edge(s) (<= 1 tolerated)", deviation <= 1),
    ])


def test_criterion_4_parent_orders(timed_gauss):
    orders = {v: o for v, o, _ in copula_table(timed_gauss[0])}
    want = {"raf": ("pka", "pkc"), "mek": ("raf", "pkc"), "akt": ("erk", "pka")}
    record("4 gaussian parent orders", [
        (f"{v} {orders[v]} == {o}", orders[v] == o) for v, o in want.items()
    ])


def test_criterion_5_margins(ref_data, dag):
    g = fit_gaussian(ref_data["pip3"])
    mean, var = g.means[0], g.sds[0] ** 2
    ll, aic, bic, _ = margin_gof(g, ref_data["pip3"])
    checks = [
        (f"pip3 mean {mean:.3f} vs 3.52+-0.01", within(mean, 3.52, 0.01)),
        (f"pip3 variance {var:.3f} vs 0.61+-0.01", within(var, 0.61, 0.01)),
        (f"pip3 gof ({ll:.2f}, {aic:.2f}, {bic:.2f}) vs (-986.90, 1977.81, 1987.29)+-0.5",
         within(ll, -986.90, 0.5) and within(aic, 1977.81, 0.5) and within(bic, 1987.29, 0.5)),
    ]
    for v in dag.nodes:
        bm = fit_margin(ref_data[v], "mixture").bic
        bg = fit_gaussian(ref_data[v]).bic
        checks.append((f"{v} mixture BIC {bm:.2f} < gaussian {bg:.2f}", bm < bg))
    record("5 marginal fixtures", checks)


SUITE = {
    "gaussian": [(-0.7,), (0.2,), (0.8,)],
    "clayton": [(0.5,), (2.0,), (8.0,)],
    "gumbel": [(1.2,), (2.0,), (5.0,)],
    "frank": [(-5.0,), (2.0,), (12.0,)],
    "joe": [(1.3,), (2.0,), (5.0,)],
    "bb8": [(2.0, 0.5), (3.0, 0.9), (6.0, 0.7)],
}


def test_criterion_6_copula_suite():
    t0 = time.perf_counter()
    specs = [PairCopula(f, 0, p) for f, ps in SUITE.items() for p in ps]
    # inner grid: at (0.95, 0.05) a clayton(8) h-function is within 1e-10 of 1 and
    # its slope in u is about 1e-10, so no double-precision inverse recovers u to 1e-8
    grid = np.linspace(0.1, 0.9, 17)
    u, v = np.meshgrid(grid, grid)
    norm_err = fd_err = trip_err = tau_err = 0.0
    for spec in specs:
        val, _ = integrate.dblquad(lambda b, a: float(copula_pdf(spec, a, b)), 0, 1, 0, 1, epsabs=1e-7, epsrel=1e-7)
        norm_err = max(norm_err, abs(val - 1))
        d = 1e-5
        fd = (copula_cdf(spec, u, v + d) - copula_cdf(spec, u, v - d)) / (2 * d)
        fd_err = max(fd_err, float(np.max(np.abs(hfunc(spec, "given_second", u, v) - fd))))
        for direction in ("given_second", "given_first"):
            back = hinv(spec, direction, hfunc(spec, direction, u, v), v if direction == "given_second" else u)
            target = u if direction == "given_second" else v
            trip_err = max(trip_err, float(np.max(np.abs(back - target))))
        xy = simulate_pairs(spec, 100_000, np.random.default_rng(17))
        tau_err = max(tau_err, abs(stats.kendalltau(xy[:, 0], xy[:, 1])[0] - kendall_tau(spec)))
    rot_exact = all(
        kendall_tau(PairCopula(f, r, SUITE[f][1])) == -kendall_tau(PairCopula(f, 0, SUITE[f][1]))
        for f in ("clayton", "gumbel", "joe", "bb8") for r in (90, 270)
    )
    secs = time.perf_counter() - t0
    record("6 copula property suite", [
        (f"normalization max err {norm_err:.1e} <= 1e-3", norm_err <= 1e-3),
        (f"h vs finite difference max err {fd_err:.1e} <= 1e-5", fd_err <= 1e-5),
        (f"h/hinv roundtrip max err {trip_err:.1e} <= 1e-8", trip_err <= 1e-8),
        (f"simulated vs analytic tau max err {tau_err:.4f} <= 0.01 (n=1e5)", tau_err <= 0.01),
        ("rotation negates tau exactly", rot_exact),
        (f"runtime {secs:.1f}s < 60s", secs < 60),
    ])


def test_criterion_7_gaussian_oracles(timed_gauss, ref_data):
    sigma = np.array([[1.0, 0.6, 0.4], [0.6, 1.0, 0.3], [0.4, 0.3, 1.0]])
    scale = np.array([2.0, 0.5, 1.5])
    mean = np.array([1.0, -2.0, 0.5])
    cov = sigma * np.outer(scale, scale)
    X = np.random.default_rng(11).multivariate_normal(mean, cov, size=5000)
    margins = [fit_gaussian(X[:, k]) for k in range(3)]
    U = np.column_stack([m.pit(X[:, k]) for k, m in enumerate(margins)])
    reg = fit_dvine_reg(U[:, 0], {"a": U[:, 1], "b": U[:, 2]}, "caic", "gaussian")
    pts = np.array([[-2.0, 0.5], [-2.25, 1.25], [-1.75, -0.25]])
    w = np.linalg.solve(cov[1:, 1:], cov[0, 1:])
    mu = mean[0] + (pts - mean[1:]) @ w
    sd = math.sqrt(cov[0, 0] - cov[0, 1:] @ w)
    xu = {"a": margins[1].pit(pts[:, 0]), "b": margins[2].pit(pts[:, 1])}
    q_err = 0.0
    for alpha in (0.1, 0.5, 0.9):
        q = margins[0].pit_inv(reg.cond_quantile(np.full(3, alpha), xu))
        q_err = max(q_err, float(np.max(np.abs(q - (mu + sd * stats.norm.ppf(alpha))))))

    model = timed_gauss[0]
    m_vec, c_mat = implied_normal(model)
    pts20 = np.random.default_rng(8).multivariate_normal(m_vec, c_mat, size=20)
    x = {v: pts20[:, k] for k, v in enumerate(model.dag.nodes)}
    d_err = float(np.max(np.abs(joint_logdensity(model, x) - stats.multivariate_normal(m_vec, c_mat).logpdf(pts20))))
    record("7 gaussian oracle suite", [
        (f"conditional quantiles max err {q_err:.3f} <= 0.03", q_err <= 0.03),
        (f"joint log-density vs MVN max err {d_err:.1e} <= 1e-4", d_err <= 1e-4),
    ])


def test_criterion_8_simulation(pnp_sem, ref_data):
    a, b = sample_sem(pnp_sem, 845, seed=2024), sample_sem(pnp_sem, 845, seed=2024)
    same = all(a[v].tobytes() == b[v].tobytes() for v in pnp_sem.dag.nodes)
    pvals = {v: stats.kstest(a[v], pnp_sem.margins[v].cdf).pvalue for v in pnp_sem.dag.nodes}
    worst = min(pvals, key=pvals.get)
    tau = stats.kendalltau(a["akt"], a["erk"])[0]
    s_sim = np.sum([a[v] for v in pnp_sem.dag.nodes], axis=0)
    s_ref = np.sum([ref_data[v] for v in pnp_sem.dag.nodes], axis=0)
    se = s_sim.std(ddof=1) / math.sqrt(s_sim.size)
    gap = abs(s_sim.mean() - s_ref.mean())
    record("8 simulation suite", [
        ("seeded reruns byte-identical", same),
        (f"KS min p-value {pvals[worst]:.3f} ({worst}) > 0.01", pvals[worst] > 0.01),
        (f"tau(akt, erk) {tau:.3f} vs 0.67+-0.05", within(tau, 0.67, 0.05)),
        (f"row-sum mean gap {gap:.3f} < 3 MC se {3 * se:.3f}", gap < 3 * se),
    ])


def test_criterion_9_median_path(timed_gauss, timed_lgbn):
    path = cond_median_path(timed_gauss[0], 0.5)
    means = lgbn_mean_path(timed_lgbn[0], {"pip3": path["pip3"]})
    err = max(abs(path[v] - means[v]) for v in path)
    record("9 conditional median path", [
        (f"{len(path)} nodes", len(path) == 11),
        (f"max |median path - LGBN mean path| {err:.4f} <= 0.05", err <= 0.05),
    ])


def test_note_pnp_loglik_within_ten_percent(pnp_sem, ref_data, dag):
    kde = copula_table(pnp_sem)[-1][2].loglik
    mix = copula_table(fit_sem(ref_data, dag, SemConfig("mixture", "pnp", "caic"), threads=4))[-1][2].loglik
    record("note pnp log-likelihood totals", [
        (f"kde margins {kde:.2f} within 10% of 2316.23", abs(kde - 2316.23) <= 0.1 * 2316.23),
        (f"mixture margins {mix:.2f} within 10% of 2292.34", abs(mix - 2292.34) <= 0.1 * 2292.34),
    ])


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
