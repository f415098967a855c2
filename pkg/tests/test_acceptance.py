"""Acceptance suite: one printed PASS/FAIL line per criterion.

Tolerances are fixed here and never loosened.  Criteria that do not hold
for the implemented mathematics fail loudly; see the decision log for why.
"""

import math
import time

import numpy as np
import pytest

from moyal_geometry import cli, classical, matrix_basis as mb, perturbative as pt, recurrence as rc

RNG_SEED = 20240601
GOLDEN = (1 + math.sqrt(5)) / 2


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_classical_closed_forms(report):
    rng = np.random.default_rng(RNG_SEED)
    t0 = time.perf_counter()
    worst_R, worst_gb = 0.0, 0.0
    for _ in range(20):
        p = classical.ClassicalFactorParams(rng.uniform(0.5, 3.0), rng.uniform(1.0, 4.0), rng.uniform(0.5, 3.0))
        k = classical.family_profile(p)
        expected = 8 * p.a**2 * p.b / p.A**2
        for r in (0.1, 0.7, 1.3, 5.0):
            worst_R = max(worst_R, _rel(classical.scalar_curvature_radial(k, r), expected))
        gb = classical.gauss_bonnet_quadrature(k, 1e4)
        worst_gb = max(worst_gb, _rel(gb, 8 * math.pi * p.a))
    elapsed = time.perf_counter() - t0
    ok = worst_R <= 1e-6 and worst_gb <= 1e-3 and elapsed < 1.0
    report(1, ok, f"R rel {worst_R:.2e} (<=1e-6), GB rel {worst_gb:.2e} (<=1e-3), {elapsed:.2f}s (<1s)")
    assert ok


def test_criterion_02_golden_first_step(report):
    val = rc.first_step(1.0, 1.0)
    err = abs(val - GOLDEN)
    ok = err <= 1e-12
    report(2, ok, f"first_step(1,1)={val!r}, |err|={err:.1e} (<=1e-12)")
    assert ok


def test_criterion_03_telescoping(report):
    rng = np.random.default_rng(RNG_SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        phi = rng.uniform(0.05, 20.0, size=2000)
        worst = max(worst, abs(rc.telescoping_check(phi, phi.size - 2, relative=True)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    report(3, ok, f"max rel {worst:.2e} (<=1e-9), {elapsed:.2f}s (<1s)")
    assert ok


def test_criterion_04_scaling_covariance(report):
    t0 = time.perf_counter()
    base = rc.solve(rc.RecurrenceProblem(R=1.0, phi0=1.0, N=2000)).phi
    worst = 0.0
    for lam in (0.5, 2.0, 10.0):
        scaled = rc.solve(rc.RecurrenceProblem(R=lam**2, phi0=lam, N=2000)).phi
        worst = max(worst, float(np.max(np.abs(scaled / (lam * base) - 1))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    report(4, ok, f"max rel {worst:.2e} (<=1e-12), {elapsed:.2f}s (<1s)")
    assert ok


def _gb_gap(phi):
    est = rc.exponent_estimate(phi)
    gb = rc.gauss_bonnet_estimate(phi, rc.ESTIMATOR_N)
    target = 8 * math.pi * est.a_hat
    return est, abs(gb - target) / target


def test_criterion_05_gauss_bonnet_vs_exponent(report):
    t0 = time.perf_counter()
    gaps, brackets = {}, True
    for phi0 in (0.5, 1.0, 2.0, 5.0):
        sol = rc.solve(rc.RecurrenceProblem(R=1.0, phi0=phi0, N=6001))
        est, gap = _gb_gap(sol.phi)
        gaps[phi0] = gap
        brackets &= est.brackets()
    elapsed = time.perf_counter() - t0
    disagreement = rc.precision_disagreement(rc.RecurrenceProblem(R=1.0, phi0=1.0, N=6001), rc.ESTIMATOR_N)
    ok = max(gaps.values()) <= 0.02 and brackets and elapsed < 10.0 and disagreement <= 1e-6
    gap_txt = ", ".join(f"{k:g}:{v:.3f}" for k, v in gaps.items())
    report(
        5, ok,
        f"|GB-8pi a|/(8pi a) per seed {{{gap_txt}}} (<=0.02), bars bracket={brackets}, "
        f"{elapsed:.2f}s (<10s), extended rel {disagreement:.1e} (<=1e-6)",
    )
    assert ok


def test_criterion_06_fs_series_residual(report):
    t0 = time.perf_counter()
    n = np.unique(np.geomspace(100, 2000, 12).astype(int))
    slopes = {}
    for R in (0.5, 1.0, 2.0):
        res = np.array([abs(rc.fs_series_residual(int(k), R)) for k in n])
        slopes[R] = np.polyfit(np.log(n), np.log(res), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = max(slopes.values()) <= -3 and elapsed < 1.0
    txt = ", ".join(f"R={k:g}:{v:.2f}" for k, v in slopes.items())
    report(6, ok, f"log-log slopes {{{txt}}} (<=-3), {elapsed:.2f}s (<1s)")
    assert ok


@pytest.fixture(scope="module")
def fs_seed():
    t0 = time.perf_counter()
    seed = rc.find_fs_seed(1.0, 1e-3)
    return seed, time.perf_counter() - t0


def test_criterion_07_shooting_consistency(report, fs_seed):
    seed, elapsed = fs_seed
    sol = rc.solve(rc.RecurrenceProblem(R=1.0, phi0=seed, N=6001))
    a_err = abs(sol.exponent.a_hat - 1)
    n = np.arange(1000, 5001)
    dev = float(np.max(np.abs(sol.phi[n] - rc.fs_series(n.astype(float), 1.0))))
    ok = a_err <= 1e-3 and dev <= 1e-2 and elapsed < 120
    report(
        7, ok,
        f"seed {seed:.8f}, |a_hat-1|={a_err:.1e} (<=1e-3), max|phi-series| on [1000,5000]={dev:.3g} (<=1e-2), "
        f"{elapsed:.1f}s (<120s)",
    )
    assert ok


def test_criterion_08_operator_oracle(report):
    t0 = time.perf_counter()
    R, theta = 1.0, 0.5
    phi = rc.solve(rc.RecurrenceProblem(R=R, phi0=1.0, N=6001)).phi[:200]
    curv = mb.frame_scalar_curvature(mb.RadialOperator(theta, phi))
    block = curv.coeff[curv.interior, curv.interior]
    diag_err = float(np.max(np.abs(np.diag(block).real / (R / theta) - 1)))
    off = float(np.max(np.abs(block - np.diag(np.diag(block)))))
    elapsed = time.perf_counter() - t0
    ok = diag_err <= 1e-8 and off <= 1e-10 and elapsed < 5
    report(
        8, ok,
        f"interior {block.shape[0]}x{block.shape[0]}: diag rel {diag_err:.1e} (<=1e-8), "
        f"off-diag {off:.1e} (<=1e-10), {elapsed:.2f}s (<5s)",
    )
    assert ok


def test_criterion_09_matrix_basis_identities(report):
    t0 = time.perf_counter()
    N, theta = 400, 1.0
    r = np.sqrt(theta * np.linspace(0.0, N / 4, 9))
    n = np.arange(N)
    values = np.array([mb.basis_eval(k, k, theta, r).real for k in n])
    unity = float(np.max(np.abs(values.sum(axis=0) - 1)))
    number = float(np.max(np.abs((n[:, None] * values).sum(axis=0) - (r**2 / (2 * theta) - 0.5))))

    worst_q = 0.0
    for a in (1, 2, 3):
        c = mb.radial_power_coefficients(a, 31, theta)
        for k in range(31):
            q = mb.radial_coefficient_by_quadrature(lambda x: x**a, k, theta)
            worst_q = max(worst_q, _rel(c[k], q))
    elapsed = time.perf_counter() - t0
    ok = unity <= 1e-6 and number <= 1e-6 and worst_q <= 1e-6 and elapsed < 5
    report(
        9, ok,
        f"pointwise |sum f_nn - 1|={unity:.2g}, |sum n f_nn - (r^2/2th - 1/2)|={number:.2g} (<=1e-6); "
        f"coeff vs quadrature rel {worst_q:.1e} (<=1e-6), {elapsed:.2f}s (<5s)",
    )
    assert ok


def test_criterion_10_perturbative(report):
    t0 = time.perf_counter()
    f = pt.SmoothRadialFunction(lambda x: 1 + x * x)
    thetas = np.array([0.02, 0.04, 0.08, 0.16])
    slopes = []
    for r in (0.5, 1.0, 2.0):
        res = [abs(pt.star_theta2(f, pt.moyal_inverse_function(f, t), t, r) - 1) for t in thetas]
        slopes.append(np.polyfit(np.log(thetas), np.log(res), 1)[0])
    slope_err = max(abs(s - 4) for s in slopes)

    eta, C1, C2 = 0.5, 0.3, -0.7
    grid = np.linspace(0.05, 20, 400)
    ode = max(abs(pt.epsilon_ode_residual(pt.epsilon_general_derivatives(x, C1, C2, eta), eta, x)) for x in grid)

    eps0_exact = all(
        pt.epsilon_regular(0.0, c1, e) == -c1 - 2 * e / 3 for c1, e in ((0.25, 0.5), (-1.0 / 3, 0.5), (2.0, 1.5))
    )

    table = pt.deformed_factor_table(np.linspace(0, 10, 201), [0.0, 0.25, 0.5, 0.75, 1.0], eta=0.5, C1=-1.0 / 3)
    bad = [
        k.removeprefix("factor_theta")
        for k, c in table.items()
        if k != "r" and not (abs(c[0] - 2) <= 1e-6 and np.all(c > 0) and np.all(np.diff(c) < 0))
    ]
    factor_ok = not bad
    elapsed = time.perf_counter() - t0
    ok = slope_err <= 0.1 and ode <= 1e-6 and eps0_exact and factor_ok and elapsed < 1
    report(
        10, ok,
        f"theta-exponent {np.mean(slopes):.3f} (4+-0.1), ODE residual {ode:.1e} (<=1e-6), "
        f"eps(0) exact={eps0_exact}, factor columns failing for theta in {bad or 'none'}, {elapsed:.2f}s (<1s)",
    )
    assert ok


def test_criterion_11_exponent_scan(report, fs_seed, tmp_path):
    t0 = time.perf_counter()
    code = cli.main(["-o", str(tmp_path), "scan", "--num", "25", "--workers", "4"])
    rows = cli.read_csv(tmp_path / "scan.csv")
    elapsed = time.perf_counter() - t0
    completed = code == 0 and len(rows) == 25 and all(not r["error"] for r in rows)

    seeds = np.array([float(r["phi0"]) for r in rows])
    a = np.array([float(r["a_hat"]) for r in rows])
    lo = np.array([float(r["bar_low"]) for r in rows])
    hi = np.array([float(r["bar_high"]) for r in rows])
    gb = np.array([float(r["gb_estimate"]) for r in rows])
    steps = np.sign(np.diff(a))
    monotone = bool(np.all(steps == steps[0]) and steps[0] != 0)
    bracket = bool(np.all((np.minimum(lo, hi) <= a) & (a <= np.maximum(lo, hi))))
    gaps = np.abs(gb - 8 * math.pi * a) / (8 * math.pi * a)
    c5 = int(np.sum(gaps <= 0.02))
    # the shooting seed separates the seeds with a_hat above and below 1
    c7 = bool(np.all((a > 1) == (seeds < fs_seed[0])))
    ok = completed and monotone and bracket and c5 == len(rows) and c7 and elapsed < 600
    report(
        11, ok,
        f"25 seeds in [{seeds[0]:g}, {seeds[-1]:g}] completed={completed}, monotone={monotone}, "
        f"bars bracket={bracket}, GB gap <=0.02 at {c5}/25 points (max {gaps.max():.3f}), "
        f"consistent with shooting seed={c7}, {elapsed:.1f}s (<600s)",
    )
    assert ok
