"""Command line front end: reproducible CSV/JSON tables for every computation.

Exit codes: 0 success, 2 invalid parameters, 3 numerical failure,
4 standard and extended precision disagree.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import classical, perturbative, recurrence
from .export import append_csv_row, read_csv, solution_rows, write_csv, write_sidecar, fmt

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_PRECISION = 0, 2, 3, 4
OUTPUT_ENV = "MOYAL_GEOMETRY_OUTPUT"
PRECISION_RTOL = 1e-6

SCAN_HEADER = ["phi0", "a_hat", "bar_low", "bar_high", "gb_estimate", "error"]


class InvalidParameters(ValueError):
    pass


def _outdir(args) -> Path:
    out = Path(args.output or os.environ.get(OUTPUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- classical ---------------------------------------------------------------


def cmd_classical(args) -> int:
    started = time.perf_counter()
    try:
        p = classical.ClassicalFactorParams(args.A, args.a, args.b)
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from exc
    k = classical.family_profile(p)
    grid = np.geomspace(args.r_min, args.r_max, args.num)
    rows = [
        (r, k(r), classical.scalar_curvature_radial(k, r), classical.boundary_term(k, r))
        for r in grid
    ]
    out = _outdir(args)
    write_csv(out / "classical.csv", ["r", "k", "curvature", "boundary_term"], rows)
    summary = {
        "curvature": classical.family_curvature(p),
        "volume": classical.family_volume(p),
        "gauss_bonnet": classical.family_gauss_bonnet(p),
    }
    if args.quadrature:
        summary["gauss_bonnet_quadrature"] = classical.gauss_bonnet_quadrature(k, args.quad_r_max)
    write_sidecar(out / "classical.json", "classical", asdict(p), "standard", started, summary=summary)
    print(
        f"R={fmt(summary['curvature'])} V={fmt(summary['volume'])} "
        f"GB={fmt(summary['gauss_bonnet'])} (8*pi*a, a={p.a:g})"
    )
    if args.quadrature:
        print(f"GB quadrature (r_max={args.quad_r_max:g}) = {fmt(summary['gauss_bonnet_quadrature'])}")
    return EXIT_OK


# --- solve -------------------------------------------------------------------


def _problem(args) -> recurrence.RecurrenceProblem:
    try:
        return recurrence.RecurrenceProblem(
            R=args.R, phi0=args.phi0, variant=args.variant, c=args.c, N=args.N, precision=args.precision
        )
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from exc


def cmd_solve(args) -> int:
    started = time.perf_counter()
    problem = _problem(args)
    out = _outdir(args)
    try:
        sol = recurrence.solve(problem)
    except recurrence.SolverError as exc:
        part = exc.partial
        write_csv(out / "solution.csv", ["n", "phi_n"], enumerate(part))
        info = {"failure": str(exc), "terms_computed": int(part.size)}
        write_sidecar(out / "solution.json", "solve", asdict(problem), problem.precision, started, diagnostics=info)
        tail = ", ".join(fmt(v) for v in part[-3:])
        print(f"numerical failure: {exc}; {part.size} terms written, last: {tail}", file=sys.stderr)
        return EXIT_NUMERIC
    write_csv(out / "solution.csv", ["n", "phi_n", "gb_partial_n", "residual_n"], solution_rows(sol))
    info = {
        "increasing": sol.increasing,
        "residuals_ok": sol.residuals_ok,
        "max_abs_residual": float(np.max(np.abs(sol.residuals))),
        "volume_summable": sol.volume_summable,
    }
    if sol.exponent is not None:
        info["exponent"] = sol.exponent._asdict()
        info["gauss_bonnet_estimate"] = recurrence.gauss_bonnet_estimate(sol, recurrence.ESTIMATOR_N)
    code = EXIT_OK
    if args.check_precision:
        idx = min(recurrence.ESTIMATOR_N, problem.N - 1)
        info["precision_disagreement"] = recurrence.precision_disagreement(problem, idx)
        if info["precision_disagreement"] > PRECISION_RTOL:
            code = EXIT_PRECISION
    write_sidecar(out / "solution.json", "solve", asdict(problem), problem.precision, started, diagnostics=info)

    print(f"phi_0..phi_{problem.N - 1}: first {fmt(sol.phi[0])}, last {fmt(sol.phi[-1])}")
    if problem.variant == "frame" and problem.R > 0 and not sol.increasing:
        print("warning: sequence is not strictly increasing", file=sys.stderr)
    if not sol.residuals_ok:
        print("warning: residuals above bound, rerun with --precision extended", file=sys.stderr)
    if sol.exponent is not None:
        e = sol.exponent
        gb = info["gauss_bonnet_estimate"]
        print(f"a_hat={fmt(e.a_hat)} bars=[{fmt(e.bar_low)}, {fmt(e.bar_high)}]")
        print(f"GB estimate={fmt(gb)} GB/(8 pi)={fmt(gb / (8 * math.pi))} 8 pi a_hat={fmt(8 * math.pi * e.a_hat)}")
    else:
        gb = sol.gb_partials[-1]
        print(f"last GB partial={fmt(gb)} (sequence too short for the N=5000 estimator)")
    if code == EXIT_PRECISION:
        print(f"precision disagreement {info['precision_disagreement']:.3g} > {PRECISION_RTOL:g}", file=sys.stderr)
    return code


# --- scan --------------------------------------------------------------------


def _default_solver(phi0, R, N):
    return recurrence.solve(recurrence.RecurrenceProblem(R=R, phi0=phi0, N=N)).phi


def scan_point(phi0, R, N, solver=None):
    """One row of the exponent scan table; failures are recorded, not raised."""
    solver = solver or _default_solver
    try:
        phi = solver(phi0, R, N)
        est = recurrence.exponent_estimate(phi)
        gb = recurrence.gauss_bonnet_estimate(phi, recurrence.ESTIMATOR_N)
        return [phi0, est.a_hat, est.bar_low, est.bar_high, gb, ""]
    except (ArithmeticError, ValueError, IndexError) as exc:
        return [phi0, None, None, None, None, str(exc)]


def _scan_worker(job):
    return scan_point(*job)


def run_scan(seeds, R, N=recurrence.ESTIMATOR_BARS[1] + 1, out_path=None, workers=1, solver=None, resume=False):
    """Scan seeds in order, appending each row to ``out_path`` as it completes.

    With ``resume=True`` seeds already present in ``out_path`` are skipped.
    Rows are returned (and written) in seed order.
    """
    seeds = [float(s) for s in seeds]
    done = {}
    if out_path is not None:
        out_path = Path(out_path)
        if resume and out_path.exists():
            for row in read_csv(out_path):
                done[float(row["phi0"])] = row
        elif out_path.exists():
            out_path.unlink()
    todo = [s for s in seeds if s not in done]
    jobs = [(s, R, N, solver) for s in todo]
    if workers > 1 and solver is None:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_scan_worker, jobs)
            rows = _collect(results, out_path)
    else:
        rows = _collect(map(_scan_worker, jobs), out_path)
    by_seed = {r[0]: r for r in rows}
    for s, row in done.items():
        by_seed[s] = [s] + [None if row[h] == "" else float(row[h]) for h in SCAN_HEADER[1:-1]] + [row["error"]]
    return [by_seed[s] for s in seeds]


def _collect(results, out_path):
    rows = []
    for row in results:
        rows.append(row)
        if out_path is not None:
            append_csv_row(out_path, SCAN_HEADER, row)
    return rows


def cmd_scan(args) -> int:
    started = time.perf_counter()
    if not (0 < args.phi0_min < args.phi0_max) or args.num < 2 or not args.R > 0:
        raise InvalidParameters("need 0 < phi0-min < phi0-max, num >= 2 and R > 0")
    if args.N <= recurrence.ESTIMATOR_BARS[1]:
        raise InvalidParameters(f"N must exceed {recurrence.ESTIMATOR_BARS[1]} for the exponent estimator")
    seeds = np.geomspace(args.phi0_min, args.phi0_max, args.num)
    out = _outdir(args)
    rows = run_scan(seeds, args.R, args.N, out / "scan.csv", args.workers, resume=args.resume)
    failures = sum(1 for r in rows if r[-1])
    params = {"R": args.R, "phi0_min": args.phi0_min, "phi0_max": args.phi0_max, "num": args.num, "N": args.N}
    write_sidecar(out / "scan.json", "scan", params, "standard", started, failures=failures)
    for r in rows:
        if r[-1]:
            print(f"phi0={fmt(r[0])}: failed ({r[-1]})")
        else:
            print(f"phi0={fmt(r[0])}: a_hat={r[1]:.6f} [{r[2]:.6f}, {r[3]:.6f}] GB/8pi={r[4] / (8 * math.pi):.6f}")
    return EXIT_OK


# --- fs ----------------------------------------------------------------------


def cmd_fs(args) -> int:
    started = time.perf_counter()
    if not args.R > 0 or not args.tol > 0:
        raise InvalidParameters("R and tol must be positive")
    try:
        seed = recurrence.find_fs_seed(args.R, args.tol)
    except recurrence.ShootingError as exc:
        print(f"seed search failed: {exc}", file=sys.stderr)
        for p0, a in exc.trace:
            print(f"  phi0={fmt(p0)} a_hat={fmt(a)}", file=sys.stderr)
        return EXIT_NUMERIC
    sol = recurrence.solve(recurrence.RecurrenceProblem(R=args.R, phi0=seed, N=recurrence.ESTIMATOR_BARS[1] + 1))
    n = np.unique(np.geomspace(1, sol.phi.size - 1, 60).astype(int))
    series = recurrence.fs_series(n.astype(float), args.R)
    out = _outdir(args)
    write_csv(out / "fs_series.csv", ["n", "phi_n", "fs_series", "difference"], zip(n, sol.phi[n], series, sol.phi[n] - series))
    e = sol.exponent
    gb = recurrence.gauss_bonnet_estimate(sol, recurrence.ESTIMATOR_N)
    write_sidecar(
        out / "fs.json", "fs", {"R": args.R, "tol": args.tol}, "standard", started,
        seed=seed, exponent=e._asdict(), gauss_bonnet_estimate=gb,
    )
    print(f"seed phi0={fmt(seed)} a_hat={fmt(e.a_hat)} bars=[{fmt(e.bar_low)}, {fmt(e.bar_high)}]")
    print(f"GB/(8 pi)={fmt(gb / (8 * math.pi))}")
    return EXIT_OK


# --- perturb -----------------------------------------------------------------


def cmd_perturb(args) -> int:
    started = time.perf_counter()
    if not args.eta > 0 or any(t < 0 for t in args.theta):
        raise InvalidParameters("eta must be positive and theta values non-negative")
    grid = np.linspace(0.0, args.r_max, args.num)
    try:
        table = perturbative.deformed_factor_table(grid, args.theta, args.eta, args.C1)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERIC
    out = _outdir(args)
    header = list(table)
    write_csv(out / "deformed_factor.csv", header, zip(*table.values()))
    params = {"eta": args.eta, "C1": args.C1, "theta": list(args.theta), "r_max": args.r_max, "num": args.num}
    write_sidecar(out / "deformed_factor.json", "perturb", params, "standard", started)
    at0 = ", ".join(f"{h}={fmt(table[h][0])}" for h in header[1:])
    print(f"r=0: {at0}")
    return EXIT_OK


# --- selfcheck ---------------------------------------------------------------


def cmd_selfcheck(args) -> int:
    """Seeded random property checks (telescoping identity, scaling covariance)."""
    rng = np.random.default_rng(args.seed)
    worst_tel = 0.0
    for _ in range(args.trials):
        phi = np.cumsum(rng.uniform(0.1, 2.0, size=500))
        worst_tel = max(worst_tel, abs(recurrence.telescoping_check(phi, 497, relative=True)))
    worst_scale = 0.0
    for _ in range(args.trials):
        phi0, R, lam = rng.uniform(0.5, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.3, 5.0)
        a = recurrence.solve(recurrence.RecurrenceProblem(R=R, phi0=phi0, N=500)).phi
        b = recurrence.solve(recurrence.RecurrenceProblem(R=lam**2 * R, phi0=lam * phi0, N=500)).phi
        worst_scale = max(worst_scale, float(np.max(np.abs(b / (lam * a) - 1))))
    ok = worst_tel <= 1e-9 and worst_scale <= 1e-12
    print(f"telescoping max rel {worst_tel:.3g}; scaling max rel {worst_scale:.3g}; {'ok' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_NUMERIC


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moyal-geometry", description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output", help=f"output directory (default ${OUTPUT_ENV} or .)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", help="classical constant-curvature family")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--r-min", type=float, default=1e-2)
    p.add_argument("--r-max", type=float, default=1e2)
    p.add_argument("--num", type=int, default=41)
    p.add_argument("--quadrature", action="store_true", help="also evaluate the Gauss-Bonnet boundary terms")
    p.add_argument("--quad-r-max", type=float, default=1e4)
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("solve", help="solve the matrix-basis recurrence")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--phi0", type=float, default=1.0)
    p.add_argument("--N", type=int, default=6001, help="number of terms phi_0..phi_{N-1}")
    p.add_argument("--variant", choices=recurrence.VARIANTS, default="frame")
    p.add_argument("--c", type=float, default=0.0, help="Rosenberg constant")
    p.add_argument("--precision", choices=recurrence.PRECISIONS, default="standard")
    p.add_argument("--check-precision", action="store_true", help="rerun at extended precision and compare")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", help="exponent estimate over a grid of seeds")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--phi0-min", type=float, default=0.1)
    p.add_argument("--phi0-max", type=float, default=10.0)
    p.add_argument("--num", type=int, default=25)
    p.add_argument("--N", type=int, default=6001)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fs", help="seed with exponent estimate 1 and series comparison")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_fs)

    p = sub.add_parser("perturb", help="order theta^2 deformed Fubini-Study factor")
    p.add_argument("--theta", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--C1", type=float, default=None, help="default -2 eta / 3 (epsilon(0) = 0)")
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--num", type=int, default=201)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("selfcheck", help="seeded random property checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameters as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (recurrence.SolverError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
