"""Radial constant-curvature metrics on the Moyal plane in the matrix basis.

For a radial conformal factor ``h = sum phi_n f_{n,n}`` the frame-curvature
equation reduces to

    (n+1)/phi_{n+1} (phi_{n+1}^2 - phi_n^2) + n/phi_{n-1} (phi_{n-1}^2 - phi_n^2) = R / phi_n

with ``R = C theta``.  Solved for ``phi_{n+1}`` this is a quadratic whose roots
have product ``-phi_n^2``, so there is exactly one positive root and the
sequence is determined by ``phi_0``.  The Rosenberg variant replaces the right
hand side by ``-c / phi_n^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import mpmath
import numpy as np

__all__ = [
    "RecurrenceProblem",
    "RecurrenceSolution",
    "ExponentEstimate",
    "SolverError",
    "ShootingError",
    "first_step",
    "step",
    "solve",
    "recurrence_residual",
    "gauss_bonnet_estimate",
    "gauss_bonnet_partials",
    "telescoping_check",
    "exponent_estimate",
    "fs_series",
    "fs_series_residual",
    "scan_exponents",
    "find_fs_seed",
    "precision_disagreement",
]

ESTIMATOR_N = 5000
ESTIMATOR_BARS = (4000, 6000)
EXTENDED_DPS = 40

VARIANTS = ("frame", "rosenberg")
PRECISIONS = ("standard", "extended")


class SolverError(ArithmeticError):
    """The recurrence left the representable range or lost positivity.

    ``partial`` holds the terms computed before the failure.
    """

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = np.array([float(v) for v in partial])


class ShootingError(RuntimeError):
    """No admissible bracket for the seed search; ``trace`` holds the scan."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class RecurrenceProblem:
    """Parameters of one recurrence run.

    ``N`` is the number of terms, so the solution is ``phi_0 .. phi_{N-1}``.
    """

    R: float = 1.0
    phi0: float = 1.0
    variant: str = "frame"
    c: float = 0.0
    N: int = 6001
    precision: str = "standard"

    def __post_init__(self):
        if not (self.phi0 > 0 and math.isfinite(self.phi0)):
            raise ValueError(f"phi0 must be positive, got {self.phi0!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}, got {self.precision!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if not math.isfinite(self.R) or not math.isfinite(self.c):
            raise ValueError("R and c must be finite")


class ExponentEstimate(NamedTuple):
    a_hat: float
    bar_low: float
    bar_high: float

    def brackets(self) -> bool:
        lo, hi = min(self.bar_low, self.bar_high), max(self.bar_low, self.bar_high)
        return lo <= self.a_hat <= hi


@dataclass
class RecurrenceSolution:
    problem: RecurrenceProblem
    phi: np.ndarray
    gb_partials: np.ndarray
    residuals: np.ndarray
    increasing: bool
    exponent: Optional[ExponentEstimate] = None
    phi_extended: Optional[list] = field(default=None, repr=False)
    residual_bound: float = 0.0

    @property
    def residuals_ok(self) -> bool:
        return bool(np.nanmax(np.abs(self.residuals), initial=0.0) <= self.residual_bound)

    @property
    def volume_summable(self) -> bool:
        """Heuristic: phi_n^-2 is summable when growth beats sqrt(n)."""
        if self.gb_partials.size == 0:
            return False
        return bool(self.gb_partials[-1] / (8 * math.pi) > 0.5)


def _rhs(cur, problem_R, variant, c):
    if variant == "frame":
        return problem_R / cur
    return -c / (cur * cur)


def _positive_root(n, B, cur, sqrt):
    # (n+1) x^2 + B x - (n+1) cur^2 = 0 ; roots have product -cur^2
    q = n + 1
    disc = sqrt(B * B + 4 * q * q * cur * cur)
    if B > 0:
        return 2 * q * cur * cur / (B + disc)
    return (disc - B) / (2 * q)


def _next(n, prev, cur, R, variant, c, sqrt=math.sqrt):
    if n == 0:
        B = -_rhs(cur, R, variant, c)
    else:
        B = n * (prev * prev - cur * cur) / prev - _rhs(cur, R, variant, c)
    return _positive_root(n, B, cur, sqrt)


def first_step(phi0: float, R: float) -> float:
    """Positive root of ``phi_1^2 - phi_0^2 = R phi_1 / phi_0``."""
    if not phi0 > 0:
        raise ValueError(f"phi0 must be positive, got {phi0!r}")
    return _next(0, None, phi0, R, "frame", 0.0)


def step(n: int, phi_prev: float, phi_cur: float, problem: RecurrenceProblem) -> float:
    """``phi_{n+1}`` from ``phi_{n-1}, phi_n`` (``n >= 1``)."""
    if n < 1:
        raise ValueError("step needs n >= 1; use first_step for n = 0")
    if not (phi_prev > 0 and phi_cur > 0):
        raise ValueError("phi values must be positive")
    return _next(n, phi_prev, phi_cur, problem.R, problem.variant, problem.c)


def recurrence_residual(n, prev, cur, nxt, R, variant="frame", c=0.0):
    """LHS - RHS of the recurrence at index ``n`` (``prev`` unused at n = 0)."""
    lhs = (n + 1) * (nxt * nxt - cur * cur) / nxt
    if n > 0:
        lhs = lhs + n * (prev * prev - cur * cur) / prev
    return lhs - _rhs(cur, R, variant, c)


def _relative_residuals(phi, R, variant, c):
    phi = np.asarray(phi, dtype=float)
    n = np.arange(phi.size - 1, dtype=float)
    cur, nxt = phi[:-1], phi[1:]
    prev = np.concatenate(([1.0], phi[:-2]))
    t1 = (n + 1) * (nxt - cur) * (nxt + cur) / nxt
    t2 = np.where(n > 0, n * (prev - cur) * (prev + cur) / prev, 0.0)
    rhs = R / cur if variant == "frame" else -c / (cur * cur)
    scale = np.abs(t1) + np.abs(t2) + np.abs(rhs)
    scale[scale == 0] = 1.0
    return (t1 + t2 - rhs) / scale


def _iterate(problem: RecurrenceProblem, sqrt, start, N):
    R, variant, c = problem.R, problem.variant, problem.c
    phi = [start]
    prev, cur = None, start
    for n in range(N - 1):
        try:
            nxt = _next(n, prev, cur, R, variant, c, sqrt)
        except ZeroDivisionError:
            nxt = 0.0
        if not (nxt > 0) or not mpmath.isfinite(nxt) or nxt > 1e300:
            raise SolverError(f"recurrence left the representable range at n={n + 1} (value {nxt})", phi)
        phi.append(nxt)
        prev, cur = cur, nxt
    return phi


def gauss_bonnet_partials(phi) -> np.ndarray:
    """``4 pi (n+1) (phi_{n+1}/phi_n - phi_n/phi_{n+1})`` for each n."""
    phi = np.asarray(phi, dtype=float)
    n = np.arange(phi.size - 1)
    ratio = phi[1:] / phi[:-1]
    return 4 * math.pi * (n + 1) * (ratio - 1 / ratio)


def solve(problem: RecurrenceProblem) -> RecurrenceSolution:
    """Iterate from ``phi_0`` taking the positive root at each step."""
    if problem.precision == "extended":
        with mpmath.workdps(EXTENDED_DPS):
            exact = _iterate(problem, mpmath.sqrt, mpmath.mpf(problem.phi0), problem.N)
            phi = np.array([float(v) for v in exact])
        bound = 1e-14
    else:
        exact = None
        phi = np.array(_iterate(problem, math.sqrt, float(problem.phi0), problem.N))
        bound = 1e-12
    residuals = _relative_residuals(phi, problem.R, problem.variant, problem.c)
    exponent = None
    if phi.size > ESTIMATOR_BARS[1]:
        exponent = exponent_estimate(phi)
    return RecurrenceSolution(
        problem=problem,
        phi=phi,
        gb_partials=gauss_bonnet_partials(phi),
        residuals=residuals,
        increasing=bool(np.all(np.diff(phi) > 0)),
        exponent=exponent,
        phi_extended=exact,
        residual_bound=bound,
    )


def _phi(sol_or_phi) -> np.ndarray:
    if isinstance(sol_or_phi, RecurrenceSolution):
        return sol_or_phi.phi
    return np.asarray(sol_or_phi, dtype=float)


def gauss_bonnet_estimate(sol_or_phi, N: int) -> float:
    """``4 pi (N+1)(phi_{N+1}/phi_N - phi_N/phi_{N+1})``; tends to ``8 pi a`` for phi ~ n^a."""
    phi = _phi(sol_or_phi)
    if N + 1 >= phi.size:
        raise IndexError(f"need phi up to index {N + 1}, have {phi.size} terms")
    ratio = phi[N + 1] / phi[N]
    return 4 * math.pi * (N + 1) * (ratio - 1 / ratio)


def telescoping_check(sol_or_phi, N: int, relative: bool = False) -> float:
    """Difference between the three cut-off sums and their telescoped value.

    This is an algebraic identity for any positive sequence.  With
    ``relative=True`` the difference is divided by the sum of the absolute
    values of all summands.
    """
    phi = _phi(sol_or_phi)
    if N + 1 >= phi.size:
        raise IndexError(f"need phi up to index {N + 1}, have {phi.size} terms")
    p = phi[: N + 2]
    n = np.arange(N + 2, dtype=float)
    back = np.zeros(N + 2)  # phi_n / phi_{n-1}, n >= 1
    back[1:] = p[1:] / p[:-1]
    fwd = p[:-1] / p[1:]  # phi_n / phi_{n+1}, n <= N

    s1_terms = -(2 * n[: N + 1] + 1) - n[: N + 1] * back[: N + 1] - (n[: N + 1] + 1) * fwd[: N + 1]
    s2_terms = n * (back + 1)
    s3_terms = (n[:N] + 1) * (fwd[:N] + 1)
    closed = (N + 1) * (p[N + 1] / p[N] - p[N] / p[N + 1])

    total = math.fsum(s1_terms) + math.fsum(s2_terms) + math.fsum(s3_terms)
    diff = total - closed
    if relative:
        scale = np.abs(s1_terms).sum() + np.abs(s2_terms).sum() + np.abs(s3_terms).sum() + abs(closed)
        return diff / scale
    return diff


def exponent_estimate(
    sol_or_phi, N: int = ESTIMATOR_N, bars: Sequence[int] = ESTIMATOR_BARS
) -> ExponentEstimate:
    """``log phi_N / log N`` with bars from the same estimator at two other cut-offs.

    For ``phi_n = A n^a`` this returns ``a + log A / log N``; the bias is
    intrinsic to the estimator and not corrected.
    """
    phi = _phi(sol_or_phi)
    lo, hi = bars
    if max(N, lo, hi) >= phi.size:
        raise IndexError(f"need phi up to index {max(N, lo, hi)}, have {phi.size} terms")

    def est(k):
        return math.log(phi[k]) / math.log(k)

    return ExponentEstimate(est(N), est(lo), est(hi))


def fs_series(n, R):
    """Large-n expansion of the linearly growing solution, through ``1/n^3``."""
    return (
        n
        + (R + 1) / 2
        + 1 / (8 * n)
        - (13 * R + 9) / (144 * n**2)
        + (-0.25 + 26 * R / 9 + 29 * R * R / 18) / (32 * n**3)
    )


def fs_series_residual(n: int, R: float, dps: int = 50) -> float:
    """Recurrence residual on three consecutive series values.

    Evaluated in ``dps``-digit arithmetic; the residual is far below double
    precision round-off of the individual terms for large n.
    """
    if n < 2:
        raise ValueError("the residual needs the series at n - 1 >= 1")
    with mpmath.workdps(dps):
        Rm = mpmath.mpf(R)
        vals = [fs_series(mpmath.mpf(k), Rm) for k in (n - 1, n, n + 1)]
        res = recurrence_residual(n, vals[0], vals[1], vals[2], Rm)
        return float(res)


def _solve_exponent(phi0, R, N):
    return solve(RecurrenceProblem(R=R, phi0=phi0, N=N))


def scan_exponents(phi0_grid, R: float, N: int = ESTIMATOR_BARS[1] + 1):
    """Exponent scan: for each seed return ``(phi0, estimate or None, error)``."""
    out = []
    for p0 in phi0_grid:
        try:
            sol = _solve_exponent(float(p0), R, N)
            out.append((float(p0), exponent_estimate(sol), None))
        except (SolverError, ValueError, ArithmeticError) as exc:
            out.append((float(p0), None, str(exc)))
    return out


def find_fs_seed(
    R: float,
    tolerance: float = 1e-3,
    scan_bounds: Optional[tuple] = None,
    n_scan: int = 50,
    N: int = ESTIMATOR_BARS[1] + 1,
    max_iter: int = 200,
    window_points: int = 3,
) -> float:
    """Seed ``phi0`` whose exponent estimate equals 1 within ``tolerance``.

    Scans ``n_scan`` log-spaced seeds over ``scan_bounds`` (default
    ``[1e-2 sqrt(R), 1e2 sqrt(R)]``), checks that the estimate crosses 1
    exactly once and decreases over ``window_points`` scan points on either
    side of the crossing, then bisects in ``log phi0``.  Seeds whose
    solutions overflow count as estimate ``+inf``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if scan_bounds is None:
        scan_bounds = (1e-2 * math.sqrt(R), 1e2 * math.sqrt(R))
    grid = np.geomspace(scan_bounds[0], scan_bounds[1], n_scan)
    trace = []
    for p0, est, err in scan_exponents(grid, R, N):
        trace.append((p0, math.inf if est is None else est.a_hat))

    values = np.array([a for _, a in trace])
    above = values > 1.0
    changes = np.nonzero(above[:-1] != above[1:])[0]
    if changes.size != 1:
        raise ShootingError(
            f"expected one crossing of a_hat = 1 in the scan, found {changes.size}", trace
        )
    i = int(changes[0])
    # only the neighbourhood of the crossing is checked: far above it the
    # log(A)/log(N) bias of the estimator makes a_hat turn up again
    window = values[max(i - window_points + 1, 0) : i + window_points + 1]
    window = window[np.isfinite(window)]
    if not np.all(np.diff(window) < 0):
        raise ShootingError("exponent estimate is not monotone around the crossing", trace)

    lo, hi = math.log(grid[i]), math.log(grid[i + 1])  # a_hat(lo) > 1 >= a_hat(hi)
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        a = exponent_estimate(_solve_exponent(math.exp(mid), R, N)).a_hat
        best = math.exp(mid)
        if abs(a - 1.0) <= tolerance / 100 or hi - lo < 1e-15:
            break
        if a > 1.0:
            lo = mid
        else:
            hi = mid
    a = exponent_estimate(_solve_exponent(best, R, N)).a_hat
    if abs(a - 1.0) > tolerance:
        raise ShootingError(f"bisection ended at a_hat={a} outside tolerance", trace)
    return best


def precision_disagreement(problem: RecurrenceProblem, index: Optional[int] = None) -> float:
    """Relative difference between standard and extended precision at ``index``."""
    index = problem.N - 1 if index is None else index
    a = solve(replace(problem, precision="standard")).phi[index]
    b = solve(replace(problem, precision="extended")).phi[index]
    return abs(a - b) / abs(b)
