"""Order-theta^2 calculus of radial functions and the deformed Fubini-Study factor.

For radial ``f, g`` the Moyal product, the Moyal inverse and the gradient
sandwich ``delta_i(f) * f^-1 * delta_i(f)`` are expanded to second order in
``theta``.  The constant-curvature equation linearised around
``h_FS = eta (1 + r^2)`` then gives a second-order ODE for the correction
``epsilon(r)`` in ``h = h_FS + theta^2 epsilon``, solved in closed form below.

The printed expansions are checked against an independent route: the generic
two-dimensional Moyal expansion applied to Taylor jets in ``(x1, x2)``
(:func:`sandwich_oracle`, :func:`star_oracle`, :func:`inverse_oracle`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import jets
from .jets import Jet

__all__ = [
    "SmoothRadialFunction",
    "PerturbativeParams",
    "star_theta2",
    "inverse_theta2",
    "moyal_inverse_function",
    "gradient_sandwich_theta2",
    "star_oracle",
    "inverse_oracle",
    "sandwich_oracle",
    "regular_C2",
    "epsilon_general",
    "epsilon_general_derivatives",
    "epsilon_regular",
    "epsilon_regular_derivatives",
    "epsilon_ode_residual",
    "epsilon_ode_source",
    "linearised_source",
    "fubini_study_factor",
    "deformed_conformal_factor",
    "deformed_factor_table",
]


class SmoothRadialFunction:
    """Radial function with derivatives.

    Built either from a jet-compatible callable (``func`` may use ``+ - * /``,
    integer or real powers and :func:`jets.exp` / :func:`jets.log`), which
    gives exact derivatives of any order, or from a list of derivative
    callables; orders beyond the list use central differences of the last
    one supplied.
    """

    def __init__(self, func: Optional[Callable] = None, derivs: Optional[Sequence[Callable]] = None):
        if (func is None) == (derivs is None):
            raise ValueError("give exactly one of func or derivs")
        self._func = func
        self._derivs = list(derivs) if derivs is not None else None

    @classmethod
    def from_derivatives(cls, *derivs: Callable) -> "SmoothRadialFunction":
        return cls(derivs=derivs)

    @classmethod
    def constant(cls, value: float) -> "SmoothRadialFunction":
        return cls(lambda r: r * 0 + value)

    @property
    def jet_capable(self) -> bool:
        return self._func is not None

    def jet(self, r: float, order: int) -> Jet:
        if self._func is not None:
            out = self._func(Jet.variable(r, order))
            if not isinstance(out, Jet):
                out = Jet.constant(out, order)
            return out
        d = self.derivatives(r, order)
        return Jet(np.array([d[k] / math.factorial(k) for k in range(order + 1)]), order)

    def __call__(self, r):
        if self._func is not None:
            return self._func(r)
        return self._derivs[0](r)

    def derivatives(self, r: float, order: int) -> list:
        if self._func is not None:
            return self.jet(r, order).derivatives()
        have = self._derivs
        out = [d(r) for d in have[: order + 1]]
        if len(out) <= order:
            last = have[-1]
            base = len(have) - 1
            for k in range(len(out), order + 1):
                out.append(_central_derivative(last, r, k - base))
        return out


def _central_derivative(func, r, k):
    # k-th derivative by repeated central differences, one Richardson step
    def diff(h):
        coeffs = [(-1) ** j * math.comb(k, j) for j in range(k + 1)]
        pts = [r + (k / 2 - j) * h for j in range(k + 1)]
        return sum(c * func(p) for c, p in zip(coeffs, pts)) / h**k

    h = 1e-3 * (1 + abs(r))
    return (4 * diff(h) - diff(2 * h)) / 3


@dataclass(frozen=True)
class PerturbativeParams:
    """``h = eta (1 + r^2) + theta^2 epsilon(r)`` with ``epsilon`` regular at 0."""

    eta: float
    C1: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        if not self.theta >= 0:
            raise ValueError(f"theta must be non-negative, got {self.theta!r}")

    @property
    def C2(self) -> float:
        return regular_C2(self.eta)


def _check_r(r):
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r!r}")


# --- printed theta^2 formulas (work on floats and jets alike) ----------------


def _star_terms(f0, f1, f2, g0, g1, g2, r, theta):
    return f0 * g0 - (theta**2 / (8 * r)) * (f2 * g1 + f1 * g2)


def _inverse_terms(f0, f1, f2, r, theta):
    return 1 / f0 + (theta**2 / (4 * r)) * (f1**3 / f0**4 - f2 * f1 / f0**3)


def _sandwich_correction(f0, f1, f2, f3, r):
    return (
        f1**2 / (4 * r**4 * f0)
        + f1**3 / (2 * r**3 * f0**2)
        - f1 * f2 / (2 * r**3 * f0)
        + f1**4 / (r**2 * f0**3)
        - 3 * f1**2 * f2 / (2 * r**2 * f0**2)
        + f1**5 / (4 * r * f0**4)
        + f1 * f3 / (4 * r**2 * f0)
        + f2**2 / (4 * r**2 * f0)
        - 3 * f1**3 * f2 / (4 * r * f0**3)
        + f1**2 * f3 / (4 * r * f0**2)
        + f1 * f2**2 / (2 * r * f0**2)
        - f2 * f3 / (4 * r * f0)
    )


def star_theta2(f: SmoothRadialFunction, g: SmoothRadialFunction, theta: float, r: float) -> float:
    """``f g - theta^2/(8r) (f'' g' + f' g'')``."""
    _check_r(r)
    f0, f1, f2 = f.derivatives(r, 2)
    g0, g1, g2 = g.derivatives(r, 2)
    return _star_terms(f0, f1, f2, g0, g1, g2, r, theta)


def inverse_theta2(f: SmoothRadialFunction, theta: float, r: float) -> float:
    """``1/f + theta^2/(4r) (f'^3 f^-4 - f'' f' f^-3)``."""
    _check_r(r)
    f0, f1, f2 = f.derivatives(r, 2)
    if f0 == 0:
        raise ZeroDivisionError(f"f vanishes at r={r}")
    return _inverse_terms(f0, f1, f2, r, theta)


def moyal_inverse_function(f: SmoothRadialFunction, theta: float) -> SmoothRadialFunction:
    """The order-theta^2 inverse as a function of r, with jet derivatives."""

    def inv(rj):
        if not isinstance(rj, Jet):
            return inverse_theta2(f, theta, rj)
        F = f.jet(rj.value, rj.order + 2)
        F1 = F.derivative()
        F2 = F1.derivative()
        return _inverse_terms(F.truncate(rj.order), F1.truncate(rj.order), F2, rj, theta)

    return SmoothRadialFunction(inv)


def gradient_sandwich_theta2(
    f: SmoothRadialFunction, theta: float, r: float, form: str = "printed"
) -> float:
    """``delta_i(f) * f^-1 * delta_i(f)`` to order theta^2.

    ``form="printed"`` uses the twelve-term closed form; ``form="oracle"`` takes
    the theta^2 coefficient from :func:`sandwich_oracle` instead (requires a
    jet-capable ``f``).
    """
    _check_r(r)
    f0, f1, f2, f3 = f.derivatives(r, 3)
    if f0 == 0:
        raise ZeroDivisionError(f"f vanishes at r={r}")
    lead = f1**2 / f0
    if form == "printed":
        return lead + theta**2 * _sandwich_correction(f0, f1, f2, f3, r)
    if form == "oracle":
        coeffs = sandwich_oracle(f, r)
        return lead + theta**2 * coeffs[2].real
    raise ValueError(f"unknown form {form!r}")


# --- independent route: generic 2D Moyal expansion on Taylor jets ----------
#
# theta-graded quantities are lists [c0, c1, c2] of 2D jets, the coefficient
# of theta**k.  The product is
#   f*g = fg + (i theta/2)(f_1 g_2 - f_2 g_1)
#            - (theta^2/8)(f_11 g_22 - 2 f_12 g_12 + f_22 g_11) + O(theta^3).

_GRADE = 3


def _d(j: Jet, *axes) -> Jet:
    for a in axes:
        j = j.derivative(a)
    return j


def _graded_star(F, G):
    out = [None] * _GRADE
    for i, a in enumerate(F):
        for j, b in enumerate(G):
            terms = [(i + j, a * b)]
            if i + j + 1 < _GRADE:
                terms.append((i + j + 1, 0.5j * (_d(a, 0) * _d(b, 1) - _d(a, 1) * _d(b, 0))))
            if i + j + 2 < _GRADE:
                p2 = _d(a, 0, 0) * _d(b, 1, 1) - 2 * _d(a, 0, 1) * _d(b, 0, 1) + _d(a, 1, 1) * _d(b, 0, 0)
                terms.append((i + j + 2, -0.125 * p2))
            for k, t in terms:
                if k < _GRADE:
                    out[k] = t if out[k] is None else out[k] + t
    order = min(t.order for t in out)
    return [t.truncate(order) for t in out]


def _graded_inverse(F):
    g0 = F[0].reciprocal()
    G = [g0] + [g0 * 0.0 for _ in range(_GRADE - 1)]
    for k in range(1, _GRADE):
        prod = _graded_star(F, G)
        G = [t.truncate(prod[0].order) for t in G]
        G[k] = G[k] - prod[k] * G[0]
    return G


def _radial_jet_2d(f: SmoothRadialFunction, r: float, order: int) -> Jet:
    if not f.jet_capable:
        raise ValueError("the 2D oracle needs a jet-capable SmoothRadialFunction")
    x1 = Jet.variable(r, order, dims=2, axis=0)
    x2 = Jet.variable(0.0, order, dims=2, axis=1)
    rho = jets.sqrt(x1 * x1 + x2 * x2)
    out = f._func(rho)
    if not isinstance(out, Jet):
        out = Jet.constant(out, order, dims=2)
    return out


def _grade(j: Jet):
    return [j] + [j * 0.0 for _ in range(_GRADE - 1)]


def star_oracle(f: SmoothRadialFunction, g: SmoothRadialFunction, r: float, order: int = 4):
    """theta^0..theta^2 coefficients of ``f * g`` at ``(r, 0)`` from the 2D expansion."""
    _check_r(r)
    out = _graded_star(_grade(_radial_jet_2d(f, r, order)), _grade(_radial_jet_2d(g, r, order)))
    return [complex(t.value) for t in out]


def inverse_oracle(f: SmoothRadialFunction, r: float, order: int = 6):
    _check_r(r)
    out = _graded_inverse(_grade(_radial_jet_2d(f, r, order)))
    return [complex(t.value) for t in out]


def sandwich_oracle(f: SmoothRadialFunction, r: float, order: int = 9):
    """theta^0..theta^2 coefficients of ``sum_i delta_i f * f^-1 * delta_i f`` at ``(r, 0)``."""
    _check_r(r)
    F = _radial_jet_2d(f, r, order)
    Finv = _graded_inverse(_grade(F))
    total = None
    for axis in (0, 1):
        dF = _grade(F.derivative(axis))
        term = _graded_star(dF, _graded_star(Finv, dF))
        total = term if total is None else [a + b for a, b in zip(total, term)]
    return [complex(t.value) for t in total]


# --- the theta^2 correction of the Fubini-Study factor ----------------------


def regular_C2(eta: float) -> float:
    """Integration constant that removes the log singularity at r = 0."""
    return 2.0 * eta / 3.0


def epsilon_general(r, C1, C2, eta):
    """Closed-form general solution of the correction ODE (``r > 0``)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        if np.any(r == 0) and not math.isclose(C2, regular_C2(eta), rel_tol=1e-15, abs_tol=0):
            raise ZeroDivisionError("epsilon_general is log-singular at r = 0 unless C2 = 2 eta / 3")
        if np.any(r < 0):
            raise ValueError("radius must be non-negative")
    u = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(r)
        bracket = (1 - u * u) * np.log1p(u) + 2 * (u * u - 1) * L + u - 2
        val = C1 * (u - 1) + C2 * ((u - 1) * L - 2) - (eta / 3) * bracket / (1 + u)
    if np.any(r == 0):
        val = np.where(r == 0, epsilon_regular(0.0, C1, eta), val)
    return val[()] if val.ndim == 0 else val


def epsilon_general_derivatives(r, C1, C2, eta):
    """``(eps, eps', eps'')`` of :func:`epsilon_general`, differentiated by hand.

    Uses ``(1 - r^4)/(1 + r^2) = 1 - r^2`` so that
    ``eps = C1 (u-1) + D (u-1) log r - 2 C2 - (eta/3)[(1-u) log(1+u) + (u-2)/(1+u)]``
    with ``u = r^2`` and ``D = C2 - 2 eta/3``.
    """
    r = np.asarray(r, dtype=float)
    u = r * r
    L = np.log(r)
    P = np.log1p(u)
    D = C2 - regular_C2(eta)

    g0, g1, g2 = (u - 1) * L, 2 * r * L + r - 1 / r, 2 * L + 3 + 1 / u
    p0 = (1 - u) * P
    p1 = -2 * r * P + 2 * r * (1 - u) / (1 + u)
    p2 = -2 * P - 4 * u / (1 + u) + 2 * (1 - u) / (1 + u) - 8 * u / (1 + u) ** 2
    q0 = (u - 2) / (1 + u)
    q1 = 6 * r / (1 + u) ** 2
    q2 = 6 / (1 + u) ** 2 - 24 * u / (1 + u) ** 3

    e0 = C1 * (u - 1) + D * g0 - 2 * C2 - (eta / 3) * (p0 + q0)
    e1 = C1 * 2 * r + D * g1 - (eta / 3) * (p1 + q1)
    e2 = C1 * 2 + D * g2 - (eta / 3) * (p2 + q2)
    return e0, e1, e2


def epsilon_regular(r, C1, eta):
    """Regular solution (``C2 = 2 eta/3``), log terms cancelled; finite at r = 0.

    ``epsilon(0) = -C1 - 2 eta / 3``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    u = r * r
    val = C1 * (u - 1) - 4 * eta / 3 - (eta / 3) * ((1 - u) * np.log1p(u) + (u - 2) / (1 + u))
    return val[()] if val.ndim == 0 else val


def epsilon_regular_derivatives(r, C1, eta):
    r = np.asarray(r, dtype=float)
    u = r * r
    P = np.log1p(u)
    p1 = -2 * r * P + 2 * r * (1 - u) / (1 + u)
    p2 = -2 * P - 4 * u / (1 + u) + 2 * (1 - u) / (1 + u) - 8 * u / (1 + u) ** 2
    q1 = 6 * r / (1 + u) ** 2
    q2 = 6 / (1 + u) ** 2 - 24 * u / (1 + u) ** 3
    return epsilon_regular(r, C1, eta), C1 * 2 * r - (eta / 3) * (p1 + q1), 2 * C1 - (eta / 3) * (p2 + q2)


def epsilon_ode_source(eta, r):
    """Inhomogeneous term ``8 eta (1 - r^2) / (1 + r^2)^3``."""
    u = np.asarray(r, dtype=float) ** 2
    return 8 * eta * (1 - u) / (1 + u) ** 3


def epsilon_ode_residual(eps, eta, r):
    """``eps'' + (1/r - 4r/(1+r^2)) eps' + 4 eps/(1+r^2) + 8 eta (1-r^2)/(1+r^2)^3``.

    ``eps`` is a :class:`SmoothRadialFunction` or a tuple ``(eps, eps', eps'')``
    already evaluated at ``r``.  At ``r = 0`` the ``eps'/r`` term is replaced
    by its limit ``eps''(0)`` (smooth radial functions have ``eps'(0) = 0``).
    """
    if r < 0:
        raise ValueError("radius must be non-negative")
    e0, e1, e2 = eps.derivatives(r, 2) if isinstance(eps, SmoothRadialFunction) else eps
    u = r * r
    first = e2 if r == 0 else e1 / r
    return e2 + first - 4 * r * e1 / (1 + u) + 4 * e0 / (1 + u) + epsilon_ode_source(eta, r)


def linearised_source(eta, r, form="printed"):
    """Source term of the correction ODE rebuilt from the theta^2 expansions.

    Expanding ``Delta h - delta_i h * h^-1 * delta_i h = C h^-1`` with
    ``C = 4 eta^2`` around ``h_FS = eta(1+r^2)`` leaves
    ``-S2(h_FS) - C X(h_FS)`` at order theta^2, where ``S2`` and ``X`` are the
    theta^2 coefficients of the sandwich and of the inverse.
    """
    _check_r(r)
    hfs = SmoothRadialFunction(lambda x: eta * (1 + x * x))
    f0, f1, f2, f3 = hfs.derivatives(r, 3)
    if form == "printed":
        S2 = _sandwich_correction(f0, f1, f2, f3, r)
    else:
        S2 = sandwich_oracle(hfs, r)[2].real
    X = (_inverse_terms(f0, f1, f2, r, 1.0) - 1 / f0)
    return -S2 - 4 * eta**2 * X


def fubini_study_factor(r, eta):
    return 1.0 / (eta * (1 + np.asarray(r, dtype=float) ** 2))


def deformed_conformal_factor(r, params: PerturbativeParams):
    """``1 / (eta (1 + r^2) + theta^2 epsilon_regular(r))``."""
    r = np.asarray(r, dtype=float)
    denom = params.eta * (1 + r * r) + params.theta**2 * epsilon_regular(r, params.C1, params.eta)
    if np.any(denom <= 0):
        raise ValueError("h_FS + theta^2 epsilon is not positive on the grid; theta too large")
    val = 1.0 / denom
    return val[()] if val.ndim == 0 else val


def deformed_factor_table(r_grid, thetas, eta=0.5, C1=None) -> dict:
    """Columns of ``1/h`` for each theta on ``r_grid`` (defaults give epsilon(0) = 0)."""
    C1 = -regular_C2(eta) if C1 is None else C1
    r_grid = np.asarray(r_grid, dtype=float)
    table = {"r": r_grid}
    for th in thetas:
        table[f"factor_theta{th:g}"] = deformed_conformal_factor(r_grid, PerturbativeParams(eta, C1, th))
    return table
