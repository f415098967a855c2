"""Commutative reference geometry for radial conformal metrics on the plane.

A metric ``k(r)**2 (dx**2 + dy**2)`` with a radial factor ``k`` has scalar
curvature

    R(k) = 2 k**-4 (k'**2 - k k' / r - k k'')

and the family ``k(r) = A r**(a-1) / (b + r**(2a))`` has constant curvature
``8 a**2 b / A**2``.  The Gauss-Bonnet integral telescopes to a difference of
boundary values of ``-r k'/k``.  Everything here is the classical oracle the
noncommutative computations are compared against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from scipy import integrate

__all__ = [
    "ClassicalFactorParams",
    "RadialProfile",
    "family_factor",
    "family_profile",
    "scalar_curvature_radial",
    "family_curvature",
    "family_volume",
    "family_gauss_bonnet",
    "boundary_term",
    "family_boundary_limits",
    "gauss_bonnet_quadrature",
    "gauss_bonnet_density_integral",
    "constant_curvature_residual",
    "ConvergenceWarning",
]

#: radius used in place of the r -> 0+ limit of boundary terms
R_ORIGIN = 1e-6


class ConvergenceWarning(UserWarning):
    """Raised (as a warning) when a truncated integral has not settled."""


@dataclass(frozen=True)
class ClassicalFactorParams:
    """Parameters (A, a, b) of ``k(r) = A r**(a-1) / (b + r**(2a))``."""

    A: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ValueError(f"A must be positive, got {self.A!r}")
        if not (self.a >= 1 and math.isfinite(self.a)):
            raise ValueError(f"a must be >= 1, got {self.a!r}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"b must be positive, got {self.b!r}")


@dataclass(frozen=True)
class RadialProfile:
    """A radial conformal factor ``r -> k(r)`` with optional derivatives.

    When ``dk``/``d2k`` are missing, derivatives are taken by central
    differences with one Richardson step (see :func:`_derivatives`).
    """

    k: Callable[[float], float]
    dk: Optional[Callable[[float], float]] = None
    d2k: Optional[Callable[[float], float]] = None

    def __call__(self, r: float) -> float:
        return self.k(r)

    @classmethod
    def constant(cls, value: float = 1.0) -> "RadialProfile":
        return cls(lambda r: value, lambda r: 0.0, lambda r: 0.0)

    def without_derivatives(self) -> "RadialProfile":
        return RadialProfile(self.k)


def _check_radius(r: float) -> None:
    if not r > 0 or not math.isfinite(r):
        raise ValueError(f"radius must be positive and finite, got {r!r}")


def family_factor(p: ClassicalFactorParams, r: float) -> float:
    """``A r**(a-1) / (b + r**(2a))``."""
    _check_radius(r)
    return p.A * r ** (p.a - 1) / (p.b + r ** (2 * p.a))


def _family_dk(p: ClassicalFactorParams, r: float) -> float:
    A, a, b = p.A, p.a, p.b
    D = b + r ** (2 * a)
    return A * ((a - 1) * r ** (a - 2) * D - 2 * a * r ** (3 * a - 2)) / D**2


def _family_d2k(p: ClassicalFactorParams, r: float) -> float:
    # k = A N / D with N = r^(a-1), D = b + r^(2a)
    A, a, b = p.A, p.a, p.b
    N = r ** (a - 1)
    N1 = (a - 1) * r ** (a - 2)
    N2 = (a - 1) * (a - 2) * r ** (a - 3)
    D = b + r ** (2 * a)
    D1 = 2 * a * r ** (2 * a - 1)
    D2 = 2 * a * (2 * a - 1) * r ** (2 * a - 2)
    return A * (N2 / D - 2 * N1 * D1 / D**2 - N * D2 / D**2 + 2 * N * D1**2 / D**3)


def family_profile(p: ClassicalFactorParams) -> RadialProfile:
    """The family member as a :class:`RadialProfile` with analytic derivatives."""
    return RadialProfile(
        lambda r: family_factor(p, r),
        lambda r: _family_dk(p, r),
        lambda r: _family_d2k(p, r),
    )


def _derivatives(k: RadialProfile, r: float) -> tuple[float, float, float]:
    k0 = k.k(r)
    if k.dk is not None and k.d2k is not None:
        return k0, k.dk(r), k.d2k(r)

    h = 1e-5 * (1 + r)
    # keep the stencil inside (0, inf)
    h = min(h, r / 4)

    def central(step):
        kp, km = k.k(r + step), k.k(r - step)
        return (kp - km) / (2 * step), (kp - 2 * k0 + km) / step**2

    d1_h, d2_h = central(h)
    d1_2h, d2_2h = central(2 * h)
    d1 = (4 * d1_h - d1_2h) / 3
    d2 = (4 * d2_h - d2_2h) / 3
    if k.dk is not None:
        d1 = k.dk(r)
    if k.d2k is not None:
        d2 = k.d2k(r)
    return k0, d1, d2


def scalar_curvature_radial(k: RadialProfile, r: float) -> float:
    """Scalar curvature of ``k(r)**2 (dx**2 + dy**2)`` at radius ``r``."""
    _check_radius(r)
    k0, k1, k2 = _derivatives(k, r)
    if not k0 > 0:
        raise ValueError(f"conformal factor must be positive, k({r})={k0}")
    return 2.0 * (k1 * k1 - k0 * k1 / r - k0 * k2) / k0**4


def family_curvature(p: ClassicalFactorParams) -> float:
    return 8 * p.a**2 * p.b / p.A**2


def family_volume(p: ClassicalFactorParams) -> float:
    return math.pi * p.A**2 / (p.b * p.a)


def family_gauss_bonnet(p: ClassicalFactorParams) -> float:
    return 8 * math.pi * p.a


def boundary_term(k: RadialProfile, r: float) -> float:
    """``-r k'(r) / k(r)``, the antiderivative of the Gauss-Bonnet density / 4 pi."""
    _check_radius(r)
    k0, k1, _ = _derivatives(k, r) if k.dk is None else (k.k(r), k.dk(r), None)
    return -r * k1 / k0


def family_boundary_limits(p: ClassicalFactorParams) -> tuple[float, float]:
    """Exact limits of ``-r k'/k`` at r -> 0+ and r -> infinity."""
    return -(p.a - 1), p.a + 1


def gauss_bonnet_quadrature(
    k: RadialProfile,
    r_max: float,
    r_min: float = R_ORIGIN,
    rtol: float = 1e-3,
    warn: bool = True,
) -> float:
    """Gauss-Bonnet integral ``int sqrt(g) R`` truncated to ``[r_min, r_max]``.

    The density is an exact derivative, so the integral is the difference of
    boundary values of ``-r k'/k``.  The value at ``2 r_max`` is also computed;
    if it differs by more than ``rtol`` (relative) a
    :class:`ConvergenceWarning` is emitted.
    """
    _check_radius(r_max)
    inner = boundary_term(k, r_min)
    value = 4 * math.pi * (boundary_term(k, r_max) - inner)
    if warn:
        doubled = 4 * math.pi * (boundary_term(k, 2 * r_max) - inner)
        scale = max(abs(value), abs(doubled), 1e-300)
        if abs(doubled - value) > rtol * scale:
            warnings.warn(
                f"Gauss-Bonnet boundary term not converged at r_max={r_max:g}: "
                f"{value:.6g} vs {doubled:.6g} at 2*r_max",
                ConvergenceWarning,
                stacklevel=2,
            )
    return value


def gauss_bonnet_density_integral(
    k: RadialProfile, r_max: float, r_min: float = R_ORIGIN
) -> float:
    """Direct quadrature of ``2 pi r k**2 R(k)`` over ``[r_min, r_max]``.

    Independent of the telescoped form; slower and less accurate.
    """

    def density(r):
        return 2 * math.pi * r * k.k(r) ** 2 * scalar_curvature_radial(k, r)

    # split on a log grid, the density is concentrated near r ~ 1
    edges = [r_min]
    e = max(r_min, 1e-3)
    while e * 10 < r_max:
        e *= 10
        edges.append(e)
    edges.append(r_max)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(density, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-10)
        total += val
    return total


def constant_curvature_residual(k: RadialProfile, C: float, r: float) -> float:
    """Residual of the constant-curvature ODE for scalar curvature ``C``.

    Returns ``k k'' + k k'/r - k'**2 + (C/2) k**4``, which vanishes exactly
    when ``scalar_curvature_radial(k, r) == C``.
    """
    _check_radius(r)
    k0, k1, k2 = _derivatives(k, r)
    return k0 * k2 + k0 * k1 / r - k1 * k1 + 0.5 * C * k0**4
