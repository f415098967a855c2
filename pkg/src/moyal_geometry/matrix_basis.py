"""Truncated matrix-basis model of the Moyal plane.

Elements are expanded as ``sum_{m,n} a_{mn} f_{m,n}`` where the basis
functions obey ``f_{m,n} * f_{k,l} = delta_{kn} f_{m,l}``, so the star product
is matrix multiplication of coefficient arrays and the trace is
``2 pi theta * sum_n a_{nn}``.  Only an N x N block is stored.

Truncation bookkeeping
----------------------
Every :class:`MatrixOperator` carries ``clean``: entries ``(m, n)`` with
``m, n < clean`` agree with the untruncated element.  ``finite`` marks elements
whose coefficients outside the stored block are known to vanish (basis
elements and their products).  Derivations lose one index of ``clean``;
products of banded operators lose the smaller of the two bandwidths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate
from scipy.special import eval_laguerre, gammaln

__all__ = [
    "CapacityError",
    "TruncationError",
    "MatrixOperator",
    "RadialOperator",
    "basis_eval",
    "star_product",
    "trace",
    "partial",
    "partial_bar",
    "delta",
    "laplacian",
    "gradient_sandwich",
    "radial_power_coefficients",
    "fubini_study_inverse_coefficients",
    "radial_coefficient_by_quadrature",
    "frame_scalar_curvature",
    "operator_to_json",
    "operator_from_json",
    "save_operator",
    "load_operator",
]


class CapacityError(OverflowError):
    """A basis value is outside the floating point range."""


class TruncationError(ValueError):
    """Operands live on incompatible truncations (dimension or theta)."""


def _band(coeff: np.ndarray) -> int:
    rows, cols = np.nonzero(coeff)
    if rows.size == 0:
        return 0
    return int(np.max(np.abs(rows - cols)))


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Truncated Moyal element: ``coeff[m, n]`` multiplies ``f_{m,n}``."""

    theta: float
    coeff: np.ndarray
    clean: int = -1
    finite: bool = False

    def __post_init__(self):
        c = np.array(self.coeff, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficients must be a square array, got shape {c.shape}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)
        clean = c.shape[0] if self.clean < 0 else min(self.clean, c.shape[0])
        object.__setattr__(self, "clean", max(clean, 0))

    @property
    def dim(self) -> int:
        return self.coeff.shape[0]

    @property
    def band(self) -> int:
        return _band(self.coeff)

    @property
    def interior(self) -> slice:
        return slice(0, self.clean)

    @classmethod
    def zeros(cls, theta, dim) -> "MatrixOperator":
        return cls(theta, np.zeros((dim, dim)), finite=True)

    @classmethod
    def identity(cls, theta, dim) -> "MatrixOperator":
        """Truncation of the unit ``sum_n f_{n,n}``."""
        return cls(theta, np.eye(dim), finite=False)

    @classmethod
    def basis_element(cls, m, n, theta, dim) -> "MatrixOperator":
        if not (0 <= m < dim and 0 <= n < dim):
            raise IndexError(f"f_({m},{n}) does not fit in dimension {dim}")
        c = np.zeros((dim, dim))
        c[m, n] = 1.0
        return cls(theta, c, finite=True)

    def adjoint(self) -> "MatrixOperator":
        return MatrixOperator(self.theta, self.coeff.conj().T, self.clean, self.finite)

    def is_self_adjoint(self, atol=1e-12, interior_only=True) -> bool:
        c = self.coeff[: self.clean, : self.clean] if interior_only else self.coeff
        return bool(np.allclose(c, c.conj().T, atol=atol, rtol=0))

    def _compatible(self, other: "MatrixOperator") -> None:
        if self.dim != other.dim:
            raise TruncationError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if not math.isclose(self.theta, other.theta, rel_tol=1e-14):
            raise TruncationError(f"theta mismatch: {self.theta} vs {other.theta}")

    def __add__(self, other):
        other = as_matrix(other)
        self._compatible(other)
        return MatrixOperator(
            self.theta,
            self.coeff + other.coeff,
            min(self.clean, other.clean),
            self.finite and other.finite,
        )

    def __neg__(self):
        return MatrixOperator(self.theta, -self.coeff, self.clean, self.finite)

    def __sub__(self, other):
        return self + (-as_matrix(other))

    def __mul__(self, scalar):
        if isinstance(scalar, (MatrixOperator, RadialOperator)):
            return NotImplemented
        return MatrixOperator(self.theta, scalar * self.coeff, self.clean, self.finite)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return star_product(self, other)


@dataclass(frozen=True, eq=False)
class RadialOperator:
    """Diagonal element ``h = sum_n phi[n] f_{n,n}``.

    The f_{n,n} are orthogonal rank-one projections, so functions of ``h``
    act entrywise on ``phi``; positivity of ``h`` is positivity of ``phi``.
    """

    theta: float
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        p = np.array(self.phi, dtype=float)
        if p.ndim != 1:
            raise ValueError("phi must be one-dimensional")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")
        p.setflags(write=False)
        object.__setattr__(self, "phi", p)

    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    @classmethod
    def unit(cls, theta, dim) -> "RadialOperator":
        return cls(theta, np.ones(dim))

    def is_positive(self) -> bool:
        return bool(np.all(self.phi > 0))

    def apply(self, func) -> "RadialOperator":
        """``F(h) = sum F(phi_n) f_{n,n}``."""
        return RadialOperator(self.theta, func(self.phi))

    def inverse(self) -> "RadialOperator":
        if not np.all(self.phi != 0):
            raise ZeroDivisionError("radial operator has a zero coefficient")
        return RadialOperator(self.theta, 1.0 / self.phi)

    def to_matrix(self) -> MatrixOperator:
        return MatrixOperator(self.theta, np.diag(self.phi), finite=False)


Operator = Union[MatrixOperator, RadialOperator]


def as_matrix(A: Operator) -> MatrixOperator:
    if isinstance(A, RadialOperator):
        return A.to_matrix()
    if isinstance(A, MatrixOperator):
        return A
    raise TypeError(f"expected a Moyal operator, got {type(A).__name__}")


# --- basis functions -------------------------------------------------------


def _log_laguerre(m: int, alpha: int, x: np.ndarray):
    """Sign and log|L_m^alpha(x)| by the upward three-term recurrence.

    The running pair is renormalised whenever it grows large so m ~ 1e4 works.
    """
    x = np.asarray(x, dtype=float)
    logscale = np.zeros_like(x)
    prev = np.ones_like(x)
    if m == 0:
        return np.ones_like(x), logscale
    cur = 1.0 + alpha - x
    for k in range(1, m):
        nxt = ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            cur = cur / s
            prev = prev / s
            logscale = logscale + np.log(s)
    with np.errstate(divide="ignore"):
        return np.sign(cur), np.log(np.abs(cur)) + logscale


def basis_eval(m: int, n: int, theta: float, r, angle=0.0):
    """Value of ``f_{m,n}`` at polar coordinates ``(r, angle)``.

    Vectorised over ``r`` and ``angle``.  Raises :class:`CapacityError` when
    the value does not fit in a double.
    """
    if m < 0 or n < 0:
        raise ValueError("basis indices must be non-negative")
    if not theta > 0:
        raise ValueError("theta must be positive")
    if n < m:
        return np.conj(basis_eval(n, m, theta, r, angle))
    r = np.asarray(r, dtype=float)
    angle = np.asarray(angle, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    alpha = n - m
    x = 2.0 * r * r / theta
    sign, log_lag = _log_laguerre(m, alpha, x)
    with np.errstate(divide="ignore"):
        log_power = alpha * np.log(np.sqrt(2.0 / theta) * r) if alpha else 0.0
    log_mag = math.log(2.0) + 0.5 * (gammaln(m + 1) - gammaln(n + 1)) + log_power + log_lag - r * r / theta
    if np.any(log_mag > 709.0):
        raise CapacityError(f"f_({m},{n}) overflows at the requested radius")
    mag = np.exp(log_mag)
    phase = np.exp(1j * angle * (m - n))
    val = (-1.0) ** m * sign * mag * phase
    if alpha == 0:
        val = val.real
    return val[()] if np.ndim(val) == 0 else val


# --- algebra ---------------------------------------------------------------


def star_product(A: Operator, B: Operator) -> Operator:
    """Moyal product; on coefficients this is the matrix product."""
    if isinstance(A, RadialOperator) and isinstance(B, RadialOperator):
        if A.dim != B.dim or not math.isclose(A.theta, B.theta, rel_tol=1e-14):
            raise TruncationError("radial operands must share theta and length")
        return RadialOperator(A.theta, A.phi * B.phi)
    A, B = as_matrix(A), as_matrix(B)
    A._compatible(B)
    coeff = A.coeff @ B.coeff
    if A.finite and B.finite:
        return MatrixOperator(A.theta, coeff, finite=True)
    big = A.dim + 1
    ca = big if A.finite else A.clean
    cb = big if B.finite else B.clean
    clean = min(ca, cb) - min(A.band, B.band)
    return MatrixOperator(A.theta, coeff, clean=max(min(clean, A.dim), 0))


def trace(A: Operator) -> complex:
    """``tau(A) = 2 pi theta * sum_n a_nn``."""
    if isinstance(A, RadialOperator):
        return 2 * math.pi * A.theta * float(np.sum(A.phi))
    A = as_matrix(A)
    return 2 * math.pi * A.theta * complex(np.trace(A.coeff))


def _derived(A: MatrixOperator, coeff: np.ndarray) -> MatrixOperator:
    return MatrixOperator(A.theta, coeff, clean=max(A.clean - 1, 0), finite=False)


def partial(A: Operator) -> MatrixOperator:
    """``(dA)(m,n) = sqrt((n+1)/th) A(m,n+1) - sqrt(m/th) A(m-1,n)``."""
    A = as_matrix(A)
    c, th = A.coeff, A.theta
    N = A.dim
    out = np.zeros_like(c)
    idx = np.arange(N)
    out[:, :-1] += c[:, 1:] * np.sqrt((idx[:-1] + 1) / th)[None, :]
    out[1:, :] -= c[:-1, :] * np.sqrt(idx[1:] / th)[:, None]
    return _derived(A, out)


def partial_bar(A: Operator) -> MatrixOperator:
    """``(dbar A)(m,n) = sqrt((m+1)/th) A(m+1,n) - sqrt(n/th) A(m,n-1)``."""
    A = as_matrix(A)
    c, th = A.coeff, A.theta
    N = A.dim
    out = np.zeros_like(c)
    idx = np.arange(N)
    out[:-1, :] += c[1:, :] * np.sqrt((idx[:-1] + 1) / th)[:, None]
    out[:, 1:] -= c[:, :-1] * np.sqrt(idx[1:] / th)[None, :]
    return _derived(A, out)


def delta(A: Operator, i: int) -> MatrixOperator:
    """Cartesian derivations: ``delta_1 = (d + dbar)/sqrt2``, ``delta_2 = i(d - dbar)/sqrt2``."""
    d, db = partial(A), partial_bar(A)
    if i == 1:
        return (d + db) * (1 / math.sqrt(2))
    if i == 2:
        return (d - db) * (1j / math.sqrt(2))
    raise ValueError("derivation index must be 1 or 2")


def laplacian(A: Operator) -> MatrixOperator:
    """Flat Laplacian ``delta_1**2 + delta_2**2`` in coefficient form."""
    A = as_matrix(A)
    c, th = A.coeff, A.theta
    N = A.dim
    m = np.arange(N)[:, None]
    n = np.arange(N)[None, :]
    out = -(m + n + 1) * c
    out[1:, 1:] += np.sqrt(m[1:] * n[:, 1:]) * c[:-1, :-1]
    out[:-1, :-1] += np.sqrt((m[:-1] + 1) * (n[:, :-1] + 1)) * c[1:, 1:]
    return _derived(A, (2.0 / th) * out)


def gradient_sandwich(h: Operator, X: Operator) -> MatrixOperator:
    """``delta_i(h) * X * delta_i(h)`` summed over i, via ``dh X dbar h + dbar h X dh``."""
    dh, dbh = partial(h), partial_bar(h)
    X = as_matrix(X)
    return star_product(star_product(dh, X), dbh) + star_product(star_product(dbh, X), dh)


def frame_scalar_curvature(h: RadialOperator, normalization: str = "equation") -> MatrixOperator:
    """Curvature of the conformally rescaled frames ``e_i = h delta_i``.

    ``normalization="geometric"`` returns
    ``2 h^2 * (Delta h - delta_i h * h^-1 * delta_i h) * h^-1``, whose classical
    limit is the scalar curvature of the metric ``h^-2 (dx^2 + dy^2)``.
    ``normalization="equation"`` (default) returns half of that, the constant
    ``C`` in ``Delta h - delta_i h * h^-1 * delta_i h = C h^-1``; for a
    recurrence solution with parameter R this is ``R / theta``.

    The result's ``clean`` attribute bounds the truncation-exact block.
    """
    if normalization not in ("equation", "geometric"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if not isinstance(h, RadialOperator):
        raise TypeError("frame_scalar_curvature expects a RadialOperator")
    if not h.is_positive():
        raise ValueError("h must be positive (all phi_n > 0) to be invertible")
    H = h.to_matrix()
    Hinv = h.inverse().to_matrix()
    H2 = h.apply(np.square).to_matrix()
    inner = laplacian(H) - gradient_sandwich(H, Hinv)
    curv = star_product(star_product(H2, inner), Hinv)
    if normalization == "geometric":
        curv = curv * 2.0
    return curv


# --- radial expansions -----------------------------------------------------


def radial_power_coefficients(a_exp: float, N: int, theta: float, normalization: str = "exact") -> np.ndarray:
    """Coefficients ``c_n`` of ``r**a_exp = sum_n c_n f_{n,n}``.

    ``c_n = theta**(a/2) Gamma(1 + a/2) 2F1(-n, -a/2; 1; 2)``.  The Gamma
    factor equals 1 for ``a = 0, 2`` only; ``normalization="printed"`` drops
    it, which reproduces the often quoted form without it.  The 2F1 values
    come from the contiguous relation ``(n+1) F_{n+1} = (a+1) F_n + n F_{n-1}``,
    forward-stable for the growing solution.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if normalization not in ("exact", "printed"):
        raise ValueError(f"unknown normalization {normalization!r}")
    F = np.empty(N)
    F[0] = 1.0
    if N > 1:
        F[1] = 1.0 + a_exp  # 1 + (-1)(-a/2)*2
    for n in range(1, N - 1):
        F[n + 1] = ((a_exp + 1) * F[n] + n * F[n - 1]) / (n + 1)
    scale = theta ** (a_exp / 2)
    if normalization == "exact":
        scale *= math.gamma(1 + a_exp / 2)
    return scale * F


def fubini_study_inverse_coefficients(A: float, b: float, N: int, theta: float) -> np.ndarray:
    """Coefficients of ``(b + r**2) / A``: ``(2 theta n + b + theta) / A``."""
    c0 = radial_power_coefficients(0.0, N, theta)
    c2 = radial_power_coefficients(2.0, N, theta)
    return (b * c0 + c2) / A


def radial_coefficient_by_quadrature(func, n: int, theta: float) -> float:
    """``(1/theta) int_0^inf r func(r) f_{n,n}(r) dr`` by adaptive quadrature.

    By the trace property this is the ``f_{n,n}`` coefficient of a radial
    function.  Integrates in ``x = 2 r**2 / theta`` where
    ``f_{n,n} = 2 (-1)**n L_n(x) exp(-x/2)``.
    """
    sign = -1.0 if n % 2 else 1.0

    def integrand(x):
        r = math.sqrt(theta * x / 2)
        return 0.5 * sign * func(r) * eval_laguerre(n, x) * math.exp(-x / 2)

    # L_n has its n zeros below 4n + 2
    brk = 4.0 * n + 40.0
    pts = np.linspace(0.0, brk, max(8, n + 2))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    total += integrate.quad(integrand, brk, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return total


# --- serialisation ---------------------------------------------------------


def operator_to_json(op: Operator) -> dict:
    """Plain-dict form; coefficients row-major as ``[real, imag]`` pairs."""
    if isinstance(op, RadialOperator):
        return {"kind": "radial", "theta": op.theta, "dim": op.dim, "phi": op.phi.tolist()}
    c = op.coeff.ravel()
    return {
        "kind": "matrix",
        "theta": op.theta,
        "dim": op.dim,
        "clean": op.clean,
        "finite": op.finite,
        "coeff": [[float(z.real), float(z.imag)] for z in c],
    }


def operator_from_json(data: dict) -> Operator:
    kind = data.get("kind", "matrix")
    if kind == "radial":
        phi = data["phi"]
        if len(phi) != data["dim"]:
            raise ValueError("phi length does not match dim")
        return RadialOperator(float(data["theta"]), phi)
    N = int(data["dim"])
    pairs = np.asarray(data["coeff"], dtype=float)
    if pairs.shape != (N * N, 2):
        raise ValueError(f"expected {N * N} [re, im] pairs, got shape {pairs.shape}")
    coeff = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(N, N)
    return MatrixOperator(
        float(data["theta"]), coeff, int(data.get("clean", N)), bool(data.get("finite", False))
    )


def save_operator(op: Operator, path) -> None:
    Path(path).write_text(json.dumps(operator_to_json(op)))


def load_operator(path) -> Operator:
    return operator_from_json(json.loads(Path(path).read_text()))
