"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` holds the Taylor coefficients of a function at a point, in one
or more variables, truncated at total degree ``order``.  Arithmetic and the
elementary functions below act on jets exactly up to that degree, so writing a
formula once with ``+ - * /`` gives its derivatives for free.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import convolve

__all__ = ["Jet", "exp", "log", "sqrt", "derivatives"]


def _degree_mask(order, dims):
    grids = np.indices((order + 1,) * dims)
    return grids.sum(axis=0) <= order


class Jet:
    """Taylor coefficients ``c[i, j, ...]`` of ``x0**i x1**j ...`` up to total degree ``order``."""

    __array_priority__ = 1000

    def __init__(self, coeffs, order=None):
        c = np.asarray(coeffs)
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        if order is None:
            order = c.shape[0] - 1
        if any(s != order + 1 for s in c.shape):
            raise ValueError("jet coefficient array must be a hypercube of side order+1")
        self.c = np.where(_degree_mask(order, c.ndim), c, 0)
        self.order = order

    @property
    def dims(self):
        return self.c.ndim

    @classmethod
    def constant(cls, value, order, dims=1):
        c = np.zeros((order + 1,) * dims, dtype=np.result_type(value, float))
        c[(0,) * dims] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, order, dims=1, axis=0):
        jet = cls.constant(value, order, dims)
        if order >= 1:
            idx = [0] * dims
            idx[axis] = 1
            jet.c[tuple(idx)] = 1.0
        return jet

    @property
    def value(self):
        return self.c[(0,) * self.dims][()]

    def derivative(self, axis=0):
        """Jet of the partial derivative along ``axis`` (one order lower)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        c = np.moveaxis(self.c, axis, 0)[1:]
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.dims - 1))
        c = np.moveaxis(c * k, 0, axis)
        sl = tuple(slice(0, self.order) for _ in range(self.dims))
        return Jet(c[sl], self.order - 1)

    def derivatives(self, axis=0):
        """Plain derivatives ``f, f', f'', ...`` of a univariate jet."""
        if self.dims != 1:
            raise ValueError("derivatives() is for univariate jets")
        return [self.c[k] * math.factorial(k) for k in range(self.order + 1)]

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dims != self.dims:
                raise ValueError("jets over different numbers of variables")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, Jet.constant(other, self.order, self.dims)

    def truncate(self, order):
        if order == self.order:
            return self
        sl = tuple(slice(0, order + 1) for _ in range(self.dims))
        return Jet(self.c[sl], order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c + b.c, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.c - b.c, a.order)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other, self.order)
        a, b = self._coerce(other)
        full = convolve(a.c, b.c, method="direct")
        sl = tuple(slice(0, a.order + 1) for _ in range(a.dims))
        return Jet(full[sl], a.order)

    __rmul__ = __mul__

    def _series(self, coeffs):
        """``sum_k coeffs[k] h**k`` with ``h`` the nilpotent part of ``self``."""
        h = self - self.value
        out = Jet.constant(coeffs[0], self.order, self.dims)
        power = Jet.constant(1.0, self.order, self.dims)
        for k in range(1, self.order + 1):
            power = power * h
            out = out + power * coeffs[k]
        return out

    def reciprocal(self):
        a0 = self.value
        if a0 == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero constant term")
        return self._series([(-1) ** k / a0 ** (k + 1) for k in range(self.order + 1)])

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / other, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return Jet.constant(1.0, self.order, self.dims)
            if p < 0:
                return self.reciprocal() ** (-p)
            out = self
            for _ in range(p - 1):
                out = out * self
            return out
        a0 = self.value
        # generalised binomial series of (a0 + h)**p
        coeffs, binom = [], 1.0
        for k in range(self.order + 1):
            coeffs.append(binom * a0 ** (p - k))
            binom *= (p - k) / (k + 1)
        return self._series(coeffs)

    def __repr__(self):
        return f"Jet(order={self.order}, dims={self.dims}, value={self.value!r})"


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e0 = np.exp(x.value)
    return x._series([e0 / math.factorial(k) for k in range(x.order + 1)])


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    a0 = x.value
    coeffs = [np.log(a0)] + [(-1) ** (k + 1) / (k * a0**k) for k in range(1, x.order + 1)]
    return x._series(coeffs)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return x**0.5


def derivatives(func, r, order):
    """``[f(r), f'(r), ..., f^(order)(r)]`` for a jet-compatible ``func``."""
    out = func(Jet.variable(r, order))
    if not isinstance(out, Jet):  # constant function
        return [out] + [0.0] * order
    return out.derivatives()
