"""Truncated bivariate Taylor arithmetic (forward-mode differentiation to any order).

A :class:`Jet` stores the coefficients ``c[a, b] = d^a_t d^b_s f / (a! b!)`` of
a function of two parameters (t, s) at a batch of base points, truncated at
total degree ``order``.  Closed-form surface expressions written with the
functions in this module (``sin``, ``exp``, ``jacobi``, ...) therefore evaluate
either to plain arrays or, when fed jets, to exact derivatives up to ``order``.
"""

from __future__ import annotations

import math

import numpy as np

from . import special


class Jet:
    __slots__ = ("c", "order")
    __array_ufunc__ = None  # make numpy defer to the reflected operators below

    def __init__(self, c, order: int):
        self.c = c
        self.order = order

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1, order + 1) + value.shape)
        c[0, 0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, order: int, axis: int) -> "Jet":
        jet = cls.constant(value, order)
        if order >= 1:
            jet.c[(1, 0) if axis == 0 else (0, 1)] = 1.0
        return jet

    # access -----------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.c[0, 0]

    @property
    def batch_shape(self):
        return self.c.shape[2:]

    def partial(self, a: int, b: int) -> np.ndarray:
        """The mixed partial derivative d^a_t d^b_s at the base points."""
        if a + b > self.order:
            raise ValueError(f"partial of total order {a + b} exceeds jet order {self.order}")
        return math.factorial(a) * math.factorial(b) * self.c[a, b]

    def derivative(self, axis: int) -> "Jet":
        """Jet of d/dt (axis 0) or d/ds (axis 1); the order drops by one."""
        n = self.order - 1
        if n < 0:
            raise ValueError("cannot differentiate an order-0 jet")
        c = np.zeros((n + 1, n + 1) + self.batch_shape)
        for a in range(n + 1):
            for b in range(n + 1 - a):
                if axis == 0:
                    c[a, b] = (a + 1) * self.c[a + 1, b]
                else:
                    c[a, b] = (b + 1) * self.c[a, b + 1]
        return Jet(c, n)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        c = self.c[: order + 1, : order + 1].copy()
        for a in range(order + 1):
            c[a, order + 1 - a :] = 0.0
        return Jet(c, order)

    # arithmetic -------------------------------------------------------------
    def _coeffs(self, ndim: int):
        """Coefficient array with the batch padded on the left to ``ndim`` axes."""
        pad = ndim - (self.c.ndim - 2)
        if pad <= 0:
            return self.c
        return self.c.reshape(self.c.shape[:2] + (1,) * pad + self.c.shape[2:])

    def _check(self, other: "Jet"):
        if other.order != self.order:
            raise ValueError("jets of different order")

    def _add_scalar(self, other, sign: float) -> "Jet":
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.batch_shape, other.shape)
        c = np.array(np.broadcast_to(self._coeffs(len(shape)), self.c.shape[:2] + shape))
        c *= sign
        c[0, 0] += other
        return Jet(c, self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return self._add_scalar(other, 1.0)
        self._check(other)
        nd = max(len(self.batch_shape), len(other.batch_shape))
        return Jet(self._coeffs(nd) + other._coeffs(nd), self.order)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return self._add_scalar(-np.asarray(other, dtype=float), 1.0)
        return self + (-other)

    def __rsub__(self, other):
        return self._add_scalar(other, -1.0)

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            nd = max(len(self.batch_shape), other.ndim)
            return Jet(self._coeffs(nd) * other, self.order)
        self._check(other)
        n = self.order
        nd = max(len(self.batch_shape), len(other.batch_shape))
        shape = (n + 1, n + 1) + np.broadcast_shapes(self.batch_shape, other.batch_shape)
        out = np.zeros(shape)
        x, y = self._coeffs(nd), other._coeffs(nd)
        for a in range(n + 1):
            for b in range(n + 1 - a):
                acc = 0.0
                for a1 in range(a + 1):
                    for b1 in range(b + 1):
                        acc = acc + x[a1, b1] * y[a - a1, b - b1]
                out[a, b] = acc
        return Jet(out, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)) and k >= 0:
            out = Jet.constant(np.ones(self.batch_shape), self.order)
            for _ in range(int(k)):
                out = out * self
            return out
        return power(self, float(k))

    def reciprocal(self) -> "Jet":
        return power(self, -1.0)

    def compose(self, coeffs) -> "Jet":
        """f(self) given the univariate Taylor coefficients of f about self.value."""
        delta = Jet(self.c.copy(), self.order)
        delta.c[0, 0] = 0.0
        out = Jet.constant(coeffs[self.order], self.order)
        for k in range(self.order - 1, -1, -1):
            out = out * delta + coeffs[k]
        return out


def variables(t, s, order: int):
    """Seed jets for the two parameters at base points (t, s)."""
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    return Jet.variable(t, order, 0), Jet.variable(s, order, 1)


# univariate series --------------------------------------------------------------


def _series(x0, order, derivs):
    """Coefficients f^(k)(x0)/k! from a callable k -> f^(k)(x0)."""
    return [derivs(k) / math.factorial(k) for k in range(order + 1)]


def _dispatch(x, numpy_fn, coeff_fn):
    if isinstance(x, Jet):
        return x.compose(coeff_fn(x.value, x.order))
    return numpy_fn(x)


def sin(x):
    return _dispatch(
        x, np.sin, lambda v, n: _series(v, n, lambda k: (np.sin, np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u))[k % 4](v))
    )


def cos(x):
    return _dispatch(
        x, np.cos, lambda v, n: _series(v, n, lambda k: (np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u), np.sin)[k % 4](v))
    )


def exp(x):
    return _dispatch(x, np.exp, lambda v, n: _series(v, n, lambda k: np.exp(v)))


def log(x):
    def coeffs(v, n):
        return [np.log(v)] + [(-1.0) ** (k + 1) / (k * v**k) for k in range(1, n + 1)]

    return _dispatch(x, np.log, coeffs)


def power(x, alpha: float):
    def coeffs(v, n):
        out, binom = [], 1.0
        for k in range(n + 1):
            out.append(binom * v ** (alpha - k))
            binom *= (alpha - k) / (k + 1)
        return out

    return _dispatch(x, lambda u: np.power(u, alpha), coeffs)


def sqrt(x):
    return power(x, 0.5)


def atanh(x):
    def coeffs(v, n):
        return [np.arctanh(v)] + [
            0.5 * (1.0 / (k * (1.0 - v) ** k) + (-1.0) ** (k + 1) / (k * (1.0 + v) ** k)) for k in range(1, n + 1)
        ]

    return _dispatch(x, np.arctanh, coeffs)


def sinh(x):
    return 0.5 * (exp(x) - exp(-x))


def cosh(x):
    return 0.5 * (exp(x) + exp(-x))


def tanh(x):
    if isinstance(x, Jet):
        e = exp(2.0 * x)
        return (e - 1.0) / (e + 1.0)
    return np.tanh(x)


def jacobi(x, p):
    """(sn, cn, dn) of ``x`` with modulus ``p``, for arrays or jets."""
    if isinstance(x, Jet):
        s, c, d = special.jacobi_series(x.value, p, x.order)
        return x.compose(s), x.compose(c), x.compose(d)
    return special.jacobi(x, p)


# helpers for vector-valued expressions ----------------------------------------------


def values(components) -> np.ndarray:
    """Stack component values; the component axis goes last."""
    return np.stack(np.broadcast_arrays(*[_value(c) for c in components]), axis=-1)


def partials(components, a: int, b: int) -> np.ndarray:
    return np.stack(np.broadcast_arrays(*[_partial(c, a, b) for c in components]), axis=-1)


def _value(c):
    return c.value if isinstance(c, Jet) else np.asarray(c, dtype=float)


def _partial(c, a, b):
    if isinstance(c, Jet):
        return c.partial(a, b)
    return np.zeros_like(np.asarray(c, dtype=float)) if (a or b) else np.asarray(c, dtype=float)
