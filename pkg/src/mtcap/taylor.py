"""Truncated Taylor series ("jets") with the usual recurrences.

A jet holds the coefficients ``c[0..n]`` of ``f(center + h) = sum c[k] h**k``.
Coefficient arrays may carry trailing batch dimensions, so one jet can hold
expansions about many centres at once.
"""

from __future__ import annotations

import math

import numpy as np


class TaylorJet:
    __array_priority__ = 100

    def __init__(self, coefficients, center=None):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.center = center

    @classmethod
    def variable(cls, center, order: int) -> "TaylorJet":
        center = np.asarray(center, dtype=float)
        c = np.zeros((order + 1,) + center.shape)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(c, center)

    @classmethod
    def constant(cls, value, order: int, center=None) -> "TaylorJet":
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        return cls(c, center)

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def value(self):
        return self.coefficients[0]

    def __len__(self):
        return self.coefficients.shape[0]

    def derivative(self, k: int):
        """k-th derivative at the centre."""
        return math.factorial(k) * self.coefficients[k]

    def _wrap(self, c):
        return TaylorJet(c, self.center)

    def _coerce(self, other):
        if isinstance(other, TaylorJet):
            return other.coefficients
        other = np.asarray(other, dtype=float)
        c = np.zeros(np.broadcast_shapes(self.coefficients.shape, (1,) + other.shape))
        c[0] = other
        return c

    def __add__(self, other):
        return self._wrap(self.coefficients + self._coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coefficients)

    def __sub__(self, other):
        return self._wrap(self.coefficients - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.coefficients)

    def __mul__(self, other):
        if not isinstance(other, TaylorJet):
            return self._wrap(self.coefficients * other)
        a, b = self.coefficients, other.coefficients
        c = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(len(c)):
            for i in range(k + 1):
                c[k] += a[i] * b[k - i]
        return self._wrap(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TaylorJet):
            return self._wrap(self.coefficients / other)
        a, b = self.coefficients, other.coefficients
        c = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for k in range(len(c)):
            acc = a[k].copy() if np.ndim(a[k]) else a[k]
            for i in range(1, k + 1):
                acc = acc - b[i] * c[k - i]
            c[k] = acc / b[0]
        return self._wrap(c)

    def __rtruediv__(self, other):
        return self._wrap(self._coerce(other)) / self

    def exp(self) -> "TaylorJet":
        a = self.coefficients
        e = np.zeros_like(a)
        e[0] = np.exp(a[0])
        for k in range(1, len(a)):
            acc = 0.0
            for i in range(1, k + 1):
                acc = acc + i * a[i] * e[k - i]
            e[k] = acc / k
        return self._wrap(e)

    def log(self) -> "TaylorJet":
        a = self.coefficients
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, len(a)):
            acc = a[k]
            for i in range(1, k):
                acc = acc - i * out[i] * a[k - i] / k
            out[k] = acc / a[0]
        return self._wrap(out)

    def __pow__(self, p: float) -> "TaylorJet":
        a = self.coefficients
        y = np.zeros_like(a)
        y[0] = a[0] ** p
        for k in range(1, len(a)):
            acc = 0.0
            for i in range(1, k + 1):
                acc = acc + (p * i - (k - i)) * a[i] * y[k - i]
            y[k] = acc / (k * a[0])
        return self._wrap(y)

    def integrate(self, constant) -> "TaylorJet":
        """Antiderivative jet with value ``constant`` at the centre (order kept)."""
        a = self.coefficients
        c = np.zeros_like(a)
        c[0] = constant
        for k in range(1, len(a)):
            c[k] = a[k - 1] / k
        return self._wrap(c)

    def __repr__(self):
        return f"TaylorJet(center={self.center!r}, coefficients={self.coefficients!r})"
