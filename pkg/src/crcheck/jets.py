"""Order-3 multivariate Taylor arithmetic.

A Jet3 stores value, gradient, Hessian and third-derivative tensor of
a scalar function of d ambient variables at one point.  Arithmetic
propagates all four slots exactly, so any function assembled from
coordinates via +, *, /, sqrt has closed-form derivatives to third
order with no finite differencing.  Values may be complex; the
variables themselves are always real.

Taking a partial derivative costs one order: the returned jet's third
slot is zero and only value/gradient/Hessian are meaningful.  Callers
own that bookkeeping.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np


class Jet3:
    __slots__ = ("value", "grad", "hess", "third")

    def __init__(self, value, grad, hess, third):
        self.value = value
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)
        self.third = np.asarray(third)

    @property
    def dim(self) -> int:
        return self.grad.shape[0]

    @staticmethod
    def const(c, d: int) -> Jet3:
        dtype = complex if isinstance(c, complex) else float
        return Jet3(
            dtype(c), np.zeros(d, dtype), np.zeros((d, d), dtype), np.zeros((d, d, d), dtype)
        )

    @staticmethod
    def coord(i: int, x: np.ndarray) -> Jet3:
        d = len(x)
        g = np.zeros(d)
        g[i] = 1.0
        return Jet3(float(x[i]), g, np.zeros((d, d)), np.zeros((d, d, d)))

    @staticmethod
    def variables(x: np.ndarray) -> list[Jet3]:
        return [Jet3.coord(i, x) for i in range(len(x))]

    def _coerce(self, o) -> Jet3:
        return o if isinstance(o, Jet3) else Jet3.const(o, self.dim)

    def __add__(self, o) -> Jet3:
        o = self._coerce(o)
        return Jet3(self.value + o.value, self.grad + o.grad, self.hess + o.hess, self.third + o.third)

    __radd__ = __add__

    def __neg__(self) -> Jet3:
        return Jet3(-self.value, -self.grad, -self.hess, -self.third)

    def __sub__(self, o) -> Jet3:
        return self + (-self._coerce(o))

    def __rsub__(self, o) -> Jet3:
        return self._coerce(o) + (-self)

    def __mul__(self, o) -> Jet3:
        if not isinstance(o, Jet3):
            return Jet3(self.value * o, self.grad * o, self.hess * o, self.third * o)
        a, b = self, o
        v = a.value * b.value
        g = a.grad * b.value + b.grad * a.value
        h = a.hess * b.value + b.hess * a.value + np.outer(a.grad, b.grad) + np.outer(b.grad, a.grad)
        t = (
            a.third * b.value
            + b.third * a.value
            + _sym_hg(a.hess, b.grad)
            + _sym_hg(b.hess, a.grad)
        )
        return Jet3(v, g, h, t)

    __rmul__ = __mul__

    def recip(self) -> Jet3:
        iv = 1.0 / self.value
        g = -self.grad * iv * iv
        h = -self.hess * iv * iv + 2.0 * iv**3 * np.outer(self.grad, self.grad)
        t = (
            -self.third * iv * iv
            + 2.0 * iv**3 * _sym_hg(self.hess, self.grad)
            - 6.0 * iv**4 * np.einsum("i,j,k->ijk", self.grad, self.grad, self.grad)
        )
        return Jet3(iv, g, h, t)

    def __truediv__(self, o) -> Jet3:
        if isinstance(o, Jet3):
            return self * o.recip()
        return self * (1.0 / o)

    def __rtruediv__(self, o) -> Jet3:
        return self.recip() * o

    def __pow__(self, k: int) -> Jet3:
        if not isinstance(k, int):
            raise TypeError("jet powers must be integers")
        if k < 0:
            return self.recip() ** (-k)
        out = Jet3.const(1.0, self.dim)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def sqrt(self) -> Jet3:
        """Square root; intended for positive real-valued jets."""
        s = np.sqrt(self.value)
        i2 = 0.5 / s
        g = self.grad * i2
        h = self.hess * i2 - np.outer(self.grad, self.grad) / (4 * s**3)
        t = (
            self.third * i2
            - _sym_hg(self.hess, self.grad) / (4 * s**3)
            + 3.0 / (8 * s**5) * np.einsum("i,j,k->ijk", self.grad, self.grad, self.grad)
        )
        return Jet3(s, g, h, t)

    def conj(self) -> Jet3:
        return Jet3(np.conj(self.value), np.conj(self.grad), np.conj(self.hess), np.conj(self.third))

    def real_part(self) -> Jet3:
        return Jet3(self.value.real, self.grad.real, self.hess.real, self.third.real)

    def imag_part(self) -> Jet3:
        return Jet3(self.value.imag, self.grad.imag, self.hess.imag, self.third.imag)

    def partial(self, i: int) -> Jet3:
        """The i-th partial derivative, one order lower (third slot zero)."""
        d = self.dim
        return Jet3(self.grad[i], self.hess[i], self.third[i], np.zeros((d, d, d)))


def _sym_hg(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    t = np.einsum("ij,k->ijk", h, g)
    return t + t.transpose(0, 2, 1) + t.transpose(2, 0, 1)


def direction(f: Jet3, field: list[Jet3]) -> Jet3:
    """Derivative of f along a vector field given by component jets.

    Valid one order below min(order of f − 1, order of the field).
    """
    out = field[0] * f.partial(0)
    for i in range(1, f.dim):
        out = out + field[i] * f.partial(i)
    return out


class ScalarField(Protocol):
    """Anything that maps the restricted coordinate jets to a scalar jet."""

    def __call__(self, u: Sequence[Jet3]) -> Jet3: ...
