"""Exact scalar arithmetic for tensor coefficients.

Every coefficient in the engine is an element of Q(i)(d): a rational
function of one formal dimension symbol, with Gaussian rational
coefficients.  Arithmetic is exact at every step.  Numeric evaluation
substitutes an integer for the dimension symbol and converts to complex
only on the way out.

Normal form: numerator and denominator share no common polynomial
factor and the denominator is monic.  Equal values therefore compare
equal structurally, which the rest of the engine relies on when merging
like terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm


def _frac(x: int | Fraction) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


@dataclass(frozen=True, slots=True)
class GaussQ:
    """Gaussian rational re + im*i with exact Fraction parts."""

    re: Fraction
    im: Fraction

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def conjugate(self) -> GaussQ:
        return GaussQ(self.re, -self.im)

    def __add__(self, other: GaussQ) -> GaussQ:
        return GaussQ(self.re + other.re, self.im + other.im)

    def __sub__(self, other: GaussQ) -> GaussQ:
        return GaussQ(self.re - other.re, self.im - other.im)

    def __neg__(self) -> GaussQ:
        return GaussQ(-self.re, -self.im)

    def __mul__(self, other: GaussQ) -> GaussQ:
        return GaussQ(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: GaussQ) -> GaussQ:
        n2 = other.re * other.re + other.im * other.im
        if not n2:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussQ(
            (self.re * other.re + self.im * other.im) / n2,
            (self.im * other.re - self.re * other.im) / n2,
        )

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


def gq(re: int | Fraction = 0, im: int | Fraction = 0) -> GaussQ:
    return GaussQ(_frac(re), _frac(im))


GQ_ZERO = gq(0)
GQ_ONE = gq(1)
GQ_I = gq(0, 1)


def _gq_str(c: GaussQ) -> str:
    if not c.im:
        return str(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{c.im}*i"
    if c.im > 0:
        tail = "i" if c.im == 1 else f"{c.im}*i"
        return f"{c.re} + {tail}"
    tail = "i" if c.im == -1 else f"{-c.im}*i"
    return f"{c.re} - {tail}"


@dataclass(frozen=True, slots=True)
class Poly:
    """Polynomial in the dimension symbol, coefficients ascending by degree.

    The zero polynomial is the empty tuple; trailing zero coefficients
    are trimmed on construction so representations are unique.
    """

    coeffs: tuple[GaussQ, ...] = ()

    def __post_init__(self) -> None:
        cs = self.coeffs
        k = len(cs)
        while k and cs[k - 1].is_zero():
            k -= 1
        if k != len(cs):
            object.__setattr__(self, "coeffs", cs[:k])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (GQ_ONE,)

    @property
    def lead(self) -> GaussQ:
        if not self.coeffs:
            raise ZeroDivisionError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other: Poly) -> Poly:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] = out[k] + c
        return Poly(tuple(out))

    def __neg__(self) -> Poly:
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        if self.is_zero() or other.is_zero():
            return P_ZERO
        out = [GQ_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for j, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for k, b in enumerate(other.coeffs):
                out[j + k] = out[j + k] + a * b
        return Poly(tuple(out))

    def scale(self, c: GaussQ) -> Poly:
        return Poly(tuple(x * c for x in self.coeffs))

    def monic(self) -> Poly:
        lc = self.lead
        if lc == GQ_ONE:
            return self
        return self.scale(GQ_ONE / lc)

    def conjugate(self) -> Poly:
        return Poly(tuple(c.conjugate() for c in self.coeffs))

    def evaluate(self, x: GaussQ) -> GaussQ:
        acc = GQ_ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sort_key(self) -> tuple:
        return (len(self.coeffs), tuple((c.re, c.im) for c in self.coeffs))

    def format(self, symbol: str) -> str:
        if self.is_zero():
            return "0"
        parts: list[str] = []
        for deg in range(self.degree, -1, -1):
            c = self.coeffs[deg]
            if c.is_zero():
                continue
            parts.append(_poly_term_str(deg, c, symbol))
        out = parts[0]
        for s in parts[1:]:
            if s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out

    @property
    def term_count(self) -> int:
        return sum(1 for c in self.coeffs if not c.is_zero())


def _poly_term_str(deg: int, c: GaussQ, symbol: str) -> str:
    if deg == 0:
        return _gq_str(c)
    sym = symbol if deg == 1 else f"{symbol}^{deg}"
    if c == GQ_ONE:
        return sym
    if c == -GQ_ONE:
        return f"-{sym}"
    if not c.im:
        return f"{c.re}*{sym}"
    if not c.re:
        if c.im == 1:
            return f"i*{sym}"
        if c.im == -1:
            return f"-i*{sym}"
        return f"{c.im}*i*{sym}"
    return f"({_gq_str(c)})*{sym}"


P_ZERO = Poly(())
P_ONE = Poly((GQ_ONE,))
P_DIM = Poly((GQ_ZERO, GQ_ONE))


def _poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.degree < b.degree:
        return P_ZERO, a
    q = [GQ_ZERO] * (a.degree - b.degree + 1)
    r = list(a.coeffs)
    db, lb = b.degree, b.lead
    while True:
        while r and r[-1].is_zero():
            r.pop()
        dr = len(r) - 1
        if dr < db:
            break
        t = r[dr] / lb
        q[dr - db] = t
        for j, bc in enumerate(b.coeffs):
            r[dr - db + j] = r[dr - db + j] - t * bc
    return Poly(tuple(q)), Poly(tuple(r))


def _poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, _poly_divmod(a, b)[1]
    if a.is_zero():
        return a
    return a.monic()


def _poly_exact_div(a: Poly, b: Poly) -> Poly:
    q, r = _poly_divmod(a, b)
    if not r.is_zero():
        raise ArithmeticError("inexact polynomial division in coefficient reduction")
    return q


class Coeff:
    """Element of Q(i)(d) kept in reduced, monic-denominator form."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = P_ONE):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in coefficient")
        if num.is_zero():
            num, den = P_ZERO, P_ONE
        else:
            g = _poly_gcd(num, den)
            if not g.is_one():
                num = _poly_exact_div(num, g)
                den = _poly_exact_div(den, g)
            lc = den.lead
            if lc != GQ_ONE:
                inv = GQ_ONE / lc
                num = num.scale(inv)
                den = den.scale(inv)
        self.num = num
        self.den = den

    @classmethod
    def rational(cls, p: int | Fraction, q: int | Fraction = 1) -> Coeff:
        return cls(Poly((gq(p),)), Poly((gq(q),)))

    @classmethod
    def gaussian(cls, re: int | Fraction, im: int | Fraction = 0) -> Coeff:
        return cls(Poly((gq(re, im),)))

    @classmethod
    def imag_unit(cls) -> Coeff:
        return cls(Poly((GQ_I,)))

    @classmethod
    def dim(cls) -> Coeff:
        return cls(P_DIM)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Coeff):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"Coeff({self.format('d')})"

    def __add__(self, other: Coeff) -> Coeff:
        return Coeff(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: Coeff) -> Coeff:
        return Coeff(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> Coeff:
        return Coeff(-self.num, self.den)

    def __mul__(self, other: Coeff) -> Coeff:
        return Coeff(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: Coeff) -> Coeff:
        return Coeff(self.num * other.den, self.den * other.num)

    def __pow__(self, k: int) -> Coeff:
        if k < 0:
            return COEFF_ONE / (self ** (-k))
        out = COEFF_ONE
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self) -> Coeff:
        return Coeff(self.num.conjugate(), self.den.conjugate())

    def evaluate_exact(self, dim: int) -> GaussQ:
        x = gq(dim)
        return self.num.evaluate(x) / self.den.evaluate(x)

    def evaluate(self, dim: int) -> complex:
        return complex(self.evaluate_exact(dim))

    def sort_key(self) -> tuple:
        return (self.den.sort_key(), self.num.sort_key())

    def negates_leading(self) -> bool:
        """True when the printed form would begin with a minus sign."""
        if self.is_zero():
            return False
        lc = self.num.lead
        if self.num.degree > 0 and lc.re and lc.im:
            return False
        if lc.re:
            return lc.re < 0
        return lc.im < 0

    def format(self, symbol: str) -> str:
        num, den = self.num, self.den
        s = _display_scale(num, den)
        if s != 1:
            num = num.scale(gq(s))
            den = den.scale(gq(s))
        ns = num.format(symbol)
        if den.is_one():
            return ns
        if num.term_count > 1:
            ns = f"({ns})"
        ds = den.format(symbol)
        if den.term_count > 1 or "*" in ds or "^" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"


def _display_scale(num: Poly, den: Poly) -> Fraction:
    """Smallest positive rational that clears every coefficient denominator.

    The stored normal form keeps the denominator monic, so a value like
    (m + 2)/2 is held as (m/2 + 1)/1.  Printing rescales both parts to
    recover the integral form readers expect.
    """
    parts = [f for c in (*num.coeffs, *den.coeffs) for f in (c.re, c.im) if f]
    if not parts:
        return Fraction(1)
    scale = lcm(*(f.denominator for f in parts))
    common = gcd(*(abs(f.numerator) * (scale // f.denominator) for f in parts))
    return Fraction(scale, common or 1)


COEFF_ZERO = Coeff(P_ZERO)
COEFF_ONE = Coeff(P_ONE)
COEFF_I = Coeff(Poly((GQ_I,)))
COEFF_DIM = Coeff(P_DIM)
