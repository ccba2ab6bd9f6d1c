from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crcheck.coeff import (
    COEFF_DIM,
    COEFF_I,
    COEFF_ONE,
    COEFF_ZERO,
    Coeff,
    GaussQ,
    Poly,
    _poly_divmod,
    _poly_gcd,
    gq,
)

fractions = st.fractions(min_value=-40, max_value=40, max_denominator=12)
gaussians = st.builds(gq, fractions, fractions)
polys = st.builds(lambda cs: Poly(tuple(cs)), st.lists(gaussians, max_size=4))
coeffs = st.builds(
    lambda n, d: Coeff(n, d),
    polys,
    polys.filter(lambda p: not p.is_zero()),
)


class TestGaussQ:
    def test_basic_arithmetic(self):
        a = gq(1, 2)
        b = gq(3, -1)
        assert a + b == gq(4, 1)
        assert a * b == gq(5, 5)
        assert (a / b) * b == a

    def test_conjugate_is_involution(self):
        a = gq(Fraction(2, 3), Fraction(-5, 7))
        assert a.conjugate().conjugate() == a

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            gq(1) / gq(0)


class TestPoly:
    def test_trailing_zeros_trimmed(self):
        p = Poly((gq(1), gq(0), gq(0)))
        assert p.degree == 0

    @given(polys, polys.filter(lambda p: not p.is_zero()))
    def test_divmod_reconstructs(self, a, b):
        q, r = _poly_divmod(a, b)
        assert q * b + r == a
        assert r.is_zero() or r.degree < b.degree

    @given(polys, polys)
    def test_gcd_divides_both(self, a, b):
        g = _poly_gcd(a, b)
        if g.is_zero():
            assert a.is_zero() and b.is_zero()
        else:
            assert _poly_divmod(a, g)[1].is_zero()
            assert _poly_divmod(b, g)[1].is_zero()

    def test_evaluate_horner(self):
        p = Poly((gq(1), gq(-2), gq(3)))
        assert p.evaluate(gq(2)) == gq(1 - 4 + 12)


class TestCoeffField:
    @given(coeffs, coeffs, coeffs)
    @settings(max_examples=60)
    def test_distributive(self, a, b, c):
        assert a * (b + c) == a * b + a * c

    @given(coeffs, coeffs)
    def test_commutative(self, a, b):
        assert a + b == b + a
        assert a * b == b * a

    @given(coeffs)
    def test_additive_inverse(self, a):
        assert a + (-a) == COEFF_ZERO

    @given(coeffs.filter(lambda c: not c.is_zero()))
    def test_multiplicative_inverse(self, a):
        assert a * (COEFF_ONE / a) == COEFF_ONE

    @given(coeffs)
    def test_conjugate_involution(self, a):
        assert a.conjugate().conjugate() == a

    @given(coeffs, coeffs)
    def test_conjugate_multiplicative(self, a, b):
        assert (a * b).conjugate() == a.conjugate() * b.conjugate()

    def test_normal_form_is_canonical(self):
        # (d^2 - 1)/(d - 1) reduces to d + 1
        num = Poly((gq(-1), gq(0), gq(1)))
        den = Poly((gq(-1), gq(1)))
        assert Coeff(num, den) == COEFF_DIM + COEFF_ONE

    def test_denominator_made_monic(self):
        half = Coeff.rational(1, 2)
        c = Coeff(Poly((gq(1),)), Poly((gq(2),)))
        assert c == half
        assert c.den.is_one()

    def test_i_squared(self):
        assert COEFF_I * COEFF_I == -COEFF_ONE


class TestEvaluate:
    @pytest.mark.parametrize("dim", [1, 2, 3, 5])
    def test_rational_function(self, dim):
        # (d + 2)/(2*d)
        c = (COEFF_DIM + Coeff.rational(2)) / (Coeff.rational(2) * COEFF_DIM)
        assert c.evaluate(dim) == pytest.approx((dim + 2) / (2 * dim))

    def test_gaussian_value(self):
        c = COEFF_I * Coeff.rational(3, 2)
        assert c.evaluate(7) == pytest.approx(1.5j)

    def test_exact_evaluation(self):
        c = Coeff.rational(1, 3)
        assert c.evaluate_exact(4) == gq(Fraction(1, 3))


class TestFormat:
    @pytest.mark.parametrize(
        "c,expect",
        [
            (COEFF_ONE, "1"),
            (-COEFF_ONE, "-1"),
            (Coeff.rational(3, 2), "3/2"),
            (Coeff.rational(-3, 2), "-3/2"),
            (COEFF_I, "i"),
            (-COEFF_I, "-i"),
            (Coeff.gaussian(0, 2), "2*i"),
            (COEFF_DIM, "m"),
            (COEFF_DIM + Coeff.rational(2), "m + 2"),
            ((COEFF_DIM + Coeff.rational(2)) / Coeff.rational(2), "(m + 2)/2"),
            (COEFF_DIM / (COEFF_DIM + COEFF_ONE), "m/(m + 1)"),
            (Coeff.gaussian(1, -1) * COEFF_DIM, "(1 - i)*m"),
            (COEFF_DIM * COEFF_DIM + COEFF_ONE, "m^2 + 1"),
        ],
    )
    def test_examples(self, c, expect):
        assert c.format("m") == expect

    def test_symbol_choice(self):
        assert COEFF_DIM.format("n") == "n"

    @given(coeffs)
    def test_negates_leading_matches_string(self, c):
        if not c.is_zero():
            assert c.format("m").startswith("-") == c.negates_leading()
