from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crcheck.jets import Jet3, direction

RNG = np.random.default_rng(20240817)


def _point(d: int) -> np.ndarray:
    return RNG.normal(size=d)


def _poly(u: list[Jet3]) -> Jet3:
    # x0^3 + 2 x0 x1^2 - x2 + 5, chosen so every third derivative slot is hit
    return u[0] ** 3 + 2.0 * u[0] * u[1] * u[1] - u[2] + 5.0


def _poly_truth(x: np.ndarray):
    value = x[0] ** 3 + 2 * x[0] * x[1] ** 2 - x[2] + 5
    grad = np.array([3 * x[0] ** 2 + 2 * x[1] ** 2, 4 * x[0] * x[1], -1.0])
    hess = np.array(
        [
            [6 * x[0], 4 * x[1], 0.0],
            [4 * x[1], 4 * x[0], 0.0],
            [0.0, 0.0, 0.0],
        ]
    )
    third = np.zeros((3, 3, 3))
    third[0, 0, 0] = 6.0
    for perm in ((0, 1, 1), (1, 0, 1), (1, 1, 0)):
        third[perm] = 4.0
    return value, grad, hess, third


def test_polynomial_jet_matches_hand_derivatives():
    x = _point(3)
    jet = _poly(Jet3.variables(x))
    value, grad, hess, third = _poly_truth(x)
    assert jet.value == pytest.approx(value)
    np.testing.assert_allclose(jet.grad, grad, atol=1e-12)
    np.testing.assert_allclose(jet.hess, hess, atol=1e-12)
    np.testing.assert_allclose(jet.third, third, atol=1e-12)


def test_const_and_coord_shapes():
    c = Jet3.const(2.5, 4)
    assert c.value == 2.5 and c.dim == 4
    assert not c.grad.any() and not c.hess.any() and not c.third.any()
    x = _point(4)
    j = Jet3.coord(1, x)
    assert j.value == x[1]
    assert j.grad[1] == 1.0 and np.count_nonzero(j.grad) == 1


def test_recip_against_product_rule():
    x = _point(3)
    u = Jet3.variables(x)
    f = u[0] * u[0] + u[1] + 3.0
    one = f * f.recip()
    assert one.value == pytest.approx(1.0)
    np.testing.assert_allclose(one.grad, 0.0, atol=1e-12)
    np.testing.assert_allclose(one.hess, 0.0, atol=1e-12)
    np.testing.assert_allclose(one.third, 0.0, atol=1e-12)


def test_sqrt_squares_back():
    x = _point(2)
    u = Jet3.variables(x)
    f = u[0] * u[0] + u[1] * u[1] + 2.0
    g = f.sqrt()
    back = g * g
    np.testing.assert_allclose(back.value, f.value, atol=1e-12)
    np.testing.assert_allclose(back.grad, f.grad, atol=1e-12)
    np.testing.assert_allclose(back.hess, f.hess, atol=1e-12)
    np.testing.assert_allclose(back.third, f.third, atol=1e-12)


def test_pow_is_repeated_multiplication():
    x = _point(2)
    u = Jet3.variables(x)
    f = u[0] + 2.0 * u[1]
    cube = f ** 3
    manual = f * f * f
    np.testing.assert_allclose(cube.third, manual.third, atol=1e-12)
    inv2 = f ** -2
    manual2 = (f * f).recip()
    np.testing.assert_allclose(inv2.hess, manual2.hess, atol=1e-10)


def test_division_by_scalar_and_jet():
    x = _point(2)
    u = Jet3.variables(x)
    f = u[0] * u[1] + 4.0
    np.testing.assert_allclose((f / 2.0).grad, f.grad / 2.0)
    q = 1.0 / f
    np.testing.assert_allclose(q.grad, f.recip().grad, atol=1e-12)


def test_complex_conjugation_and_parts():
    x = _point(2)
    u = Jet3.variables(x)
    f = u[0] * (1.0 + 2.0j) + u[1] * u[1] * 1.0j
    re, im = f.real_part(), f.imag_part()
    np.testing.assert_allclose((re + im * 1j).grad, f.grad, atol=1e-12)
    np.testing.assert_allclose(f.conj().grad, np.conj(f.grad), atol=1e-12)
    assert f.conj().conj().value == f.value


def test_partial_drops_one_order():
    x = _point(3)
    jet = _poly(Jet3.variables(x))
    _, grad, hess, _ = _poly_truth(x)
    p0 = jet.partial(0)
    assert p0.value == pytest.approx(grad[0])
    np.testing.assert_allclose(p0.grad, hess[0], atol=1e-12)
    # the third slot of a partial carries no information
    assert not p0.third.any()


def test_direction_is_contracted_gradient():
    x = _point(3)
    u = Jet3.variables(x)
    f = _poly(u)
    field = [u[1], u[2] * u[0], Jet3.const(1.0, 3)]
    df = direction(f, field)
    want = sum(field[i].value * f.grad[i] for i in range(3))
    assert df.value == pytest.approx(want)
    # product + chain rule for the gradient slot
    want_grad = sum(
        field[i].value * f.hess[i] + f.grad[i] * field[i].grad for i in range(3)
    )
    np.testing.assert_allclose(df.grad, want_grad, atol=1e-12)


small = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(a=small, b=small, c=small)
def test_arithmetic_laws(a, b, c):
    x = np.array([0.7, -1.3])
    u = Jet3.variables(x)
    f = a + u[0] * b
    g = u[1] * u[1] + c
    h = u[0] * u[1]
    left = (f + g) * h
    right = f * h + g * h
    np.testing.assert_allclose(left.hess, right.hess, atol=1e-9)
    np.testing.assert_allclose(left.third, right.third, atol=1e-9)
    np.testing.assert_allclose((f * g).third, (g * f).third, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(shift=st.floats(min_value=3.5, max_value=9.0))
def test_recip_of_recip(shift):
    x = np.array([0.4, -0.9])
    u = Jet3.variables(x)
    f = u[0] * u[1] + shift
    twice = f.recip().recip()
    np.testing.assert_allclose(twice.value, f.value, atol=1e-9)
    np.testing.assert_allclose(twice.third, f.third, atol=1e-7)
