from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmfield.poly import Poly, compile_polys, coordinates, cross_poly, inner_poly, jacobian

from .strategies import random_poly

x, y, z = coordinates(3)


def test_arithmetic_and_equality():
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert (p - p).is_zero()
    assert p.degree == 2
    assert p.coefficient((1, 1, 0)) == 2


def test_exact_rational_derivatives():
    p = Poly(2, {(3, 1): Fraction(1, 3), (0, 2): Fraction(5, 7)})
    assert p.deriv(0) == Poly(2, {(2, 1): Fraction(1)})
    assert p.deriv(1).coefficient((0, 1)) == Fraction(10, 7)
    assert isinstance(p.deriv(1).coefficient((0, 1)), Fraction)


def test_derivative_of_constant_is_zero():
    assert Poly.const(4, 3).deriv(2).is_zero()


def test_compose_linear():
    M = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    p = x * y + z
    q = p.compose_linear(M)  # p(My) = p(y, z, x)
    assert q == y * z + x


def test_cross_and_inner():
    c = cross_poly((x, y, z), (Poly.const(0, 3), Poly.const(0, 3), Poly.const(1, 3)))
    assert all(a == b for a, b in zip(c, (y, -x, Poly(3))))
    assert inner_poly((x, y, z), (x, y, z), (1, -1, -1)) == x * x - y * y - z * z


@given(st.integers(0, 10_000))
def test_compiled_evaluation_matches_termwise(seed):
    rng = np.random.default_rng(seed)
    ps = [random_poly(rng, 3, degree=3) for _ in range(3)]
    X = rng.normal(size=(7, 3))
    C = compile_polys(ps)(X)
    for j, p in enumerate(ps):
        direct = [sum(c * np.prod(pt ** np.array(e)) for e, c in p.terms.items()) for pt in X]
        assert np.allclose(C[:, j], direct)


@given(st.integers(0, 10_000))
def test_derivative_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    p = random_poly(rng, 3, degree=3)
    J = jacobian([p])[0]
    pt = rng.normal(size=3)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (p(pt + e) - p(pt - e)) / (2 * h)
        assert J[i](pt) == pytest.approx(fd, rel=1e-5, abs=1e-6)


@given(st.integers(0, 10_000))
def test_product_rule(seed):
    rng = np.random.default_rng(seed)
    p, q = random_poly(rng, 3), random_poly(rng, 3)
    for i in range(3):
        lhs = (p * q).deriv(i)
        rhs = p.deriv(i) * q + p * q.deriv(i)
        X = rng.normal(size=(4, 3))
        assert np.allclose(lhs(X), rhs(X))


def test_bad_exponent():
    with pytest.raises(ValueError):
        Poly(2, {(1, 2, 3): 1.0})
