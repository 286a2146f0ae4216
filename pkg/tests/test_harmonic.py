from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmfield.errors import NotConstantLength, NotPreharmonic, SingularPatch
from harmfield.fields import AmbientPolyField, ConformalGradientField, KillingField, j_twist, local_geometry
from harmfield.harmonic import (
    GraphPatch,
    InfiniteSolutionSet,
    PreharmonicData,
    classify_cgf,
    constant_length_check,
    exact,
    first_variation,
    general_killing_condition,
    harmonicity_polynomial,
    is_pq_harmonic,
    killing_harmonic_condition_2d,
    preharmonic_lambda,
    solve_metric_params,
    spinnaker,
    tau_pq,
    weitzenbock_residual,
)
from harmfield.quadric import SURFACES, H, S, sample_points

from .strategies import random_pole, random_skew, random_tangent_field

H21 = H(2, 1)
A0 = np.array([[0, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=float)
HARM_K = KillingField(H21, A0)


def test_tau_examples():
    X = sample_points(H21, 50, 4)
    assert tau_pq(HARM_K, X, (3, -0.5)).residual().max() < 1e-9
    r = tau_pq(HARM_K, np.array([1.0, 1, 1]), (0, 0))
    assert np.allclose(r.tau, (0, 1, -1))
    assert np.allclose(r.phi, 0)
    Z = KillingField(H21, np.zeros((3, 3)))
    for pq in ((0, 0), (5, -2), (-1, 3)):
        assert np.allclose(tau_pq(Z, X, pq).tau, 0)


def test_is_pq_harmonic_examples():
    assert is_pq_harmonic(ConformalGradientField(S(3, 1), (1, 0, 0, 0)), (4, -1))
    sphere = S(2, 0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = ConformalGradientField(sphere, rng.normal(size=3))
        for pq in ((3, -0.5), (1, 0), (0, 0), (4, -1)):
            assert not is_pq_harmonic(f, pq)
    Jf = j_twist(ConformalGradientField(H21, (0, 0, 1)))
    v = is_pq_harmonic(Jf, (3, -0.5))
    assert not v and v.max_residual > 1e-3


def test_preharmonic_lambda_examples():
    assert preharmonic_lambda(HARM_K) == pytest.approx(-1.0)
    A = np.zeros((4, 4))
    A[0, 1], A[1, 0], A[2, 3], A[3, 2] = 1, -1, 2, -2
    assert preharmonic_lambda(KillingField(S(3, 0), A)) is None
    with pytest.raises(ValueError):
        preharmonic_lambda(KillingField(H21, np.zeros((3, 3))))


@pytest.mark.parametrize("M", SURFACES)
def test_preharmonic_lambda_2d(M, rng):
    e1, e2, e3 = M.signature.diag
    a, b, c = rng.normal(size=3)
    A = np.array([[0, a, b], [-e1 * e2 * a, 0, c], [-e1 * e3 * b, -e2 * e3 * c, 0]])
    lam = -e1 * e2 * a * a - e1 * e3 * b * b - e2 * e3 * c * c
    assert preharmonic_lambda(KillingField(M, A)) == pytest.approx(lam)


def test_spinnaker_examples():
    d = spinnaker(ConformalGradientField(H(2, 2), (0, 0, 1)))  # eps = -1, mu = -1
    assert (d.nu, d.zeta, d.deltaF) == (-1, (1, 2), (-2, -6))
    d = spinnaker(HARM_K)
    assert (d.nu, d.zeta, d.deltaF) == (-1, (1, 2), (-2, -6))
    d = spinnaker(ConformalGradientField(S(3, 0), np.zeros(4)))
    assert (d.nu, d.zeta, d.deltaF) == (1, (0, -2), (0, 8))
    A = np.zeros((4, 4))
    A[0, 1], A[1, 0], A[2, 3], A[3, 2] = 1, -1, 2, -2
    with pytest.raises(NotPreharmonic):
        spinnaker(KillingField(S(3, 0), A))


def _cgf_proof_poly(n, mu, p, q):
    # (p+q+2qF)(2(1+n)F - n mu) + 2p(1+qF)(mu - 2F) + 1 + 2(1-p)F in powers of F
    c0 = (p + q) * (-n * mu) + 2 * p * mu + 1
    c1 = (p + q) * 2 * (1 + n) + 2 * q * (-n * mu) - 4 * p + 2 * p * q * mu + 2 * (1 - p)
    c2 = 4 * q * (1 + n) - 4 * p * q
    return (c0, c1, c2)


@given(
    n=st.integers(2, 6),
    mu=st.fractions(-3, 3, max_denominator=7),
    p=st.fractions(-5, 5, max_denominator=5),
    q=st.fractions(-5, 5, max_denominator=5),
    eps=st.sampled_from([1, -1]),
)
def test_harmonicity_polynomial_cgf(n, mu, p, q, eps):
    E = Fr(eps)
    d = PreharmonicData(E, (E * mu, -2 * E), (-E * n * mu, 2 * E * (n + 1)), eps, n, "cgf")
    k = harmonicity_polynomial(d, (p, q))
    assert k == tuple(eps * c for c in _cgf_proof_poly(n, mu, p, q))


@given(
    lam=st.fractions(-3, 3, max_denominator=7),
    p=st.fractions(-5, 5, max_denominator=5),
    q=st.fractions(-5, 5, max_denominator=5),
    eps=st.sampled_from([1, -1]),
)
def test_harmonicity_polynomial_killing_2d(lam, p, q, eps):
    E = Fr(eps)
    d = PreharmonicData(E, (-lam, -2 * E), (2 * lam, 6 * E), eps, 2, "killing")
    k0, k1, k2 = harmonicity_polynomial(d, (p, q))
    # the 2-D polynomial in powers of 2F
    assert k2 / 4 == eps * (3 - p) * q
    assert k1 / 2 == eps * (1 + 3 * q) + (2 - p) * q * lam
    assert k0 == 2 * q * lam + eps
    g = general_killing_condition(2, eps, lam, -2 * lam, (p, q))
    assert g == (k0, k1 / 2, k2 / 4)


def test_harmonicity_polynomial_trivial_data():
    d = PreharmonicData(Fr(0), (Fr(0), Fr(0)), (Fr(0), Fr(0)))
    assert harmonicity_polynomial(d, (Fr(2), Fr(3))) == (0, 0, 0)


@pytest.mark.parametrize(
    "M, pole",
    [(S(3, 1), (1, 0, 0, 0)), (H(3, 1), (0, 0, 0, 1)), (S(2, 1), (0, 1, 0)), (H(4, 2), (1, 0, 0, 0, 0))],
)
def test_tau_is_polynomial_multiple_of_sigma(M, pole):
    f = ConformalGradientField(M, pole)
    K = KillingField(M, random_skew(M, np.random.default_rng(0))) if M.n == 2 else None
    X = sample_points(M, 20, 2)
    for fld in filter(None, (f, K)):
        d = spinnaker(fld)
        F = local_geometry(fld, X).F
        for pq in ((1.0, 2.0), (3.0, -0.5), (-1.0, 0.25)):
            k0, k1, k2 = (float(c) for c in harmonicity_polynomial(d, pq))
            r = tau_pq(fld, X, pq)
            expected = (k0 + k1 * F + k2 * F * F)[:, None] * r.sigma
            assert np.allclose(r.tau, expected, atol=1e-9)


def test_solve_metric_params_examples():
    assert solve_metric_params(spinnaker(ConformalGradientField(S(3, 0), (0, 0, 0, 1)))) == {(4, -1)}
    assert solve_metric_params(spinnaker(ConformalGradientField(H21, (0, 0, 1)))) == {(3, Fr(-1, 2))}
    assert solve_metric_params(spinnaker(ConformalGradientField(H(3, 1), (0, 0, 0, 1)))) == {
        (4, Fr(-5, 3)),
        (-1, 0),
    }
    assert solve_metric_params(spinnaker(HARM_K)) == {(3, Fr(-1, 2))}
    for p, q in solve_metric_params(spinnaker(HARM_K)):
        assert isinstance(p, Fr) and isinstance(q, Fr)


def test_solve_metric_params_infinite():
    with pytest.raises(InfiniteSolutionSet):
        solve_metric_params(PreharmonicData(Fr(0), (Fr(0), Fr(0)), (Fr(0), Fr(0))))


@given(
    nu=st.fractions(-3, 3, max_denominator=4),
    c0=st.fractions(-3, 3, max_denominator=4),
    c1=st.fractions(-3, 3, max_denominator=4),
    d0=st.fractions(-3, 3, max_denominator=4),
    d1=st.fractions(-3, 3, max_denominator=4),
)
def test_solver_against_grid(nu, c0, c1, d0, d1):
    d = PreharmonicData(nu, (c0, c1), (d0, d1))
    try:
        sols = solve_metric_params(d)
    except InfiniteSolutionSet:
        return
    for p, q in sols:
        k = harmonicity_polynomial(d, (p, q))
        assert all(abs(float(c)) < 1e-9 for c in k)
    # no rational grid point outside the solution set annihilates the polynomial
    grid = [Fr(i, 2) for i in range(-10, 11)]
    for p in grid:
        for q in grid:
            if all(c == 0 for c in harmonicity_polynomial(d, (p, q))):
                assert any(abs(float(p - a)) < 1e-9 and abs(float(q - b)) < 1e-9 for a, b in sols)


def test_classify_cgf_examples():
    assert classify_cgf(2, 1) == set()
    assert classify_cgf(4, Fr(1, 2)) == {(5, -2)}
    assert classify_cgf(4, -1) == {(5, Fr(-11, 4)), (Fr(-1, 2), 0)}
    assert classify_cgf(2, -1) == {(3, Fr(-1, 2))}
    assert classify_cgf(3, 0.5) == set()


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("mu", [Fr(-1), Fr(1, 2), Fr(1), Fr(2), Fr(0), Fr(-3)])
def test_classify_matches_solver(n, mu):
    E = Fr(1)
    d = PreharmonicData(E, (E * mu, -2 * E), (-E * n * mu, 2 * E * (n + 1)), 1, n, "cgf")
    assert classify_cgf(n, mu) == solve_metric_params(d)
    d = PreharmonicData(-E, (-E * mu, 2 * E), (E * n * mu, -2 * E * (n + 1)), -1, n, "cgf")
    assert classify_cgf(n, mu) == solve_metric_params(d)


def test_killing_2d_condition_examples():
    assert killing_harmonic_condition_2d(-1, -1) == (3, Fr(-1, 2))
    assert killing_harmonic_condition_2d(1, -1) is None
    assert killing_harmonic_condition_2d(1, 1) == (3, Fr(-1, 2))


def test_general_killing_condition_examples():
    assert general_killing_condition(2, 1, 1, -2, (3, -0.5)) == (0, 0, 0)
    assert general_killing_condition(2, -1, -1, 2, (3, -0.5)) == (0, 0, 0)
    for lam in (-2.0, 0.5, 1.0):
        k0, k1, k2 = general_killing_condition(2, 1, lam, -2 * lam, (3.0, 0.0))
        assert k1 == 1.0  # eps (n - 1) survives when q = 0


def test_exact():
    assert exact(-0.5) == Fr(-1, 2)
    assert exact(1 / 3) == Fr(1, 3)
    assert exact(Fr(2, 7)) == Fr(2, 7)
    assert exact(np.sqrt(2)) != Fr(1)


def test_constant_length_examples():
    Z = KillingField(S(3, 0), np.zeros((4, 4)))
    for pq in ((0, 0), (2, 5), (-1, -1)):
        assert constant_length_check(Z, 0, pq)
    hopf = np.zeros((4, 4))
    hopf[0, 1], hopf[1, 0], hopf[2, 3], hopf[3, 2] = -1, 1, -1, 1
    Hf = KillingField(S(3, 0), hopf)
    for q in (-4.0, 0.0, 1.5):
        assert constant_length_check(Hf, 1, (2, q))
        assert not constant_length_check(Hf, 1, (1, q))
    B = np.zeros((4, 4))
    B[2, 0] = B[0, 2] = B[1, 3] = B[3, 1] = 1
    K = KillingField(S(3, 2), B)
    for q in (-1.0, 0.0, 3.0):
        r = constant_length_check(K, -1, (0, q))
        assert r
    assert not constant_length_check(K, -1, (1, 0))
    tau = tau_pq(K, sample_points(S(3, 2), 10), (1.0, 2.0))
    assert np.allclose(tau.T_p, 0)
    with pytest.raises(NotConstantLength):
        constant_length_check(HARM_K, 1, (3, -0.5))


@pytest.mark.parametrize("M", list(SURFACES) + [S(3, 1), H(3, 1)])
def test_weitzenbock(M, rng):
    X = sample_points(M, 30, 8)
    fields = [
        ConformalGradientField(M, random_pole(M, rng)),
        KillingField(M, random_skew(M, rng)),
        random_tangent_field(M, rng),
        KillingField(M, np.zeros((M.dim, M.dim))),
    ]
    for fld in fields:
        assert np.max(weitzenbock_residual(fld, X)) < 1e-8
    assert weitzenbock_residual(ConformalGradientField(H21, (0, 0, 1)), np.array([1.0, 1, 1])) < 1e-9


def test_first_variation_zero_rho():
    rho = AmbientPolyField(H21, tuple(ConformalGradientField(H21, (0, 0, 0)).to_poly().components))
    fv = first_variation(HARM_K, rho, (0, 0), GraphPatch(H21, (1.0, 0.0), 0.4))
    assert fv.numeric == 0.0 and fv.analytic == 0.0


def test_first_variation_singular_patch():
    # <sigma, sigma> = -(1 + x^2) crosses -1 at x = 0
    rho = ConformalGradientField(H21, (1, 0, 0))
    with pytest.raises(SingularPatch):
        first_variation(HARM_K, rho, (1, 1), GraphPatch(H21, (0.0, 0.0), 0.3))


def test_graph_patch_geometry():
    patch = GraphPatch(H21, (1.0, 0.0), 0.4)
    U, W = patch.nodes(8)
    X = patch.embed(U)
    assert np.allclose(X[:, 0] ** 2 - X[:, 1] ** 2 - X[:, 2] ** 2, -1)
    # flat box volume with Jacobian weight is positive and bounded
    assert (patch.volume(U) > 0).all()
    assert W.sum() == pytest.approx(0.8**2)
