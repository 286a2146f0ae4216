import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from harmfield.cgmetric import (
    SignatureClass,
    TangentBundleVector,
    energy_density,
    h_pq,
    omega,
    signature_class,
    vertical_energy_density,
    vertical_form,
)
from harmfield.errors import Singular
from harmfield.fields import ConformalGradientField, KillingField
from harmfield.quadric import H, S, sample_points, tangent_frame, tangent_project

H21 = H(2, 1)


def test_omega_examples():
    assert omega(0.0) == 1.0
    assert omega(1.0) == 0.5
    with pytest.raises(Singular):
        omega(-1.0)


def _tbv(M, x, e, hor, ver):
    return TangentBundleVector(M, x, e, hor, ver)


def test_h_pq_sasaki_horizontal_block():
    M = S(2, 1)
    x = np.array([1.0, 0, 0])
    e = np.array([0.0, 0.3, 0.1])
    A = _tbv(M, x, e, (0, 1, 0), (0, 0, 0))
    B = _tbv(M, x, e, (0, 2, 1), (0, 0, 0))
    assert h_pq((0, 0), A, B) == pytest.approx(2.0)


def test_h_pq_q_term_annihilated():
    M = S(3, 0)
    x = np.array([1.0, 0, 0, 0])
    e = np.array([0.0, 1.0, 0, 0])
    A = _tbv(M, x, e, (0, 0, 0, 0), (0, 0, 1, 0))
    B = _tbv(M, x, e, (0, 0, 0, 0), (0, 0, 0, 1))
    for q in (-3.0, 0.0, 7.0):
        assert h_pq((2.0, q), A, B) == 0.0


def test_tangent_bundle_vector_validates():
    with pytest.raises(ValueError):
        _tbv(S(2, 0), (0, 0, 1), (0, 0, 1), (1, 0, 0), (0, 0, 0))


@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_h_pq_symmetric(seed, p, q):
    rng = np.random.default_rng(seed)
    M = H21
    x = sample_points(M, 1, seed)[0]
    e, h1, h2, v1, v2 = (tangent_project(M, x, rng.normal(size=3)) for _ in range(5))
    assume(abs(1 + e @ (M.signature.diag * e)) > 1e-3)
    A, B = _tbv(M, x, e, h1, v1), _tbv(M, x, e, h2, v2)
    assert h_pq((p, q), A, B) == pytest.approx(h_pq((p, q), B, A), abs=1e-12)


def test_signature_class_examples():
    assert signature_class((1, -0.5), 2.0) is SignatureClass.DEGENERATE
    assert signature_class((1, 0.0), 5.0) is SignatureClass.SASAKI_LIKE
    assert signature_class((1, -0.5), 0.0) is SignatureClass.SASAKI_LIKE
    assert signature_class((1, -0.5), 3.0) is SignatureClass.INDEX_SHIFTED
    with pytest.raises(Singular):
        signature_class((0, 1), -1.0)


@pytest.mark.parametrize("M", [S(2, 0), S(2, 1), H21, H(3, 1), S(3, 2)])
@given(seed=st.integers(0, 10_000), q=st.floats(-4, 4), scale=st.floats(0.05, 3))
def test_signature_class_matches_inertia(M, seed, q, scale):
    rng = np.random.default_rng(seed)
    x = sample_points(M, 1, seed)[0]
    e = scale * tangent_project(M, x, rng.normal(size=M.dim))
    s = M.signature
    e_len = float(e @ (s.diag * e))
    assume(abs(1 + e_len) > 1e-3)
    assume(q == 0 or abs(e_len + 1 / q) > 1e-6 * max(1, abs(1 / q)))
    fr = tangent_frame(M, x)
    E = fr.vectors
    gram = E @ vertical_form((1.0, q), e, s) @ E.T
    ev = np.linalg.eigvalsh(gram)
    base_neg = sum(1 for i in fr.indicators if i < 0)
    cls = signature_class((1.0, q), e_len)
    same = int((ev < 0).sum()) == base_neg
    assert same == (cls is SignatureClass.SASAKI_LIKE)


def test_energy_zero_field():
    for M in (S(2, 0), H21, S(3, 1)):
        Z = ConformalGradientField(M, np.zeros(M.dim))
        X = sample_points(M, 10)
        for pq in ((0, 0), (3, -0.5), (-2, 4)):
            assert np.allclose(energy_density(Z, X, pq), M.n / 2)
            assert np.allclose(vertical_energy_density(Z, X, pq), 0)


def test_energy_killing_example():
    # <nabla sigma, nabla sigma> = <A,A> - 4 eps F = 2 - 4 = -2 at (1,1,1)
    K = KillingField(H21, [[0, 0, 0], [0, 0, 1], [0, -1, 0]])
    x = np.array([1.0, 1, 1])
    assert vertical_energy_density(K, x, (0, 0)) == pytest.approx(-1.0)
    assert energy_density(K, x, (0, 0)) == pytest.approx(0.0)
    assert vertical_energy_density(K, x, (0, 0), method="generic") == pytest.approx(-1.0)


def test_energy_singular():
    K = KillingField(H21, [[0, 0, 0], [0, 0, 1], [0, -1, 0]])
    x = np.array([0.0, 1.0, 0.0])  # sigma = (0, 0, -1), <sigma,sigma> = -1
    with pytest.raises(Singular):
        energy_density(K, x, (1, 1))
