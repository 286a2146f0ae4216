import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmfield.pseudolin import inner, is_anti_isometry
from harmfield.quadric import (
    SURFACES,
    H,
    S,
    canonical_anti_isometry,
    contains,
    curvature,
    require_points,
    sample_points,
    tangent_frame,
    tangent_project,
)

H21 = H(2, 1)


def test_basic_properties():
    assert H21.signature.indicators == (1, -1, -1)
    assert S(2, 1).signature.indicators == (1, 1, -1)
    assert H21.epsilon == -1 and S(2, 0).epsilon == 1
    assert H21.dual() == S(2, 1)
    assert H(2, 2).dual() == S(2, 0)


def test_contains_examples():
    assert contains(S(2, 0), (1, 0, 0))
    assert contains(H21, (1, 1, 1))
    assert not contains(H21, (1, 0, 0))


def test_tangent_project_examples():
    x = np.array([1.0, 1, 1])
    assert np.allclose(tangent_project(H21, x, (0, 0, 1)), (-1, -1, 0))
    assert np.allclose(tangent_project(H21, x, x), 0)
    w = np.array([-1.0, -1, 0])
    assert np.allclose(tangent_project(H21, x, w), w)


def test_tangent_frame_examples():
    fr = tangent_frame(S(2, 0), (0, 0, 1))
    assert sorted(fr.indicators) == [1, 1]
    assert np.allclose(np.abs(fr.vectors[:, 2]), 0)
    fr = tangent_frame(H21, (0, 0, 1))
    assert sorted(fr.indicators) == [-1, 1]
    with pytest.raises(ValueError):
        require_points(H21, (1, 0, 0))


def test_curvature():
    assert curvature(S(2, 0)) == 1
    assert curvature(H21) == -1
    assert curvature(S(3, 1, r=2.0)) == pytest.approx(0.25)


def test_canonical_anti_isometry_examples():
    P = canonical_anti_isometry(2, 1)
    assert np.allclose(P @ np.array([1.0, 2, 3]), (2, 3, 1))
    assert np.allclose(canonical_anti_isometry(2, 2), np.eye(3))
    assert contains(S(2, 1), P @ np.array([1.0, 1, 1]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_canonical_anti_isometry_is_anti(n):
    for v in range(n + 1):
        M = H(n, v)
        P = canonical_anti_isometry(n, v)
        assert is_anti_isometry(P, M.signature, M.dual().signature)
        X = sample_points(M, 20, 1)
        assert contains(M.dual(), X @ P.T).all()


@pytest.mark.parametrize("M", list(SURFACES) + [S(3, 1), H(3, 1), S(4, 2)])
@given(seed=st.integers(0, 10_000))
def test_samples_on_quadric_with_frames(M, seed):
    X = sample_points(M, 10, seed)
    assert contains(M, X).all()
    assert np.abs(X).max() < 4.0
    fr = tangent_frame(M, X[0])
    G = np.array([[inner(u, v, M.signature) for v in fr.vectors] for u in fr.vectors])
    assert np.allclose(G, np.diag(fr.indicators), atol=1e-9)
    assert np.allclose(inner(fr.vectors, X[0], M.signature), 0, atol=1e-9)
    assert sum(1 for e in fr.indicators if e < 0) == M.v


def test_sampling_is_deterministic():
    assert np.array_equal(sample_points(H21, 50, 3), sample_points(H21, 50, 3))
