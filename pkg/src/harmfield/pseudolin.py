"""Linear algebra on pseudo-Euclidean space R^{n+1}_u.

Vectors are plain numpy arrays; every pointwise routine broadcasts over
leading axes so that batches of sample points can be handled in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NullPivot

#: pivot threshold for indefinite Gram-Schmidt
NULL_PIVOT_TOL = 1e-8


@dataclass(frozen=True)
class Signature:
    """Indicator symbols of the standard basis, ordered (+...+, -...-)."""

    indicators: tuple[int, ...]

    def __post_init__(self):
        ind = tuple(int(e) for e in self.indicators)
        if any(e not in (1, -1) for e in ind):
            raise ValueError(f"indicators must be +1 or -1, got {self.indicators}")
        if any(a < b for a, b in zip(ind, ind[1:])):
            raise ValueError("positive indicators must precede negative ones")
        object.__setattr__(self, "indicators", ind)

    @classmethod
    def from_index(cls, dim: int, index: int) -> "Signature":
        if not 0 <= index <= dim:
            raise ValueError(f"index {index} out of range for dimension {dim}")
        return cls((1,) * (dim - index) + (-1,) * index)

    @property
    def dim(self) -> int:
        return len(self.indicators)

    @property
    def index(self) -> int:
        return self.indicators.count(-1)

    @property
    def diag(self) -> np.ndarray:
        return np.asarray(self.indicators, dtype=float)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)

    def __len__(self):
        return self.dim

    def __str__(self):
        return "(" + ",".join("+" if e > 0 else "-" for e in self.indicators) + ")"


def as_signature(s) -> Signature:
    return s if isinstance(s, Signature) else Signature(tuple(s))


def inner(x, y, s) -> np.ndarray | float:
    """Pseudo-Euclidean inner product along the last axis."""
    s = as_signature(s)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != s.dim or y.shape[-1] != s.dim:
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]}, {y.shape[-1]} vs signature {s.dim}"
        )
    out = np.sum(x * y * s.diag, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def quad(x, s):
    return inner(x, x, s)


def adjoint(A, s) -> np.ndarray:
    """Metric adjoint G^{-1} A^T G of a square matrix."""
    g = as_signature(s).diag
    return (np.asarray(A, dtype=float).T * g[None, :]) * g[:, None]


def is_skew(A, s, tol: float = 1e-12) -> bool:
    """True iff a_ij = -e_i e_j a_ji entrywise, within ``tol``."""
    s = as_signature(s)
    A = np.asarray(A, dtype=float)
    if A.shape != (s.dim, s.dim):
        raise ValueError(f"matrix shape {A.shape} does not match signature {s}")
    e = s.diag
    return bool(np.all(np.abs(A + np.outer(e, e) * A.T) <= tol))


@dataclass(frozen=True)
class SkewMatrix:
    entries: np.ndarray
    signature: Signature

    def __post_init__(self):
        A = np.array(self.entries, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "signature", as_signature(self.signature))
        if not is_skew(A, self.signature, tol=1e-12 * max(1.0, np.abs(A).max())):
            raise ValueError("matrix is not skew-adjoint for the given signature")

    def cube(self) -> "SkewMatrix":
        return SkewMatrix(self.entries @ self.entries @ self.entries, self.signature)

    def norm(self) -> float:
        return skew_norm(self.entries, self.signature)


def skew_norm(A, s=None) -> float:
    """Pseudo-length <A,A> = sum_i e_i <A e_i, A e_i>."""
    if isinstance(A, SkewMatrix):
        A, s = A.entries, A.signature
    e = as_signature(s).diag
    A = np.asarray(A, dtype=float)
    # <A e_i, A e_i> = sum_j e_j a_ji^2
    return float(np.einsum("i,j,ji->", e, e, A * A))


@dataclass(frozen=True)
class Frame:
    """Orthonormal vectors (rows of ``vectors``) with their indicator symbols."""

    vectors: np.ndarray
    indicators: tuple[int, ...]

    def gram(self, s) -> np.ndarray:
        V = self.vectors
        return (V * as_signature(s).diag) @ V.T

    def check(self, s, tol: float = 1e-10) -> bool:
        return bool(np.all(np.abs(self.gram(s) - np.diag(self.indicators)) <= tol))


def orthonormalize_batch(candidates, s, k: int | None = None, tol: float = NULL_PIVOT_TOL):
    """Pivoted Gram-Schmidt over a batch of candidate sets.

    ``candidates`` has shape (N, m, d). At every step the remaining candidate
    of largest |<v,v>| is normalised and projected out of the others. Returns
    frames of shape (N, k, d) and indicators (N, k).
    """
    s = as_signature(s)
    g = s.diag
    C = np.array(candidates, dtype=float)
    N, m, d = C.shape
    k = m if k is None else k
    if k > m:
        raise ValueError("cannot extract more vectors than candidates")
    rows = np.arange(N)
    used = np.zeros((N, m), dtype=bool)
    frame = np.empty((N, k, d))
    ind = np.empty((N, k))
    for step in range(k):
        q = np.einsum("nmd,d,nmd->nm", C, g, C)
        score = np.where(used, -1.0, np.abs(q))
        idx = np.argmax(score, axis=1)
        best = score[rows, idx]
        if np.any(best < tol):
            raise NullPivot(
                f"no candidate with |<v,v>| >= {tol:g} at step {step} "
                f"(worst {best.min():.3e})"
            )
        v = C[rows, idx]
        sgn = np.sign(q[rows, idx])
        v = v / np.sqrt(np.abs(q[rows, idx]))[:, None]
        frame[:, step] = v
        ind[:, step] = sgn
        used[rows, idx] = True
        coef = np.einsum("nmd,d,nd->nm", C, g, v) * sgn[:, None]
        C = C - coef[:, :, None] * v[:, None, :]
    return frame, ind


def orthonormalize(basis: Sequence, s, tol: float = NULL_PIVOT_TOL) -> Frame:
    """Orthonormal frame spanning the same (non-degenerate) subspace."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    frame, ind = orthonormalize_batch(B[None], s, tol=tol)
    return Frame(frame[0], tuple(int(e) for e in ind[0]))


def _form_check(P, s_dom, s_cod, sign: int, tol: float) -> bool:
    P = np.asarray(P, dtype=float)
    gd = as_signature(s_dom).matrix
    gc = as_signature(s_cod).matrix
    if P.shape != (gc.shape[0], gd.shape[0]):
        return False
    return bool(np.all(np.abs(P.T @ gc @ P - sign * gd) <= tol))


def is_isometry(P, s_dom, s_cod=None, tol: float = 1e-10) -> bool:
    return _form_check(P, s_dom, s_dom if s_cod is None else s_cod, 1, tol)


def is_anti_isometry(P, s_dom, s_cod, tol: float = 1e-10) -> bool:
    return _form_check(P, s_dom, s_cod, -1, tol)


def random_isometry(s, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random element of O(s): exponential of a skew map, times a random reflection."""
    from scipy.linalg import expm

    s = as_signature(s)
    d = s.dim
    M = rng.normal(scale=scale, size=(d, d))
    e = s.diag
    A = 0.5 * (M - np.outer(e, e) * M.T)
    P = expm(A)
    if rng.random() < 0.5:
        # reflection in a non-null unit vector
        while True:
            u = rng.normal(size=d)
            qu = quad(u, s)
            if abs(qu) > 0.2 * (u @ u):
                break
        R = np.eye(d) - 2.0 * np.outer(u, u * e) / qu
        P = P @ R
    return P
