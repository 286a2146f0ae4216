"""Pseudo-spheres S^n_v(r) and pseudo-hyperbolic spaces H^n_v(r)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .pseudolin import Frame, Signature, inner, orthonormalize_batch, quad

Kind = Literal["sphere", "hyperbolic"]


@dataclass(frozen=True)
class Quadric:
    """The hyperquadric {Q(x) = eps r^2} of dimension n and index v.

    A sphere lives in R^{n+1}_v, a hyperbolic space in R^{n+1}_{v+1}. Both
    components of S^n_n and H^n_0 are kept.
    """

    kind: Kind
    n: int
    v: int
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sphere", "hyperbolic"):
            raise ValueError(f"unknown quadric kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("quadric dimension must be at least 2")
        if not 0 <= self.v <= self.n:
            raise ValueError(f"index {self.v} outside 0..{self.n}")
        if not self.r > 0:
            raise ValueError("radius must be positive")

    @property
    def epsilon(self) -> int:
        return 1 if self.kind == "sphere" else -1

    @property
    def ambient_index(self) -> int:
        return self.v if self.kind == "sphere" else self.v + 1

    @property
    def signature(self) -> Signature:
        return Signature.from_index(self.n + 1, self.ambient_index)

    @property
    def dim(self) -> int:
        """Ambient dimension n + 1."""
        return self.n + 1

    @property
    def is_unit(self) -> bool:
        return self.r == 1.0

    @property
    def name(self) -> str:
        base = f"{'S' if self.kind == 'sphere' else 'H'}^{self.n}_{self.v}"
        return base if self.is_unit else f"{base}({self.r:g})"

    def dual(self) -> "Quadric":
        """Anti-isometric partner: H^n_v <-> S^n_{n-v}."""
        other = "sphere" if self.kind == "hyperbolic" else "hyperbolic"
        return Quadric(other, self.n, self.n - self.v, self.r)

    def __str__(self):
        return self.name


def S(n: int, v: int, r: float = 1.0) -> Quadric:
    return Quadric("sphere", n, v, r)


def H(n: int, v: int, r: float = 1.0) -> Quadric:
    return Quadric("hyperbolic", n, v, r)


#: the six unit quadrics of dimension two
SURFACES = (S(2, 0), S(2, 1), S(2, 2), H(2, 0), H(2, 1), H(2, 2))


def curvature(M: Quadric) -> float:
    return M.epsilon / M.r**2


def contains(M: Quadric, x, tol: float = 1e-9):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != M.dim:
        raise ValueError(f"point dimension {x.shape[-1]} does not match {M}")
    res = np.abs(quad(x, M.signature) - M.epsilon * M.r**2) <= tol
    return bool(res) if np.ndim(res) == 0 else res


def require_points(M: Quadric, x, tol: float = 1e-8) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    ok = contains(M, x, tol=tol * max(1.0, float(np.max(np.abs(x))) ** 2))
    if not np.all(ok):
        raise ValueError(f"point(s) not on {M}")
    return x


def tangent_project(M: Quadric, x, w) -> np.ndarray:
    """Orthogonal projection of ambient vectors onto T_x M."""
    s = M.signature
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    c = inner(w, x, s) / (M.epsilon * M.r**2)
    return w - np.asarray(c)[..., None] * x


def tangent_frame_batch(M: Quadric, X) -> tuple[np.ndarray, np.ndarray]:
    """Frames (N, n, n+1) and indicators (N, n) at points X of shape (N, n+1)."""
    X = require_points(M, np.atleast_2d(X))
    d = M.dim
    basis = np.broadcast_to(np.eye(d), (X.shape[0], d, d))
    cand = tangent_project(M, X[:, None, :], basis)
    return orthonormalize_batch(cand, M.signature, k=M.n)


def tangent_frame(M: Quadric, x) -> Frame:
    frame, ind = tangent_frame_batch(M, np.asarray(x, dtype=float)[None])
    return Frame(frame[0], tuple(int(e) for e in ind[0]))


def canonical_anti_isometry(n: int, v: int) -> np.ndarray:
    """Permutation matrix of (x_1..x_{n+1}) -> (x_{n+1-v},..,x_{n+1},x_1,..,x_{n-v}).

    Carries H^n_v anti-isometrically onto S^n_{n-v}.
    """
    if not 0 <= v <= n:
        raise ValueError(f"index {v} outside 0..{n}")
    d = n + 1
    order = list(range(n - v, d)) + list(range(0, n - v))
    P = np.zeros((d, d))
    P[np.arange(d), order] = 1.0
    return P


def sample_points(
    M: Quadric,
    count: int,
    seed: int | np.random.Generator = 0,
    min_ratio: float = 0.1,
) -> np.ndarray:
    """Deterministic pseudo-random points on M.

    Gaussian ambient directions d with the right sign of Q(d) are scaled onto
    the quadric; directions with |Q(d)| < min_ratio |d|^2 are rejected so that
    sampled points stay within Euclidean norm r / sqrt(min_ratio).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = M.signature
    out: list[np.ndarray] = []
    have = 0
    while have < count:
        D = rng.normal(size=(max(2 * (count - have), 16), M.dim))
        q = quad(D, s)
        keep = (np.sign(q) == M.epsilon) & (np.abs(q) >= min_ratio * np.sum(D * D, axis=1))
        D = D[keep]
        if len(D):
            pts = M.r * D / np.sqrt(np.abs(q[keep]))[:, None]
            out.append(pts)
            have += len(pts)
    return np.concatenate(out)[:count]
