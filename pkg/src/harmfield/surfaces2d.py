"""Killing fields on the six unit quadric surfaces.

A Killing field on a surface in R^3_t is determined by three entries (a, b, c)
of its skew linear extension

    A = [[0, a, b], [-e1 e2 a, 0, c], [-e1 e3 b, -e2 e3 c, 0]]

(e_i the ambient indicators).  A^3 = lambda A always holds, with

    lambda = -e1 e2 a^2 - e1 e3 b^2 - e2 e3 c^2,

and lambda is a complete congruence invariant.  Congruences are built from the
Hodge vector w of A (A = G [w]_x), which transforms as w -> det(P) P w.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .errors import ZeroField
from .fields import ConformalGradientField, Field, KillingField, j_twist
from .pseudolin import as_signature, inner
from .quadric import SURFACES, Quadric, sample_points

LAMBDA_TOL = 1e-9


def _require_surface(M: Quadric):
    if M not in SURFACES:
        raise ValueError(f"expected one of the six unit quadric surfaces, got {M}")


@dataclass(frozen=True)
class Killing2D:
    a: float
    b: float
    c: float
    quadric: Quadric

    def __post_init__(self):
        _require_surface(self.quadric)

    @property
    def abc(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.abc)

    @property
    def matrix(self) -> np.ndarray:
        e1, e2, e3 = self.quadric.signature.diag
        a, b, c = self.a, self.b, self.c
        return np.array(
            [[0.0, a, b], [-e1 * e2 * a, 0.0, c], [-e1 * e3 * b, -e2 * e3 * c, 0.0]]
        ) + 0.0  # no negative zeros

    @property
    def field(self) -> KillingField:
        return KillingField(self.quadric, self.matrix)

    @classmethod
    def from_matrix(cls, M: Quadric, A) -> "Killing2D":
        A = np.asarray(A, dtype=float)
        k = cls(float(A[0, 1]), float(A[0, 2]), float(A[1, 2]), M)
        if np.abs(k.matrix - A).max() > 1e-10 * max(1.0, np.abs(A).max()):
            raise ValueError("matrix is not skew for the ambient signature")
        return k


def lambda_2d(k: Killing2D) -> float:
    e1, e2, e3 = k.quadric.signature.diag
    return float(-e1 * e2 * k.a**2 - e1 * e3 * k.b**2 - e2 * e3 * k.c**2)


# ---------------------------------------------------------------------------
# Hodge vector and isometries
# ---------------------------------------------------------------------------

def _cross_matrix(w) -> np.ndarray:
    w1, w2, w3 = w
    return np.array([[0.0, -w3, w2], [w3, 0.0, -w1], [-w2, w1, 0.0]])


def hodge_vector(k: Killing2D) -> np.ndarray:
    """w with A = G [w]_x."""
    e1, e2, _ = k.quadric.signature.diag
    return np.array([-e2 * k.c, e1 * k.b, -e1 * k.a])


def skew_from_vector(M: Quadric, w) -> Killing2D:
    return Killing2D.from_matrix(M, M.signature.diag[:, None] * _cross_matrix(w))


def _adapted_frame(w, s) -> np.ndarray:
    """Columns (w^, f, g) with a fixed Gram matrix depending only on <w,w>.

    For null w, the columns are (w, m, g) with m null and <w, m> = 1.
    """
    s = as_signature(s)
    G = s.diag
    w = np.asarray(w, dtype=float)
    Q = inner(w, w, s)
    scale = float(w @ w)
    if abs(Q) > 1e-12 * scale:
        u = w / np.sqrt(abs(Q))
        # rows: e_i - <e_i,u><u,u> u
        cands = np.eye(3) - np.sign(Q) * np.outer(G * u, u)
        norms = inner(cands, cands, s)
        f = cands[int(np.argmax(np.abs(norms)))]
        f = f / np.sqrt(abs(inner(f, f, s)))
        first = u
    else:
        r = G * w  # <w, Gw> = |w|^2 > 0
        m = r - inner(r, r, s) / (2 * inner(w, r, s)) * w
        f = m / inner(w, m, s)
        first = w
    g = G * np.cross(first, f)
    g = g / np.sqrt(abs(inner(g, g, s)))
    if abs(Q) > 1e-12 * scale and inner(f, f, s) < inner(g, g, s):
        f, g = g, f
    return np.stack([first, f, g], axis=1)


def isometry_mapping(u, v, s, tol: float = 1e-9) -> np.ndarray:
    """A determinant-one ambient isometry P of R^3 with P u = v."""
    s = as_signature(s)
    Qu, Qv = inner(u, u, s), inner(v, v, s)
    scale = max(1.0, float(np.dot(u, u)), float(np.dot(v, v)))
    if abs(Qu - Qv) > tol * scale:
        raise ValueError("vectors of different pseudo-length are not congruent")
    if not np.any(u) or not np.any(v):
        raise ZeroField("isometry_mapping needs non-zero vectors")
    F1 = _adapted_frame(u, s)
    F2 = _adapted_frame(v, s)
    P = F2 @ np.linalg.inv(F1)
    if np.linalg.det(P) < 0:
        F2[:, 2] *= -1
        P = F2 @ np.linalg.inv(F1)
    return P


def congruence_isometry(k1: Killing2D, k2: Killing2D, tol: float = 1e-9) -> np.ndarray:
    """Ambient isometry P with P A1 P^{-1} = A2."""
    if k1.quadric != k2.quadric:
        raise ValueError("fields live on different quadrics")
    if k1.is_zero or k2.is_zero:
        raise ZeroField("congruence of the zero field")
    return isometry_mapping(hodge_vector(k1), hodge_vector(k2), k1.quadric.signature, tol)


def killing_congruent(k1: Killing2D, k2: Killing2D, tol: float = LAMBDA_TOL) -> bool:
    if k1.quadric != k2.quadric:
        raise ValueError("fields live on different quadrics")
    if k1.is_zero or k2.is_zero:
        raise ZeroField("congruence of the zero field")
    l1, l2 = lambda_2d(k1), lambda_2d(k2)
    return abs(l1 - l2) <= tol * max(1.0, abs(l1), abs(l2))


# ---------------------------------------------------------------------------
# H^2_1: cylinder model, fixed points, normal forms
# ---------------------------------------------------------------------------

H21 = Quadric("hyperbolic", 2, 1)


def _require_h21(k: Killing2D):
    if k.quadric != H21:
        raise ValueError("this construction is specific to H^2_1")
    if k.is_zero:
        raise ZeroField("(a, b, c) = 0")


def cylinder_project(x) -> np.ndarray:
    """psi(x) = x / sqrt(1 + x_1^2), mapping H^2_1 into the solid cylinder."""
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(1.0 + x[..., :1] ** 2)


def cylinder_lift(xb) -> np.ndarray:
    xb = np.asarray(xb, dtype=float)
    return xb / np.sqrt(1.0 - xb[..., :1] ** 2)


def project_field(k: Killing2D):
    """The projected field on the closed cylinder, smooth up to its boundary."""
    a, b, c = k.a, k.b, k.c

    def sigma_bar(P):
        P = np.asarray(P, dtype=float)
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        s = a * y + b * z
        return np.stack([s * (1 - x * x), -s * x * y + a * x + c * z, -s * x * z + b * x - c * y], axis=-1)

    return sigma_bar


class FixedPointCategory(str, Enum):
    NoFixedPoints = "NoFixedPoints"
    TwoIdeal = "TwoIdeal"
    TwoFixed = "TwoFixed"


@dataclass(frozen=True)
class FixedPointReport:
    category: FixedPointCategory
    points: tuple

    def __post_init__(self):
        if len(self.points) not in (0, 2):
            raise ValueError("a Killing field on H^2_1 has 0 or 2 fixed points")


def fixed_points(k: Killing2D, tol: float = LAMBDA_TOL) -> FixedPointReport:
    """Zeros of a Killing field on H^2_1; ideal ones are reported on the cylinder boundary."""
    _require_h21(k)
    lam = lambda_2d(k)
    a, b, c = k.a, k.b, k.c
    scale = max(1.0, a * a + b * b + c * c)
    if lam < -tol * scale:
        return FixedPointReport(FixedPointCategory.NoFixedPoints, ())
    if lam <= tol * scale:
        p = np.array([1.0, b / c, -a / c])
        return FixedPointReport(FixedPointCategory.TwoIdeal, (p + 0.0, -p + 0.0))
    p = np.array([c, b, -a]) / np.sqrt(lam)
    return FixedPointReport(FixedPointCategory.TwoFixed, (p + 0.0, -p + 0.0))


def normal_form_matrix(lam: float, tol: float = LAMBDA_TOL) -> np.ndarray:
    if lam < -tol:
        r = np.sqrt(-lam)
        return np.array([[0.0, 0.0, 0.0], [0.0, 0.0, r], [0.0, -r, 0.0]])
    if lam <= tol:
        return np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
    r = np.sqrt(lam)
    return np.array([[0.0, r, 0.0], [r, 0.0, 0.0], [0.0, 0.0, 0.0]])


def flow(alpha: float, beta: float, t: float) -> np.ndarray:
    """Flow of the infinitesimal isometry [[0,al,be],[al,0,0],[be,0,0]], al^2+be^2 = 1."""
    ch, sh = np.cosh(t), np.sinh(t)
    return np.array(
        [
            [ch, alpha * sh, beta * sh],
            [alpha * sh, beta**2 + alpha**2 * ch, alpha * beta * (ch - 1)],
            [beta * sh, alpha * beta * (ch - 1), alpha**2 + beta**2 * ch],
        ]
    )


def normal_form(k: Killing2D, tol: float = LAMBDA_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(N, P) with P^{-1} A P = N and P an isometry of R^3_2."""
    _require_h21(k)
    a, b, c = k.a, k.b, k.c
    scale = max(1.0, a * a + b * b + c * c)
    lam = lambda_2d(k)
    N = normal_form_matrix(lam, tol * scale)
    if lam < -tol * scale:
        D = np.eye(3)
        if c < 0:
            # diag(1,1,-1) flips the signs of b and c
            D = np.diag([1.0, 1.0, -1.0])
            b, c = -b, -c
        ab = np.hypot(a, b)
        if ab == 0:
            return N, D
        c0 = np.sqrt(-lam)
        t0 = np.arccosh(max(1.0, c / c0))
        return N, D @ flow(b / ab, -a / ab, t0)
    wN = hodge_vector(Killing2D.from_matrix(H21, N))
    P = isometry_mapping(wN, hodge_vector(k), H21.signature, tol=1e-8)
    return N, P


def normal_form_residual(k: Killing2D, N, P) -> tuple[float, float]:
    """(conjugation residual, isometry residual)."""
    s = H21.signature
    conj = np.abs(np.linalg.inv(P) @ k.matrix @ P - N).max()
    iso = np.abs(P.T @ s.matrix @ P - s.matrix).max()
    return float(conj), float(iso)


# ---------------------------------------------------------------------------
# harmonic representatives and sampling helpers
# ---------------------------------------------------------------------------

_CATALOG = {
    "S^2_2": (1.0, 0.0, 0.0),
    "H^2_2": (1.0, 0.0, 0.0),
    "H^2_0": (1.0, 0.0, 0.0),
    "S^2_1": (0.0, 0.0, 1.0),
    "H^2_1": (0.0, 0.0, 1.0),
}


def harmonic_killing_catalog(M: Quadric) -> Optional[Killing2D]:
    """Representative harmonic Killing field (lambda = eps), or None on the round sphere."""
    _require_surface(M)
    abc = _CATALOG.get(M.name)
    return None if abc is None else Killing2D(*abc, M)


def killing_with_lambda(M: Quadric, lam: float, rng: np.random.Generator, tries: int = 64) -> Killing2D:
    """A random Killing2D on M with prescribed lambda."""
    _require_surface(M)
    e1, e2, e3 = M.signature.diag
    coef = np.array([-e1 * e2, -e1 * e3, -e2 * e3])
    for _ in range(tries):
        j = int(rng.integers(3))
        abc = rng.normal(size=3)
        abc[j] = 0.0
        rest = lam - float(coef @ abc**2)
        sq = rest / coef[j]
        if sq < 0:
            continue
        abc[j] = np.sqrt(sq) * rng.choice([-1.0, 1.0])
        if np.any(abc):
            return Killing2D(*abc, M)
    raise ValueError(f"no Killing field with lambda = {lam} on {M}")


def fit_killing(field: Field, count: int = 12, seed: int = 0, tol: float = 1e-10) -> Killing2D:
    """Recover (a, b, c) of a field known to be linear, by least squares."""
    M = field.quadric
    _require_surface(M)
    X = sample_points(M, count, seed)
    V = field(X)
    basis = [Killing2D(*row, M).field(X) for row in np.eye(3)]
    L = np.stack([B.ravel() for B in basis], axis=1)
    coef, *_ = np.linalg.lstsq(L, V.ravel(), rcond=None)
    resid = np.abs(L @ coef - V.ravel()).max()
    if resid > tol * max(1.0, np.abs(V).max()):
        raise ValueError(f"field is not a Killing field (fit residual {resid:.3e})")
    return Killing2D(*(float(c) for c in coef), M)


def fit_cgf(field: Field, count: int = 12, seed: int = 0, tol: float = 1e-10) -> ConformalGradientField:
    """Recover the pole of a conformal gradient field from samples."""
    M = field.quadric
    X = sample_points(M, count, seed)
    V = field(X)
    basis = [ConformalGradientField(M, e)(X) for e in np.eye(M.dim)]
    L = np.stack([B.ravel() for B in basis], axis=1)
    res = least_squares(lambda a: L @ a - V.ravel(), np.zeros(M.dim), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    resid = np.abs(L @ res.x - V.ravel()).max()
    if resid > tol * max(1.0, np.abs(V).max()):
        raise ValueError(f"field is not a conformal gradient field (fit residual {resid:.3e})")
    return ConformalGradientField(M, res.x)


def twist_correspondence(obj, seed: int = 0):
    """J-twist between conformal gradient and Killing fields on S^2_1 / H^2_1.

    A conformal gradient field maps to a Killing2D; a Killing2D (or
    KillingField) maps to a ConformalGradientField.  The zero field maps to
    None.
    """
    if isinstance(obj, Killing2D):
        obj = obj.field
    M = obj.quadric
    if M.name not in ("S^2_1", "H^2_1"):
        raise ValueError("the twist needs a neutral surface")
    if isinstance(obj, ConformalGradientField) and not np.any(obj.pole):
        return None
    if isinstance(obj, KillingField) and not np.any(obj.matrix):
        return None
    tw = j_twist(obj)
    if isinstance(obj, ConformalGradientField):
        return fit_killing(tw, seed=seed)
    if isinstance(obj, KillingField):
        return fit_cgf(tw, seed=seed)
    raise TypeError("twist_correspondence takes conformal gradient or Killing fields")


def isometry_residual(P, M: Quadric) -> float:
    s = M.signature
    return float(np.abs(P.T @ s.matrix @ P - s.matrix).max())


__all__ = [
    "H21",
    "Killing2D",
    "lambda_2d",
    "hodge_vector",
    "skew_from_vector",
    "isometry_mapping",
    "congruence_isometry",
    "killing_congruent",
    "cylinder_project",
    "cylinder_lift",
    "project_field",
    "FixedPointCategory",
    "FixedPointReport",
    "fixed_points",
    "normal_form",
    "normal_form_matrix",
    "normal_form_residual",
    "flow",
    "harmonic_killing_catalog",
    "killing_with_lambda",
    "fit_killing",
    "fit_cgf",
    "twist_correspondence",
    "isometry_residual",
]
