"""Generalised Cheeger-Gromoll metrics h_{p,q} on the tangent bundle."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import Singular
from .fields import Field, local_geometry
from .pseudolin import as_signature, inner
from .quadric import Quadric, require_points

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class MetricParams:
    p: float
    q: float

    def __iter__(self):
        yield self.p
        yield self.q


def as_params(params) -> MetricParams:
    if isinstance(params, MetricParams):
        return params
    p, q = params
    return MetricParams(float(p), float(q))


@dataclass(frozen=True)
class TangentBundleVector:
    """A tangent vector to TM at the fibre point e over x, split as H + V."""

    quadric: Quadric
    base: np.ndarray
    fiber: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray

    def __post_init__(self):
        M = self.quadric
        x = require_points(M, self.base)
        s = M.signature
        for name in ("fiber", "horizontal", "vertical"):
            w = np.asarray(getattr(self, name), dtype=float)
            if abs(inner(w, x, s)) > 1e-9 * max(1.0, float(np.abs(w).max())):
                raise ValueError(f"{name} part is not tangent at the base point")
            object.__setattr__(self, name, w)
        object.__setattr__(self, "base", x)


def omega(e_len, tol: float = SINGULAR_TOL):
    """1 / |1 + <e,e>|; raises Singular on the sphere bundle <e,e> = -1."""
    e_len = np.asarray(e_len, dtype=float)
    den = np.abs(1.0 + e_len)
    if np.any(den <= tol):
        raise Singular("fibre point on the singular set <e,e> = -1")
    out = 1.0 / den
    return float(out) if out.ndim == 0 else out


def h_pq(params, A: TangentBundleVector, B: TangentBundleVector) -> float:
    """g(dpi A, dpi B) + omega^p (<KA, KB> + q <KA, e><e, KB>)."""
    p, q = as_params(params)
    if A.quadric != B.quadric or not (
        np.array_equal(A.base, B.base) and np.array_equal(A.fiber, B.fiber)
    ):
        raise ValueError("tangent vectors live over different fibre points")
    s = A.quadric.signature
    e = A.fiber
    w = omega(inner(e, e, s))
    vert = inner(A.vertical, B.vertical, s) + q * inner(A.vertical, e, s) * inner(e, B.vertical, s)
    return inner(A.horizontal, B.horizontal, s) + w**p * vert


class SignatureClass(str, Enum):
    SASAKI_LIKE = "SasakiLike"
    DEGENERATE = "Degenerate"
    INDEX_SHIFTED = "IndexShifted"


def signature_class(params, e_len: float, tol: float = 1e-12) -> SignatureClass:
    """Where the fibre point sits relative to the sphere bundle <e,e> = -1/q."""
    p, q = as_params(params)
    omega(e_len)
    if q == 0:
        return SignatureClass.SASAKI_LIKE
    crit = -1.0 / q
    if abs(e_len - crit) <= tol * max(1.0, abs(crit)):
        return SignatureClass.DEGENERATE
    if (q < 0 and e_len < crit) or (q > 0 and e_len > crit):
        return SignatureClass.SASAKI_LIKE
    return SignatureClass.INDEX_SHIFTED


def vertical_form(params, e, s) -> np.ndarray:
    """Gram matrix (standard ambient basis) of the vertical block of h_{p,q} at e."""
    p, q = as_params(params)
    s = as_signature(s)
    e = np.asarray(e, dtype=float)
    Ge = s.diag * e
    return omega(inner(e, e, s)) ** p * (s.matrix + q * np.outer(Ge, Ge))


def energy_terms(field: Field, x, params, method: str = "auto"):
    """Vertical and total (p,q)-energy densities at one or more points."""
    p, q = as_params(params)
    geo = local_geometry(field, x, method)
    w = omega(2 * geo.F)
    ev = 0.5 * w**p * (geo.dsig_sq + q * geo.grad_F_sq)
    return ev, ev + field.quadric.n / 2


def vertical_energy_density(field: Field, x, params, method: str = "auto"):
    ev, _ = energy_terms(field, x, params, method)
    return float(ev[0]) if np.ndim(x) == 1 else ev


def energy_density(field: Field, x, params, method: str = "auto"):
    _, e = energy_terms(field, x, params, method)
    return float(e[0]) if np.ndim(x) == 1 else e
