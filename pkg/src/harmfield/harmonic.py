"""Euler-Lagrange operator tau_{p,q}, preharmonicity and metric-parameter solving.

For a vector field sigma with F = <sigma,sigma>/2,

    T_p   = (1 + 2F) rough(sigma) + 2p nabla_{grad F} sigma
    phi   = p <nabla sigma, nabla sigma> - pq g(grad F, grad F) - q (1 + 2F) Lap F
    tau   = T_p - phi sigma

and sigma is (p,q)-harmonic iff tau vanishes identically.  For preharmonic
fields (rough sigma = nu sigma, nabla_{grad F} sigma = zeta sigma) this is the
polynomial identity in F

    (p + q + 2qF) Lap F + 2p (1 + qF) zeta + (1 + 2(1 - p)F) nu = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from numbers import Rational
from typing import Optional

import numpy as np

from .cgmetric import as_params
from .errors import NotConstantLength, NotPreharmonic
from .fields import (
    ConformalGradientField,
    Field,
    KillingField,
    LocalGeometry,
    local_geometry,
)
from .pseudolin import inner
from .quadric import sample_points

#: default harmonicity tolerances (closed-form path, generic polynomial path)
TOL_CLOSED = 1e-9
TOL_GENERIC = 1e-6
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 0


@dataclass
class EulerLagrangeResult:
    T_p: np.ndarray
    phi: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray

    def residual(self) -> np.ndarray:
        """Pointwise sup-norm of tau."""
        return np.abs(self.tau).max(axis=-1)


def tau_pq(field: Field, x, params, method: str = "auto") -> EulerLagrangeResult:
    """Euler-Lagrange field; defined everywhere, including where <sigma,sigma> = -1."""
    single = np.ndim(x) == 1
    r = tau_from_geometry(local_geometry(field, x, method), params)
    if single:
        return EulerLagrangeResult(r.T_p[0], r.phi[0], r.tau[0], r.sigma[0])
    return r


def tau_from_geometry(geo: LocalGeometry, params) -> EulerLagrangeResult:
    """tau_{p,q} from precomputed pointwise data (cheap to re-evaluate for many (p,q))."""
    p, q = as_params(params)
    one = 1.0 + 2.0 * geo.F
    T = one[:, None] * geo.rough + 2.0 * p * geo.cov_grad_F
    phi = p * geo.dsig_sq - p * q * geo.grad_F_sq - q * one * geo.lap_F
    return EulerLagrangeResult(T, phi, T - phi[:, None] * geo.sigma, geo.sigma)


def _uses_closed(field: Field, method: str) -> bool:
    return method != "generic" and isinstance(field, (ConformalGradientField, KillingField))


@dataclass
class HarmonicityVerdict:
    harmonic: bool
    max_residual: float
    samples: int
    tol: float
    method: str

    def __bool__(self):
        return self.harmonic


def is_pq_harmonic(
    field: Field,
    params,
    sample_count: int = DEFAULT_SAMPLES,
    tol: float | None = None,
    seed: int = DEFAULT_SEED,
    method: str = "auto",
    points=None,
) -> HarmonicityVerdict:
    """Sampled check that tau_{p,q}(sigma) = 0."""
    closed = _uses_closed(field, method)
    if tol is None:
        tol = TOL_CLOSED if closed else TOL_GENERIC
    X = sample_points(field.quadric, sample_count, seed) if points is None else np.atleast_2d(points)
    r = tau_pq(field, X, params, method)
    # tau = T_p - phi sigma cancels terms that grow with the field; judge it on their scale
    scale = np.maximum(1.0, np.maximum(np.abs(r.T_p).max(axis=-1), np.abs(r.phi[:, None] * r.sigma).max(axis=-1)))
    worst = float((r.residual() / scale).max())
    return HarmonicityVerdict(worst <= tol, worst, len(X), tol, "closed" if closed else "generic")


# ---------------------------------------------------------------------------
# preharmonic data
# ---------------------------------------------------------------------------

def exact(x) -> Fraction:
    """Rational form of a number; floats within 1e-12 of a small-denominator fraction snap to it."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    x = float(x)
    f = Fraction(x).limit_denominator(10**6)
    if abs(float(f) - x) <= 1e-12 * max(1.0, abs(x)):
        return f
    return Fraction(x)


def preharmonic_lambda(K: KillingField, tol: float = 1e-9) -> Optional[float]:
    """lambda with A^3 = lambda A, or None if A^3 is not a multiple of A."""
    A = K.matrix
    nrm = float(np.sum(A * A))
    if nrm == 0:
        raise ValueError("preharmonic_lambda needs a non-trivial Killing field")
    A3 = A @ A @ A
    lam = float(np.sum(A3 * A)) / nrm
    resid = np.abs(A3 - lam * A).max()
    if resid <= tol * max(1.0, np.abs(A3).max()):
        return lam
    return None


@dataclass(frozen=True)
class PreharmonicData:
    """nu, and zeta = c0 + c1 F, Lap F = d0 + d1 F, with exact coefficients."""

    nu: Fraction
    zeta: tuple[Fraction, Fraction]
    deltaF: tuple[Fraction, Fraction]
    epsilon: int = 1
    n: int = 2
    kind: str = "generic"
    extras: dict = dc_field(default_factory=dict, compare=False)


def spinnaker(field: Field) -> PreharmonicData:
    M = field.quadric
    eps, n = M.epsilon, M.n
    E = Fraction(eps)
    if isinstance(field, ConformalGradientField):
        mu = exact(field.mu)
        return PreharmonicData(
            nu=E,
            zeta=(E * mu, -2 * E),
            deltaF=(-E * n * mu, 2 * E * (n + 1)),
            epsilon=eps,
            n=n,
            kind="cgf",
            extras={"mu": mu},
        )
    if isinstance(field, KillingField):
        lam = preharmonic_lambda(field)
        if lam is None:
            raise NotPreharmonic("A^3 is not proportional to A")
        lam = exact(lam)
        nA = exact(field.norm)
        return PreharmonicData(
            nu=E * (n - 1),
            zeta=(-lam, -2 * E),
            deltaF=(-nA, 2 * E * (n + 1)),
            epsilon=eps,
            n=n,
            kind="killing",
            extras={"lambda": lam, "A_norm": nA},
        )
    raise TypeError("spinnaker is defined for conformal gradient and Killing fields")


def harmonicity_polynomial(data: PreharmonicData, params) -> tuple:
    """Coefficients (of F^0, F^1, F^2) of the preharmonic harmonicity identity."""
    p, q = params if not hasattr(params, "p") else (params.p, params.q)
    nu = data.nu
    c0, c1 = data.zeta
    d0, d1 = data.deltaF
    k0 = (p + q) * d0 + 2 * p * c0 + nu
    k1 = (p + q) * d1 + 2 * q * d0 + 2 * p * c1 + 2 * p * q * c0 + 2 * (1 - p) * nu
    k2 = 2 * q * d1 + 2 * p * q * c1
    return (k0, k1, k2)


class InfiniteSolutionSet(ValueError):
    """The harmonicity identity holds on a whole curve of metric parameters."""


def _linear_pair(a1, b1, a0, b0) -> Optional[set]:
    """Common roots of a1 t + b1 = 0 and a0 t + b0 = 0; None means every t."""
    roots = None
    for a, b in ((a1, b1), (a0, b0)):
        if a == 0:
            if b != 0:
                return set()
            continue
        r = -b / a
        if roots is None:
            roots = {r}
        elif r not in roots:
            return set()
    return roots


def _isqrt_fraction(f: Fraction) -> Optional[Fraction]:
    if f < 0:
        return None
    a, b = math.isqrt(f.numerator), math.isqrt(f.denominator)
    if a * a == f.numerator and b * b == f.denominator:
        return Fraction(a, b)
    return None


def _quadratic_roots(a, b, c) -> Optional[set]:
    if a == 0:
        return _linear_pair(b, c, 0, 0)
    disc = b * b - 4 * a * c
    if disc < 0:
        return set()
    r = _isqrt_fraction(Fraction(disc))
    if r is None:
        r = math.sqrt(disc)
    return {(-b + r) / (2 * a), (-b - r) / (2 * a)}


def solve_metric_params(data: PreharmonicData) -> set[tuple[Fraction, Fraction]]:
    """All (p,q) making every coefficient of the harmonicity identity vanish.

    Branches: (i) q = 0; (ii) q != 0, so the F^2 coefficient forces
    d1 + p c1 = 0 and the remaining equations are linear in q.
    """
    nu = Fraction(data.nu)
    c0, c1 = (Fraction(c) for c in data.zeta)
    d0, d1 = (Fraction(d) for d in data.deltaF)
    out: set = set()

    # (i) q = 0: k1 = p (d1 + 2 c1 - 2 nu) + 2 nu, k0 = p (d0 + 2 c0) + nu
    ps = _linear_pair(d1 + 2 * c1 - 2 * nu, 2 * nu, d0 + 2 * c0, nu)
    if ps is None:
        raise InfiniteSolutionSet("every p solves the q = 0 branch")
    out |= {(p, Fraction(0)) for p in ps}

    # (ii) q != 0
    if c1 != 0:
        p = -d1 / c1
        qs = _linear_pair(
            d1 + 2 * d0 + 2 * p * c0, p * d1 + 2 * p * c1 + 2 * (1 - p) * nu,
            d0, p * d0 + 2 * p * c0 + nu,
        )
        if qs is None:
            raise InfiniteSolutionSet(f"every q solves the p = {p} branch")
        out |= {(p, q) for q in qs if q != 0}
    elif d1 == 0:
        # k0 = (p + q) d0 + 2p c0 + nu, k1 = 2q d0 + 2pq c0 + 2(1 - p) nu
        if d0 != 0:
            # q = -(p (d0 + 2c0) + nu) / d0 substituted into k1
            a = -(d0 + 2 * c0) / d0
            b = -nu / d0
            # k1 = 2 (a p + b)(d0 + p c0) + 2 (1 - p) nu
            qa = 2 * a * c0
            qb = 2 * a * d0 + 2 * b * c0 - 2 * nu
            qc = 2 * b * d0 + 2 * nu
            ps2 = _quadratic_roots(qa, qb, qc)
            if ps2 is None:
                raise InfiniteSolutionSet("a curve of (p, q) solves the identity")
            for p in ps2:
                q = a * p + b
                if q != 0:
                    out.add((p, q))
        else:
            ps2 = _linear_pair(2 * c0, nu, 0, 0)
            if ps2 is None:
                raise InfiniteSolutionSet("a curve of (p, q) solves the identity")
            for p in ps2:
                qs = _linear_pair(2 * p * c0, 2 * (1 - p) * nu, 0, 0)
                if qs is None:
                    raise InfiniteSolutionSet("a curve of (p, q) solves the identity")
                out |= {(p, q) for q in qs if q != 0}
    return out


def classify_cgf(n: int, mu) -> set[tuple[Fraction, Fraction]]:
    """Metric parameters of a harmonic conformal gradient field, by pole length."""
    if n < 2:
        raise ValueError("n must be at least 2")
    mu = exact(mu)
    if mu >= 0:
        if n > 2 and mu == Fraction(1, n - 2):
            return {(Fraction(n + 1), Fraction(2 - n))}
        return set()
    if mu != -1:
        return set()
    out = {(Fraction(n + 1), Fraction(1 + n - n * n, n))}
    if n > 2:
        out.add((Fraction(1, 2 - n), Fraction(0)))
    return out


def killing_harmonic_condition_2d(epsilon: int, lam, tol: float = 1e-12):
    """(3, -1/2) if lambda = epsilon, else None."""
    if abs(float(lam) - epsilon) <= tol:
        return (Fraction(3), Fraction(-1, 2))
    return None


def general_killing_condition(n: int, epsilon: int, lam, A_norm, params) -> tuple:
    """Coefficients of (2F)^0, (2F)^1, (2F)^2 in the Killing harmonicity identity."""
    p, q = params if not hasattr(params, "p") else (params.p, params.q)
    e = epsilon
    k2 = e * (n + 1 - p) * q
    k1 = e * (n - 1 + (n + 1) * q) - p * q * lam - q * A_norm
    k0 = e * (n - 1) - 2 * p * lam - (p + q) * A_norm
    return (k0, k1, k2)


# ---------------------------------------------------------------------------
# reductions and identities
# ---------------------------------------------------------------------------

@dataclass
class ConstantLengthReport:
    holds: bool
    max_residual: float
    tau_agreement: float

    def __bool__(self):
        return self.holds


def constant_length_check(
    field: Field, k: float, params, points=None, tol: float = 1e-8, method: str = "auto"
) -> ConstantLengthReport:
    """Check (1 + k) rough(sigma) = p <nabla sigma, nabla sigma> sigma at samples."""
    p, q = as_params(params)
    X = sample_points(field.quadric, DEFAULT_SAMPLES, DEFAULT_SEED) if points is None else np.atleast_2d(points)
    geo = local_geometry(field, X, method)
    length = 2 * geo.F
    if np.abs(length - k).max() > tol * max(1.0, abs(k)):
        raise NotConstantLength(
            f"<sigma,sigma> ranges over [{length.min():.6g}, {length.max():.6g}], not {k}"
        )
    reduced = (1 + k) * geo.rough - (p * geo.dsig_sq)[:, None] * geo.sigma
    res = np.abs(reduced).max(axis=1)
    tau = tau_pq(field, X, (p, q), method).tau
    agree = float(np.abs(tau - reduced).max())
    if agree > 1e-6:
        raise AssertionError(f"tau disagrees with the constant-length reduction by {agree:.3e}")
    worst = float(res.max())
    return ConstantLengthReport(worst <= tol, worst, agree)


def weitzenbock_residual(field: Field, x, method: str = "generic"):
    """|<rough sigma, sigma> - <nabla sigma, nabla sigma> - Lap F|."""
    geo = local_geometry(field, x, method)
    s = field.quadric.signature
    r = np.abs(inner(geo.rough, geo.sigma, s) - geo.dsig_sq - geo.lap_F)
    return float(r[0]) if np.ndim(x) == 1 else r


from .variation import (  # noqa: E402  (re-exported as part of the engine)
    FirstVariation,
    GraphPatch,
    PolynomialBump,
    first_variation,
)
