"""Vector fields on unit hyperquadrics and their covariant derivatives.

Three kinds of field are supported: conformal gradient fields (given by a pole
vector), Killing fields (given by a skew linear extension) and arbitrary
tangent fields with polynomial ambient components.  The first two carry
closed-form derivative formulas; every field can be converted to polynomial
form, where derivatives are computed exactly by the Gauss formula

    nabla_X V = tan(D_X V),    tan(w) = w - eps <w, x> x.

Second derivatives use the projected-constant extension E~(y) = E - eps<E,y>y
of a tangent vector E; at the base point nabla_X E~ = 0, so that

    nabla^2_{X,Y} V = tan(D^2 V[X,Y] - eps<X,Y> DV x) - eps <DV Y, x> X.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .errors import DegenerateTangent, NonInvertible
from .poly import (
    Poly,
    compile_polys,
    coordinates,
    cross_poly,
    inner_poly,
    linear_components,
)
from .pseudolin import inner, is_anti_isometry, is_isometry, is_skew, skew_norm
from .quadric import Quadric, require_points, sample_points, tangent_frame_batch, tangent_project


def _unit(M: Quadric):
    if not M.is_unit:
        raise ValueError(f"field-theoretic operations need a unit quadric, got {M}")


@dataclass(frozen=True, eq=False)
class ConformalGradientField:
    """Gradient of x -> <x, a> restricted to the quadric."""

    quadric: Quadric
    pole: np.ndarray

    def __post_init__(self):
        _unit(self.quadric)
        a = np.array(self.pole, dtype=float)
        if a.shape != (self.quadric.dim,):
            raise ValueError(f"pole must have {self.quadric.dim} components")
        a.setflags(write=False)
        object.__setattr__(self, "pole", a)

    @property
    def mu(self) -> float:
        return inner(self.pole, self.pole, self.quadric.signature)

    def alpha(self, X):
        return inner(np.asarray(X, dtype=float), self.pole, self.quadric.signature)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        eps = self.quadric.epsilon
        return self.pole - eps * np.asarray(self.alpha(X))[..., None] * X

    def to_poly(self) -> "AmbientPolyField":
        d = self.quadric.dim
        x = coordinates(d)
        g = self.quadric.signature.indicators
        alpha = Poly.linear([float(ai * ei) for ai, ei in zip(self.pole, g)])
        eps = self.quadric.epsilon
        comps = tuple(Poly.const(float(self.pole[i]), d) - alpha * x[i] * eps for i in range(d))
        return AmbientPolyField(self.quadric, comps)


@dataclass(frozen=True, eq=False)
class KillingField:
    """Restriction of a skew-adjoint linear map A of the ambient space."""

    quadric: Quadric
    matrix: np.ndarray

    def __post_init__(self):
        _unit(self.quadric)
        A = np.array(self.matrix, dtype=float)
        d = self.quadric.dim
        if A.shape != (d, d):
            raise ValueError(f"matrix must be {d}x{d}")
        if not is_skew(A, self.quadric.signature, tol=1e-10 * max(1.0, np.abs(A).max())):
            raise ValueError("matrix is not skew-adjoint for the ambient signature")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    def __call__(self, X):
        return np.asarray(X, dtype=float) @ self.matrix.T

    @property
    def norm(self) -> float:
        """Pseudo-length <A, A> of the linear extension."""
        return skew_norm(self.matrix, self.quadric.signature)

    def to_poly(self) -> "AmbientPolyField":
        return AmbientPolyField(self.quadric, linear_components(self.matrix))


@dataclass(frozen=True, eq=False)
class AmbientPolyField:
    """Tangent field whose ambient components are polynomials."""

    quadric: Quadric
    components: tuple[Poly, ...]
    # (P, P^{-1}, source): evaluate as P source(P^{-1} y) instead of expanding in y,
    # which loses digits once a boost pushes samples far out
    via: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        _unit(self.quadric)
        comps = tuple(self.components)
        if len(comps) != self.quadric.dim or any(c.nvars != self.quadric.dim for c in comps):
            raise ValueError("need one polynomial in n+1 variables per ambient coordinate")
        object.__setattr__(self, "components", comps)

    def to_poly(self) -> "AmbientPolyField":
        return self

    @cached_property
    def _values(self):
        return compile_polys(self.components)

    @cached_property
    def _jac(self):
        d = self.quadric.dim
        return compile_polys([c.deriv(k) for c in self.components for k in range(d)])

    @cached_property
    def _hess(self):
        d = self.quadric.dim
        return compile_polys(
            [c.deriv(k).deriv(l) for c in self.components for k in range(d) for l in range(d)]
        )

    def __call__(self, X):
        if self.via is not None:
            P, Pinv, src = self.via
            return src(np.asarray(X, dtype=float) @ Pinv.T) @ P.T
        return self._values(X)

    def jacobian(self, X):
        """Ambient Jacobian J[..., j, k] = d V_j / d x_k."""
        d = self.quadric.dim
        X = np.asarray(X, dtype=float)
        if self.via is not None:
            P, Pinv, src = self.via
            return np.einsum("ja,...ab,bk->...jk", P, src.jacobian(X @ Pinv.T), Pinv)
        return self._jac(X).reshape(X.shape[:-1] + (d, d))

    def hessian(self, X):
        d = self.quadric.dim
        X = np.asarray(X, dtype=float)
        if self.via is not None:
            P, Pinv, src = self.via
            return np.einsum("ja,...abc,bk,cl->...jkl", P, src.hessian(X @ Pinv.T), Pinv, Pinv)
        return self._hess(X).reshape(X.shape[:-1] + (d, d, d))

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def tangency_residual(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.abs(inner(self(X), X, self.quadric.signature))


Field = Union[ConformalGradientField, KillingField, AmbientPolyField]


# ---------------------------------------------------------------------------
# pointwise evaluation and first derivatives
# ---------------------------------------------------------------------------

def cgf_eval(f: ConformalGradientField, x):
    return f(require_points(f.quadric, x))


def cgf_cov_deriv(f: ConformalGradientField, x, X):
    """nabla_X sigma = -eps alpha(x) X."""
    x = np.asarray(x, dtype=float)
    return -f.quadric.epsilon * np.asarray(f.alpha(x))[..., None] * np.asarray(X, dtype=float)


def killing_eval(K: KillingField, x):
    return K(require_points(K.quadric, x))


def killing_cov_deriv(K: KillingField, x, X):
    """nabla_X sigma = A X - eps <A X, x> x."""
    x = np.asarray(x, dtype=float)
    AX = np.asarray(X, dtype=float) @ K.matrix.T
    eps = K.quadric.epsilon
    return AX - eps * np.asarray(inner(AX, x, K.quadric.signature))[..., None] * x


def generic_cov_deriv(V: Field, x, X):
    """Tangent projection of the ambient directional derivative (exact)."""
    V = V.to_poly()
    x = np.asarray(x, dtype=float)
    DV = V.jacobian(x)
    return tangent_project(V.quadric, x, np.einsum("...jk,...k->...j", DV, np.asarray(X, float)))


def _extension_derivative(M: Quadric, x, X, Y):
    """nabla_X E~_Y at x for the projected-constant extension of Y (zero in exact arithmetic)."""
    s, eps = M.signature, M.epsilon
    D = -eps * (np.asarray(inner(Y, X, s))[..., None] * x + np.asarray(inner(Y, x, s))[..., None] * X)
    return tangent_project(M, x, D)


def second_cov_deriv(V: Field, x, X, Y):
    """nabla^2_{X,Y} sigma via projected-constant extensions."""
    V = V.to_poly()
    M = V.quadric
    s, eps = M.signature, M.epsilon
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    DV = V.jacobian(x)
    D2 = V.hessian(x)
    Dx = np.einsum("...jk,...k->...j", DV, x)
    DY = np.einsum("...jk,...k->...j", DV, Y)
    hXY = np.einsum("...jkl,...k,...l->...j", D2, X, Y)
    first = tangent_project(M, x, hXY - eps * np.asarray(inner(X, Y, s))[..., None] * Dx)
    first = first - eps * np.asarray(inner(DY, x, s))[..., None] * X
    corr = generic_cov_deriv(V, x, _extension_derivative(M, x, X, Y))
    return first - corr


# ---------------------------------------------------------------------------
# local geometry bundles: everything the Euler-Lagrange operator needs
# ---------------------------------------------------------------------------

@dataclass
class LocalGeometry:
    """Pointwise data of a field at a batch of points (leading axis N)."""

    points: np.ndarray
    sigma: np.ndarray          # (N, d)
    F: np.ndarray              # (N,)  half pseudo-length
    rough: np.ndarray          # (N, d) rough Laplacian
    grad_F: np.ndarray         # (N, d)
    cov_grad_F: np.ndarray     # (N, d) nabla_{grad F} sigma
    dsig_sq: np.ndarray        # (N,)  <nabla sigma, nabla sigma>
    grad_F_sq: np.ndarray      # (N,)  g(grad F, grad F)
    lap_F: np.ndarray          # (N,)  Laplace-Beltrami of F (= -div grad F)
    method: str = "closed"


def _closed_cgf(f: ConformalGradientField, X) -> LocalGeometry:
    M = f.quadric
    s, eps, n = M.signature, M.epsilon, M.n
    al = f.alpha(X)
    sig = f(X)
    F = 0.5 * inner(sig, sig, s)
    gF = -eps * al[:, None] * sig
    return LocalGeometry(
        points=X,
        sigma=sig,
        F=F,
        rough=eps * sig,
        grad_F=gF,
        cov_grad_F=(al**2)[:, None] * sig,
        dsig_sq=n * al**2,
        grad_F_sq=al**2 * 2 * F,
        lap_F=2 * eps * F * (1 + n) - eps * n * f.mu,
    )


def _closed_killing(K: KillingField, X) -> LocalGeometry:
    M = K.quadric
    s, eps, n = M.signature, M.epsilon, M.n
    A = K.matrix
    sig = X @ A.T
    A2x = sig @ A.T
    A3x = A2x @ A.T
    F = 0.5 * inner(sig, sig, s)
    nA = K.norm
    gF = -A2x - 2 * eps * F[:, None] * X
    return LocalGeometry(
        points=X,
        sigma=sig,
        F=F,
        rough=eps * (n - 1) * sig,
        grad_F=gF,
        cov_grad_F=-A3x - 2 * eps * F[:, None] * sig,
        dsig_sq=nA - 4 * eps * F,
        grad_F_sq=inner(gF, gF, s),
        lap_F=2 * eps * (n + 1) * F - nA,
    )


@dataclass
class FrameData:
    frame: np.ndarray        # (N, n, d)
    indicators: np.ndarray   # (N, n)


def frames(M: Quadric, X) -> FrameData:
    E, ind = tangent_frame_batch(M, X)
    return FrameData(E, ind)


def _generic(V: AmbientPolyField, X, fr: FrameData | None = None) -> LocalGeometry:
    M = V.quadric
    s, eps = M.signature, M.epsilon
    g = s.diag
    fr = fr or frames(M, X)
    E, ei = fr.frame, fr.indicators
    sig = V(X)
    DV = V.jacobian(X)
    D2 = V.hessian(X)
    F = 0.5 * inner(sig, sig, s)
    # covariant derivatives along the frame, (N, n, d)
    DVE = np.einsum("njk,nik->nij", DV, E)
    cov = tangent_project(M, X[:, None, :], DVE)
    dsig_sq = np.einsum("ni,nij,j,nij->n", ei, cov, g, cov)
    # derivatives of F~ = <V,V>/2 along the frame, E_i F
    EF = np.einsum("nij,j,nj->ni", DVE, g, sig)
    gF = np.einsum("ni,ni,nid->nd", ei, EF, E)
    grad_F_sq = inner(gF, gF, s)
    cov_gF = tangent_project(M, X, np.einsum("njk,nk->nj", DV, gF))
    # second derivatives on the diagonal of the frame
    Dx = np.einsum("njk,nk->nj", DV, X)
    hEE = np.einsum("njkl,nik,nil->nij", D2, E, E)
    rough = np.zeros_like(sig)
    hessF = np.zeros_like(F)
    dFx = np.einsum("nj,j,nj->n", Dx, g, sig)  # D F~ . x
    for i in range(E.shape[1]):
        Ei = E[:, i]
        e_i = ei[:, i]
        first = tangent_project(M, X, hEE[:, i] - eps * e_i[:, None] * Dx)
        first = first - eps * inner(DVE[:, i], X, s)[:, None] * Ei
        ext = _extension_derivative(M, X, Ei, Ei)
        corr = tangent_project(M, X, np.einsum("njk,nk->nj", DV, ext))
        rough -= e_i[:, None] * (first - corr)
        # Hess F(E_i, E_i) = D^2 F~[E_i, E_i] - eps <E_i, E_i> DF~.x - (nabla_{E_i} E~_i) F
        d2F = inner(hEE[:, i], sig, s) + inner(DVE[:, i], DVE[:, i], s)
        dF_ext = np.einsum("njk,nk,j,nj->n", DV, ext, g, sig)
        hessF += e_i * (d2F - eps * e_i * dFx - dF_ext)
    return LocalGeometry(
        points=X,
        sigma=sig,
        F=F,
        rough=rough,
        grad_F=gF,
        cov_grad_F=cov_gF,
        dsig_sq=dsig_sq,
        grad_F_sq=grad_F_sq,
        lap_F=-hessF,
        method="generic",
    )


def local_geometry(field: Field, X, method: str = "auto") -> LocalGeometry:
    """Pointwise geometric data; ``method`` is 'closed', 'generic' or 'auto'."""
    X = require_points(field.quadric, np.atleast_2d(np.asarray(X, dtype=float)))
    if method not in ("auto", "closed", "generic"):
        raise ValueError(f"unknown method {method!r}")
    if method != "generic":
        if isinstance(field, ConformalGradientField):
            return _closed_cgf(field, X)
        if isinstance(field, KillingField):
            return _closed_killing(field, X)
        if method == "closed":
            raise ValueError("closed-form path needs a conformal gradient or Killing field")
    return _generic(field.to_poly(), X)


def _squeeze(x, arr):
    return arr[0] if np.ndim(x) == 1 else arr


def rough_laplacian(V: Field, x, method: str = "generic"):
    return _squeeze(x, local_geometry(V, x, method).rough)


def grad_F(field: Field, x, method: str = "auto"):
    return _squeeze(x, local_geometry(field, x, method).grad_F)


def laplacian_F(field: Field, x, method: str = "auto"):
    return _squeeze(x, local_geometry(field, x, method).lap_F)


def covariant_frame_derivatives(field: Field, X, fr: FrameData | None = None):
    """nabla_{E_i} sigma over the tangent frame, shape (N, n, d)."""
    M = field.quadric
    X = np.atleast_2d(np.asarray(X, dtype=float))
    fr = fr or frames(M, X)
    V = field.to_poly()
    DVE = np.einsum("njk,nik->nij", V.jacobian(X), fr.frame)
    return tangent_project(M, X[:, None, :], DVE), fr


def projected_poly_field(M: Quadric, components) -> AmbientPolyField:
    """Tangent field w - eps <w, x> x from arbitrary polynomial components w."""
    _unit(M)
    w = tuple(components)
    if len(w) != M.dim:
        raise ValueError(f"need {M.dim} components")
    xs = coordinates(M.dim)
    radial = inner_poly(w, xs, M.signature.indicators) * float(M.epsilon)
    return AmbientPolyField(M, tuple(wi - radial * xi for wi, xi in zip(w, xs)))


# ---------------------------------------------------------------------------
# constructions on fields
# ---------------------------------------------------------------------------

def hat_field(K: KillingField) -> KillingField:
    A = K.matrix
    return KillingField(K.quadric, A @ A @ A)


def _target_quadric(M: Quadric, P) -> Quadric:
    s = M.signature
    if is_isometry(P, s, s, tol=1e-9 * max(1.0, np.abs(P).max() ** 2)):
        return M
    dual = M.dual()
    if is_anti_isometry(P, s, dual.signature, tol=1e-9 * max(1.0, np.abs(P).max() ** 2)):
        return dual
    raise ValueError("P is neither an isometry nor an anti-isometry onto the dual quadric")


def push_forward(field: Field, P, target: Quadric | None = None) -> Field:
    """(P . sigma)(y) = P sigma(P^{-1} y) for an ambient (anti-)isometry P."""
    P = np.asarray(P, dtype=float)
    try:
        Pinv = np.linalg.inv(P)
    except np.linalg.LinAlgError as exc:
        raise NonInvertible("push-forward needs an invertible map") from exc
    if not np.all(np.isfinite(Pinv)) or abs(np.linalg.det(P)) < 1e-14:
        raise NonInvertible("push-forward needs an invertible map")
    M = field.quadric
    T = target or _target_quadric(M, P)
    if isinstance(field, KillingField):
        return KillingField(T, P @ field.matrix @ Pinv)
    if isinstance(field, ConformalGradientField):
        return ConformalGradientField(T, P @ field.pole)
    comps = [c.compose_linear(Pinv) for c in field.components]
    d = M.dim
    out = []
    for j in range(d):
        acc = Poly(d)
        for k in range(d):
            if P[j, k] != 0:
                acc = acc + comps[k] * float(P[j, k])
        out.append(acc)
    return AmbientPolyField(T, tuple(out), via=(P, Pinv, field))


# ---------------------------------------------------------------------------
# para-Kaehler structure on the neutral surfaces S^2_1, H^2_1
# ---------------------------------------------------------------------------

#: orientation signs fixed so that J(cgf pole e_3) = (y, x, 0) on H^2_1 and
#: the canonical anti-isometry H^2_1 -> S^2_1 is para-holomorphic
J_SIGN = {"hyperbolic": 1.0, "sphere": -1.0}


def _require_neutral(M: Quadric):
    if M.n != 2 or M.v != 1 or not M.is_unit:
        raise ValueError(f"para-Kaehler structure needs a unit neutral surface, got {M}")


def j_matrix(M: Quadric, x) -> np.ndarray:
    """Matrix of J at x acting on ambient vectors: v -> sign * G (x cross v)."""
    _require_neutral(M)
    x = np.asarray(x, dtype=float)
    cx = np.zeros(x.shape[:-1] + (3, 3))
    cx[..., 0, 1], cx[..., 0, 2] = -x[..., 2], x[..., 1]
    cx[..., 1, 0], cx[..., 1, 2] = x[..., 2], -x[..., 0]
    cx[..., 2, 0], cx[..., 2, 1] = -x[..., 1], x[..., 0]
    return J_SIGN[M.kind] * M.signature.diag[:, None] * cx


@dataclass(frozen=True)
class ParaKahlerOperator:
    point: np.ndarray
    matrix: np.ndarray
    L1: np.ndarray   # +1 eigendirection, null
    L2: np.ndarray   # -1 eigendirection, null, <L1, L2> > 0
    orientation: int  # sign of det(L1, L2, x)

    def __call__(self, X):
        return np.asarray(X, dtype=float) @ self.matrix.T


def para_kahler_J(M: Quadric, x, tol: float = 1e-8) -> ParaKahlerOperator:
    _require_neutral(M)
    x = require_points(M, np.asarray(x, dtype=float))
    Jm = j_matrix(M, x)
    fr = frames(M, x[None])
    E, ei = fr.frame[0], fr.indicators[0]
    Ep = E[np.argmax(ei)]
    Em = E[np.argmin(ei)]
    u, w = Ep + Em, Ep - Em
    s = M.signature
    if np.allclose(Jm @ u, u, atol=tol) and np.allclose(Jm @ w, -w, atol=tol):
        A, B = u, w
    elif np.allclose(Jm @ u, -u, atol=tol) and np.allclose(Jm @ w, w, atol=tol):
        A, B = w, u
    else:
        raise DegenerateTangent("tangent plane does not split into J-eigenlines")
    if inner(A, B, s) < 0:
        B = -B
    orient = int(np.sign(np.linalg.det(np.stack([A, B, x]))))
    return ParaKahlerOperator(x, Jm, A, B, orient)


def j_twist(field: Field) -> AmbientPolyField:
    """The field x -> J_x sigma(x), as an exact polynomial field."""
    M = field.quadric
    _require_neutral(M)
    V = field.to_poly()
    xs = coordinates(3)
    c = cross_poly(xs, V.components)
    sgn = J_SIGN[M.kind]
    g = M.signature.indicators
    return AmbientPolyField(M, tuple(ci * (sgn * gi) for ci, gi in zip(c, g)))


def apply_j(M: Quadric, X, W):
    """J_x W for batches of points and tangent vectors."""
    return np.einsum("...jk,...k->...j", j_matrix(M, X), np.asarray(W, dtype=float))


# ---------------------------------------------------------------------------
# sampled structural tests
# ---------------------------------------------------------------------------

def _operator_matrix(field: Field, X):
    """Matrices m[n, i, j] = <nabla_{E_j} sigma, E_i>, plus indicators."""
    cov, fr = covariant_frame_derivatives(field, X)
    s = field.quadric.signature
    m = np.einsum("njd,d,nid->nij", cov, s.diag, fr.frame)
    return m, fr.indicators


def is_closed_conformal(field: Field, samples, tol: float = 1e-8):
    """Whether X -> nabla_X sigma is a multiple psi(x) of the identity at every sample.

    Returns ``(flag, psi)``.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    m, ei = _operator_matrix(field, X)
    # operator components: (nabla_{E_j} sigma)^i = e_i <nabla_{E_j} sigma, E_i>
    op = ei[:, :, None] * m
    n = op.shape[1]
    psi = np.trace(op, axis1=1, axis2=2) / n
    resid = np.abs(op - psi[:, None, None] * np.eye(n)).max(axis=(1, 2))
    scale = 1.0 + np.abs(op).max(axis=(1, 2))
    return bool(np.all(resid <= tol * scale)), psi


def is_killing(field: Field, samples, tol: float = 1e-8) -> bool:
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    m, _ = _operator_matrix(field, X)
    sym = m + np.swapaxes(m, 1, 2)
    scale = 1.0 + np.abs(m).max(axis=(1, 2))
    return bool(np.all(np.abs(sym).max(axis=(1, 2)) <= tol * scale))


def default_samples(M: Quadric, count: int = 200, seed: int = 0) -> np.ndarray:
    return sample_points(M, count, seed)
