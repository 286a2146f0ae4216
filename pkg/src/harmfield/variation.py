"""Numerical first variation of the local vertical (p,q)-energy.

The variation sigma_t = sigma + t b rho is supported in a graph-coordinate
patch; the energy is integrated with tensor-product Gauss-Legendre quadrature
and differentiated by central differences with one Richardson step.  The
result is compared against the integral of eps omega^{p+1} <tau, b rho>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgmetric import as_params
from .errors import SingularPatch
from .fields import Field, covariant_frame_derivatives, frames
from .pseudolin import inner
from .quadric import Quadric


@dataclass(frozen=True)
class GraphPatch:
    """Box {|u_j - center_j| <= half_width} in the coordinates other than ``solved_axis``.

    The solved coordinate is recovered from the quadric equation, on the
    branch with sign ``branch``.
    """

    quadric: Quadric
    center: tuple[float, ...]
    half_width: float
    solved_axis: int = -1
    branch: int = 1

    @property
    def axis(self) -> int:
        return self.solved_axis % self.quadric.dim

    @property
    def chart_axes(self) -> list[int]:
        return [j for j in range(self.quadric.dim) if j != self.axis]

    def embed(self, U) -> np.ndarray:
        M = self.quadric
        g = M.signature.diag
        U = np.atleast_2d(np.asarray(U, dtype=float))
        k, cols = self.axis, self.chart_axes
        rest = M.epsilon * M.r**2 - np.sum(g[cols] * U**2, axis=1)
        sq = rest / g[k]
        if np.any(sq <= 0):
            raise ValueError("patch leaves the domain of the graph chart")
        X = np.empty((U.shape[0], M.dim))
        X[:, cols] = U
        X[:, k] = self.branch * np.sqrt(sq)
        return X

    def coordinate_vectors(self, U) -> np.ndarray:
        """d X / d u_j, shape (N, n, d)."""
        M = self.quadric
        g = M.signature.diag
        X = self.embed(U)
        k, cols = self.axis, self.chart_axes
        out = np.zeros((X.shape[0], M.n, M.dim))
        for j, c in enumerate(cols):
            out[:, j, c] = 1.0
            out[:, j, k] = -g[c] * X[:, c] / (g[k] * X[:, k])
        return out

    def volume(self, U) -> np.ndarray:
        T = self.coordinate_vectors(U)
        G = np.einsum("nid,d,njd->nij", T, self.quadric.signature.diag, T)
        return np.sqrt(np.abs(np.linalg.det(G)))

    def nodes(self, order: int = 24):
        t, w = np.polynomial.legendre.leggauss(order)
        n = self.quadric.n
        grids = np.meshgrid(*([t] * n), indexing="ij")
        wgrid = np.meshgrid(*([w] * n), indexing="ij")
        U = np.stack([g.ravel() for g in grids], axis=1) * self.half_width + np.asarray(self.center)
        W = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1) * self.half_width**n
        return U, W


@dataclass(frozen=True)
class PolynomialBump:
    """prod_j (1 - s_j^2)^order with s_j = (u_j - c_j)/h; vanishes to second order for order >= 2."""

    order: int = 3

    def value_and_grad(self, patch: GraphPatch, U):
        s = (np.asarray(U, dtype=float) - np.asarray(patch.center)) / patch.half_width
        base = np.clip(1.0 - s**2, 0.0, None)
        f = base**self.order
        df = -2.0 * self.order * s * base ** (self.order - 1) / patch.half_width
        val = np.prod(f, axis=1)
        grad = np.empty_like(s)
        for j in range(s.shape[1]):
            others = np.prod(np.delete(f, j, axis=1), axis=1)
            grad[:, j] = df[:, j] * others
        return val, grad


@dataclass
class FirstVariation:
    numeric: float
    analytic: float
    numeric_coarse: float
    nodes: int

    @property
    def relative_error(self) -> float:
        den = max(abs(self.analytic), 1e-300)
        return abs(self.numeric - self.analytic) / den


def _check_patch(field: Field, patch: GraphPatch, one_nodes, tol: float = 1e-6):
    """Reject patches whose closure meets or approaches <sigma,sigma> = -1.

    Quadrature nodes alone can miss a tangential contact, so a uniform grid
    (odd size, so it contains the centre and the box edges) is scanned too.
    """
    m = 41 if patch.quadric.n <= 2 else 17
    t = np.linspace(-1.0, 1.0, m)
    grids = np.meshgrid(*([t] * patch.quadric.n), indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=1) * patch.half_width + np.asarray(patch.center)
    sig = field(patch.embed(U))
    one = np.concatenate([1.0 + inner(sig, sig, patch.quadric.signature), one_nodes])
    if np.abs(one).min() < tol or np.unique(np.sign(one)).size > 1:
        raise SingularPatch("patch meets <sigma,sigma> = -1")


def first_variation(
    field: Field,
    rho: Field,
    params,
    patch: GraphPatch,
    bump: PolynomialBump | None = None,
    dt: float = 1e-4,
    order: int = 24,
) -> FirstVariation:
    """Finite-difference dE^v/dt at t = 0 versus the Euler-Lagrange integral."""
    from .harmonic import tau_pq

    p, q = as_params(params)
    bump = bump or PolynomialBump()
    M = field.quadric
    if rho.quadric != M:
        raise ValueError("variation field lives on a different quadric")
    s = M.signature
    g = s.diag
    U, W = patch.nodes(order)
    X = patch.embed(U)
    W = W * patch.volume(U)
    fr = frames(M, X)
    ei = fr.indicators
    dsig, _ = covariant_frame_derivatives(field, X, fr)
    drho, _ = covariant_frame_derivatives(rho, X, fr)
    sig = field(X)
    rh = rho(X)
    b, db_u = bump.value_and_grad(patch, U)
    # derivative of the bump along frame vectors: chart coordinates are ambient ones
    db = np.einsum("nj,nij->ni", db_u, fr.frame[:, :, patch.chart_axes])

    one = 1.0 + inner(sig, sig, s)
    _check_patch(field, patch, one)

    b_rho = b[:, None] * rh
    d_brho = b[:, None, None] * drho + db[:, :, None] * rh[:, None, :]

    def energy(t: float) -> float:
        st = sig + t * b_rho
        dst = dsig + t * d_brho
        one_t = 1.0 + inner(st, st, s)
        if np.abs(one_t).min() < 1e-8 or np.unique(np.sign(one_t)).size > 1:
            raise SingularPatch("variation reaches <sigma,sigma> = -1")
        w = 1.0 / np.abs(one_t)
        dsq = np.einsum("ni,nid,d,nid->n", ei, dst, g, dst)
        EF = np.einsum("nid,d,nd->ni", dst, g, st)
        gsq = np.einsum("ni,ni->n", ei, EF**2)
        ev = 0.5 * w**p * (dsq + q * gsq)
        return float(np.sum(W * ev))

    def central(h: float) -> float:
        return (energy(h) - energy(-h)) / (2 * h)

    d1 = central(dt)
    d2 = central(dt / 2)
    numeric = (4 * d2 - d1) / 3

    tau = tau_pq(field, X, (p, q)).tau
    integrand = np.sign(one) * np.abs(one) ** (-(p + 1)) * inner(tau, b_rho, s)
    analytic = float(np.sum(W * integrand))
    return FirstVariation(numeric=numeric, analytic=analytic, numeric_coarse=d1, nodes=len(U))
