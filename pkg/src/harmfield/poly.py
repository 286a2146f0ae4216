"""Multivariate polynomials with exact differentiation.

Coefficients are kept in whatever numeric type they arrive in (float, int or
Fraction); arithmetic never rounds beyond what that type does.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}."""

    __slots__ = ("nvars", "terms", "_compiled")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Number] | None = None):
        self.nvars = int(nvars)
        clean: dict[Exponent, Number] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {self.nvars} variables")
            if c != 0:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}
        self._compiled = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c: Number, nvars: int) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, i: int, nvars: int, coeff: Number = 1) -> "Poly":
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): coeff})

    @classmethod
    def linear(cls, coeffs: Sequence[Number], const: Number = 0) -> "Poly":
        n = len(coeffs)
        out = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            out[tuple(e)] = c
        return cls(n, out)

    # basic queries ------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exp: Iterable[int]) -> Number:
        return self.terms.get(tuple(exp), 0)

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for exp, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(exp) if e
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "Poly(" + " + ".join(parts) + ")"

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Poly.const(other, self.nvars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (Number, np.number)):
            return Poly.const(other, self.nvars)
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (Number, np.number)) and not isinstance(other, Poly):
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Number] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly.const(1, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    # calculus -----------------------------------------------------------
    def deriv(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Poly(self.nvars, out)

    def compose_linear(self, M) -> "Poly":
        """The polynomial y -> p(M y); M is a (nvars, m) matrix."""
        M = np.asarray(M, dtype=object if _is_exact(M) else float)
        m = M.shape[1]
        subs = [Poly(m, {tuple(int(j == k) for j in range(m)): M[i, k] for k in range(m)})
                for i in range(self.nvars)]
        out = Poly(m)
        for e, c in self.terms.items():
            term = Poly.const(c, m)
            for i, k in enumerate(e):
                if k:
                    term = term * subs[i] ** k
            out = out + term
        return out

    def map_coefficients(self, fn) -> "Poly":
        return Poly(self.nvars, {e: fn(c) for e, c in self.terms.items()})

    # evaluation ---------------------------------------------------------
    def __call__(self, X):
        return compile_polys([self])(X)[..., 0]


def _is_exact(M) -> bool:
    arr = np.asarray(M, dtype=object)
    return all(isinstance(v, (int, Fraction)) for v in arr.ravel())


class CompiledPolys:
    """A list of polynomials sharing one monomial table, evaluated in one pass."""

    def __init__(self, polys: Sequence[Poly]):
        if not polys:
            raise ValueError("nothing to compile")
        nvars = polys[0].nvars
        monos = sorted({e for p in polys for e in p.terms})
        if not monos:
            monos = [(0,) * nvars]
        index = {e: i for i, e in enumerate(monos)}
        self.nvars = nvars
        self.exponents = np.array(monos, dtype=int).reshape(len(monos), nvars)
        C = np.zeros((len(monos), len(polys)))
        for j, p in enumerate(polys):
            for e, c in p.terms.items():
                C[index[e], j] = float(c)
        self.coeffs = C
        self.maxdeg = int(self.exponents.max(initial=0))

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        lead = X.shape[:-1]
        X2 = X.reshape(-1, self.nvars)
        # table of powers x_i^k, k = 0..maxdeg
        powers = np.ones((self.maxdeg + 1,) + X2.shape)
        for k in range(1, self.maxdeg + 1):
            powers[k] = powers[k - 1] * X2
        mono = np.ones((X2.shape[0], len(self.exponents)))
        cols = np.arange(self.nvars)
        for j, e in enumerate(self.exponents):
            mono[:, j] = np.prod(powers[e, :, cols], axis=0)
        out = mono @ self.coeffs
        return out.reshape(lead + (self.coeffs.shape[1],))


def compile_polys(polys: Sequence[Poly]) -> CompiledPolys:
    return CompiledPolys(list(polys))


# vector-valued helpers ------------------------------------------------------

def linear_components(A) -> tuple[Poly, ...]:
    """Components of the linear map x -> A x."""
    A = np.asarray(A)
    d = A.shape[1]
    return tuple(
        Poly(d, {tuple(int(j == k) for j in range(d)): A[i, k] for k in range(d)})
        for i in range(A.shape[0])
    )


def coordinates(d: int) -> tuple[Poly, ...]:
    return tuple(Poly.var(i, d) for i in range(d))


def inner_poly(u: Sequence[Poly], v: Sequence[Poly], indicators: Sequence[int]) -> Poly:
    out = Poly(u[0].nvars)
    for a, b, e in zip(u, v, indicators):
        out = out + (a * b) * int(e)
    return out


def cross_poly(u: Sequence[Poly], v: Sequence[Poly]) -> tuple[Poly, Poly, Poly]:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def jacobian(components: Sequence[Poly]) -> list[list[Poly]]:
    d = components[0].nvars
    return [[c.deriv(k) for k in range(d)] for c in components]
