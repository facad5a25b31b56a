"""Sparse multivariate polynomials with exact rational coefficients.

A spectrum over ``q`` symbols becomes a polynomial in ``u_0..u_{q-1}``
(and ``v_0..v_{q-1}`` for joint spectra).  Exponent vectors are dense
tuples of length ``q`` or ``2q``: the u-block first, then the v-block.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Mapping, Sequence

from .spectra import Spectrum, SpectrumError, TypeVector


class GenPoly:
    __slots__ = ("nvars", "terms")

    def __init__(self, terms: Mapping[tuple[int, ...], Fraction], nvars: int):
        self.nvars = nvars
        clean = {}
        for e, c in terms.items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has {len(e)} entries, expected {nvars}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            c = Fraction(c)
            if c:
                clean[e] = c
        self.terms = clean

    # -- constructors
    @classmethod
    def const(cls, c, nvars: int) -> "GenPoly":
        return cls({(0,) * nvars: Fraction(c)}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "GenPoly":
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): Fraction(1)}, nvars)

    @classmethod
    def linear(cls, coeffs: Sequence, nvars: int | None = None, offset: int = 0) -> "GenPoly":
        """``sum_i coeffs[i] * x_{offset+i}``."""
        nvars = len(coeffs) if nvars is None else nvars
        terms = {}
        for i, c in enumerate(coeffs):
            e = [0] * nvars
            e[offset + i] = 1
            terms[tuple(e)] = Fraction(c)
        return cls(terms, nvars)

    # -- arithmetic
    def _check(self, other: "GenPoly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable sets differ: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if not isinstance(other, GenPoly):
            other = GenPoly.const(other, self.nvars)
        self._check(other)
        acc = dict(self.terms)
        for e, c in other.terms.items():
            acc[e] = acc.get(e, Fraction(0)) + c
        return GenPoly(acc, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return GenPoly({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        if not isinstance(other, GenPoly):
            other = GenPoly.const(other, self.nvars)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GenPoly):
            c = Fraction(other)
            return GenPoly({e: c * v for e, v in self.terms.items()}, self.nvars)
        return genpoly_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = Fraction(c)
        return GenPoly({e: v / c for e, v in self.terms.items()}, self.nvars)

    def __pow__(self, k: int):
        return genpoly_pow(self, k)

    def __eq__(self, other):
        if not isinstance(other, GenPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "GenPoly(0)"
        parts = [f"{c}*{e}" for e, c in sorted(self.terms.items())]
        return "GenPoly(" + " + ".join(parts) + ")"

    def __len__(self):
        return len(self.terms)

    def coef(self, target: Sequence[int]) -> Fraction:
        t = tuple(target)
        if len(t) != self.nvars:
            raise ValueError(f"target has {len(t)} exponents, polynomial has {self.nvars} variables")
        return self.terms.get(t, Fraction(0))

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point dimension mismatch")
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= Fraction(x) ** k
            total += term
        return total

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def to_dict(self) -> list[dict]:
        return [
            {"exponents": list(e), "coef": f"{c.numerator}/{c.denominator}"}
            for e, c in sorted(self.terms.items())
        ]

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def coef(f: GenPoly, target: Sequence[int]) -> Fraction:
    return f.coef(target)


def genpoly_mul(f: GenPoly, g: GenPoly) -> GenPoly:
    f._check(g)
    acc: dict = {}
    for e1, c1 in f.terms.items():
        for e2, c2 in g.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            acc[e] = acc.get(e, Fraction(0)) + c1 * c2
    return GenPoly(acc, f.nvars)


def genpoly_pow(f: GenPoly, k: int) -> GenPoly:
    """``f**k`` by repeated squaring (zero coefficients pruned at each step)."""
    if k < 0:
        raise ValueError("negative powers are not supported")
    result = GenPoly.const(1, f.nvars)
    base = f
    while k:
        if k & 1:
            result = genpoly_mul(result, base)
        k >>= 1
        if k:
            base = genpoly_mul(base, base)
    return result


# -- spectra <-> generating functions ---------------------------------------

def genpoly_from_spectrum(S: Spectrum) -> GenPoly:
    if S.arity == 1:
        return GenPoly({P.counts: v for P, v in S.entries.items()}, S.q)
    return GenPoly({P.counts + Q.counts: v for (P, Q), v in S.entries.items()}, S.q + S.qy)


def spectrum_from_genpoly(g: GenPoly, q: int, qy: int | None = None) -> Spectrum:
    """Inverse of :func:`genpoly_from_spectrum`; the polynomial must be homogeneous."""
    if qy is None:
        if g.nvars != q:
            raise SpectrumError("variable count does not match alphabet")
        degs = {sum(e) for e in g.terms}
        if len(degs) != 1:
            raise SpectrumError("polynomial is not homogeneous")
        n = degs.pop()
        return Spectrum({TypeVector(e): c for e, c in g.terms.items()}, q, n)
    if g.nvars != q + qy:
        raise SpectrumError("variable count does not match alphabets")
    du = {sum(e[:q]) for e in g.terms}
    dv = {sum(e[q:]) for e in g.terms}
    if len(du) != 1 or len(dv) != 1:
        raise SpectrumError("polynomial is not bi-homogeneous")
    n, m = du.pop(), dv.pop()
    entries = {(TypeVector(e[:q]), TypeVector(e[q:])): c for e, c in g.terms.items()}
    return Spectrum(entries, q, n, qy, m)


def u_sum(q: int, nvars: int | None = None, offset: int = 0) -> GenPoly:
    """``(u)_+ = sum_a u_a`` (or the v-block sum with ``offset=q``)."""
    return GenPoly.linear([1] * q, nvars or q, offset)


def ambient_genpoly(n: int, q: int) -> GenPoly:
    return (u_sum(q) / q) ** n
