"""Method-of-types machinery: type vectors, exact spectra and their calculus.

All probabilities are :class:`fractions.Fraction`.  A spectrum is a sparse
map from types (or pairs of types) to exact rationals summing to one.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .field import FieldMatrix

#: default cap on q**n for exhaustive enumeration
DEFAULT_LIMIT = 2**20
#: default cap on n for enumerating permutations of a sequence
DEFAULT_PERM_LIMIT = 8


class EnumerationLimitError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


class SpectrumError(ValueError):
    pass


# -- types -------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class TypeVector:
    """Empirical distribution of a length-``n`` sequence over ``q`` symbols."""

    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(v) for v in self.counts)
        if not c:
            raise SpectrumError("type vector needs at least one symbol")
        if any(v < 0 for v in c):
            raise SpectrumError(f"negative count in {c}")
        object.__setattr__(self, "counts", c)

    @property
    def q(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def __getitem__(self, a: int) -> Fraction:
        """Probability ``P(a)`` as an exact rational."""
        return Fraction(self.counts[a], self.n)

    @property
    def weight(self) -> int:
        """Number of nonzero symbols (Hamming weight of any member)."""
        return self.n - self.counts[0]

    def is_zero(self) -> bool:
        return self.counts[0] == self.n

    def scaled(self, k: int) -> "TypeVector":
        """The same distribution at length ``k*n``."""
        return TypeVector(tuple(k * c for c in self.counts))

    def distribution(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.n) for c in self.counts)

    def __repr__(self):
        return f"T{self.counts}"


def zero_type(q: int, n: int) -> TypeVector:
    return TypeVector((n,) + (0,) * (q - 1))


def type_of(x: Sequence[int], q: int) -> TypeVector:
    if len(x) == 0:
        raise SpectrumError("type of an empty sequence is undefined")
    counts = [0] * q
    for s in x:
        if not 0 <= s < q:
            raise SpectrumError(f"symbol {s} outside alphabet of size {q}")
        counts[s] += 1
    return TypeVector(tuple(counts))


def all_types(q: int, n: int) -> list[TypeVector]:
    """All types of length-``n`` sequences over ``q`` symbols, lexicographic."""

    def rec(remaining: int, slots: int) -> Iterator[tuple[int, ...]]:
        if slots == 1:
            yield (remaining,)
            return
        for c in range(remaining + 1):
            for rest in rec(remaining - c, slots - 1):
                yield (c,) + rest

    return [TypeVector(c) for c in rec(n, q)]


def multinomial(P: TypeVector) -> int:
    """Size of the type class ``n! / prod_a (nP(a))!``."""
    out = math.factorial(P.n)
    for c in P.counts:
        out //= math.factorial(c)
    return out


def _fmt(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _parse_frac(s: str) -> Fraction:
    return Fraction(s)


# -- spectra -----------------------------------------------------------------

class Spectrum:
    """Exact distribution over types (arity 1) or pairs of types (arity 2).

    Arity-1 keys are :class:`TypeVector`; arity-2 keys are ``(P, Q)`` tuples.
    Absent keys have value 0.
    """

    def __init__(self, entries: Mapping, q: int, n: int, qy: int | None = None,
                 m: int | None = None, check: bool = True):
        self.q, self.n = q, n
        self.qy, self.m = qy, m
        self.arity = 1 if m is None else 2
        self.entries = {k: Fraction(v) for k, v in entries.items() if v != 0}
        if check:
            self.validate()

    def validate(self):
        for key in self.entries:
            keys = (key,) if self.arity == 1 else key
            shapes = ((self.q, self.n),) if self.arity == 1 else ((self.q, self.n), (self.qy, self.m))
            if len(keys) != len(shapes):
                raise SpectrumError(f"bad key {key!r} for arity {self.arity}")
            for T, (qq, nn) in zip(keys, shapes):
                if not isinstance(T, TypeVector) or T.q != qq or T.n != nn:
                    raise SpectrumError(f"key {key!r} does not match shape ({qq},{nn})")
            if self.entries[key] < 0:
                raise SpectrumError(f"negative mass at {key!r}")
        total = sum(self.entries.values(), Fraction(0))
        if total != 1:
            raise SpectrumError(f"spectrum sums to {total}, not 1")

    @property
    def shape(self) -> tuple:
        if self.arity == 1:
            return (self.q, self.n)
        return (self.q, self.n, self.qy, self.m)

    def __getitem__(self, key) -> Fraction:
        return self.entries.get(key, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self.items())
        return f"Spectrum{self.shape}{{{body}}}"

    def items(self) -> list[tuple]:
        return sorted(self.entries.items())

    def support(self) -> list:
        return sorted(self.entries)

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    # -- serialization
    def to_dict(self) -> dict:
        if self.arity == 1:
            return {
                "arity": 1, "q": self.q, "n": self.n,
                "entries": [{"P": list(P.counts), "value": _fmt(v)} for P, v in self.items()],
            }
        return {
            "arity": 2, "qx": self.q, "n": self.n, "qy": self.qy, "m": self.m,
            "entries": [
                {"P": list(P.counts), "Q": list(Q.counts), "value": _fmt(v)}
                for (P, Q), v in self.items()
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Spectrum":
        if d["arity"] == 1:
            entries = {TypeVector(tuple(e["P"])): _parse_frac(e["value"]) for e in d["entries"]}
            return cls(entries, d["q"], d["n"])
        entries = {
            (TypeVector(tuple(e["P"])), TypeVector(tuple(e["Q"]))): _parse_frac(e["value"])
            for e in d["entries"]
        }
        return cls(entries, d["qx"], d["n"], d["qy"], d["m"])

    @classmethod
    def from_json(cls, s: str) -> "Spectrum":
        return cls.from_dict(json.loads(s))


class CondSpectrum:
    """Conditional spectrum ``S(Q | P)`` stored as slices keyed by ``P``.

    Slices exist only for conditioning types of nonzero marginal; asking
    for any other slice raises :class:`SpectrumError`.
    """

    def __init__(self, slices: Mapping[TypeVector, Mapping[TypeVector, Fraction]],
                 q_given: int, n_given: int, q_out: int, n_out: int, check: bool = True):
        self.q_given, self.n_given = q_given, n_given
        self.q_out, self.n_out = q_out, n_out
        self.slices = {
            P: {Q: Fraction(v) for Q, v in sl.items() if v != 0} for P, sl in slices.items()
        }
        if check:
            for P, sl in self.slices.items():
                if P.q != q_given or P.n != n_given:
                    raise SpectrumError(f"conditioning type {P} has wrong shape")
                s = sum(sl.values(), Fraction(0))
                if s != 1:
                    raise SpectrumError(f"slice at {P} sums to {s}")

    def given(self, P: TypeVector) -> dict[TypeVector, Fraction]:
        try:
            return self.slices[P]
        except KeyError:
            raise SpectrumError(
                f"conditional undefined at {P}: conditioning type has zero probability"
            ) from None

    def __call__(self, Q: TypeVector, P: TypeVector) -> Fraction:
        return self.given(P).get(Q, Fraction(0))

    def conditioning_types(self) -> list[TypeVector]:
        return sorted(self.slices)

    def __eq__(self, other):
        if not isinstance(other, CondSpectrum):
            return NotImplemented
        return (
            (self.q_given, self.n_given, self.q_out, self.n_out)
            == (other.q_given, other.n_given, other.q_out, other.n_out)
            and self.slices == other.slices
        )

    def __repr__(self):
        return f"CondSpectrum({self.q_out},{self.n_out} | {self.q_given},{self.n_given}; {len(self.slices)} slices)"

    def to_dict(self) -> dict:
        return {
            "q_given": self.q_given, "n_given": self.n_given,
            "q_out": self.q_out, "n_out": self.n_out,
            "entries": [
                {"given": list(P.counts), "out": list(Q.counts), "value": _fmt(v)}
                for P in sorted(self.slices) for Q, v in sorted(self.slices[P].items())
            ],
        }


# -- constructing spectra ----------------------------------------------------

def ambient_spectrum(n: int, q: int) -> Spectrum:
    """Spectrum of the whole space ``X^n``: multinomial(P) / q^n."""
    if n < 1:
        raise SpectrumError("n must be >= 1")
    total = q**n
    return Spectrum({P: Fraction(multinomial(P), total) for P in all_types(q, n)}, q, n)


def spectrum_of_set(A: Iterable[Sequence[int]], q: int) -> Spectrum:
    seqs = [tuple(x) for x in A]
    if not seqs:
        raise SpectrumError("spectrum of an empty set is undefined")
    n = len(seqs[0])
    if any(len(x) != n for x in seqs):
        raise SpectrumError("all sequences must share one length")
    seqs = set(seqs)
    counts = Counter(type_of(x, q) for x in seqs)
    return Spectrum({P: Fraction(c, len(seqs)) for P, c in counts.items()}, q, n)


def spectrum_of_relation(B: Iterable[tuple[Sequence[int], Sequence[int]]], qx: int, qy: int) -> Spectrum:
    """Joint spectrum of an explicit set of pairs ``(x, y)``."""
    pairs = {(tuple(x), tuple(y)) for x, y in B}
    if not pairs:
        raise SpectrumError("joint spectrum of an empty set is undefined")
    x0, y0 = next(iter(pairs))
    n, m = len(x0), len(y0)
    if any(len(x) != n or len(y) != m for x, y in pairs):
        raise SpectrumError("all pairs must share one shape")
    counts = Counter((type_of(x, qx), type_of(y, qy)) for x, y in pairs)
    return Spectrum({k: Fraction(c, len(pairs)) for k, c in counts.items()}, qx, n, qy, m)


def all_sequences(q: int, n: int, limit: int = DEFAULT_LIMIT) -> np.ndarray:
    """All of ``F_q^n`` as a ``(q**n, n)`` array in lexicographic order."""
    if q**n > limit:
        raise EnumerationLimitError(f"q^n = {q}^{n} = {q**n} exceeds enumeration limit {limit}")
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((q,) * n).reshape(n, -1).T
    return grids.astype(np.int64)


def _count_types(rows: np.ndarray, q: int) -> np.ndarray:
    return np.stack([(rows == a).sum(axis=1) for a in range(q)], axis=1)


def _images(f, X: np.ndarray, q: int) -> tuple[np.ndarray, int, int]:
    """Evaluate ``f`` on every row of ``X``; returns (Y, q_out, m)."""
    mat = getattr(f, "generator", f)
    if isinstance(mat, FieldMatrix):
        if mat.cols != X.shape[1]:
            raise SpectrumError(f"map expects length {mat.cols}, domain has length {X.shape[1]}")
        Y = (X @ mat.to_array().T) % mat.q
        return Y, mat.q, mat.rows
    if callable(f):
        Y = np.array([tuple(f(tuple(x))) for x in X.tolist()], dtype=np.int64)
    else:
        Y = np.array([tuple(f[tuple(x)]) for x in X.tolist()], dtype=np.int64)
    return Y, None, Y.shape[1]


def joint_spectrum_of_map(f, n: int | None = None, q: int | None = None, q_out: int | None = None,
                          limit: int = DEFAULT_LIMIT) -> Spectrum:
    """Joint spectrum of the relation ``{(x, f(x))}`` over all of ``X^n``.

    ``f`` is a :class:`FieldMatrix`, anything with a ``generator`` matrix
    attribute, a callable on tuples, or a lookup table keyed by tuples.
    """
    mat = getattr(f, "generator", f)
    if isinstance(mat, FieldMatrix):
        n = mat.cols if n is None else n
        q = mat.q if q is None else q
    if n is None or q is None:
        raise SpectrumError("n and q are required for callable or table maps")
    X = all_sequences(q, n, limit)
    Y, qy, m = _images(f, X, q)
    qy = q_out or qy or q
    cx, cy = _count_types(X, q), _count_types(Y, qy)
    counts = Counter(zip(map(tuple, cx.tolist()), map(tuple, cy.tolist())))
    total = q**n
    entries = {(TypeVector(P), TypeVector(Q)): Fraction(c, total) for (P, Q), c in counts.items()}
    return Spectrum(entries, q, n, qy, m)


def image_set(f, limit: int = DEFAULT_LIMIT) -> set[tuple[int, ...]]:
    mat = getattr(f, "generator", f)
    X = all_sequences(mat.q, mat.cols, limit)
    Y, _, _ = _images(mat, X, mat.q)
    return set(map(tuple, Y.tolist()))


def kernel_spectrum(f, limit: int = DEFAULT_LIMIT) -> Spectrum:
    mat = getattr(f, "generator", f)
    X = all_sequences(mat.q, mat.cols, limit)
    Y, _, _ = _images(mat, X, mat.q)
    ker = X[~Y.any(axis=1)]
    return spectrum_of_set(ker.tolist(), mat.q)


def average_spectra(weighted: Iterable[tuple[Fraction, Spectrum]]) -> Spectrum:
    """Exact mixture ``sum_i w_i S_i`` (weights must sum to one)."""
    acc: dict = {}
    shape = None
    wsum = Fraction(0)
    for w, S in weighted:
        w = Fraction(w)
        if shape is None:
            shape = S.shape
        elif S.shape != shape:
            raise SpectrumError(f"shape mismatch {S.shape} vs {shape}")
        wsum += w
        for k, v in S.entries.items():
            acc[k] = acc.get(k, Fraction(0)) + w * v
    if shape is None:
        raise SpectrumError("no spectra to average")
    if wsum != 1:
        raise SpectrumError(f"mixture weights sum to {wsum}")
    return Spectrum(acc, *shape)


def product_spectrum(S1: Spectrum, S2: Spectrum) -> Spectrum:
    """Joint spectrum ``S1(P) S2(Q)`` of a product set ``A1 x A2``."""
    entries = {(P, Q): a * b for P, a in S1.entries.items() for Q, b in S2.entries.items()}
    return Spectrum(entries, S1.q, S1.n, S2.q, S2.n)


def concat_type_spectrum(S1: Spectrum, S2: Spectrum) -> Spectrum:
    """Spectrum of ``A1 x A2`` viewed as sequences of length ``n1 + n2``."""
    if S1.q != S2.q:
        raise SpectrumError("alphabets differ")
    acc: dict = {}
    for P1, a in S1.entries.items():
        for P2, b in S2.entries.items():
            P = TypeVector(tuple(x + y for x, y in zip(P1.counts, P2.counts)))
            acc[P] = acc.get(P, Fraction(0)) + a * b
    return Spectrum(acc, S1.q, S1.n + S2.n)


# -- marginals and conditionals ---------------------------------------------

@dataclass
class SpectrumParts:
    joint: Spectrum
    x: Spectrum
    y: Spectrum
    y_given_x: CondSpectrum
    x_given_y: CondSpectrum


def marginals_and_conditionals(S: Spectrum) -> SpectrumParts:
    if S.arity != 2:
        raise SpectrumError("need a joint (arity-2) spectrum")
    mx: dict = {}
    my: dict = {}
    for (P, Q), v in S.entries.items():
        mx[P] = mx.get(P, Fraction(0)) + v
        my[Q] = my.get(Q, Fraction(0)) + v
    fwd: dict = {P: {} for P in mx}
    bwd: dict = {Q: {} for Q in my}
    for (P, Q), v in S.entries.items():
        fwd[P][Q] = v / mx[P]
        bwd[Q][P] = v / my[Q]
    return SpectrumParts(
        joint=S,
        x=Spectrum(mx, S.q, S.n),
        y=Spectrum(my, S.qy, S.m),
        y_given_x=CondSpectrum(fwd, S.q, S.n, S.qy, S.m),
        x_given_y=CondSpectrum(bwd, S.qy, S.m, S.q, S.n),
    )


def forward_conditional(S: Spectrum) -> CondSpectrum:
    return marginals_and_conditionals(S).y_given_x


def alpha_of_expected_spectrum(E_S: Spectrum) -> dict[tuple[TypeVector, TypeVector], Fraction]:
    """Ratio of an (expected) joint spectrum to the ambient product spectrum.

    Returned over the full grid of type pairs, zeros included.
    """
    ax = ambient_spectrum(E_S.n, E_S.q)
    ay = ambient_spectrum(E_S.m, E_S.qy)
    return {
        (P, Q): E_S[(P, Q)] / (ax[P] * ay[Q])
        for P in all_types(E_S.q, E_S.n)
        for Q in all_types(E_S.qy, E_S.m)
    }


# -- permutations and the chain rule ----------------------------------------

def distinct_permutations(x: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct rearrangements of ``x`` (each has equal multiplicity among all n!)."""
    counts = Counter(x)
    symbols = sorted(counts)
    n = len(x)
    out = [0] * n

    def rec(i: int):
        if i == n:
            yield tuple(out)
            return
        for s in symbols:
            if counts[s]:
                counts[s] -= 1
                out[i] = s
                yield from rec(i + 1)
                counts[s] += 1

    yield from rec(0)


def permuted_output_type_prob(f: Callable | FieldMatrix, x: Sequence[int], Q: TypeVector,
                              perm_limit: int = DEFAULT_PERM_LIMIT,
                              samples: int | None = None, rng=None) -> Fraction:
    """Probability that ``f(sigma(x))`` has type ``Q`` for uniform ``sigma``.

    Exact (enumerating rearrangements) unless ``samples`` is given, in which
    case ``rng`` drives a Monte Carlo estimate returned as ``hits/samples``.
    """
    mat = getattr(f, "generator", f)
    if isinstance(mat, FieldMatrix):
        from .field import mat_vec

        def g(z):
            return mat_vec(mat, z)
    else:
        g = f
    q_out = Q.q
    if samples is not None:
        if rng is None:
            raise ValueError("sampled mode needs an rng")
        arr = np.asarray(x)
        hits = sum(type_of(g(tuple(rng.permutation(arr).tolist())), q_out) == Q for _ in range(samples))
        return Fraction(hits, samples)
    if len(x) > perm_limit:
        raise EnumerationLimitError(f"n={len(x)} exceeds permutation limit {perm_limit}")
    hits = total = 0
    for z in distinct_permutations(tuple(x)):
        total += 1
        hits += type_of(g(z), q_out) == Q
    return Fraction(hits, total)


def chain_rule_compose(E_F: CondSpectrum, E_G: CondSpectrum) -> CondSpectrum:
    """Expected conditional spectrum of ``G o Sigma o F``.

    ``result(Q|O) = sum_P E_F(P|O) E_G(Q|P)``.
    """
    if (E_F.q_out, E_F.n_out) != (E_G.q_given, E_G.n_given):
        raise SpectrumError(
            f"intermediate shape mismatch: F outputs ({E_F.q_out},{E_F.n_out}), "
            f"G expects ({E_G.q_given},{E_G.n_given})"
        )
    out: dict = {}
    for O, sl in E_F.slices.items():
        acc: dict = {}
        for P, w in sl.items():
            for Q, v in E_G.given(P).items():
                acc[Q] = acc.get(Q, Fraction(0)) + w * v
        out[O] = acc
    return CondSpectrum(out, E_F.q_given, E_F.n_given, E_G.q_out, E_G.n_out)


def diagonal_conditional(q: int, n: int) -> CondSpectrum:
    """Point-mass conditional ``1{P = Q}`` on all types of length ``n``."""
    return CondSpectrum({P: {P: Fraction(1)} for P in all_types(q, n)}, q, n, q, n)
