"""Code constructors: explicit linear codes, repetition/check layers,
interleavers, random ensembles and the LDGM / serial-concatenation builds.

Randomness comes from :func:`make_rng`, a counter-based (Philox) stream keyed
by ``(seed, *stream_ids)``, so every realization is reproducible regardless
of how work is scheduled.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Iterator

import numpy as np

from .field import DimensionError, FieldMatrix, FieldSpec, mat_mul, mat_vec, rank
from .spectra import (
    DEFAULT_LIMIT,
    EnumerationLimitError,
    Spectrum,
    all_sequences,
    average_spectra,
    joint_spectrum_of_map,
)

#: cap on the number of realizations an exhaustive ensemble average may visit
DEFAULT_REALIZATION_LIMIT = 2_000_000


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``stream`` under master ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class LinearCodeMatrix:
    """Linear code ``x -> G x`` from ``F_q^n`` to ``F_q^m`` (``G`` is ``m x n``)."""

    generator: FieldMatrix

    @property
    def q(self) -> int:
        return self.generator.q

    @property
    def n(self) -> int:
        return self.generator.cols

    @property
    def m(self) -> int:
        return self.generator.rows

    @property
    def rate(self) -> Fraction:
        return Fraction(self.n, self.m)

    def encode(self, x) -> tuple[int, ...]:
        return mat_vec(self.generator, tuple(x))

    __call__ = encode

    def rank(self) -> int:
        return rank(self.generator)

    @classmethod
    def from_rows(cls, q: int, rows, cols: int | None = None) -> "LinearCodeMatrix":
        return cls(FieldMatrix(q, rows, cols))

    @classmethod
    def identity(cls, q: int, n: int) -> "LinearCodeMatrix":
        return cls(FieldMatrix.identity(q, n))

    @classmethod
    def zero(cls, q: int, m: int, n: int) -> "LinearCodeMatrix":
        return cls(FieldMatrix.zeros(q, m, n))


def encode(code: LinearCodeMatrix, x) -> tuple[int, ...]:
    return code.encode(x)


@dataclass(frozen=True)
class Interleaver:
    """Coordinate permutation: output position ``i`` reads input ``perm[i]``."""

    perm: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(i) for i in self.perm)
        if sorted(p) != list(range(len(p))):
            raise ValueError(f"{p} is not a permutation of range({len(p)})")
        object.__setattr__(self, "perm", p)

    @property
    def n(self) -> int:
        return len(self.perm)

    def apply(self, x):
        if len(x) != self.n:
            raise DimensionError(f"interleaver length {self.n} vs input {len(x)}")
        return tuple(x[j] for j in self.perm)

    def matrix(self, q: int) -> FieldMatrix:
        return FieldMatrix(q, [[int(j == p) for j in range(self.n)] for p in self.perm], self.n)

    @classmethod
    def identity(cls, n: int) -> "Interleaver":
        return cls(tuple(range(n)))

    @classmethod
    def sample(cls, n: int, rng: np.random.Generator) -> "Interleaver":
        # Fisher-Yates
        p = list(range(n))
        for i in range(n - 1, 0, -1):
            j = int(rng.integers(0, i + 1))
            p[i], p[j] = p[j], p[i]
        return cls(tuple(p))


def rep_parallel(q: int, c: int, n: int) -> LinearCodeMatrix:
    """``n`` parallel copies of the length-``c`` repetition code (``F_q^n -> F_q^{nc}``)."""
    if c < 1 or n < 1:
        raise ValueError("need c >= 1 and n >= 1")
    rows = [[int(j == i // c) for j in range(n)] for i in range(n * c)]
    return LinearCodeMatrix(FieldMatrix(q, rows, n))


def chk_parallel_matrix(q: int, coeffs) -> LinearCodeMatrix:
    """Block-diagonal ``m x md`` generator of ``m`` parallel check sums.

    ``coeffs`` is an ``m x d`` array of nonzero check coefficients.
    """
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if coeffs.ndim == 1:
        coeffs = coeffs[None, :]
    m, d = coeffs.shape
    G = np.zeros((m, m * d), dtype=np.int64)
    for i in range(m):
        G[i, i * d:(i + 1) * d] = coeffs[i]
    if np.any(coeffs % q == 0):
        raise ValueError("check coefficients must be nonzero")
    return LinearCodeMatrix(FieldMatrix.from_array(q, G))


def sample_chk(q: int, d: int, rng: np.random.Generator) -> tuple[int, ...]:
    """``d`` i.i.d. uniform draws from ``F_q \\ {0}``."""
    FieldSpec(q)
    if d < 1:
        raise ValueError("d must be >= 1")
    return tuple(int(v) for v in rng.integers(1, q, size=d))


def sample_rlc(q: int, n: int, m: int, rng: np.random.Generator) -> LinearCodeMatrix:
    FieldSpec(q)
    return LinearCodeMatrix(FieldMatrix(q, rng.integers(0, q, size=(m, n)).tolist(), n))


@dataclass(frozen=True)
class LdgmSample:
    code: LinearCodeMatrix
    interleaver: Interleaver
    coeffs: tuple[tuple[int, ...], ...]


def ldgm_output_length(n: int, c: int, d: int) -> int:
    if n < 1 or c < 1 or d < 1:
        raise ValueError("need n, c, d >= 1")
    if (n * c) % d:
        raise ValueError(f"nc = {n * c} is not divisible by d = {d}; m = nc/d must be an integer")
    return n * c // d


def ldgm_generator(q: int, n: int, c: int, d: int, interleaver: Interleaver, coeffs) -> LinearCodeMatrix:
    m = ldgm_output_length(n, c, d)
    if interleaver.n != n * c:
        raise DimensionError(f"interleaver length {interleaver.n} != nc = {n * c}")
    coeffs = np.asarray(coeffs, dtype=np.int64).reshape(m, d)
    # column j of the repetition layer lands on interleaved slots p with perm[p] // c == j
    G = np.zeros((m, n), dtype=np.int64)
    for slot, src in enumerate(interleaver.perm):
        G[slot // d, src // c] += coeffs[slot // d, slot % d]
    return LinearCodeMatrix(FieldMatrix.from_array(q, G % q))


def sample_ldgm(q: int, n: int, c: int, d: int, rng: np.random.Generator) -> LdgmSample:
    """One realization of the regular LDGM code (check layer o interleaver o repetition layer)."""
    FieldSpec(q)
    m = ldgm_output_length(n, c, d)
    pi = Interleaver.sample(n * c, rng)
    coeffs = tuple(sample_chk(q, d, rng) for _ in range(m))
    return LdgmSample(ldgm_generator(q, n, c, d, pi, coeffs), pi, coeffs)


def serial_concat(outer: LinearCodeMatrix, interleaver: Interleaver, inner: LinearCodeMatrix) -> LinearCodeMatrix:
    """Generator of ``inner o interleaver o outer``."""
    if outer.m != interleaver.n or inner.n != interleaver.n:
        raise DimensionError(
            f"cannot chain outer {outer.n}->{outer.m}, interleaver {interleaver.n}, inner {inner.n}->{inner.m}"
        )
    if outer.q != inner.q:
        raise ValueError("outer and inner codes use different fields")
    G = mat_mul(inner.generator, mat_mul(interleaver.matrix(outer.q), outer.generator))
    return LinearCodeMatrix(G)


def randomize_code(f: LinearCodeMatrix, rng: np.random.Generator) -> LinearCodeMatrix:
    """Wrap ``f`` in fresh uniform input and output interleavers."""
    pin = Interleaver.sample(f.n, rng)
    pout = Interleaver.sample(f.m, rng)
    G = mat_mul(pout.matrix(f.q), mat_mul(f.generator, pin.matrix(f.q)))
    return LinearCodeMatrix(G)


@dataclass(frozen=True)
class OuterCheck:
    ok: bool
    witness: tuple[int, ...] | None
    min_relative_weight: Fraction | None

    def __bool__(self):
        return self.ok


def outer_condition_check(f: LinearCodeMatrix, gamma, limit: int = DEFAULT_LIMIT) -> OuterCheck:
    """Does every nonzero input map to a codeword of relative weight > gamma?

    On failure the witness is the first violating input in lexicographic order.
    """
    gamma = Fraction(gamma)
    X = all_sequences(f.q, f.n, limit)[1:]
    if len(X) == 0:
        return OuterCheck(True, None, None)
    Y = (X @ f.generator.to_array().T) % f.q
    w = (Y != 0).sum(axis=1)
    wmin = int(w.min())
    bad = np.nonzero(w * gamma.denominator <= gamma.numerator * f.m)[0]
    if len(bad):
        return OuterCheck(False, tuple(int(v) for v in X[bad[0]]), Fraction(wmin, f.m))
    return OuterCheck(True, None, Fraction(wmin, f.m))


class SearchExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSearch:
    g: LinearCodeMatrix
    transform: LinearCodeMatrix
    tries: int


def good_generator_search(f: LinearCodeMatrix, rng: np.random.Generator, max_tries: int = 1000) -> GeneratorSearch:
    """Re-parametrize ``f`` through an invertible random ``n x n`` matrix.

    The image is unchanged and the joint spectrum of the returned code is
    close to the image spectrum for every nonzero input type.
    """
    q, n = f.q, f.n
    for tries in range(1, max_tries + 1):
        T = sample_rlc(q, n, n, rng)
        if T.rank() == n:
            return GeneratorSearch(LinearCodeMatrix(mat_mul(f.generator, T.generator)), T, tries)
    bound = 1 - 1 / q - 1 / q**2
    raise SearchExhausted(
        f"no invertible {n}x{n} matrix over F_{q} in {max_tries} tries "
        f"(per-try success probability exceeds {bound:.4f})"
    )


# -- ensembles ---------------------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    """Base class for random code families.

    Subclasses implement ``sample(rng)`` and ``realizations()``; the latter
    yields ``(probability, code)`` pairs covering the whole family.
    """

    kind: ClassVar[str] = ""
    seed: int = field(default=0, kw_only=True)

    @property
    def n_in(self) -> int:
        raise NotImplementedError

    @property
    def n_out(self) -> int:
        raise NotImplementedError

    def count(self) -> int:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> LinearCodeMatrix:
        raise NotImplementedError

    def sample_array(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``(size, m, n)`` stack of generator matrices drawn from ``rng``."""
        return np.stack([self.sample(rng).generator.to_array() for _ in range(size)])

    def realizations(self) -> Iterator[tuple[Fraction, LinearCodeMatrix]]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Fixed(Ensemble):
    kind: ClassVar[str] = "FIXED"
    code: LinearCodeMatrix = None

    q = property(lambda s: s.code.q)
    n_in = property(lambda s: s.code.n)
    n_out = property(lambda s: s.code.m)

    def count(self):
        return 1

    def sample(self, rng):
        return self.code

    def sample_array(self, rng, size):
        return np.broadcast_to(self.code.generator.to_array(), (size, self.code.m, self.code.n)).copy()

    def realizations(self):
        yield Fraction(1), self.code

    def to_dict(self):
        G = self.code.generator
        return {"kind": self.kind, "q": G.q, "rows": [list(r) for r in G.entries], "n": G.cols, "seed": self.seed}


@dataclass(frozen=True)
class RLC(Ensemble):
    """Uniform random ``m x n`` generator matrix."""

    kind: ClassVar[str] = "RLC"
    q: int = 2
    n: int = 1
    m: int = 1

    n_in = property(lambda s: s.n)
    n_out = property(lambda s: s.m)

    def count(self):
        return self.q ** (self.n * self.m)

    def sample(self, rng):
        return sample_rlc(self.q, self.n, self.m, rng)

    def sample_array(self, rng, size):
        return rng.integers(0, self.q, size=(size, self.m, self.n))

    def realizations(self):
        w = Fraction(1, self.count())
        for flat in itertools.product(range(self.q), repeat=self.n * self.m):
            rows = [flat[i * self.n:(i + 1) * self.n] for i in range(self.m)]
            yield w, LinearCodeMatrix(FieldMatrix(self.q, rows, self.n))

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "n": self.n, "m": self.m, "seed": self.seed}


@dataclass(frozen=True)
class CHKParallel(Ensemble):
    """``m`` independent random check sums, each over its own block of ``d`` inputs."""

    kind: ClassVar[str] = "CHK_parallel"
    q: int = 2
    d: int = 1
    m: int = 1

    n_in = property(lambda s: s.m * s.d)
    n_out = property(lambda s: s.m)

    def count(self):
        return (self.q - 1) ** (self.m * self.d)

    def sample(self, rng):
        return chk_parallel_matrix(self.q, [sample_chk(self.q, self.d, rng) for _ in range(self.m)])

    def sample_array(self, rng, size):
        coeffs = rng.integers(1, self.q, size=(size, self.m, self.d))
        G = np.zeros((size, self.m, self.m * self.d), dtype=np.int64)
        for i in range(self.m):
            G[:, i, i * self.d:(i + 1) * self.d] = coeffs[:, i]
        return G

    def realizations(self):
        w = Fraction(1, self.count())
        for flat in itertools.product(range(1, self.q), repeat=self.m * self.d):
            yield w, chk_parallel_matrix(self.q, np.array(flat).reshape(self.m, self.d))

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "d": self.d, "m": self.m, "seed": self.seed}


def CHK(q: int, d: int, seed: int = 0) -> CHKParallel:
    """A single random check code ``F_q^d -> F_q``."""
    return CHKParallel(q=q, d=d, m=1, seed=seed)


@dataclass(frozen=True)
class REPParallel(Ensemble):
    kind: ClassVar[str] = "REP_parallel"
    q: int = 2
    c: int = 1
    n: int = 1

    n_in = property(lambda s: s.n)
    n_out = property(lambda s: s.n * s.c)

    def count(self):
        return 1

    def sample(self, rng):
        return rep_parallel(self.q, self.c, self.n)

    def realizations(self):
        yield Fraction(1), rep_parallel(self.q, self.c, self.n)

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "c": self.c, "n": self.n, "seed": self.seed}


@dataclass(frozen=True)
class LDGM(Ensemble):
    kind: ClassVar[str] = "LDGM"
    q: int = 3
    n: int = 1
    c: int = 1
    d: int = 1

    def __post_init__(self):
        FieldSpec(self.q)
        ldgm_output_length(self.n, self.c, self.d)

    n_in = property(lambda s: s.n)
    n_out = property(lambda s: ldgm_output_length(s.n, s.c, s.d))

    def count(self):
        nc = self.n * self.c
        return math.factorial(nc) * (self.q - 1) ** nc

    def sample(self, rng):
        return sample_ldgm(self.q, self.n, self.c, self.d, rng).code

    def realizations(self):
        nc, m = self.n * self.c, self.n_out
        w = Fraction(1, self.count())
        for perm in itertools.permutations(range(nc)):
            pi = Interleaver(perm)
            for flat in itertools.product(range(1, self.q), repeat=nc):
                yield w, ldgm_generator(self.q, self.n, self.c, self.d, pi, np.array(flat).reshape(m, self.d))

    def to_dict(self):
        return {"kind": self.kind, "q": self.q, "n": self.n, "c": self.c, "d": self.d, "seed": self.seed}


@dataclass(frozen=True)
class SerialConcat(Ensemble):
    """``inner o Sigma o outer`` with an independent uniform interleaver."""

    kind: ClassVar[str] = "SerialConcat"
    outer: Ensemble = None
    inner: Ensemble = None

    def __post_init__(self):
        if self.outer.n_out != self.inner.n_in:
            raise DimensionError(f"inner input length {self.inner.n_in} != outer output length {self.outer.n_out}")
        if self.outer.q != self.inner.q:
            raise ValueError("outer and inner ensembles use different fields")

    q = property(lambda s: s.outer.q)
    n_in = property(lambda s: s.outer.n_in)
    n_out = property(lambda s: s.inner.n_out)

    def count(self):
        return self.outer.count() * math.factorial(self.outer.n_out) * self.inner.count()

    def sample(self, rng):
        f = self.outer.sample(rng)
        pi = Interleaver.sample(self.outer.n_out, rng)
        g = self.inner.sample(rng)
        return serial_concat(f, pi, g)

    def realizations(self):
        w_pi = Fraction(1, math.factorial(self.outer.n_out))
        inner = list(self.inner.realizations())
        for wf, f in self.outer.realizations():
            for perm in itertools.permutations(range(self.outer.n_out)):
                pi = Interleaver(perm)
                for wg, g in inner:
                    yield wf * w_pi * wg, serial_concat(f, pi, g)

    def to_dict(self):
        return {"kind": self.kind, "outer": self.outer.to_dict(), "inner": self.inner.to_dict(), "seed": self.seed}


def ensemble_from_dict(d: dict) -> Ensemble:
    kind = d["kind"]
    seed = int(d.get("seed", 0))
    if kind == "RLC":
        return RLC(q=d["q"], n=d["n"], m=d["m"], seed=seed)
    if kind in ("CHK", "CHK_parallel"):
        return CHKParallel(q=d["q"], d=d["d"], m=d.get("m", 1), seed=seed)
    if kind == "REP_parallel":
        return REPParallel(q=d["q"], c=d["c"], n=d["n"], seed=seed)
    if kind == "LDGM":
        return LDGM(q=d["q"], n=d["n"], c=d["c"], d=d["d"], seed=seed)
    if kind == "SerialConcat":
        return SerialConcat(outer=ensemble_from_dict(d["outer"]), inner=ensemble_from_dict(d["inner"]), seed=seed)
    if kind == "FIXED":
        return Fixed(code=LinearCodeMatrix(FieldMatrix(d["q"], d["rows"], d["n"])), seed=seed)
    raise ValueError(f"unknown ensemble kind {kind!r}")


def as_ensemble(x) -> Ensemble:
    return x if isinstance(x, Ensemble) else Fixed(code=x)


def exhaustive_expected_spectrum(ens: Ensemble, limit: int = DEFAULT_LIMIT,
                                 realization_limit: int = DEFAULT_REALIZATION_LIMIT) -> Spectrum:
    """Exact ``E[S_XY(F)]`` by visiting every realization of the ensemble."""
    if ens.count() > realization_limit:
        raise EnumerationLimitError(
            f"{ens.kind} ensemble has {ens.count()} realizations, above limit {realization_limit}"
        )
    weights: Counter = Counter()
    for w, code in ens.realizations():
        weights[code.generator] += w
    return average_spectra((w, joint_spectrum_of_map(G, limit=limit)) for G, w in sorted(
        weights.items(), key=lambda kv: kv[0].entries))
