"""Seeded Monte Carlo estimates of expected spectra, output uniformity and
full-rank frequency.

Trials are cut into fixed blocks of :data:`BLOCK`; block ``b`` always draws
from ``make_rng(seed, b)`` and writes into its own pre-assigned slots before
any reduction, so estimates are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constructions import RLC, Ensemble, make_rng
from .field import batch_rank
from .spectra import DEFAULT_LIMIT, TypeVector, all_sequences, all_types


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    trials: int
    seed: int
    target: str

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("need at least two trials")

    def z_score(self, exact) -> float:
        diff = self.mean - float(exact)
        if self.std_err == 0:
            return 0.0 if abs(diff) <= 1e-12 else math.inf
        return diff / self.std_err

    def within(self, exact, sigmas: float) -> bool:
        return abs(self.z_score(exact)) <= sigmas

    def to_dict(self) -> dict:
        return {"target": self.target, "seed": self.seed, "trials": self.trials,
                "mean": self.mean, "std_err": self.std_err}


def _estimate(samples: np.ndarray, seed: int, target: str) -> McEstimate:
    samples = np.asarray(samples, dtype=float)
    t = len(samples)
    if t and samples.min() == samples.max():
        # constant estimand: report it exactly, not with round-off spread
        return McEstimate(float(samples[0]), 0.0, t, int(seed), target)
    sd = float(samples.std(ddof=1)) if t > 1 else 0.0
    return McEstimate(float(samples.mean()), sd / math.sqrt(t), t, int(seed), target)


#: trials per RNG stream; part of the reproducibility contract, do not change
BLOCK = 256


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(-(-trials // BLOCK))]


def _map_blocks(fn, trials: int, seed: int, workers: int) -> list:
    jobs = [(make_rng(seed, b), size) for b, size in _blocks(trials)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda j: fn(*j), jobs))
    return [fn(*j) for j in jobs]


def _sample_generators(ens: Ensemble, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """``(trials, m, n)`` array of sampled generator matrices."""
    return np.concatenate(_map_blocks(ens.sample_array, trials, seed, workers)).astype(np.int64)


def _type_index(counts: np.ndarray, length: int) -> np.ndarray:
    """Mixed-radix index of type count vectors (last axis = symbols)."""
    radix = (length + 1) ** np.arange(counts.shape[-1])
    return (counts * radix).sum(axis=-1)


def _counts(rows: np.ndarray, q: int) -> np.ndarray:
    return np.stack([(rows == a).sum(axis=-2) for a in range(q)], axis=-1)


def estimate_expected_spectrum(ens: Ensemble, trials: int, seed: int | None = None,
                               workers: int = 1, limit: int = DEFAULT_LIMIT,
                               batch: int = 2048) -> dict[tuple[TypeVector, TypeVector], McEstimate]:
    """Per-(P, Q) sample mean of ``S_XY(F_i)(P, Q)`` over sampled realizations."""
    if trials < 1:
        raise ValueError("need at least one trial")
    seed = ens.seed if seed is None else seed
    q, n, m = ens.q, ens.n_in, ens.n_out
    X = all_sequences(q, n, limit)                       # (N, n)
    N = len(X)
    px = _type_index(_counts(X.T[None], q)[0], n)         # (N,)
    kx = int(px.max()) + 1
    ky = (m + 1) ** q
    cells = kx * ky
    G = _sample_generators(ens, trials, seed, workers)   # (T, m, n)
    hist = np.zeros((trials, cells), dtype=np.int64)
    for lo in range(0, trials, batch):
        g = G[lo:lo + batch]
        Y = np.einsum("tmn,Nn->tmN", g, X) % q          # (t, m, N)
        py = _type_index(_counts(Y, q), m)               # (t, N)
        flat = px[None, :] * ky + py
        t = len(g)
        offs = (np.arange(t) * cells)[:, None]
        hist[lo:lo + t] = np.bincount((flat + offs).ravel(), minlength=t * cells).reshape(t, cells)
    out = {}
    for P in all_types(q, n):
        for Q in all_types(q, m):
            cell = int(_type_index(np.array(P.counts), n)) * ky + int(_type_index(np.array(Q.counts), m))
            out[(P, Q)] = _estimate(hist[:, cell] / N, seed, f"E[S_XY]({P},{Q})")
    return out


def estimate_alpha(ens: Ensemble, trials: int, seed: int | None = None, **kw) -> dict:
    """Estimates of ``alpha(P, Q)``: spectrum estimates scaled by the ambient product."""
    from .spectra import ambient_spectrum

    est = estimate_expected_spectrum(ens, trials, seed, **kw)
    ax, ay = ambient_spectrum(ens.n_in, ens.q), ambient_spectrum(ens.n_out, ens.q)
    out = {}
    for (P, Q), e in est.items():
        s = float(ax[P] * ay[Q])
        out[(P, Q)] = McEstimate(e.mean / s, e.std_err / s, e.trials, e.seed, f"alpha({P},{Q})")
    return out


class ZeroInputError(ValueError):
    pass


@dataclass(frozen=True)
class UniformityResult:
    counts: dict[tuple[int, ...], int]
    trials: int
    seed: int
    chi2: float
    dof: int
    estimates: dict[tuple[int, ...], McEstimate]


def estimate_uniformity(ens: RLC, x, trials: int, seed: int | None = None, workers: int = 1) -> UniformityResult:
    """Empirical law of ``F(x)`` for a fixed nonzero input ``x``."""
    x = np.asarray(x, dtype=np.int64)
    if not x.any():
        raise ZeroInputError(
            "x = 0 always encodes to 0 under a linear code (alpha(P_0, Q) = q^m 1{Q = P_0}); "
            "uniformity only holds for nonzero inputs"
        )
    seed = ens.seed if seed is None else seed
    q, m = ens.q, ens.n_out
    G = _sample_generators(ens, trials, seed, workers)
    Y = (G @ x) % q                                      # (T, m)
    idx = (Y * q ** np.arange(m)[::-1]).sum(axis=1)
    k = q**m
    hist = np.bincount(idx, minlength=k)
    expected = trials / k
    chi2 = float(((hist - expected) ** 2 / expected).sum())
    outs = [tuple(int(v) for v in np.unravel_index(i, (q,) * m)) for i in range(k)]
    estimates = {
        y: _estimate((idx == i).astype(float), seed, f"Pr[F(x)={y}]") for i, y in enumerate(outs)
    }
    return UniformityResult({y: int(hist[i]) for i, y in enumerate(outs)}, trials, seed, chi2, k - 1, estimates)


def estimate_rank_rate(q: int, n: int, m: int, trials: int, seed: int = 0, workers: int = 1) -> McEstimate:
    """Fraction of uniform ``m x n`` matrices over F_q with rank ``m``."""
    if m > n:
        raise ValueError(f"m={m} > n={n}")
    target = f"Pr[rank(RLC({q},{n},{m})) = {m}]"
    if m == 0:
        # the empty matrix has rank 0 = m
        return McEstimate(1.0, 0.0, max(trials, 2), seed, target)
    G = _sample_generators(RLC(q=q, n=n, m=m), trials, seed, workers)
    return _estimate(batch_rank(G, q) == m, seed, target)
