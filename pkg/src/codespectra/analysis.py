"""Closed-form expected spectra, exponent bounds and goodness functionals.

Everything that can stay rational does: check-sum laws, expected check-code
spectra, the coefficient bound ``g2`` and the rank probabilities are exact
:class:`~fractions.Fraction` values.  Only the divergence-based exponent
``delta_d`` and the log-domain comparisons use floats.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .constructions import Ensemble, LinearCodeMatrix, outer_condition_check
from .genfun import GenPoly, u_sum
from .spectra import (
    CondSpectrum,
    Spectrum,
    SpectrumError,
    TypeVector,
    all_types,
    ambient_spectrum,
    chain_rule_compose,
    distinct_permutations,
    forward_conditional,
    joint_spectrum_of_map,
    multinomial,
    spectrum_of_set,
    image_set,
    average_spectra,
)

# -- reports -----------------------------------------------------------------

@dataclass
class BoundReport:
    """Outcome of checking ``lhs <= rhs`` for one concrete instance."""

    context: dict
    lhs: float | Fraction
    rhs: float | Fraction
    satisfied: bool
    slack: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "context": _encode(self.context),
            "lhs": _encode(self.lhs), "rhs": _encode(self.rhs),
            "satisfied": self.satisfied, "slack": _encode(self.slack),
            **{k: _encode(v) for k, v in self.extra.items()},
        }


def _encode(v):
    """JSON-friendly view: rationals as "num/den", types as count lists."""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, TypeVector):
        return list(v.counts)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if hasattr(v, "to_dict"):
        return v.to_dict()
    if isinstance(v, dict):
        return {str(k): _encode(x) for k, x in v.items()}
    if isinstance(v, (tuple, list)):
        return [_encode(x) for x in v]
    return v


def _report(context, lhs, rhs, tol: float = 0.0, **extra) -> BoundReport:
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        ok = lhs <= rhs
    else:
        ok = float(lhs) <= float(rhs) + tol
    slack = float(rhs) - float(lhs) if math.isfinite(float(lhs)) else math.inf
    return BoundReport(dict(context), lhs, rhs, ok, slack, dict(extra))


def log_fraction(x: Fraction) -> float:
    """Natural log of a positive rational without float overflow."""
    if x <= 0:
        return -math.inf
    return math.log(x.numerator) - math.log(x.denominator)


# -- check sums and check codes ---------------------------------------------

def checksum_distribution(q: int, d: int) -> dict[int, Fraction]:
    """Law of ``C_1 + ... + C_d`` for i.i.d. uniform nonzero ``C_i`` in F_q."""
    if q < 2 or d < 1:
        raise ValueError("need q >= 2 and d >= 1")
    r = Fraction(-1, q - 1)
    p0 = Fraction(1, q) * (1 - r ** (d - 1))
    pa = Fraction(1, q) * (1 - r**d)
    return {a: (p0 if a == 0 else pa) for a in range(q)}


def _weight_law(q: int, w: int) -> dict[int, Fraction]:
    """Law of a random check output given ``w`` nonzero inputs."""
    if w == 0:
        return {a: Fraction(int(a == 0)) for a in range(q)}
    return checksum_distribution(q, w)


def expected_chk_genfun(q: int, d: int) -> GenPoly:
    """``E[G(F_d^CHK)](u, v)`` in the ``2q`` variables ``u_0..u_{q-1}, v_0..v_{q-1}``."""
    nv = 2 * q
    U, V = u_sum(q, nv), u_sum(q, nv, offset=q)
    u0, v0 = GenPoly.var(0, nv), GenPoly.var(q, nv)
    tilt = (q * u0 - U) / (q - 1)
    return (U**d * V + tilt**d * (q * v0 - V)) / Fraction(q) ** (d + 1)


@lru_cache(maxsize=None)
def _g1_factors(q: int, d: int) -> tuple[GenPoly, GenPoly]:
    U = u_sum(q)
    tilt = ((q * GenPoly.var(0, q) - U) / (q - 1)) ** d
    Ud = U**d
    return Ud + (q - 1) * tilt, Ud - tilt


@lru_cache(maxsize=None)
def _g1_power(q: int, d: int, zero_part: bool, k: int) -> GenPoly:
    base = _g1_factors(q, d)[0 if zero_part else 1]
    if k == 0:
        return GenPoly.const(1, q)
    if k % 2:
        return _g1_power(q, d, zero_part, k - 1) * base
    half = _g1_power(q, d, zero_part, k // 2)
    return half * half


def g1(q: int, d: int, m: int, Q: TypeVector) -> GenPoly:
    """Polynomial in ``u`` whose coefficients give ``E[S(P, Q)]`` for ``m`` parallel checks."""
    if Q.q != q or Q.n != m:
        raise SpectrumError(f"Q must be a type over ({q}, {m})")
    k0 = Q.counts[0]
    poly = _g1_power(q, d, True, k0) * _g1_power(q, d, False, m - k0)
    return poly * Fraction(multinomial(Q), q ** (m * (d + 1)))


def expected_chk_parallel_spectrum(q: int, d: int, m: int, P: TypeVector, Q: TypeVector) -> Fraction:
    """``E[S(odot_m F_d^CHK)(P, Q)]`` by coefficient extraction from ``g1``."""
    if P.q != q or P.n != m * d:
        raise SpectrumError(f"P must be a type over ({q}, {m * d})")
    return g1(q, d, m, Q).coef(P.counts)


@lru_cache(maxsize=64)
def expected_chk_parallel_table(q: int, d: int, m: int) -> Spectrum:
    """Full expected joint spectrum of ``m`` parallel random checks."""
    entries = {}
    for Q in all_types(q, m):
        poly = g1(q, d, m, Q)
        for e, c in poly.terms.items():
            entries[(TypeVector(e), Q)] = c
    return Spectrum(entries, q, m * d, q, m)


def expected_chk_parallel_conditional(q: int, d: int, m: int) -> CondSpectrum:
    return forward_conditional(expected_chk_parallel_table(q, d, m))


def g2_bound(q: int, d: int, m: int, O: Sequence, P: TypeVector, Q: TypeVector) -> Fraction:
    """Coefficient bound ``g2(O, P, Q) >= E[S(odot_m F_d^CHK)(P, Q)]``.

    ``O`` is any distribution on F_q (a type over ``md`` or a rational
    vector) that is positive wherever ``P`` is.
    """
    O = O.distribution() if isinstance(O, TypeVector) else tuple(Fraction(o) for o in O)
    if len(O) != q or sum(O) != 1 or any(o < 0 for o in O):
        raise ValueError(f"O={O} is not a distribution on F_{q}")
    if P.n != m * d or Q.n != m:
        raise SpectrumError("P must be over md letters and Q over m letters")
    for a, c in enumerate(P.counts):
        if c and O[a] <= 0:
            raise ValueError(f"side condition violated: O({a}) = 0 but P({a}) > 0")
    t = (q * O[0] - 1) / Fraction(q - 1)
    td = t**d
    denom = Fraction(1)
    for o, c in zip(O, P.counts):
        if c:
            denom *= o**c
    k0 = Q.counts[0]
    val = Fraction(multinomial(Q), q ** (m * (d + 1))) / denom
    return val * (1 + (q - 1) * td) ** k0 * (1 - td) ** (m - k0)


# -- delta_d -----------------------------------------------------------------

def binary_divergence(x: float, xh: float) -> float:
    """``D(x || xh)`` in nats with ``0 ln 0 = 0``."""
    out = 0.0
    if x > 0:
        out += x * math.log(x / xh)
    if x < 1:
        out += (1 - x) * math.log((1 - x) / (1 - xh))
    return out


def delta_objective(q: int, d: int, x: float, y: float, xh: float) -> float:
    t = (q * xh - 1) / (q - 1)
    td = t**d
    val = d * binary_divergence(x, xh)
    if y > 0:
        val += y * math.log1p((q - 1) * td)
    if y < 1:
        val += (1 - y) * math.log1p(-td)
    return val


def delta_objective_array(q: int, d: int, x: float, y: float, xh: np.ndarray) -> np.ndarray:
    """Vectorized :func:`delta_objective` over an array of tilt parameters."""
    xh = np.asarray(xh, dtype=float)
    td = ((q * xh - 1) / (q - 1)) ** d
    val = np.zeros_like(xh)
    if x > 0:
        val += d * x * np.log(x / xh)
    if x < 1:
        val += d * (1 - x) * np.log((1 - x) / (1 - xh))
    if y > 0:
        val += y * np.log1p((q - 1) * td)
    if y < 1:
        val += (1 - y) * np.log1p(-td)
    return val


@dataclass(frozen=True)
class DeltaDParams:
    q: int
    d: int
    x: float
    y: float
    minimizer: float
    value: float

    def objective(self, xh: float) -> float:
        return delta_objective(self.q, self.d, self.x, self.y, xh)


_GOLDEN = (math.sqrt(5) - 1) / 2


def _golden(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    c, e = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = f(e)
    return (c, fc) if fc <= fe else (e, fe)


def delta_d(q: int, d: int, x: float, y: float, tol: float = 1e-10, grid: int = 1024) -> DeltaDParams:
    """Minimize the tilted divergence objective over ``0 < xh < 1``.

    A coarse grid seeds the search; golden-section refinement runs on the
    bracket around the best grid point.  The returned value is the
    objective at the returned minimizer, so it upper-bounds the infimum.

    When ``d (1 - x) < 1 - y`` the objective tends to -inf as ``xh -> 1``
    (too few nonzero edges to feed the nonzero checks, so alpha = 0); the
    infimum -inf is then returned with minimizer 1.
    """
    if q < 2 or d < 1:
        raise ValueError("need q >= 2 and d >= 1")
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ValueError("x and y must lie in [0, 1]")
    if d * (1 - x) < 1 - y:
        return DeltaDParams(q, d, float(x), float(y), 1.0, -math.inf)
    pts = np.arange(1, grid + 1) / (grid + 1)
    vals = delta_objective_array(q, d, x, y, pts)
    k = int(np.nanargmin(vals))
    lo = pts[k - 1] if k > 0 else min(1e-300, pts[0] / 2)
    hi = pts[k + 1] if k + 1 < grid else 1 - pts[0] / 2**40

    def f(t):
        return delta_objective(q, d, x, y, t)

    xh, val = _golden(f, lo, hi, tol)
    if vals[k] < val:
        xh, val = float(pts[k]), float(vals[k])
    return DeltaDParams(q, d, float(x), float(y), float(xh), float(val))


def sup_delta_d(q: int, d: int, gamma: float, x_points: int = 41, y_points: int = 21,
                tol: float = 1e-9) -> tuple[float, float, float]:
    """Grid estimate of ``sup`` of ``delta_d(x, y)`` over ``0 <= x < 1 - gamma``, ``0 <= y <= 1``.

    Returns ``(value, x, y)`` at the best grid point.
    """
    xs = np.linspace(0.0, 1.0 - gamma, x_points, endpoint=False)
    ys = np.linspace(0.0, 1.0, y_points)
    best = (-math.inf, 0.0, 0.0)
    for x in xs:
        for y in ys:
            v = delta_d(q, d, float(x), float(y), tol=tol).value
            if v > best[0]:
                best = (v, float(x), float(y))
    return best


def d0(gamma: float, delta: float, q: int = 3, rate_ratio: Fraction | float = 1, d_max: int = 64,
       x_points: int = 41, y_points: int = 21) -> int | None:
    """Least ``d <= d_max`` with ``(c/d) * sup delta_d <= delta`` at fixed ``c/d``.

    ``rate_ratio`` is ``c/d``.  Returns ``None`` if no such ``d`` is found.
    """
    r = float(rate_ratio)
    for d in range(1, d_max + 1):
        s, _, _ = sup_delta_d(q, d, gamma, x_points, y_points)
        if r * s <= delta:
            return d
    return None


# -- LDGM --------------------------------------------------------------------

def ldgm_expected_conditional(q: int, n: int, c: int, d: int) -> CondSpectrum:
    """``E[S_{Y|X}(F^LD)(Q|P)]`` through the repetition layer's diagonal conditional."""
    from .constructions import ldgm_output_length

    m = ldgm_output_length(n, c, d)
    chk = expected_chk_parallel_conditional(q, d, m)
    return CondSpectrum({P: chk.given(P.scaled(c)) for P in all_types(q, n)}, q, n, q, m)


def ldgm_conditional_by_arrangements(q: int, n: int, c: int, d: int, P: TypeVector) -> dict[TypeVector, Fraction]:
    """Exact ``E[S_{Y|X}(F^LD)(.|P)]`` by enumerating interleaved arrangements.

    Takes one input of type ``P``, repeats it, runs over every distinct
    arrangement of the repeated word (uniform under a random interleaver) and
    convolves the per-check output laws.  Independent of the generating
    function route.
    """
    from .constructions import ldgm_output_length

    m = ldgm_output_length(n, c, d)
    word = [a for a, k in enumerate(P.counts) for _ in range(k * c)]
    nz = [int(s != 0) for s in word]
    by_weights: Counter = Counter()
    for arr in distinct_permutations(tuple(nz)):
        w = tuple(sorted(sum(arr[i * d:(i + 1) * d]) for i in range(m)))
        by_weights[w] += 1
    total = sum(by_weights.values())
    out: dict = {}
    for weights, mult in by_weights.items():
        dist = {(0,) * q: Fraction(1)}
        for w in weights:
            law = _weight_law(q, w)
            nxt: dict = {}
            for cnt, p in dist.items():
                for a, pa in law.items():
                    if pa:
                        key = tuple(v + (i == a) for i, v in enumerate(cnt))
                        nxt[key] = nxt.get(key, Fraction(0)) + p * pa
            dist = nxt
        for cnt, p in dist.items():
            Q = TypeVector(cnt)
            out[Q] = out.get(Q, Fraction(0)) + Fraction(mult, total) * p
    return out


def ldgm_finite_size_term(q: int, n: int, c: int) -> float:
    """Explicit stand-in for the O(ln n / n) slack of the LDGM exponent bound.

    From the type-class lower bound ``multinomial(P) >= exp(N H(P)) / (N+1)^q``
    at ``N = nc``, divided by ``n``.
    """
    return q * math.log(n * c + 1) / n


def ldgm_alpha_bound(q: int, n: int, c: int, d: int, P: TypeVector, Q: TypeVector,
                     conditional: CondSpectrum | None = None, tol: float = 1e-10) -> BoundReport:
    """Check ``(1/n) ln alpha(P,Q) <= (c/d) delta_d(P(0), Q(0)) + q ln(nc+1)/n``."""
    if P.is_zero():
        raise ValueError("the all-zero input type is outside the bound's domain")
    cond = conditional or ldgm_expected_conditional(q, n, c, d)
    m = cond.n_out
    alpha = cond(Q, P) / ambient_spectrum(m, q)[Q]
    lhs = log_fraction(alpha) / n
    dd = delta_d(q, d, float(P[0]), float(Q[0]), tol=tol)
    term = ldgm_finite_size_term(q, n, c)
    rhs = c / d * dd.value + term
    return _report(
        {"q": q, "n": n, "c": c, "d": d, "m": m, "P": P, "Q": Q}, lhs, rhs, tol=1e-12,
        alpha=alpha, delta_d=dd.value, minimizer=dd.minimizer, finite_size_term=term,
    )


# -- rank of random matrices -------------------------------------------------

def rank_full_probability(q: int, n: int, m: int) -> Fraction:
    """``Pr{rank(F^RLC_{q,n,m}) = m}`` for ``m <= n``."""
    if m > n:
        raise ValueError(f"m={m} > n={n}")
    out = Fraction(1)
    for i in range(1, m + 1):
        out *= 1 - Fraction(q ** (i - 1), q**n)
    return out


def rank_lower_bound(q: int, n: int, m: int, k: int) -> Fraction:
    if m > n:
        raise ValueError(f"m={m} > n={n}")
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}")
    Q = Fraction(q)
    out = 1 - Q ** (m - n - k) / (q - 1)
    for i in range(1, k + 1):
        out *= 1 - Q ** (m - n - i)
    return out


# -- goodness functionals ----------------------------------------------------

def _max_ratio(ratios: Iterable[tuple[object, Fraction]]):
    best, arg = None, None
    for key, r in ratios:
        if r > 0 and (best is None or r > best):
            best, arg = r, key
    return best, arg


def jscc_goodness(E_S: Spectrum, detail: bool = False):
    """``max_{P != 0, Q} (1/n) ln alpha(P, Q)`` of an expected joint spectrum."""
    ax, ay = ambient_spectrum(E_S.n, E_S.q), ambient_spectrum(E_S.m, E_S.qy)
    best, arg = _max_ratio(
        ((P, Q), v / (ax[P] * ay[Q])) for (P, Q), v in E_S.entries.items() if not P.is_zero()
    )
    if best is None:
        raise SpectrumError("no nonzero input type carries mass")
    val = log_fraction(best) / E_S.n
    return (val, arg, best) if detail else val


def image_goodness(E_img: Spectrum, detail: bool = False):
    """``max_{Q != 0} (1/m) ln (E_img(Q) / ambient(Q))``."""
    ay = ambient_spectrum(E_img.n, E_img.q)
    best, arg = _max_ratio((Q, v / ay[Q]) for Q, v in E_img.entries.items() if not Q.is_zero())
    if best is None:
        raise SpectrumError("image spectrum has no nonzero type")
    val = log_fraction(best) / E_img.n
    return (val, arg, best) if detail else val


def image_spectrum(code: LinearCodeMatrix) -> Spectrum:
    return spectrum_of_set(sorted(image_set(code)), code.q)


def exhaustive_expected_image_spectrum(ens: Ensemble) -> Spectrum:
    weights: Counter = Counter()
    for w, code in ens.realizations():
        weights[code.generator] += w
    return average_spectra(
        (w, image_spectrum(LinearCodeMatrix(G))) for G, w in sorted(weights.items(), key=lambda kv: kv[0].entries)
    )


def conditional_exponent(cond: CondSpectrum, norm: int, given: Iterable[TypeVector] | None = None):
    """``max_{P in given, Q} (1/norm) ln (cond(Q|P) / ambient(Q))`` with its argmax."""
    ay = ambient_spectrum(cond.n_out, cond.q_out)
    keys = cond.conditioning_types() if given is None else list(given)
    best, arg = _max_ratio(((P, Q), v / ay[Q]) for P in keys for Q, v in cond.given(P).items())
    if best is None:
        return -math.inf, None
    return log_fraction(best) / norm, arg


class OuterConditionError(ValueError):
    def __init__(self, witness, gamma):
        self.witness = witness
        super().__init__(f"outer code maps nonzero input {witness} to relative weight <= {gamma}")


def relative_weight_predicate(gamma) -> Callable[[TypeVector], bool]:
    gamma = Fraction(gamma)
    return lambda P: 1 - P[0] > gamma


def theorem2_compose_bound(outer: LinearCodeMatrix, inner: CondSpectrum, gamma,
                           predicate: Callable[[TypeVector], bool] | None = None) -> BoundReport:
    """Exponent of ``inner o Sigma o outer`` against the inner exponent on ``A(gamma)``.

    Both exponents are normalized by the outer input length ``n``.
    """
    gamma = Fraction(gamma)
    check = outer_condition_check(outer, gamma)
    if not check.ok:
        raise OuterConditionError(check.witness, gamma)
    pred = predicate or relative_weight_predicate(gamma)
    E_F = forward_conditional(joint_spectrum_of_map(outer))
    n = outer.n
    composite = chain_rule_compose(E_F, inner)
    nonzero = [O for O in composite.conditioning_types() if not O.is_zero()]
    leak = [
        (O, P) for O in nonzero for P, w in E_F.given(O).items() if w and not pred(P)
    ]
    if leak:
        raise OuterConditionError(leak[0], gamma)
    lhs, arg = conditional_exponent(composite, n, nonzero)
    A = [P for P in all_types(outer.q, outer.m) if pred(P)]
    rhs, rarg = conditional_exponent(inner, n, A)
    return _report(
        {"q": outer.q, "n": n, "m": outer.m, "l": inner.n_out, "gamma": gamma},
        lhs, rhs, tol=1e-12, argmax=arg, bound_argmax=rarg, composite=composite,
    )
