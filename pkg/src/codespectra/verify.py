"""Named invariant checks run by ``codespectra verify``.

Each check compares a closed form or library routine against a brute-force
route at desk scale and returns ``(ok, detail)``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis as an
from .constructions import (
    LDGM,
    RLC,
    CHKParallel,
    Interleaver,
    exhaustive_expected_spectrum,
    make_rng,
    rep_parallel,
    sample_rlc,
    serial_concat,
)
from .field import FieldMatrix, FieldSpec, rank
from .genfun import genpoly_from_spectrum, spectrum_from_genpoly
from .spectra import (
    all_types,
    alpha_of_expected_spectrum,
    average_spectra,
    ambient_spectrum,
    chain_rule_compose,
    forward_conditional,
    joint_spectrum_of_map,
    multinomial,
    spectrum_of_set,
)

CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {}


def check(fn):
    CHECKS[fn.__name__] = fn
    return fn


@check
def field_inverses():
    for q in (2, 3, 5, 7, 11, 13):
        F = FieldSpec(q)
        for a in F.nonzero:
            if F.mul(a, F.inv(a)) != 1:
                return False, f"inv({a}) wrong in F_{q}"
    return True, "q <= 13 exhaustive"


@check
def rank_vs_row_space():
    rng = make_rng(0, 1)
    for q in (2, 3):
        for m in range(1, 4):
            for n in range(1, 4):
                for _ in range(5):
                    A = FieldMatrix(q, rng.integers(0, q, size=(m, n)).tolist(), n)
                    span = {
                        tuple(sum(c * v for c, v in zip(coef, col)) % q for col in zip(*A.entries))
                        for coef in itertools.product(range(q), repeat=m)
                    }
                    if q ** rank(A) != len(span):
                        return False, f"rank mismatch for {A.entries} over F_{q}"
    return True, "q in {2,3}, m,n <= 3"


@check
def ambient_formula():
    for q in (2, 3):
        for n in range(1, 6):
            seqs = itertools.product(range(q), repeat=n)
            if spectrum_of_set(seqs, q) != ambient_spectrum(n, q):
                return False, f"q={q} n={n}"
            if any(ambient_spectrum(n, q)[P] != Fraction(multinomial(P), q**n) for P in all_types(q, n)):
                return False, f"multinomial q={q} n={n}"
    return True, "q in {2,3}, n <= 5"


@check
def repetition_diagonal():
    for q in (2, 3):
        for n in range(1, 4):
            for c in range(1, 4):
                S = joint_spectrum_of_map(rep_parallel(q, c, n))
                amb = ambient_spectrum(n, q)
                for P in all_types(q, n):
                    for Q in all_types(q, n * c):
                        want = amb[P] if Q == P.scaled(c) else 0
                        if S[(P, Q)] != want:
                            return False, f"q={q} n={n} c={c} at {P},{Q}"
    return True, "q in {2,3}, n <= 3, c <= 3"


@check
def checksum_law():
    for q in (2, 3, 5):
        for d in range(1, 5):
            cnt = [0] * q
            for cs in itertools.product(range(1, q), repeat=d):
                cnt[sum(cs) % q] += 1
            tot = (q - 1) ** d
            if an.checksum_distribution(q, d) != {a: Fraction(cnt[a], tot) for a in range(q)}:
                return False, f"q={q} d={d}"
    return True, "q in {2,3,5}, d <= 4"


@check
def chk_expected_spectrum():
    for q, d, m in [(3, 2, 1), (3, 2, 2), (2, 2, 2), (3, 3, 1)]:
        if an.expected_chk_parallel_table(q, d, m) != exhaustive_expected_spectrum(CHKParallel(q=q, d=d, m=m)):
            return False, f"(q,d,m)=({q},{d},{m})"
    return True, "(3,2,1) (3,2,2) (2,2,2) (3,3,1)"


@check
def g2_domination():
    rng = make_rng(0, 2)
    for q, d, m in [(3, 2, 1), (3, 2, 2), (2, 2, 2), (3, 3, 1)]:
        table = an.expected_chk_parallel_table(q, d, m)
        for P in all_types(q, m * d):
            Os = []
            for _ in range(20):
                w = rng.integers(1, 50, size=q)
                Os.append(tuple(Fraction(int(v), int(w.sum())) for v in w))
            for O in Os:
                for Q in all_types(q, m):
                    if table[(P, Q)] > an.g2_bound(q, d, m, O, P, Q):
                        return False, f"({q},{d},{m}) P={P} Q={Q} O={O}"
    return True, "20 positive O per P"


@check
def rank_law():
    q = 2
    for n in range(1, 4):
        for m in range(1, n + 1):
            full = sum(
                rank(FieldMatrix(q, [flat[i * n:(i + 1) * n] for i in range(m)], n)) == m
                for flat in itertools.product(range(q), repeat=m * n)
            )
            if an.rank_full_probability(q, n, m) != Fraction(full, q ** (m * n)):
                return False, f"q=2 n={n} m={m}"
    for q in (2, 3, 5):
        for n in range(1, 9):
            for m in range(1, n + 1):
                p = an.rank_full_probability(q, n, m)
                for k in range(1, m + 1):
                    if not an.rank_lower_bound(q, n, m, k) < p < 1:
                        return False, f"lower bound q={q} n={n} m={m} k={k}"
    return True, "exhaustive q=2 n,m <= 3; bound grid q in {2,3,5}, n <= 8"


@check
def rlc_perfection():
    for q, n in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)]:
        E = exhaustive_expected_spectrum(RLC(q=q, n=n, m=n))
        alpha = alpha_of_expected_spectrum(E)
        if any(v != 1 for (P, Q), v in alpha.items() if not P.is_zero()):
            return False, f"alpha != 1 at q={q} n={n}"
        if an.jscc_goodness(E) != 0:
            return False, f"goodness != 0 at q={q} n={n}"
    return True, "q in {2,3}, n=m <= 2; q=2 n=m=3"


@check
def chain_rule():
    q = 2
    rng = make_rng(0, 3)
    for n, m, l in [(2, 3, 2), (2, 4, 3), (3, 5, 2)]:
        F = sample_rlc(q, n, m, rng)
        G = sample_rlc(q, m, l, rng)
        eF = forward_conditional(joint_spectrum_of_map(F))
        eG = forward_conditional(joint_spectrum_of_map(G))
        comp = chain_rule_compose(eF, eG)
        w = Fraction(1, math.factorial(m))
        direct = forward_conditional(average_spectra(
            (w, joint_spectrum_of_map(serial_concat(F, Interleaver(p), G)))
            for p in itertools.permutations(range(m))
        ))
        if comp != direct:
            return False, f"n={n} m={m} l={l}"
    return True, "q=2, m <= 5"


@check
def ldgm_chk_step():
    E = exhaustive_expected_spectrum(LDGM(q=3, n=2, c=2, d=2))
    if forward_conditional(E) != an.ldgm_expected_conditional(3, 2, 2, 2):
        return False, "q=3 n=2 c=2 d=2"
    return True, "q=3 n=2 c=2 d=2, all 384 realizations"


@check
def delta_d_sanity():
    q = 3
    for y in np.linspace(0, 1, 11):
        if an.delta_d(q, 4, 1 / q, float(y)).value > 1e-12:
            return False, f"delta_d(1/q, {y}) > 0"
    sups = [an.sup_delta_d(q, d, 0.5, x_points=21, y_points=11)[0] for d in (2, 4, 8, 16)]
    if not all(a > b for a, b in zip(sups, sups[1:])):
        return False, f"sup not decreasing: {sups}"
    return True, "delta_d(1/3, y) <= 0; sup decreasing in d"


@check
def genfun_round_trip():
    S = exhaustive_expected_spectrum(CHKParallel(q=3, d=2, m=1))
    g = genpoly_from_spectrum(S)
    if spectrum_from_genpoly(g, 3, 3) != S or g.evaluate([1] * 6) != 1:
        return False, "round trip"
    if an.expected_chk_genfun(3, 2) != g:
        return False, "expected CHK generating function"
    return True, "CHK q=3 d=2"


@check
def ldgm_bound():
    for q, n, c, d in [(3, 2, 2, 2), (3, 4, 3, 6)]:
        cond = an.ldgm_expected_conditional(q, n, c, d)
        for P in all_types(q, n):
            if P.is_zero():
                continue
            for Q in all_types(q, cond.n_out):
                if not an.ldgm_alpha_bound(q, n, c, d, P, Q, conditional=cond).satisfied:
                    return False, f"({q},{n},{c},{d}) P={P} Q={Q}"
    return True, "(3,2,2,2) (3,4,3,6)"


def run_all(names: list[str] | None = None) -> list[dict]:
    out = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append({"check": name, "ok": bool(ok), "detail": detail})
    return out
