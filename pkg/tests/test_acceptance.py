"""Acceptance criteria 1-13, one test each.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible under
``pytest -v -s`` and in the summary of ``python3 tests/test_acceptance.py``).
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tests import oracles as orc  # noqa: E402

from codespectra import analysis as an  # noqa: E402
from codespectra.constructions import (  # noqa: E402
    LDGM,
    RLC,
    CHKParallel,
    LinearCodeMatrix,
    exhaustive_expected_spectrum,
    good_generator_search,
    make_rng,
    rep_parallel,
    sample_rlc,
)
from codespectra.field import FieldMatrix  # noqa: E402
from codespectra.montecarlo import estimate_expected_spectrum, estimate_rank_rate  # noqa: E402
from codespectra.spectra import (  # noqa: E402
    all_types,
    alpha_of_expected_spectrum,
    ambient_spectrum,
    chain_rule_compose,
    forward_conditional,
    joint_spectrum_of_map,
    spectrum_of_set,
)

CHK_SET = [(3, 2, 1), (3, 2, 2), (2, 2, 2), (3, 3, 1)]
RESULTS: dict[int, bool] = {}


def report(n: int, ok: bool, detail: str, capsys=None):
    RESULTS[n] = ok
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_ambient_formula(capsys):
    with Timer() as t:
        ok = True
        for q in (2, 3):
            for n in range(1, 6):
                S = orc.as_counts(spectrum_of_set(itertools.product(range(q), repeat=n), q))
                want = {P: orc.multinomial_formula(P) for P in orc.ambient(q, n)}
                ok &= S == want
                ok &= orc.as_counts(ambient_spectrum(n, q)) == want
    report(1, ok and t.elapsed < 1, f"exact for q in {{2,3}}, n <= 5 ({t.elapsed:.2f}s < 1s)", capsys)


def test_criterion_02_repetition_diagonal(capsys):
    with Timer() as t:
        ok = True
        for q in (2, 3):
            for n in range(1, 5):
                amb = orc.ambient(q, n)
                for c in range(1, 4):
                    got = orc.as_counts(joint_spectrum_of_map(rep_parallel(q, c, n)))
                    want = {(P, tuple(c * k for k in P)): v for P, v in amb.items()}
                    ok &= got == want
    report(2, ok and t.elapsed < 5, f"diagonal for q in {{2,3}}, n <= 4, c <= 3 ({t.elapsed:.2f}s < 5s)", capsys)


def test_criterion_03_checksum_law(capsys):
    with Timer() as t:
        ok = all(
            an.checksum_distribution(q, d) == orc.checksum_law(q, d) for q in (2, 3, 5) for d in range(1, 5)
        )
        table = an.checksum_distribution(3, 2)
        ok &= [table[a] for a in range(3)] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]
    report(3, ok and t.elapsed < 1, f"q in {{2,3,5}}, d <= 4; q=3,d=2 -> (1/2,1/4,1/4) ({t.elapsed:.2f}s < 1s)", capsys)


def test_criterion_04_expected_chk_spectrum(capsys):
    with Timer() as t:
        ok = True
        for q, d, m in CHK_SET:
            closed = {
                (P.counts, Q.counts): v
                for P in all_types(q, m * d) for Q in all_types(q, m)
                for v in [an.expected_chk_parallel_spectrum(q, d, m, P, Q)] if v
            }
            ok &= closed == orc.chk_expected(q, d, m)
            ok &= closed == orc.as_counts(an.expected_chk_parallel_table(q, d, m))
            if m == 1:
                g = an.expected_chk_genfun(q, d)
                ok &= {(e[:q], e[q:]): c for e, c in g.terms.items()} == closed
            ok &= closed == orc.as_counts(exhaustive_expected_spectrum(CHKParallel(q=q, d=d, m=m)))
    report(4, ok and t.elapsed < 30, f"coefficient extraction == exhaustive on {CHK_SET} ({t.elapsed:.2f}s < 30s)",
           capsys)


def _admissible_points(q, rng, k):
    pts = [tuple(Fraction(1, q) for _ in range(q))]
    while len(pts) < k:
        w = rng.integers(1, 100, size=q)
        pts.append(tuple(Fraction(int(v), int(w.sum())) for v in w))
    return pts


def test_criterion_05_g2_domination(capsys):
    rng = np.random.default_rng(5)
    ok = True
    checked = 0
    for q, d, m in CHK_SET:
        table = orc.chk_expected(q, d, m)
        Os = _admissible_points(q, rng, 20)
        for P in all_types(q, m * d):
            for Q in all_types(q, m):
                lhs = table.get((P.counts, Q.counts), Fraction(0))
                for O in Os:
                    ok &= lhs <= an.g2_bound(q, d, m, O, P, Q)
                    checked += 1
    report(5, ok, f"exact on {checked} (O,P,Q) triples, 20 O per instance", capsys)


def test_criterion_06_rank_law(capsys):
    with Timer() as t:
        ok = True
        for n in range(1, 4):
            for m in range(1, 4):
                if m <= n:
                    ok &= an.rank_full_probability(2, n, m) == orc.full_rank_fraction(2, n, m)
        ok &= an.rank_full_probability(2, 2, 2) == Fraction(3, 8)
        for q in (2, 3, 5):
            for n in range(1, 9):
                for m in range(1, n + 1):
                    p = an.rank_full_probability(q, n, m)
                    ok &= all(an.rank_lower_bound(q, n, m, k) < p for k in range(1, m + 1))
        ok &= Fraction(3, 8) > 1 - Fraction(1, 2) - Fraction(1, 4)
    report(6, ok and t.elapsed < 10, f"product == count (q=2), strict lower bounds, 3/8 > 1/4 ({t.elapsed:.2f}s < 10s)",
           capsys)


def test_criterion_07_rlc_perfection(capsys):
    with Timer() as t:
        ok = True
        for q, n in [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)]:
            E = exhaustive_expected_spectrum(RLC(q=q, n=n, m=n))
            ok &= orc.as_counts(E) == orc.rlc_expected(q, n, n)
            alpha = alpha_of_expected_spectrum(E)
            ok &= all(v == 1 for (P, Q), v in alpha.items() if not P.is_zero())
            ok &= an.jscc_goodness(E) == 0
    report(7, ok and t.elapsed < 60, f"alpha == 1 off zero, goodness == 0 ({t.elapsed:.2f}s < 60s)", capsys)


def test_criterion_08_chain_rule(capsys):
    rng = make_rng(8)
    ok = True
    cases = [(2, 3, 2), (2, 4, 3), (3, 5, 2), (2, 5, 4)]
    for n, m, l in cases:
        F = sample_rlc(2, n, m, rng)
        G = sample_rlc(2, m, l, rng)
        comp = chain_rule_compose(forward_conditional(joint_spectrum_of_map(F)),
                                  forward_conditional(joint_spectrum_of_map(G)))
        direct = orc.interleaved_composition_conditional(F.generator.entries, G.generator.entries, 2)
        ok &= orc.cond_as_counts(comp) == direct
    report(8, ok, f"exact vs all-interleaver average, q=2, (n,m,l) in {cases}", capsys)


def test_criterion_09_ldgm_chk_step(capsys):
    q, n, c, d = 3, 2, 2, 2
    with Timer() as t:
        E = exhaustive_expected_spectrum(LDGM(q=q, n=n, c=c, d=d))
        ok = orc.as_counts(E) == orc.ldgm_expected(q, n, c, d)
        ldgm = forward_conditional(E)
        chk = an.expected_chk_parallel_conditional(q, d, n * c // d)
        for P in ldgm.conditioning_types():
            ok &= ldgm.given(P) == {Q: v for Q, v in chk.given(P.scaled(c)).items() if v}
    report(9, ok and t.elapsed < 60, f"LDGM(3,2,2,2) conditional == CHK conditional at O=P ({t.elapsed:.2f}s < 60s)",
           capsys)


def test_criterion_10_delta_d(capsys):
    q = 3
    grid = (np.arange(1, 10**6 + 1)) / (10**6 + 1)
    axis = (0.1, 0.3, 0.5, 0.7, 0.9)
    ok = True
    worst = 0.0
    unbounded = 0
    for d in (2, 4, 8):
        for x in axis:
            for y in axis:
                r = an.delta_d(q, d, x, y)
                vals = an.delta_objective_array(q, d, x, y, grid)
                if r.value == -math.inf:
                    # objective unbounded below toward xh -> 1: oracle minimum sits at the last point
                    unbounded += 1
                    ok &= d * (1 - x) < 1 - y and int(np.argmin(vals)) == len(grid) - 1
                    continue
                diff = abs(r.value - float(vals.min()))
                worst = max(worst, diff)
                ok &= diff <= 1e-6
    rng = np.random.default_rng(10)
    for y in rng.random(50):
        ok &= an.delta_d(q, 4, 1 / q, float(y)).value <= 0
    sups = [an.sup_delta_d(q, d, 0.5)[0] for d in (2, 4, 8, 16)]
    ok &= all(a > b for a, b in zip(sups, sups[1:]))
    d0 = an.d0(0.5, 0.1, q=q, rate_ratio=Fraction(1, 2))
    ok &= d0 is not None
    report(10, ok, f"grid diff {worst:.1e} <= 1e-6 ({unbounded} unbounded cells), sups {[f'{s:.3g}' for s in sups]}, "
                   f"d0(0.5,0.1) = {d0}", capsys)


def _meta_pass_rate(ens, exact, seeds=50, trials=10_000):
    hits: dict = {}
    for s in range(seeds):
        for key, e in estimate_expected_spectrum(ens, trials, seed=s).items():
            hits.setdefault(key, []).append(e.within(exact[key], 4))
    return min(float(np.mean(v)) for v in hits.values())


def test_criterion_11_monte_carlo(capsys):
    worst = {}
    for q, d, m in CHK_SET:
        worst[f"CHK{(q, d, m)}"] = _meta_pass_rate(CHKParallel(q=q, d=d, m=m), an.expected_chk_parallel_table(q, d, m))
    for q, n in [(2, 2), (3, 2), (2, 3)]:
        ens = RLC(q=q, n=n, m=n)
        worst[f"RLC{(q, n)}"] = _meta_pass_rate(ens, exhaustive_expected_spectrum(ens))
    for n, m in [(2, 2), (3, 2), (3, 3)]:
        exact = an.rank_full_probability(2, n, m)
        worst[f"rank{(n, m)}"] = float(np.mean([estimate_rank_rate(2, n, m, 10_000, s).within(exact, 4)
                                                 for s in range(50)]))
    ok = all(v >= 0.99 for v in worst.values())
    big = estimate_rank_rate(2, 8, 8, 10_000, seed=11)
    ok &= big.mean > 0.25 - 3 * big.std_err
    report(11, ok, f"min per-estimand 4-sigma rate over 50 seeds = {min(worst.values()):.2f}; "
                   f"rank rate q=2 n=m=8 = {big.mean:.4f}", capsys)


def test_criterion_12_generator_search(capsys):
    rng = make_rng(12)
    ok = True
    for n in range(1, 5):
        for m in range(1, 6):
            for f in [sample_rlc(2, n, m, rng) for _ in range(3)] + [LinearCodeMatrix(FieldMatrix.zeros(2, m, n))]:
                res = good_generator_search(f, rng)
                ok &= orc.image(res.g.generator.entries, 2, n) == orc.image(f.generator.entries, 2, n)
                ok &= orc.rank_by_span(res.transform.generator.entries, 2, n) == n
    f = LinearCodeMatrix.identity(2, 4)
    searches, tries = 0, 0
    srng = make_rng(12, 1)
    while tries < 20_000:
        tries += good_generator_search(f, srng).tries
        searches += 1
    p = float(an.rank_full_probability(2, 4, 4))
    rate = searches / tries
    sigma = math.sqrt(p * (1 - p) / tries)
    ok &= abs(rate - p) <= 3 * sigma
    report(12, ok, f"image preserved for q=2, n <= 4; success rate {rate:.4f} vs {p:.5f} (3 sigma = {3 * sigma:.4f})",
           capsys)


CLI_RUNS = [
    ["rank", "--q", "2", "--n", "2", "--m", "2"],
    ["rank", "--q", "2", "--n", "4", "--m", "4", "--trials", "2000", "--seed", "3", "--format", "csv"],
    ["rlc", "--q", "3", "--n", "2", "--m", "3", "--seed", "7"],
    ["ldgm", "--q", "3", "--n", "2", "--c", "2", "--d", "2", "--seed", "7"],
    ["ldgm", "--q", "3", "--n", "4", "--c", "3", "--d", "6", "--seed", "9", "--format", "csv"],
    ["delta-d", "--q", "3", "--d", "4", "--grid", "0.25", "--gamma", "1/2", "--delta", "1/10"],
    ["goodness", "--ensemble", "rlc", "--q", "2", "--n", "2", "--m", "2"],
    ["goodness", "--ensemble", "ldgm", "--q", "3", "--n", "2", "--c", "2", "--d", "2", "--gamma", "1/4"],
    ["mc", "--ensemble", "chk", "--q", "3", "--d", "2", "--m", "1", "--trials", "3000", "--seed", "5"],
    ["mc", "--ensemble", "ldgm", "--q", "3", "--n", "2", "--c", "2", "--d", "2", "--trials", "500", "--seed", "5",
     "--format", "csv"],
    ["genfun", "--q", "3", "--d", "2"],
    ["spectrum", "{matrix}"],
    ["verify"],
]


def test_criterion_13_cli_determinism(tmp_path, capsys):
    import tempfile

    tmp = str(tmp_path) if tmp_path is not None else tempfile.mkdtemp()
    matrix = os.path.join(tmp, "rep.txt")
    with open(matrix, "w") as fh:
        fh.write("2 4 2\n1 0\n1 0\n0 1\n0 1\n")
    ok = True
    bad = []
    verify_rc = None
    for i, argv in enumerate(CLI_RUNS):
        argv = [a.format(matrix=matrix) for a in argv]
        blobs = []
        for run, hashseed in enumerate(("1", "2")):
            out = os.path.join(tmp, f"out{i}_{run}")
            env = dict(os.environ, PYTHONHASHSEED=hashseed)
            proc = subprocess.run([sys.executable, "-m", "codespectra", *argv, "--out", out], env=env,
                                  capture_output=True, text=True)
            if argv[0] == "verify":
                verify_rc = proc.returncode
            if proc.returncode != 0:
                bad.append((argv, proc.returncode, proc.stderr.strip()))
            with open(out, "rb") as fh:
                blobs.append(fh.read())
        if blobs[0] != blobs[1]:
            bad.append((argv, "differs"))
    ok = not bad and verify_rc == 0
    report(13, ok, f"{len(CLI_RUNS)} commands byte-identical across reruns; verify exit {verify_rc}"
                   + (f"; problems: {bad}" if bad else ""), capsys)


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        try:
            fn(*[None] * fn.__code__.co_argcount)
        except AssertionError:
            pass
    passed = sum(RESULTS.values())
    print(f"{passed}/{len(RESULTS)} criteria passed")
    sys.exit(0 if passed == len(RESULTS) else 1)
