import math

import pytest

from codespectra import analysis as an
from codespectra.constructions import LDGM, RLC, CHKParallel, Fixed, exhaustive_expected_spectrum, rep_parallel
from codespectra.montecarlo import (
    BLOCK,
    McEstimate,
    ZeroInputError,
    estimate_alpha,
    estimate_expected_spectrum,
    estimate_rank_rate,
    estimate_uniformity,
)
from codespectra.spectra import joint_spectrum_of_map


def test_mc_estimate_contract():
    with pytest.raises(ValueError):
        McEstimate(0.5, 0.1, 1, 0, "x")
    e = McEstimate(0.5, 0.1, 10, 3, "x")
    assert e.z_score(0.3) == pytest.approx(2.0)
    assert e.within(0.3, 2.0) and not e.within(0.3, 1.9)
    assert McEstimate(0.5, 0.0, 10, 0, "x").z_score(0.5) == 0
    assert McEstimate(0.5, 0.0, 10, 0, "x").z_score(0.4) == math.inf
    assert set(e.to_dict()) == {"target", "seed", "trials", "mean", "std_err"}


@pytest.mark.parametrize("ens", [RLC(q=2, n=2, m=2), CHKParallel(q=3, d=2, m=1)])
def test_expected_spectrum_within_3_sigma(ens):
    exact = exhaustive_expected_spectrum(ens)
    est = estimate_expected_spectrum(ens, 10_000, seed=1)
    assert set(est) >= set(exact.entries)
    assert abs(sum(e.mean for e in est.values()) - 1) < 1e-9
    for key, e in est.items():
        assert e.within(exact[key], 3), (key, e, exact[key])


def test_deterministic_code_has_zero_variance():
    f = rep_parallel(3, 2, 2)
    exact = joint_spectrum_of_map(f)
    for key, e in estimate_expected_spectrum(Fixed(code=f), 50, seed=0).items():
        assert e.std_err == 0 and e.mean == pytest.approx(float(exact[key]), abs=1e-15)


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        estimate_expected_spectrum(RLC(q=2, n=1, m=1), 0, seed=0)


def test_reproducible_across_workers_and_runs():
    ens = LDGM(q=3, n=2, c=2, d=2)
    trials = 3 * BLOCK + 17
    a = estimate_expected_spectrum(ens, trials, seed=5, workers=1)
    b = estimate_expected_spectrum(ens, trials, seed=5, workers=4)
    c = estimate_expected_spectrum(ens, trials, seed=5, workers=3)
    assert a == b == c
    d = estimate_expected_spectrum(ens, trials, seed=6)
    assert a != d


def test_alpha_estimate_rlc_near_one():
    est = estimate_alpha(RLC(q=2, n=2, m=2), 20_000, seed=2)
    for (P, Q), e in est.items():
        if not P.is_zero():
            assert e.within(1.0, 4)


def test_uniformity_examples():
    res = estimate_uniformity(RLC(q=2, n=3, m=2), (1, 0, 0), 100_000, seed=0)
    assert sum(res.counts.values()) == 100_000 and res.dof == 3
    for e in res.estimates.values():
        assert e.within(0.25, 3)
    res = estimate_uniformity(RLC(q=3, n=2, m=1), (1, 2), 100_000, seed=0)
    for e in res.estimates.values():
        assert e.within(1 / 3, 3)
    assert res.chi2 < 13.8  # 0.999 quantile of chi2 with 2 dof


def test_uniformity_rejects_zero_input():
    with pytest.raises(ZeroInputError, match="always encodes to 0"):
        estimate_uniformity(RLC(q=2, n=3, m=2), (0, 0, 0), 10, seed=0)


def test_rank_rate_examples():
    e = estimate_rank_rate(2, 2, 2, 100_000, seed=0)
    assert e.within(0.375, 3)
    big = estimate_rank_rate(2, 8, 8, 100_000, seed=0)
    assert big.mean > 0.25 - 3 * big.std_err
    assert big.within(an.rank_full_probability(2, 8, 8), 4)
    assert estimate_rank_rate(2, 3, 0, 10).mean == 1
    with pytest.raises(ValueError):
        estimate_rank_rate(2, 2, 3, 10)


def test_rank_rate_workers_identical():
    a = estimate_rank_rate(3, 4, 3, 2000, seed=9, workers=1)
    b = estimate_rank_rate(3, 4, 3, 2000, seed=9, workers=4)
    assert a == b


def test_meta_seed_sweep_small():
    # scaled-down form of the 50-seed consistency sweep
    ens = CHKParallel(q=3, d=2, m=2)
    exact = an.expected_chk_parallel_table(3, 2, 2)
    for s in range(5):
        for key, e in estimate_expected_spectrum(ens, 4000, seed=s).items():
            assert e.within(exact[key], 4)
