import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codespectra import analysis as an
from codespectra.constructions import (
    LDGM,
    RLC,
    CHKParallel,
    Fixed,
    LinearCodeMatrix,
    exhaustive_expected_spectrum,
    make_rng,
    rep_parallel,
    sample_rlc,
)
from codespectra.genfun import genpoly_from_spectrum
from codespectra.spectra import (
    Spectrum,
    TypeVector,
    all_types,
    ambient_spectrum,
    forward_conditional,
    joint_spectrum_of_map,
    zero_type,
)
from tests import oracles as orc

F = Fraction
T = lambda *c: TypeVector(c)  # noqa: E731


# -- check sums and check codes

def test_checksum_examples():
    assert an.checksum_distribution(2, 4) == {0: 1, 1: 0}
    assert an.checksum_distribution(2, 3) == {0: 0, 1: 1}
    assert an.checksum_distribution(3, 2) == {0: F(1, 2), 1: F(1, 4), 2: F(1, 4)}
    assert an.checksum_distribution(5, 1) == {0: 0, 1: F(1, 4), 2: F(1, 4), 3: F(1, 4), 4: F(1, 4)}


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_checksum_matches_enumeration(q):
    for d in range(1, 5 if q < 7 else 4):
        assert an.checksum_distribution(q, d) == orc.checksum_law(q, d)


def test_expected_chk_genfun_examples():
    g = an.expected_chk_genfun(2, 1)
    assert g == genpoly_from_spectrum(joint_spectrum_of_map(LinearCodeMatrix.from_rows(2, [[1]])))
    for q, d in [(2, 1), (3, 2), (5, 3)]:
        assert an.expected_chk_genfun(q, d).evaluate([1] * (2 * q)) == 1
    g = an.expected_chk_genfun(3, 2)
    want = orc.chk_expected(3, 2, 1)
    assert {(e[:3], e[3:]): c for e, c in g.terms.items()} == want


def test_expected_chk_parallel_spectrum_examples():
    assert an.expected_chk_parallel_spectrum(3, 2, 1, zero_type(3, 2), zero_type(3, 1)) == F(1, 9)
    table = an.expected_chk_parallel_table(3, 3, 2)
    assert table.total() == 1
    assert orc.as_counts(table) == orc.chk_expected(3, 3, 2)


def test_g1_shape_errors():
    with pytest.raises(Exception):
        an.g1(3, 2, 2, T(1, 0, 0))
    with pytest.raises(Exception):
        an.expected_chk_parallel_spectrum(3, 2, 1, T(1, 0, 0), T(1, 0, 0))


def test_g2_at_O_equal_P():
    table = an.expected_chk_parallel_table(3, 2, 1)
    for P in all_types(3, 2):
        if 0 in P.counts:
            continue
        for Q in all_types(3, 1):
            assert table[(P, Q)] <= an.g2_bound(3, 2, 1, P.distribution(), P, Q)


def test_g2_uniform_is_finite_and_dominates():
    U = (F(1, 3),) * 3
    table = an.expected_chk_parallel_table(3, 3, 2)
    rng = np.random.default_rng(0)
    pts = [(P, Q) for P in all_types(3, 6) for Q in all_types(3, 2)]
    for i in rng.choice(len(pts), 20, replace=False):
        P, Q = pts[i]
        b = an.g2_bound(3, 3, 2, U, P, Q)
        assert isinstance(b, Fraction) and table[(P, Q)] <= b


# -- delta_d

def test_delta_d_zero_at_one_over_q():
    for d in (1, 2, 3, 5, 8):
        for y in np.linspace(0, 1, 9):
            assert an.delta_objective(3, d, 1 / 3, float(y), 1 / 3) == 0
            assert an.delta_d(3, d, 1 / 3, float(y)).value <= 1e-15


def test_delta_d_dense_oracle_spot():
    grid = np.arange(1, 10**6 + 1) / (10**6 + 1)
    r = an.delta_d(3, 4, 0.4, 0.2)
    assert abs(r.value - an.delta_objective_array(3, 4, 0.4, 0.2, grid).min()) < 1e-6
    assert r.value == pytest.approx(an.delta_objective(3, 4, 0.4, 0.2, r.minimizer), abs=1e-15)


@given(st.sampled_from([2, 3, 5]), st.integers(1, 9), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_delta_d_certificate(q, d, x, y, seed):
    r = an.delta_d(q, d, x, y)
    probes = np.random.default_rng(seed).random(1000) * (1 - 2e-12) + 1e-12
    vals = an.delta_objective_array(q, d, x, y, probes)
    assert r.value <= np.nanmin(vals) + 1e-12


def test_delta_d_unbounded_regime():
    # fewer nonzero edges than nonzero checks: the exponent is -inf
    r = an.delta_d(3, 2, 0.9, 0.1)
    assert r.value == -math.inf
    assert an.delta_objective(3, 2, 0.9, 0.1, 1 - 1e-9) < an.delta_objective(3, 2, 0.9, 0.1, 1 - 1e-6)


def test_delta_d_boundary_conventions():
    for x, y in [(0, 0), (0, 1), (1, 1), (0.5, 0), (0.5, 1)]:
        assert math.isfinite(an.delta_d(3, 3, x, y).value)
    assert an.binary_divergence(0, 0.5) == pytest.approx(math.log(2))
    assert an.binary_divergence(0.3, 0.3) == 0
    with pytest.raises(ValueError):
        an.delta_d(3, 2, 1.2, 0)


def test_sup_delta_d_decreases_and_d0():
    sups = [an.sup_delta_d(3, d, 0.5, x_points=21, y_points=11)[0] for d in (2, 4, 8, 16)]
    assert all(a > b for a, b in zip(sups, sups[1:]))
    d0 = an.d0(0.5, 0.1, q=3, rate_ratio=F(1, 2))
    assert d0 is not None
    assert F(1, 2) * an.sup_delta_d(3, d0, 0.5)[0] <= 0.1
    assert an.d0(0.5, -1.0, q=3, d_max=6) is None


# -- LDGM

def test_ldgm_conditional_matches_full_enumeration():
    E = exhaustive_expected_spectrum(LDGM(q=3, n=2, c=2, d=2))
    assert forward_conditional(E) == an.ldgm_expected_conditional(3, 2, 2, 2)


@pytest.mark.parametrize("q,n,c,d", [(3, 2, 2, 2), (3, 4, 3, 6), (5, 3, 2, 3), (3, 3, 2, 2)])
def test_ldgm_arrangement_route_agrees(q, n, c, d):
    cond = an.ldgm_expected_conditional(q, n, c, d)
    for P in all_types(q, n):
        got = {Q: v for Q, v in an.ldgm_conditional_by_arrangements(q, n, c, d, P).items() if v}
        assert got == cond.given(P)


@pytest.mark.parametrize("q,n,c,d", [(3, 2, 2, 2), (3, 4, 3, 6), (5, 2, 3, 2)])
def test_ldgm_alpha_bound_holds(q, n, c, d):
    cond = an.ldgm_expected_conditional(q, n, c, d)
    for P in all_types(q, n):
        if P.is_zero():
            continue
        for Q in all_types(q, cond.n_out):
            rep = an.ldgm_alpha_bound(q, n, c, d, P, Q, conditional=cond)
            assert rep.satisfied, rep.to_dict()


def test_ldgm_alpha_bound_excludes_zero_type():
    with pytest.raises(ValueError):
        an.ldgm_alpha_bound(3, 2, 2, 2, zero_type(3, 2), zero_type(3, 2))


def test_bound_report_serializes():
    rep = an.ldgm_alpha_bound(3, 2, 2, 2, T(1, 1, 0), T(0, 2, 0))
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["context"]["P"] == [1, 1, 0] and doc["satisfied"] is True


# -- rank

def test_rank_examples():
    assert an.rank_full_probability(2, 2, 2) == F(3, 8) == orc.full_rank_fraction(2, 2, 2)
    assert an.rank_full_probability(2, 1, 1) == F(1, 2)
    assert an.rank_full_probability(2, 2, 2) > 1 - F(1, 2) - F(1, 4)
    assert float(an.rank_full_probability(2, 4, 4)) == pytest.approx(0.30762, abs=1e-5)
    with pytest.raises(ValueError):
        an.rank_full_probability(2, 2, 3)
    with pytest.raises(ValueError):
        an.rank_lower_bound(2, 3, 2, 0)


@pytest.mark.parametrize("q", [3, 5])
def test_rank_matches_enumeration_odd_q(q):
    for n, m in [(1, 1), (2, 1), (2, 2)]:
        assert an.rank_full_probability(q, n, m) == orc.full_rank_fraction(q, n, m)


def test_square_limit_bound():
    for q in (2, 3, 5, 7):
        for n in range(1, 12):
            assert an.rank_full_probability(q, n, n) > 1 - F(1, q) - F(1, q * q)


# -- goodness

def test_goodness_rlc_and_identity():
    assert an.jscc_goodness(exhaustive_expected_spectrum(RLC(q=2, n=2, m=2))) == 0
    val, (P, Q), ratio = an.jscc_goodness(joint_spectrum_of_map(LinearCodeMatrix.identity(2, 2)), detail=True)
    assert ratio == 4 and val == pytest.approx(0.5 * math.log(4))
    assert P == Q


def test_jscc_dominates_image_goodness_for_fixed_codes():
    rng = make_rng(21)
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            for _ in range(4):
                f = sample_rlc(2, n, m, rng)
                if f.rank() == 0:
                    continue
                E = joint_spectrum_of_map(f)
                img = an.exhaustive_expected_image_spectrum(Fixed(code=f))
                assert m * an.image_goodness(img) <= n * an.jscc_goodness(E) + 1e-12


def test_image_spectrum_of_rlc_ensemble():
    img = an.exhaustive_expected_image_spectrum(RLC(q=2, n=2, m=2))
    assert img.total() == 1
    assert an.image_spectrum(LinearCodeMatrix.identity(2, 2)) == ambient_spectrum(2, 2)


# -- composition bound

def _direct_composite(outer, inner_q, inner_d, inner_m):
    F_ = outer.generator.entries
    m = outer.m
    perms = list(itertools.permutations(range(m)))
    coeffs = list(itertools.product(range(1, inner_q), repeat=inner_m * inner_d))
    w = F(1, len(perms) * len(coeffs))
    J = orc.average(
        (w, orc.joint(orc.compose(orc.chk_matrix(inner_q, inner_d, cs), p, F_, inner_q), inner_q, outer.n))
        for p in perms for cs in coeffs
    )
    return orc.conditional(J)


def test_compose_bound_with_check_inner():
    outer = rep_parallel(3, 3, 2)
    inner = an.expected_chk_parallel_conditional(3, 3, 2)
    # weight-1 inputs reach relative weight exactly 1/2, so A(1/2) fails and 2/5 is the tightest valid gamma
    with pytest.raises(an.OuterConditionError):
        an.theorem2_compose_bound(outer, inner, F(1, 2))
    rep = an.theorem2_compose_bound(outer, inner, F(2, 5))
    assert rep.satisfied and rep.lhs <= rep.rhs
    assert orc.cond_as_counts(rep.extra["composite"]) == _direct_composite(outer, 3, 3, 2)


def test_compose_bound_rlc_inner_gives_zero():
    outer = rep_parallel(2, 2, 1)
    inner = forward_conditional(exhaustive_expected_spectrum(RLC(q=2, n=2, m=2)))
    rep = an.theorem2_compose_bound(outer, inner, F(1, 3))
    assert rep.lhs == 0 and rep.rhs == 0


def test_compose_bound_vacuous_predicate_is_plain_goodness():
    outer = LinearCodeMatrix.from_rows(2, [[1, 0], [0, 1], [1, 1]])
    inner = forward_conditional(exhaustive_expected_spectrum(CHKParallel(q=2, d=3, m=1)))
    rep = an.theorem2_compose_bound(outer, inner, 0)
    comp = rep.extra["composite"]
    amb = ambient_spectrum(outer.n, 2)
    joint = {(P, Q): v * amb[P] for P in comp.conditioning_types() for Q, v in comp.given(P).items()}
    assert rep.lhs == pytest.approx(an.jscc_goodness(Spectrum(joint, 2, outer.n, 2, 1)))
