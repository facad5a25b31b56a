"""Exact and Monte Carlo type spectra of linear codes over prime fields."""

from __future__ import annotations

from .analysis import (
    BoundReport,
    checksum_distribution,
    d0,
    delta_d,
    expected_chk_genfun,
    expected_chk_parallel_conditional,
    expected_chk_parallel_spectrum,
    g1,
    g2_bound,
    image_goodness,
    jscc_goodness,
    ldgm_alpha_bound,
    ldgm_expected_conditional,
    rank_full_probability,
    rank_lower_bound,
    sup_delta_d,
    theorem2_compose_bound,
)
from .constructions import (
    CHK,
    LDGM,
    RLC,
    CHKParallel,
    Ensemble,
    Fixed,
    Interleaver,
    LinearCodeMatrix,
    REPParallel,
    SerialConcat,
    chk_parallel_matrix,
    encode,
    exhaustive_expected_spectrum,
    good_generator_search,
    make_rng,
    outer_condition_check,
    rep_parallel,
    sample_ldgm,
    sample_rlc,
    serial_concat,
)
from .field import FieldMatrix, FieldSpec, format_matrix, parse_matrix, rank
from .genfun import GenPoly, coef, genpoly_from_spectrum, spectrum_from_genpoly
from .montecarlo import McEstimate, estimate_expected_spectrum, estimate_rank_rate, estimate_uniformity
from .spectra import (
    CondSpectrum,
    Spectrum,
    TypeVector,
    all_types,
    alpha_of_expected_spectrum,
    ambient_spectrum,
    chain_rule_compose,
    joint_spectrum_of_map,
    kernel_spectrum,
    marginals_and_conditionals,
    spectrum_of_set,
    type_of,
)

__version__ = "0.1.0"
