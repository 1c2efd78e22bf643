"""Exact finite-blocklength limits of variable-length compression with side
information, under both the maximum and the average error criterion.

The package computes the optimal expected codeword length of one-to-one
(non-prefix) codes that may err with probability at most eps, builds the
codes and the matching giving-up guessing strategies, and checks the
one-shot bounds and two-term (dispersion) approximations on exact,
rational-arithmetic sources.
"""

from .asymptotics import (
    ResidualReport,
    ResidualRow,
    SecondOrderEstimate,
    exact_dispersion_mean,
    f_gaussian,
    norm_cdf,
    norm_pdf,
    norm_ppf,
    residual_scan,
    second_order,
)
from .backend import BACKEND
from .coding import (
    BinaryString,
    CodePlan,
    FlawedTrace,
    OneShotBounds,
    PlanRow,
    SimulationResult,
    TraceStep,
    build_code,
    encode_decode,
    flawed_procedure_trace,
    lstar,
    lstar_profile,
    one_shot_bounds,
    simulate_code,
    string_length,
)
from .cutoff import (
    CutoffSpec,
    ValueSpectrum,
    cond_cutoff_entropy,
    cutoff_spec,
    expected_cutoff,
    expected_cutoff_grid,
    integral_form_expected_cutoff,
    min_kept_oracle,
    mixture_iota_spectrum,
    row_iota_spectrum,
    uncond_cutoff_entropy,
)
from .errors import BudgetExceededError, InvariantError, ValidationError, VldsrcError
from .fixtures import (
    FIXTURE_NAMES,
    FIXTURES,
    fixture,
    point_uniform8,
    skewed_triple,
    zeta_geometric_source,
)
from .guessing import (
    BracketReport,
    GivingUpStrategy,
    GuessSimulationResult,
    StrategyRow,
    StrategyValue,
    bracket_check,
    build_strategy,
    evaluate_strategy,
    simulate_guessing,
    sum_log2_range,
    validate_cost,
)
from .lift import (
    RankClass,
    RankSpectrum,
    YType,
    floor_log_rank_spectrum,
    iota_spectrum_n,
    pooled_floor_log_rank_spectrum,
    rank_spectrum,
    y_marginal_types,
)
from .sources import (
    JointSource,
    MeasureSet,
    coerce_eps,
    dump_source,
    info_density,
    load_source,
    measures,
    product_source,
    sorted_rows,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BinaryString",
    "BracketReport",
    "BudgetExceededError",
    "CodePlan",
    "CutoffSpec",
    "FIXTURES",
    "FIXTURE_NAMES",
    "FlawedTrace",
    "GivingUpStrategy",
    "GuessSimulationResult",
    "InvariantError",
    "JointSource",
    "MeasureSet",
    "OneShotBounds",
    "PlanRow",
    "RankClass",
    "RankSpectrum",
    "ResidualReport",
    "ResidualRow",
    "SecondOrderEstimate",
    "SimulationResult",
    "StrategyRow",
    "StrategyValue",
    "TraceStep",
    "ValidationError",
    "ValueSpectrum",
    "VldsrcError",
    "YType",
    "bracket_check",
    "build_code",
    "build_strategy",
    "coerce_eps",
    "cond_cutoff_entropy",
    "cutoff_spec",
    "dump_source",
    "encode_decode",
    "evaluate_strategy",
    "exact_dispersion_mean",
    "expected_cutoff",
    "expected_cutoff_grid",
    "f_gaussian",
    "fixture",
    "flawed_procedure_trace",
    "floor_log_rank_spectrum",
    "info_density",
    "integral_form_expected_cutoff",
    "iota_spectrum_n",
    "load_source",
    "lstar",
    "lstar_profile",
    "measures",
    "min_kept_oracle",
    "mixture_iota_spectrum",
    "norm_cdf",
    "norm_pdf",
    "norm_ppf",
    "one_shot_bounds",
    "pooled_floor_log_rank_spectrum",
    "point_uniform8",
    "product_source",
    "rank_spectrum",
    "residual_scan",
    "row_iota_spectrum",
    "second_order",
    "simulate_code",
    "simulate_guessing",
    "sum_log2_range",
    "validate_cost",
    "skewed_triple",
    "sorted_rows",
    "string_length",
    "uncond_cutoff_entropy",
    "y_marginal_types",
    "zeta_geometric_source",
]
