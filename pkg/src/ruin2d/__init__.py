"""Exact, bounded and asymptotic simultaneous ruin probabilities for
two-dimensional Brownian and one-sided Levy risk models, with a Monte
Carlo engine used to validate every formula."""

from .bivariate import (
    BivariateBRM,
    Regime,
    asym_approx,
    classify_regime,
    crude_upper_bound,
    early_window_bound,
    lambda_pair,
    prop1_bounds,
    q_exponent,
    ruin_time_limit_cdf,
    tail_equivalent_form,
)
from .errors import (
    DegenerateDrift,
    DegenerateIS,
    EmptySample,
    InvalidInput,
    MissingConstant,
    NonConvergence,
    RegimeError,
    Ruin2dError,
)
from .levy import (
    BrownianModel,
    GammaModel,
    L_functional,
    LevyModel,
    PerturbedGammaModel,
    StableModel,
    TwoLineBarrier,
    gamma_L_closed,
    psi_levy,
    stable_density,
)
from .montecarlo import (
    Estimate,
    SimConfig,
    default_tilt,
    ks_statistic,
    sample_ruin_time,
    simulate_levy_psi,
    simulate_levy_psi_many,
    simulate_one_dim,
    simulate_psi,
)
from .numerics import GaussianPair, QuadratureSpec, bivariate_normal_tail, integrate_1d
from .single import SinglePortfolio, normalize, ruin_finite, ruin_infinite
from .tail_constant import (
    ConstantEstimate,
    LatticeSpec,
    estimate_I_T,
    extrapolate_C,
    upper_bound_C,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateBRM",
    "BrownianModel",
    "ConstantEstimate",
    "DegenerateDrift",
    "DegenerateIS",
    "EmptySample",
    "Estimate",
    "GammaModel",
    "GaussianPair",
    "InvalidInput",
    "L_functional",
    "LatticeSpec",
    "LevyModel",
    "MissingConstant",
    "NonConvergence",
    "PerturbedGammaModel",
    "QuadratureSpec",
    "Regime",
    "RegimeError",
    "Ruin2dError",
    "SimConfig",
    "SinglePortfolio",
    "StableModel",
    "TwoLineBarrier",
    "asym_approx",
    "bivariate_normal_tail",
    "classify_regime",
    "crude_upper_bound",
    "default_tilt",
    "early_window_bound",
    "estimate_I_T",
    "extrapolate_C",
    "gamma_L_closed",
    "integrate_1d",
    "ks_statistic",
    "lambda_pair",
    "normalize",
    "prop1_bounds",
    "psi_levy",
    "q_exponent",
    "ruin_finite",
    "ruin_infinite",
    "ruin_time_limit_cdf",
    "sample_ruin_time",
    "simulate_levy_psi",
    "simulate_levy_psi_many",
    "simulate_one_dim",
    "simulate_psi",
    "stable_density",
    "tail_equivalent_form",
    "upper_bound_C",
]
