"""Kernel ridge regression Q-learning with a generative model."""

from ._kqlearn import (
    ConstructionError,
    Config,
    FiniteMdp,
    GreedyTrace,
    Kernel,
    NumericError,
    RegressionModel,
    RunResult,
    __version__,
    build_max_uncertainty_set,
    build_rkhs_mdp,
    confidence_width,
    fit,
    fit_loglog_slope,
    greedy_policy,
    info_gain,
    policy_value,
    run,
    suggest_jl,
    sweep,
    theorem1_bound,
    validate,
    value_iteration,
    verify_uncertainty_sum,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
