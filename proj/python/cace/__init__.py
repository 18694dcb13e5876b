"""Sample complier average causal effect estimation.

Thin Python layer over the C++ core in ``cace._core``.
"""

import json

from ._core import (
    ConfidenceSet,
    ConfigError,
    DataError,
    DegenerateLeverageError,
    ExperimentData,
    IntervalReport,
    OlsFit,
    PointEstimate,
    PotentialPopulation,
    RankDeficiencyError,
    __version__,
    difference_in_means,
    generate_population,
    load_csv,
    normal_quantile,
    ols,
    pril_limit,
    reg_estimate,
    reg_interval,
    sample_covariance,
    sample_variance,
    solve_quadratic_leq,
    true_var_tau_b,
    wald_delta_interval,
    wald_estimate,
    wald_ld_set,
)
from . import _core


def estimate(data, methods=(), alpha=0.05):
    """Per-method reports as dictionaries (same schema as ``cace estimate --format json``)."""
    return json.loads(_core.estimate_json(data, list(methods), alpha))


def run_study(n=400, p_co=0.5, rho=0.0, k=5, reps=1000, seed=1, alpha=0.05, threads=0):
    """Run a Monte Carlo study and return the summary as a dictionary."""
    return json.loads(_core.run_study_json(n, p_co, rho, k, reps, seed, alpha, threads))
