"""Five likelihood-based estimators of ``(a, c, R0)`` from aggregate counts."""

from .fits import (
    FITTERS,
    METHODS,
    FitResult,
    dated_contagion,
    fit,
    fit_binomial_ml,
    fit_gaussian_aml,
    fit_poisson_aml,
    fit_poisson_gaussian,
    fit_unfeasible_gaussian,
    poisson_gaussian_quadratic,
    poisson_sandwich_variance,
    poisson_t1_moments,
    rolling_fit,
    var_binomial_ml,
)
from .likelihoods import OBJECTIVES, Row, loglik
from .stats import SufficientStats, build_stats

__all__ = [
    "FITTERS", "METHODS", "FitResult", "OBJECTIVES", "Row", "SufficientStats", "build_stats",
    "dated_contagion", "fit", "fit_binomial_ml", "fit_gaussian_aml", "fit_poisson_aml",
    "fit_poisson_gaussian", "fit_unfeasible_gaussian", "loglik", "poisson_gaussian_quadratic",
    "poisson_sandwich_variance", "poisson_t1_moments", "rolling_fit", "var_binomial_ml",
]
