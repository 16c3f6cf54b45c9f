"""Scikit-learn style wrappers around the estimators.

Every estimator takes a count path as ``X``: a :class:`CountPath`, a
``(T+1, 3)`` integer array of ``N1, N2, N3`` or a data frame with those
columns. The renewal estimators take an incidence vector instead.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array

from .bayes import GammaParam, posterior_update, r0_posterior, sample_posterior
from .core import CountPath
from .epiestim import RPrior, ar_estimate, ar_series, instantaneous_r, parse_profile
from .estimators import likelihoods as lk
from .estimators.fits import fit, rolling_fit
from .estimators.stats import SufficientStats, build_stats
from .exceptions import InconsistentCountsError, NotFittedError


def check_count_path(X) -> CountPath:
    """Coerce ``X`` to a validated :class:`CountPath`."""
    if isinstance(X, CountPath):
        return X
    if hasattr(X, "columns"):
        missing = {"N1", "N2", "N3"} - set(map(str, X.columns))
        if missing:
            raise InconsistentCountsError(f"data frame lacks columns {sorted(missing)}")
        X = np.column_stack([np.asarray(X[k]) for k in ("N1", "N2", "N3")])
    arr = check_array(X, dtype="numeric", ensure_min_samples=2)
    if arr.shape[1] != 3:
        raise InconsistentCountsError(f"expected 3 columns N1, N2, N3, got {arr.shape[1]}")
    if not np.all(arr == np.round(arr)):
        raise InconsistentCountsError("counts must be integers")
    return CountPath(arr[:, 0], arr[:, 1], arr[:, 2])


def check_incidence(x) -> np.ndarray:
    """Validate a 1-d non-negative incidence vector."""
    arr = check_array(np.asarray(x, dtype=float).reshape(1, -1), ensure_min_features=1).ravel()
    if np.any(arr < 0):
        raise ValueError("incidence must be non-negative")
    return arr


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class _CountEstimator(BaseEstimator, TransformerMixin):
    method: str = ""

    def __init__(self, window=None):
        self.window = window

    def _stats(self, X) -> SufficientStats:
        stats = build_stats(check_count_path(X))
        if self.window is not None:
            stats = stats.window(max(1, stats.T - self.window + 1), stats.T)
        return stats

    def fit(self, X, y=None):
        """Estimate ``(a, c)`` on ``X`` (its last ``window`` days if set)."""
        res = fit(self._stats(X), self.method)
        self.result_ = res
        self.a_, self.c_, self.r0_ = res.a_hat, res.c_hat, res.r0_hat
        self.var_a_, self.var_c_ = res.var_a, res.var_c
        self.n_days_ = res.T
        return self

    def transform(self, X):
        """Per-day ``R0`` estimates from rolling fits on ``X``; day 0 is NaN."""
        path = check_count_path(X)
        fits = rolling_fit(path, self.method, window=self.window)
        return np.concatenate([[np.nan], [f.r0_hat for f in fits]])

    def score(self, X, y=None) -> float:
        """The estimator's own criterion at the fitted ``(a, c)`` on ``X``."""
        _check_fitted(self, "result_")
        stats = self._stats(X)
        return lk.loglik(self.method, self.a_, stats, "a") + lk.loglik(self.method, self.c_, stats, "c")


class BinomialML(_CountEstimator):
    """Exact binomial maximum likelihood."""

    method = "binomial-ml"


class PoissonAML(_CountEstimator):
    """Poisson approximate maximum likelihood (closed form)."""

    method = "poisson-aml"


class GaussianAML(_CountEstimator):
    """Gaussian approximate maximum likelihood with binomial variance."""

    method = "gaussian-aml"


class UnfeasibleGaussian(_CountEstimator):
    """Weighted least squares with empirical-frequency weights."""

    method = "unfeasible-gaussian"


class PoissonGaussian(_CountEstimator):
    """Gaussian approximate likelihood with Poisson variance."""

    method = "poisson-gaussian"


class InstantaneousR(BaseEstimator, TransformerMixin):
    """Renewal-equation instantaneous reproduction number with a gamma prior.

    Parameters
    ----------
    profile : str
        Infectivity profile, e.g. ``"geometric:0.07"`` or ``"lognormal:4.5:2.5"``.
    window : int
        Smoothing window in days.
    prior_shape, prior_rate : float
        Gamma prior on ``R``.
    profile_length : int
        Number of lags kept in the profile.
    """

    def __init__(self, profile="lognormal:4.5:2.5", window=7, prior_shape=1.0, prior_rate=0.2, profile_length=100):
        self.profile = profile
        self.window = window
        self.prior_shape = prior_shape
        self.prior_rate = prior_rate
        self.profile_length = profile_length

    def fit(self, X, y=None):
        inc = check_incidence(X)
        self.profile_ = parse_profile(self.profile, self.profile_length)
        self.series_ = instantaneous_r(inc, self.profile_, self.window, RPrior(self.prior_shape, self.prior_rate))
        return self

    def transform(self, X):
        """Posterior mean of ``R`` per day of the incidence ``X``."""
        _check_fitted(self, "profile_")
        inc = check_incidence(X)
        prior = RPrior(self.prior_shape, self.prior_rate)
        return instantaneous_r(inc, self.profile_, self.window, prior).posterior_mean


class ARReproduction(BaseEstimator, TransformerMixin):
    """Autoregressive reproduction estimate: the sum of ``H`` lag coefficients."""

    def __init__(self, H=7):
        self.H = H

    def fit(self, X, y=None):
        res = ar_estimate(check_incidence(X), self.H)
        self.result_ = res
        self.coef_ = res.gamma
        self.r0_ = res.r_ar
        return self

    def transform(self, X):
        """Expanding-window AR estimates per day (NaN until ``2H+1`` days)."""
        return ar_series(check_incidence(X), self.H)


class GammaPoissonPosterior(BaseEstimator):
    """Conjugate gamma posterior of ``(a, c)`` and the implied law of ``R0``."""

    def __init__(self, nu_a=1.0, lambda_a=1e-3, nu_c=1.0, lambda_c=1e-3):
        self.nu_a = nu_a
        self.lambda_a = lambda_a
        self.nu_c = nu_c
        self.lambda_c = lambda_c

    def fit(self, X, y=None):
        prior = (GammaParam(self.nu_a, self.lambda_a), GammaParam(self.nu_c, self.lambda_c))
        self.posterior_ = posterior_update(prior, build_stats(check_count_path(X)))
        self.r0_posterior_ = r0_posterior(self.posterior_)
        self.r0_ = self.r0_posterior_.mean
        return self

    def sample(self, S, rng=None) -> np.ndarray:
        """``(S, 3)`` posterior draws of ``(a, c, R0)``."""
        _check_fitted(self, "posterior_")
        return sample_posterior(self.posterior_, S, rng)

    def interval(self, level=0.9) -> tuple[float, float]:
        _check_fitted(self, "posterior_")
        q = (1 - level) / 2
        return float(self.r0_posterior_.quantile(q)), float(self.r0_posterior_.quantile(1 - q))
