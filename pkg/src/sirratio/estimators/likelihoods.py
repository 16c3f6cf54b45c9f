"""Exact and approximate log-likelihoods of one row of the transition table.

The likelihood separates as ``L(a, c) = L1(a) + L2(c)``. Both rows share one
shape: on day ``t`` there are ``N`` individuals at risk, ``k`` of whom move,
each with probability ``q = theta * x``:

* row 1 (infection): ``theta = a``, ``N = N1(t-1)``, ``k = N12(t)``, ``x = N2(t-1)/n``
* row 2 (recovery):  ``theta = c``, ``N = N2(t-1)``, ``k = N23(t)``, ``x = 1``

Only days with ``N > 0`` and ``x > 0`` carry information and are kept.
Functions return log-likelihoods up to additive constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stats import SufficientStats


@dataclass(frozen=True)
class Row:
    N: np.ndarray  # at risk (float)
    k: np.ndarray  # movers (float)
    x: np.ndarray  # exposure per unit of theta

    @property
    def phat(self) -> np.ndarray:
        return self.k / self.N

    @property
    def days(self) -> int:
        return len(self.N)

    @property
    def upper(self) -> float:
        """Largest ``theta`` keeping every ``q = theta x`` a probability."""
        return 1.0 / float(self.x.max()) if self.days else np.inf


def infection_row(stats: SufficientStats) -> Row:
    keep = (stats.N1_prev > 0) & (stats.N2_prev > 0)
    return Row(
        stats.N1_prev[keep].astype(float),
        stats.N12[keep].astype(float),
        stats.N2_prev[keep] / stats.n,
    )


def recovery_row(stats: SufficientStats) -> Row:
    keep = stats.N2_prev > 0
    N = stats.N2_prev[keep].astype(float)
    return Row(N, stats.N23[keep].astype(float), np.ones_like(N))


def row(stats: SufficientStats, which: str) -> Row:
    if which == "a":
        return infection_row(stats)
    if which == "c":
        return recovery_row(stats)
    raise ValueError(f"which must be 'a' or 'c', got {which!r}")


def _xlogy(x, y):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0, 0.0, x * np.log(y))


def binomial(theta: float, r: Row) -> float:
    q = theta * r.x
    return float(np.sum(_xlogy(r.N - r.k, 1.0 - q) + _xlogy(r.k, q)))


def poisson(theta: float, r: Row) -> float:
    lam = theta * r.x * r.N
    return float(np.sum(_xlogy(r.k, lam) - lam))


def gaussian(theta: float, r: Row) -> float:
    q = theta * r.x
    v = q * (1.0 - q)
    return float(-0.5 * np.sum(np.log(v)) - 0.5 * np.sum(r.N * (r.phat - q) ** 2 / v))


def gaussian_score(theta: float, r: Row) -> float:
    """Derivative of :func:`gaussian` with respect to ``theta``."""
    q = theta * r.x
    v = q * (1.0 - q)
    dv = 1.0 - 2.0 * q
    e = r.phat - q
    dq = -0.5 * dv / v + 0.5 * r.N * (2.0 * e / v + e**2 * dv / v**2)
    return float(np.sum(r.x * dq))


def unfeasible_gaussian(theta: float, r: Row) -> float:
    """Gaussian criterion with the variance frozen at ``phat (1 - phat)``.

    Days with ``phat`` equal to 0 or 1 have zero frozen variance and are
    dropped.
    """
    ph = r.phat
    keep = (ph > 0) & (ph < 1)
    q = theta * r.x[keep]
    v = ph[keep] * (1.0 - ph[keep])
    return float(-0.5 * np.sum(r.N[keep] * (ph[keep] - q) ** 2 / v))


def poisson_gaussian(theta: float, r: Row) -> float:
    """Gaussian approximation with Poisson variance ``q`` (the ``q^2`` term dropped)."""
    q = theta * r.x
    return float(-0.5 * np.sum(np.log(q)) - 0.5 * np.sum(r.N * (r.phat - q) ** 2 / q))


OBJECTIVES = {
    "binomial-ml": binomial,
    "poisson-aml": poisson,
    "gaussian-aml": gaussian,
    "unfeasible-gaussian": unfeasible_gaussian,
    "poisson-gaussian": poisson_gaussian,
}


def loglik(method: str, theta: float, stats: SufficientStats, which: str) -> float:
    """Evaluate the ``method`` criterion for ``a`` or ``c`` on ``stats``."""
    return OBJECTIVES[method](theta, row(stats, which))
