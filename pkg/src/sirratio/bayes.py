"""Conjugate gamma inference for ``(a, c)`` under the Poisson approximate likelihood.

``Gamma(nu, lam)`` is shape/rate: density proportional to
``x^(nu-1) exp(-lam x)``. With independent gamma priors the posterior stays
independent gamma,

    a | data ~ Gamma(nu_a + sum N12, lam_a + sum N1(t-1) N2(t-1) / n)
    c | data ~ Gamma(nu_c + sum N23, lam_c + sum N2(t-1))

and ``(lam_a nu_c) / (lam_c nu_a) * R0`` follows ``F(2 nu_a, 2 nu_c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .estimators.stats import SufficientStats, build_stats
from .rng import as_generator


@dataclass(frozen=True)
class GammaParam:
    nu: float
    lam: float

    def __post_init__(self):
        if not (self.nu > 0 and self.lam > 0):
            raise ValueError(f"gamma shape and rate must be positive, got ({self.nu}, {self.lam})")

    @property
    def mean(self) -> float:
        return self.nu / self.lam

    @property
    def mode(self) -> float:
        return max(self.nu - 1.0, 0.0) / self.lam


DEFAULT_PRIOR = (GammaParam(1.0, 1e-3), GammaParam(1.0, 1e-3))


@dataclass(frozen=True)
class PosteriorPair:
    a: GammaParam
    c: GammaParam


def _exposures(stats: SufficientStats):
    s12 = float(stats.N12.sum())
    s23 = float(stats.N23.sum())
    lam_a = float(np.dot(stats.N1_prev.astype(float), stats.N2_prev.astype(float))) / stats.n
    lam_c = float(stats.N2_prev.sum())
    return s12, lam_a, s23, lam_c


def posterior_update(prior, stats) -> PosteriorPair:
    """Add the counts and exposures of ``stats`` to a prior pair.

    ``prior`` is a :class:`PosteriorPair` or a ``(GammaParam, GammaParam)``
    tuple, so posteriors chain: updating on two blocks in turn equals one
    update on both.
    """
    if not isinstance(stats, SufficientStats):
        stats = build_stats(stats)
    pa, pc = (prior.a, prior.c) if isinstance(prior, PosteriorPair) else prior
    s12, ea, s23, ec = _exposures(stats)
    return PosteriorPair(GammaParam(pa.nu + s12, pa.lam + ea), GammaParam(pc.nu + s23, pc.lam + ec))


@dataclass(frozen=True)
class R0Posterior:
    """Posterior of ``R0 = a / c`` as a scaled Fisher law."""

    post: PosteriorPair

    @property
    def scale(self) -> float:
        """``k`` such that ``R0 = k F`` with ``F ~ F(2 nu_a, 2 nu_c)``."""
        a, c = self.post.a, self.post.c
        return (a.nu * c.lam) / (a.lam * c.nu)

    @property
    def fisher(self):
        return sps.f(2.0 * self.post.a.nu, 2.0 * self.post.c.nu)

    @property
    def mean_defined(self) -> bool:
        return self.post.c.nu > 1.0

    @property
    def mean(self) -> float:
        """``(nu_a / lam_a) * lam_c / (nu_c - 1)``; NaN unless ``nu_c > 1``."""
        a, c = self.post.a, self.post.c
        if not self.mean_defined:
            return math.nan
        return a.nu / a.lam * c.lam / (c.nu - 1.0)

    def cdf(self, r):
        return self.fisher.cdf(np.asarray(r) / self.scale)

    def pdf(self, r):
        return self.fisher.pdf(np.asarray(r) / self.scale) / self.scale

    def quantile(self, q):
        return self.scale * self.fisher.ppf(q)

    @property
    def flags(self) -> tuple:
        return () if self.mean_defined else ("mean_undefined",)


def r0_posterior(post: PosteriorPair) -> R0Posterior:
    return R0Posterior(post)


def sample_posterior(post: PosteriorPair, S: int, rng) -> np.ndarray:
    """``(S, 3)`` independent draws of ``(a, c, a/c)``."""
    if S < 1:
        raise ValueError("S must be >= 1")
    gen = as_generator(rng)
    a = gen.gamma(post.a.nu, 1.0 / post.a.lam, size=S)
    c = gen.gamma(post.c.nu, 1.0 / post.c.lam, size=S)
    return np.column_stack([a, c, a / c])
