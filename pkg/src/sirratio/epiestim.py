"""Renewal-equation estimators driven by incidence alone.

* :func:`instantaneous_r` -- ratio of today's new infections to the total
  infectiousness ``Lambda(t) = sum_s w(s) N12(t-s)``, raw and under a gamma
  prior pooled over a trailing window (the EpiEstim construction).
* :func:`ar_estimate` -- sum of no-intercept autoregression coefficients.
* :func:`restricted_r0` -- the basic ratio written through future incidence
  and the infectious-duration tail sums, for durations that need not be
  geometric.

Under the SIR model the instantaneous ratio tracks ``R0 * N1(t-1) / n`` and
not ``R0`` itself, and the autoregression suffers from regressors correlated
with the errors; both biases are what these functions are meant to exhibit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.linalg import solve_triangular

from .core import EpidemicState, ModelParams
from .exceptions import RankDeficiencyError, SeriesLengthError, SIRError
from .reproduction import RzeroConfig, forward_infections


@dataclass(frozen=True, eq=False)
class InfectivityProfile:
    """Weights ``w(1..S)`` summing to one."""

    weights: np.ndarray
    source: str = "explicit"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        total = w.sum()
        if not total > 0:
            raise ValueError("weights must have positive mass")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def S(self) -> int:
        return self.weights.size

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.S + 1), self.weights))


def geometric_profile(c: float, S: int) -> InfectivityProfile:
    """``w(s) proportional to c (1-c)^(s-1)``, renormalised over ``s = 1..S``."""
    if S < 1:
        raise ValueError("S must be >= 1")
    s = np.arange(1, S + 1)
    return InfectivityProfile(c * (1.0 - c) ** (s - 1), source=f"geometric({c})")


def _frozen(family: str, mean: float, sd: float):
    if family == "lognormal":
        sigma2 = np.log1p((sd / mean) ** 2)
        return sps.lognorm(s=np.sqrt(sigma2), scale=np.exp(np.log(mean) - sigma2 / 2))
    if family == "gamma":
        return sps.gamma(a=(mean / sd) ** 2, scale=sd**2 / mean)
    raise ValueError(f"unknown family {family!r}; use 'lognormal' or 'gamma'")


def discretize_interval(family: str, mean: float, sd: float, S: int = 30) -> InfectivityProfile:
    """Discretise a continuous serial interval onto days ``1..S``.

    Day ``s`` receives the mass of ``(s - 1/2, s + 1/2]``, day 1 also takes
    everything below ``1/2``, and the weights are renormalised. The continuous
    law is moment-matched to ``(mean, sd)``.
    """
    if not (mean > 0 and sd > 0):
        raise SIRError("serial-interval mean and sd must be positive")
    dist = _frozen(family, mean, sd)
    edges = np.arange(1, S + 1) + 0.5
    cdf = dist.cdf(edges)
    w = np.diff(np.concatenate([[0.0], cdf]))
    if not w.sum() > 0:
        raise SIRError(f"{family}({mean}, {sd}) puts no mass on days 1..{S}")
    return InfectivityProfile(w, source=f"{family}({mean},{sd})")


def parse_profile(spec: str, S: int = 100) -> InfectivityProfile:
    """Build a profile from ``geometric:c``, ``lognormal:mean:sd`` or ``gamma:mean:sd``."""
    kind, *args = spec.split(":")
    vals = [float(v) for v in args]
    if kind == "geometric" and len(vals) == 1:
        return geometric_profile(vals[0], S)
    if kind in ("lognormal", "gamma") and len(vals) == 2:
        return discretize_interval(kind, vals[0], vals[1], S)
    raise ValueError(f"cannot parse profile {spec!r}")


@dataclass(frozen=True)
class RPrior:
    """Gamma prior on the reproduction number, shape/rate parameterised."""

    shape: float = 1.0
    rate: float = 0.2

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("prior shape and rate must be positive")

    @property
    def mean(self) -> float:
        return self.shape / self.rate


@dataclass
class InstantaneousSeries:
    """Per-day estimates; index ``t`` matches the incidence vector."""

    t: np.ndarray
    incidence: np.ndarray
    infectiousness: np.ndarray
    raw_ratio: np.ndarray
    posterior_shape: np.ndarray
    posterior_rate: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def posterior_mean(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.posterior_shape / self.posterior_rate

    def posterior_quantile(self, q: float) -> np.ndarray:
        return sps.gamma.ppf(q, self.posterior_shape, scale=1.0 / self.posterior_rate)


def total_infectiousness(incidence, profile: InfectivityProfile) -> np.ndarray:
    """``Lambda(t) = sum_{s=1}^{min(t,S)} w(s) I(t-s)``; ``Lambda(0) = 0``."""
    inc = np.asarray(incidence, dtype=float)
    lam = np.convolve(inc, np.concatenate([[0.0], profile.weights]))[: inc.size]
    return lam


def instantaneous_r(incidence, profile: InfectivityProfile, window: int = 7, prior: RPrior | None = RPrior()):
    """Instantaneous reproduction number, raw and Bayesian.

    Parameters
    ----------
    incidence : array_like
        New infections per day; ``incidence[0]`` is the seed cluster.
    profile : InfectivityProfile
    window : int
        Trailing window ``tau`` over which cases and infectiousness are pooled.
    prior : RPrior or None
        Gamma prior; ``None`` gives the pooled ratio with no prior mass.

    Returns
    -------
    InstantaneousSeries
        The raw ratio is ``I(t) / Lambda(t)`` day by day. The posterior is
        ``Gamma(shape + sum I, rate + sum Lambda)`` over the window
        ``max(1, t-tau+1)..t``. Flags are ``(t, reason)`` pairs.
    """
    inc = np.asarray(incidence, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    if np.any(inc < 0):
        raise ValueError("incidence must be non-negative")
    lam = total_infectiousness(inc, profile)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(lam > 0, inc / lam, np.nan)
    ci = np.concatenate([[0.0], np.cumsum(inc[1:])])
    cl = np.concatenate([[0.0], np.cumsum(lam[1:])])
    t = np.arange(inc.size)
    lo = np.maximum(t - window, 0)
    sum_i = ci - ci[lo]
    sum_l = cl - cl[lo]
    shape0, rate0 = (prior.shape, prior.rate) if prior is not None else (0.0, 0.0)
    shape = shape0 + sum_i
    rate = rate0 + sum_l
    flags = []
    for k in range(inc.size):
        if k < window:
            flags.append((k, "partial_window"))
        if lam[k] == 0:
            flags.append((k, "raw_undefined"))
        if rate[k] == 0:
            flags.append((k, "posterior_undefined"))
    return InstantaneousSeries(t, inc, lam, raw, shape, rate, flags)


def _pivoted_cholesky_solve(G: np.ndarray, b: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Solve the SPD system ``G x = b`` by Cholesky with diagonal pivoting.

    Raises :class:`RankDeficiencyError` when a pivot falls below ``rtol``
    times the largest diagonal entry.
    """
    A = np.array(G, dtype=float)
    m = A.shape[0]
    perm = np.arange(m)
    L = np.zeros_like(A)
    top = float(np.max(np.diag(A)))
    if not top > 0:
        raise RankDeficiencyError("Gram matrix has a zero diagonal")
    for j in range(m):
        resid = np.diag(A)[j:] - np.sum(L[j:, :j] ** 2, axis=1)
        p = j + int(np.argmax(resid))
        if resid[p - j] <= rtol * top:
            raise RankDeficiencyError(
                f"Gram matrix is rank deficient (pivot {resid[p - j]:.3g} at rank {j})"
            )
        if p != j:
            A[[j, p]] = A[[p, j]]
            A[:, [j, p]] = A[:, [p, j]]
            L[[j, p], :j] = L[[p, j], :j]
            perm[[j, p]] = perm[[p, j]]
        L[j, j] = np.sqrt(A[j, j] - np.dot(L[j, :j], L[j, :j]))
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    y = solve_triangular(L, b[perm], lower=True)
    z = solve_triangular(L.T, y, lower=False)
    x = np.empty(m)
    x[perm] = z
    return x


@dataclass(frozen=True)
class ARResult:
    H: int
    gamma: np.ndarray
    r_ar: float
    n_obs: int


def ar_estimate(incidence, H: int) -> ARResult:
    """Regress ``I(t)`` on ``I(t-1), ..., I(t-H)`` without intercept by OLS.

    The estimate is the sum of the lag coefficients. At least ``2H + 1`` days
    are needed: ``H`` to build the lags and ``H + 1`` regression rows.
    """
    y = np.asarray(incidence, dtype=float)
    if H < 1:
        raise ValueError("H must be >= 1")
    if y.size < 2 * H + 1:
        raise SeriesLengthError(f"need at least {2 * H + 1} days for H={H}, got {y.size}")
    X = np.column_stack([y[H - s : y.size - s] for s in range(1, H + 1)])
    target = y[H:]
    gamma = _pivoted_cholesky_solve(X.T @ X, X.T @ target)
    return ARResult(H, gamma, float(gamma.sum()), int(target.size))


def ar_series(incidence, H: int) -> np.ndarray:
    """Expanding-sample AR estimate on each day; NaN before ``2H+1`` days or when singular."""
    y = np.asarray(incidence, dtype=float)
    out = np.full(y.size, np.nan)
    for t in range(2 * H, y.size):
        try:
            out[t] = ar_estimate(y[: t + 1], H).r_ar
        except RankDeficiencyError:
            pass
    return out


@dataclass(frozen=True, eq=False)
class DurationModel:
    """Law of the infectious duration ``D`` through ``gamma(s) = P[D >= s]``, ``s = 1..S``."""

    survival: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.survival, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("survival must be a non-empty 1-d array")
        if np.any(np.diff(g) > 1e-15) or g[0] > 1 + 1e-15 or np.any(g < 0):
            raise ValueError("survival must be non-increasing within [0, 1]")
        g.setflags(write=False)
        object.__setattr__(self, "survival", g)

    @classmethod
    def geometric(cls, c: float, S: int = 2000) -> "DurationModel":
        return cls((1.0 - c) ** np.arange(S))

    @classmethod
    def fixed(cls, length: int) -> "DurationModel":
        return cls(np.ones(length))

    @classmethod
    def from_pmf(cls, pmf) -> "DurationModel":
        p = np.asarray(pmf, dtype=float)  # p[s-1] = P[D = s]
        return cls(np.clip(p[::-1].cumsum()[::-1], 0.0, 1.0))

    @property
    def mean(self) -> float:
        return float(self.survival.sum())

    def tail_sums(self, H: int) -> np.ndarray:
        """``E[(D - k)^+]`` for ``k = 0..H-1``, with ``D`` truncated at ``H``."""
        g = np.zeros(H)
        m = min(H, self.survival.size)
        g[:m] = self.survival[:m]
        return g[::-1].cumsum()[::-1]


def restricted_r0(
    state: EpidemicState,
    params: ModelParams,
    duration: DurationModel,
    cfg: RzeroConfig | None = None,
) -> float:
    """Basic ratio from expected future infections.

    ``a E(D) - (a / N1(t)) sum_{k>=1} E[(D-k)^+] E_t N12(t+k)``, truncated at
    ``cfg.H`` days with the expectation averaged over ``cfg.S`` forward paths.
    With a geometric duration it equals
    :func:`~sirratio.reproduction.basic_r0` on the same stream. Returns NaN
    when ``N1(t) == 0``.
    """
    cfg = cfg or RzeroConfig()
    if state.N1 == 0:
        return float("nan")
    tails = duration.tail_sums(cfg.H)
    future = forward_infections(state, params, cfg).mean(axis=0)  # k = 1..H-1
    return float(params.a * tails[0] - params.a / state.N1 * np.dot(tails[1:], future))
