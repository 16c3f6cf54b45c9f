"""Point estimates and variances of ``(a, c, R0 = a/c)`` by five criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import CountPath, ModelParams
from ..exceptions import NotEstimableError, SIRError
from . import likelihoods as lk
from ._root import bracketed_root
from .stats import SufficientStats, build_stats

METHODS = (
    "binomial-ml",
    "poisson-aml",
    "gaussian-aml",
    "unfeasible-gaussian",
    "poisson-gaussian",
)


@dataclass(frozen=True)
class FitResult:
    """Estimates from one criterion.

    ``r0_hat`` is ``inf`` exactly when no recovery was observed, in which case
    ``"r0_infinite"`` is among ``flags``.
    """

    method: str
    T: int
    a_hat: float
    c_hat: float
    r0_hat: float
    var_a: float = float("nan")
    var_c: float = float("nan")
    iterations: int = 0
    flags: tuple = field(default_factory=tuple)

    @property
    def r0_infinite(self) -> bool:
        return "r0_infinite" in self.flags

    def with_flags(self, *extra) -> "FitResult":
        return replace(self, flags=tuple(dict.fromkeys(self.flags + tuple(extra))))


def _as_stats(obj) -> SufficientStats:
    return obj if isinstance(obj, SufficientStats) else build_stats(obj)


def _finish(method, stats, a, c, var_a, var_c, iterations, flags):
    flags = list(flags)
    if c > 0:
        r0 = a / c
    else:
        r0 = math.inf
        flags.append("r0_infinite")
    return FitResult(method, stats.T, float(a), float(c), float(r0), float(var_a), float(var_c),
                     int(iterations), tuple(dict.fromkeys(flags)))


def _recovery_ratio(stats: SufficientStats) -> float:
    # shared by the binomial ML and the Poisson AML so both agree bit for bit
    den = int(stats.N2_prev.sum())
    if den == 0:
        raise NotEstimableError("no infectious individuals: c is not estimable")
    return int(stats.N23.sum()) / den


# --- binomial ML -----------------------------------------------------------------

def binomial_score_a(a: float, r: lk.Row) -> float:
    """First-order condition ``sum N12 / a - sum N11 p2 / (1 - a p2)``."""
    return float(r.k.sum() / a - np.sum((r.N - r.k) * r.x / (1.0 - a * r.x)))


def _binomial_score_prime(a: float, r: lk.Row) -> float:
    return float(-r.k.sum() / a**2 - np.sum((r.N - r.k) * r.x**2 / (1.0 - a * r.x) ** 2))


def _binomial_a(stats: SufficientStats):
    r = lk.infection_row(stats)
    if r.days == 0:
        raise NotEstimableError("no day with both susceptible and infectious individuals")
    if r.k.sum() == 0:
        return 0.0, 0, ["a_boundary"]
    upper = r.upper
    hi = upper * (1.0 - 1e-15)
    if binomial_score_a(hi, r) >= 0:
        # everyone at risk on the most exposed day was infected
        return upper, 0, ["a_boundary"]
    lo = hi
    while binomial_score_a(lo, r) <= 0:
        lo *= 0.5
    a, it = bracketed_root(
        lambda v: binomial_score_a(v, r),
        lo,
        hi,
        fprime=lambda v: _binomial_score_prime(v, r),
        xtol=1e-14,
    )
    return a, it, []


def fit_binomial_ml(stats) -> FitResult:
    """Exact binomial maximum likelihood.

    ``c_hat`` is the pooled recovery frequency; ``a_hat`` solves the monotone
    first-order condition on ``(0, 1 / max p2)`` by Newton-bisection.
    """
    stats = _as_stats(stats)
    a, it, flags = _binomial_a(stats)
    c = _recovery_ratio(stats)
    fit = _finish("binomial-ml", stats, a, c, np.nan, np.nan, it, flags)
    var_a, var_c, vflags = var_binomial_ml(stats, fit)
    return replace(fit, var_a=var_a, var_c=var_c).with_flags(*vflags)


def var_binomial_ml(stats, fit: FitResult):
    """Inverse observed information for ``a`` and ``c``.

    ``V(a) = [sum N11 p2^2 / (1 - a p2)^2 + sum N12 / a^2]^-1`` and
    ``V(c) = c (1 - c) / sum N2(t-1)``. Returns ``(var_a, var_c, flags)``.
    """
    stats = _as_stats(stats)
    flags = []
    r = lk.infection_row(stats)
    a = fit.a_hat
    if a > 0 and r.days:
        info = np.sum((r.N - r.k) * r.x**2 / (1.0 - a * r.x) ** 2) + r.k.sum() / a**2
        var_a = 1.0 / info
    else:
        var_a = np.nan
        flags.append("var_a_undefined")
    c = fit.c_hat
    var_c = c * (1.0 - c) / float(stats.N2_prev.sum())
    if c == 0:
        flags.append("var_c_degenerate")
    return float(var_a), float(var_c), flags


# --- Poisson AML -----------------------------------------------------------------

def fit_poisson_aml(stats) -> FitResult:
    """Closed-form Poisson AML.

    ``a_P = n sum N12 / sum N1(t-1) N2(t-1)`` and ``c_P = sum N23 / sum N2(t-1)``.
    Variances are the inverse Poisson information ``a / sum N1 p2`` and
    ``c / sum N2``; see :func:`poisson_sandwich_variance` for the robust form.
    """
    stats = _as_stats(stats)
    exposure = float(np.dot(stats.N1_prev.astype(float), stats.N2_prev.astype(float)))
    if exposure == 0:
        raise NotEstimableError("sum N1(t-1) N2(t-1) is zero: a is not estimable")
    s12 = int(stats.N12.sum())
    a = stats.n * s12 / exposure
    c = _recovery_ratio(stats)
    flags = [] if s12 else ["a_boundary"]
    var_a = a * stats.n / exposure
    var_c = c / float(stats.N2_prev.sum())
    return _finish("poisson-aml", stats, a, c, var_a, var_c, 0, flags)


def dated_contagion(stats) -> tuple[np.ndarray, np.ndarray]:
    """Per-day ``a_t = N12 / (N1 p2)`` and the weights ``N1 p2`` that average them to ``a_P``."""
    stats = _as_stats(stats)
    w = stats.N1_prev * stats.p2_prev
    with np.errstate(divide="ignore", invalid="ignore"):
        at = np.where(w > 0, stats.N12 / w, np.nan)
    return at, w


def poisson_sandwich_variance(stats, fit: FitResult | None = None):
    """Huber sandwich variances of the Poisson AML under binomial data.

    ``V = sum_t s_t^2 / H^2`` with per-day scores ``s_t = k_t / theta - N_t x_t``
    and Hessian ``H = -sum k_t / theta^2``.
    """
    stats = _as_stats(stats)
    fit = fit or fit_poisson_aml(stats)
    out = []
    for which, theta in (("a", fit.a_hat), ("c", fit.c_hat)):
        r = lk.row(stats, which)
        if theta <= 0:
            out.append(np.nan)
            continue
        s = r.k / theta - r.N * r.x
        H = -r.k.sum() / theta**2
        out.append(float(np.sum(s**2) / H**2))
    return tuple(out)


def poisson_t1_moments(params: ModelParams, N1_0: int, N2_0: int, exact: bool = False):
    """Conditional moments of the Poisson AML after one day.

    Returns ``(mean_a, var_a, mean_c, var_c)``. Under the Poisson law both
    estimators are unbiased with ``var_a = a n / (N1 N2)`` and
    ``var_c = c / N2``. With ``exact=True`` the binomial values are returned;
    they carry the factors ``1 - a N2 / n`` and ``1 - c``.
    """
    if N1_0 <= 0 or N2_0 <= 0:
        raise ValueError("N1(0) and N2(0) must be positive")
    a, c, n = params.a, params.c, params.n
    var_a = a * n / (N1_0 * N2_0)
    var_c = c / N2_0
    if exact:
        var_a *= 1.0 - a * N2_0 / n
        var_c *= 1.0 - c
    return a, var_a, c, var_c


# --- Gaussian family ----------------------------------------------------------------

def _maximize(objective, score, r: lk.Row, upper: float, tol: float = 1e-13):
    """Global maximiser of ``objective(theta, r)`` on ``(0, upper)``.

    A log-spaced scan locates the best cell, then bisection on the analytic
    ``score`` refines inside it.
    """
    grid = upper * np.logspace(-12, 0, 721)[:-1]
    grid = np.append(grid, upper * (1 - 1e-12))
    with np.errstate(all="ignore"):
        vals = np.array([objective(g, r) for g in grid])
    vals[~np.isfinite(vals)] = -np.inf
    k = int(np.argmax(vals))
    if k == 0 or k == len(grid) - 1:
        return float(grid[k]), 0, ["boundary"]
    lo, hi = grid[k - 1], grid[k + 1]
    f = lambda t: score(t, r)  # noqa: E731
    if not (f(lo) > 0 > f(hi)):
        return float(grid[k]), 0, []
    theta, it = bracketed_root(f, lo, hi, xtol=tol)
    return float(theta), it, []


def _observed_variance(objective, theta, r: lk.Row) -> float:
    if not theta > 0:
        return np.nan
    h = 1e-4 * theta
    d2 = (objective(theta + h, r) - 2 * objective(theta, r) + objective(theta - h, r)) / h**2
    return float(-1.0 / d2) if d2 < 0 else np.nan


def _gaussian_param(stats, which):
    r = lk.row(stats, which)
    if r.days == 0:
        raise NotEstimableError(f"no informative day for {which}")
    if r.k.sum() == 0:
        return 0.0, np.nan, 0, [f"{which}_boundary"]
    upper = min(r.upper, 1.0) if which == "c" else r.upper
    theta, it, flags = _maximize(lk.gaussian, lk.gaussian_score, r, upper)
    flags = [f"{which}_{f}" for f in flags]
    return theta, _observed_variance(lk.gaussian, theta, r), it, flags


def fit_gaussian_aml(stats) -> FitResult:
    """Maximise the Gaussian approximation separately in ``a`` and ``c``."""
    stats = _as_stats(stats)
    a, va, ia, fa = _gaussian_param(stats, "a")
    c, vc, ic, fc = _gaussian_param(stats, "c")
    return _finish("gaussian-aml", stats, a, c, va, vc, ia + ic, fa + fc)


def _unfeasible_param(stats, which):
    r = lk.row(stats, which)
    if r.days == 0:
        raise NotEstimableError(f"no informative day for {which}")
    if r.k.sum() == 0:
        return 0.0, np.nan, [f"{which}_boundary"]
    ph = r.phat
    keep = (ph > 0) & (ph < 1)
    flags = [f"{which}_days_dropped"] if not keep.all() else []
    if not keep.any():
        raise NotEstimableError(f"every day has a movement frequency of 0 or 1 for {which}")
    N, x, ph = r.N[keep], r.x[keep], ph[keep]
    v = ph * (1.0 - ph)
    num = np.sum(N * x / (1.0 - ph))
    den = np.sum(N * x**2 / v)
    return float(num / den), float(1.0 / den), flags


def fit_unfeasible_gaussian(stats) -> FitResult:
    """Weighted least squares with the variances frozen at the observed frequencies.

    ``a_UG = sum N1 p2 / (1 - p12) / sum N1 p2^2 / (p12 (1 - p12))``, and the
    same construction on the recovery row for ``c``.
    """
    stats = _as_stats(stats)
    a, va, fa = _unfeasible_param(stats, "a")
    c, vc, fc = _unfeasible_param(stats, "c")
    return _finish("unfeasible-gaussian", stats, a, c, va, vc, 0, fa + fc)


def poisson_gaussian_quadratic(stats, which: str):
    """Coefficients ``(A, B, C)`` of ``A theta^2 + B theta - C = 0``.

    Setting the derivative of the Poisson/Gaussian criterion to zero and
    dividing by the number of informative days gives
    ``A = mean(N x)``, ``B = 1``, ``C = mean(N phat^2 / x)``.
    """
    r = lk.row(_as_stats(stats), which)
    if r.days == 0:
        raise NotEstimableError(f"no informative day for {which}")
    d = r.days
    return float(np.sum(r.N * r.x) / d), 1.0, float(np.sum(r.N * r.phat**2 / r.x) / d)


def _positive_root(A, B, C):
    disc = B * B + 4.0 * A * C
    if A <= 0 or C < 0 or not math.isfinite(disc):
        raise SIRError("quadratic has no positive root")
    # 2C / (B + sqrt(disc)) avoids cancellation when 4AC << B^2
    return 2.0 * C / (B + math.sqrt(disc))


def fit_poisson_gaussian(stats) -> FitResult:
    """Positive roots of the two stationarity quadratics."""
    stats = _as_stats(stats)
    out, flags = [], []
    for which in ("a", "c"):
        A, B, C = poisson_gaussian_quadratic(stats, which)
        theta = _positive_root(A, B, C)
        if theta == 0:
            flags.append(f"{which}_boundary")
        r = lk.row(stats, which)
        out.append((theta, _observed_variance(lk.poisson_gaussian, theta, r)))
    (a, va), (c, vc) = out
    return _finish("poisson-gaussian", stats, a, c, va, vc, 0, flags)


FITTERS = {
    "binomial-ml": fit_binomial_ml,
    "poisson-aml": fit_poisson_aml,
    "gaussian-aml": fit_gaussian_aml,
    "unfeasible-gaussian": fit_unfeasible_gaussian,
    "poisson-gaussian": fit_poisson_gaussian,
}


def fit(stats, method: str = "poisson-aml") -> FitResult:
    try:
        fitter = FITTERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fitter(stats)


def _failed(method, T, exc) -> FitResult:
    nan = float("nan")
    return FitResult(method, T, nan, nan, nan, nan, nan, 0, (f"error:{type(exc).__name__}",))


def rolling_fit(path, method: str = "poisson-aml", window: int | None = None, start: int = 1):
    """Fit on each day ``t = start..T`` using days ``t-window+1..t`` (all days if ``window`` is None).

    Days where the fit raises a domain error yield a NaN result carrying an
    ``error:<ExceptionName>`` flag instead of aborting the series.
    """
    stats = _as_stats(path if not isinstance(path, CountPath) else build_stats(path))
    if window is not None and window < 1:
        raise ValueError("window must be >= 1")
    out = []
    for t in range(start, stats.T + 1):
        lo = 1 if window is None else max(1, t - window + 1)
        sub = stats.window(lo, t)
        try:
            res = fit(sub, method)
        except SIRError as exc:
            res = _failed(method, sub.T, exc)
        out.append(replace(res, T=t))
    return out
