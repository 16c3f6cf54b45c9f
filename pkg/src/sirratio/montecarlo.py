"""Replication harness for the finite-sample study of the estimators.

Replication ``r`` of a design draws from the stream
``RngStream(seed, stream_id(design.key, r))`` so results depend on the master
seed only, never on how replications are spread across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .core import EpidemicState, ModelParams, simulate
from .epiestim import ar_series, discretize_interval, geometric_profile, instantaneous_r
from .estimators.fits import METHODS, fit, rolling_fit
from .estimators.stats import build_stats
from .exceptions import EmptyResultError, SIRError
from .rng import DEFAULT_SEED, RngStream, stream_id

ESTIMANDS = ("a", "c", "r0")


def default_threads() -> int:
    return max(1, int(os.environ.get("REPRO_THREADS", "1")))


@dataclass(frozen=True)
class McDesign:
    """One cell of the study: ``N1(0)`` susceptibles, ``N2(0)`` infectious, ``T`` days."""

    N2_0: int
    T: int
    a: float
    c: float = 0.07
    N1_0: int = 3_000_000
    reps: int = 10_000
    seed: int = DEFAULT_SEED
    methods: tuple = ("poisson-aml",)

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        self.params  # validates a, c, n
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")

    @property
    def n(self) -> int:
        return self.N1_0 + self.N2_0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.a, self.c, self.n)

    @property
    def init(self) -> EpidemicState:
        return EpidemicState(0, self.N1_0, self.N2_0, 0)

    @property
    def r0(self) -> float:
        return self.a / self.c

    @property
    def key(self) -> tuple:
        # replication count and method set are excluded so that adding
        # replications or estimators leaves existing draws unchanged
        return (self.N1_0, self.N2_0, self.T, repr(float(self.a)), repr(float(self.c)))

    def stream(self, r: int) -> RngStream:
        return RngStream(self.seed, stream_id(*self.key, r))


@dataclass
class Replications:
    """Raw estimates: ``values[method]`` has shape ``(reps, 3)`` for ``(a, c, r0)``."""

    design: McDesign
    values: dict
    flagged: dict

    def estimates(self, method: str, estimand: str, include_flagged: bool = False) -> np.ndarray:
        col = self.values[method][:, ESTIMANDS.index(estimand)]
        return col if include_flagged else col[~self.flagged[method]]


@dataclass(frozen=True)
class Moments:
    mean: float
    var: float
    median: float


@dataclass(frozen=True)
class SummaryStats:
    design: McDesign
    method: str
    a: Moments
    c: Moments
    r0: Moments
    rho: float
    n_used: int
    flagged: int
    extra: dict = field(default_factory=dict)

    def moments(self, estimand: str) -> Moments:
        return getattr(self, estimand)

    def mc_se(self, estimand: str) -> float:
        """Monte-Carlo standard error of the mean of ``estimand``."""
        return math.sqrt(self.moments(estimand).var / self.n_used)


def _one(design: McDesign, r: int) -> tuple[np.ndarray, np.ndarray]:
    path = simulate(design.params, design.init, design.T, design.stream(r))
    stats = build_stats(path)
    vals = np.full((len(design.methods), 3), np.nan)
    bad = np.zeros(len(design.methods), dtype=bool)
    for m, method in enumerate(design.methods):
        try:
            res = fit(stats, method)
        except SIRError:
            bad[m] = True
            continue
        vals[m] = res.a_hat, res.c_hat, res.r0_hat
        bad[m] = res.r0_infinite
    return vals, bad


def _chunk(design: McDesign, idx: range):
    vals = np.empty((len(idx), len(design.methods), 3))
    bad = np.empty((len(idx), len(design.methods)), dtype=bool)
    for k, r in enumerate(idx):
        vals[k], bad[k] = _one(design, r)
    return idx.start, vals, bad


def replicate(design: McDesign, threads: int | None = None, chunk: int = 250) -> Replications:
    """Run every replication of ``design`` and collect the raw estimates.

    Replications are cut into fixed chunks; each worker writes its chunk back
    at the chunk's own offset, so the output is identical for any ``threads``.
    """
    threads = threads or default_threads()
    chunks = [range(s, min(s + chunk, design.reps)) for s in range(0, design.reps, chunk)]
    vals = np.empty((design.reps, len(design.methods), 3))
    bad = np.empty((design.reps, len(design.methods)), dtype=bool)
    if threads == 1:
        results = map(lambda ix: _chunk(design, ix), chunks)
        for start, v, b in results:
            vals[start : start + len(v)], bad[start : start + len(b)] = v, b
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start, v, b in pool.map(lambda ix: _chunk(design, ix), chunks):
                vals[start : start + len(v)], bad[start : start + len(b)] = v, b
    return Replications(
        design,
        {m: vals[:, k, :] for k, m in enumerate(design.methods)},
        {m: bad[:, k] for k, m in enumerate(design.methods)},
    )


def _moments(x: np.ndarray) -> Moments:
    var = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
    return Moments(float(np.mean(x)), var, float(np.median(x)))


def summarize(reps: Replications, method: str) -> SummaryStats:
    """Moments over unflagged replications, plus the flag count."""
    v = reps.values[method]
    bad = reps.flagged[method]
    good = v[~bad]
    if good.shape[0] == 0:
        raise EmptyResultError(f"all {v.shape[0]} replications flagged for {method}")
    a, c, r0 = good[:, 0], good[:, 1], good[:, 2]
    if good.shape[0] > 1 and np.std(a) > 0 and np.std(c) > 0:
        rho = float(np.corrcoef(a, c)[0, 1])
    else:
        rho = float("nan")
    return SummaryStats(
        reps.design, method, _moments(a), _moments(c), _moments(r0), rho, int(good.shape[0]), int(bad.sum())
    )


def run_design(design: McDesign, method: str | None = None, threads: int | None = None) -> SummaryStats:
    """Simulate-then-fit ``design.reps`` times and summarise one estimator."""
    method = method or design.methods[0]
    if method not in design.methods:
        design = McDesign(**{**design.__dict__, "methods": design.methods + (method,)})
    return summarize(replicate(design, threads), method)


def interval_halfwidth(x: np.ndarray, level: float = 0.95) -> float:
    """Half the width of the central ``level`` interval of the sample."""
    lo, hi = np.quantile(x, [(1 - level) / 2, (1 + level) / 2])
    return float(hi - lo) / 2.0


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    skewness: float

    def integral(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))


def histogram(source, method: str | None = None, estimand: str = "a", bins: int = 50,
              threads: int | None = None) -> Histogram:
    """Normalised histogram and sample skewness of a set of estimates.

    ``source`` is a raw array of estimates, a :class:`Replications`, or a
    :class:`McDesign` (which is run first). Flagged and non-finite values are
    dropped.
    """
    if isinstance(source, McDesign):
        source = replicate(source, threads)
    if isinstance(source, Replications):
        source = source.estimates(method or source.design.methods[0], estimand)
    x = np.asarray(source, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        raise EmptyResultError("no finite estimates to bin")
    if np.ptp(x) == 0:
        bins = 1
    density, edges = np.histogram(x, bins=bins, density=True)
    skew = float(sps.skew(x)) if x.size > 2 and np.std(x) > 0 else 0.0
    return Histogram(edges, density, skew)


# Reference rows: (N2(0), T, a) with the reference
# (mean, var, median, rho) of the table's estimand.
TABLE3 = [
    ((5, 20, 0.035), (0.03115, 0.00045922, 0.03044, -0.112)),
    ((5, 20, 0.140), (0.13119, 0.00099481, 0.13539, -0.246)),
    ((5, 40, 0.105), (0.09677, 0.00051789, 0.10100, -0.380)),
    ((5, 40, 0.140), (0.13326, 0.00044708, 0.13732, -0.489)),
    ((100, 20, 0.140), (0.13969, 0.00003447, 0.13973, -0.005)),
    ((100, 40, 0.070), (0.06963, 0.00001785, 0.06977, 0.006)),
    ((200, 20, 0.070), (0.06982, 0.00001722, 0.06986, -0.027)),
    ((200, 40, 0.070), (0.06982, 0.00000899, 0.06990, -0.009)),
    ((300, 20, 0.070), (0.06994, 0.00001169, 0.07000, -0.008)),
    ((300, 40, 0.035), (0.03492, 0.00000545, 0.03496, 0.000)),
]
TABLE4 = [
    ((50, 40, 0.035), (0.07091, 0.00006506, 0.07034, -0.004)),
    ((100, 40, 0.070), (0.07034, 0.00001723, 0.07015, 0.006)),
    ((100, 40, 0.105), (0.07019, 0.00000806, 0.07008, -0.007)),
    ((200, 20, 0.105), (0.07010, 0.00001175, 0.07000, -0.007)),
    ((200, 20, 0.140), (0.07007, 0.00000809, 0.07004, -0.007)),
    ((300, 20, 0.035), (0.07012, 0.00001469, 0.07008, -0.004)),
    ((500, 20, 0.035), (0.07005, 0.00000902, 0.07002, -0.003)),
    ((500, 20, 0.105), (0.07005, 0.00000461, 0.07000, 0.008)),
    ((500, 40, 0.035), (0.07010, 0.00000609, 0.07002, 0.012)),
    ((1000, 20, 0.035), (0.07006, 0.00000433, 0.07004, 0.006)),
]
TABLE5 = [
    ((5, 40, 0.035), (0.43255, 0.08842763, 0.42888, None)),
    ((50, 20, 0.035), (0.49951, 0.01497913, 0.49202, None)),
    ((50, 20, 0.140), (1.99277, 0.04051883, 1.98941, None)),
    ((100, 20, 0.070), (0.99856, 0.01403924, 0.99422, None)),
    ((100, 40, 0.070), (0.99327, 0.00689571, 0.99369, None)),
    ((200, 20, 0.105), (1.49857, 0.00917040, 1.49868, None)),
    ((300, 40, 0.035), (0.49858, 0.00160204, 0.49925, None)),
    ((500, 40, 0.035), (0.49956, 0.00096347, 0.49970, None)),
    ((500, 40, 0.070), (0.99871, 0.00137583, 0.99869, None)),
    ((1000, 20, 0.070), (0.99950, 0.00137986, 0.99882, None)),
]
TABLES = {3: ("a", TABLE3), 4: ("c", TABLE4), 5: ("r0", TABLE5)}


def table(number: int, reps: int = 10_000, seed: int = DEFAULT_SEED, method: str = "poisson-aml",
          threads: int | None = None):
    """Recompute one of the summary tables.

    Returns ``(estimand, rows)`` where each row is ``(SummaryStats, reported)``
    with ``reported`` the reference ``(mean, var, median, rho)``.
    """
    estimand, spec = TABLES[number]
    rows = []
    for (n2, T, a), reported in spec:
        d = McDesign(n2, T, a, reps=reps, seed=seed, methods=(method,))
        rows.append((run_design(d, method, threads), reported))
    return estimand, rows


# --- estimator comparison along one epidemic ------------------------------------------

COMPARISON_ML = ("binomial-ml", "poisson-aml", "unfeasible-gaussian")
AR_ORDERS = (7, 14, 21)
LOGNORMAL_PRIOR = ("lognormal", 4.5, 2.5)


def comparison_series(
    design: McDesign,
    window: int = 7,
    ar_orders=AR_ORDERS,
    ml_methods=COMPARISON_ML,
    profile_length: int = 100,
    threads: int | None = None,
) -> dict:
    """Per-day reproduction estimates from several estimators on shared paths.

    Returns a mapping ``name -> (reps, T+1)`` array. Names are the ML method
    names (expanding-window ``R0`` fits), ``epiestim-geometric`` and
    ``epiestim-lognormal`` (posterior means), and ``ar-H`` for each order.
    The incidence fed to the renewal estimators starts with the seed cluster
    ``N2(0)`` on day 0. Day 0 of the ML series is NaN.
    """
    geo = geometric_profile(design.c, profile_length)
    logn = discretize_interval(*LOGNORMAL_PRIOR, S=profile_length)

    def one(r):
        path = simulate(design.params, design.init, design.T, design.stream(r))
        out = {}
        for m in ml_methods:
            fits = rolling_fit(path, m)
            out[m] = np.concatenate([[np.nan], [f.r0_hat for f in fits]])
        inc = np.concatenate([[design.N2_0], path.N12]).astype(float)
        out["epiestim-geometric"] = instantaneous_r(inc, geo, window).posterior_mean
        out["epiestim-lognormal"] = instantaneous_r(inc, logn, window).posterior_mean
        for H in ar_orders:
            out[f"ar-{H}"] = ar_series(inc, H)
        return out

    threads = threads or default_threads()
    if threads == 1:
        per_rep = [one(r) for r in range(design.reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(one, range(design.reps)))
    return {k: np.vstack([rep[k] for rep in per_rep]) for k in per_rep[0]}
