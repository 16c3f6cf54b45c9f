"""Initial, basic and effective reproduction ratios.

The effective ratio at day ``t`` is

    R*(t) = (a / n) * sum_{x=0}^{H-1} E_t[N1(t+x)] (1-c)^x

and the basic ratio replaces the normaliser ``n`` by ``N1(t)``. Forward
expectations are Monte-Carlo averages over ``S`` paths simulated from the
day-``t`` state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CountPath, EpidemicState, ModelParams, simulate_batch
from .rng import RngStream


@dataclass(frozen=True)
class RzeroConfig:
    """Truncation horizon ``H``, forward replications ``S`` and their stream."""

    H: int = 100
    S: int = 100
    rng: RngStream = field(default_factory=RngStream)

    def __post_init__(self):
        if self.H < 1 or self.S < 1:
            raise ValueError("H and S must be >= 1")


@dataclass(frozen=True)
class RzeroValue:
    """Ratios at one state, with the Monte-Carlo standard errors."""

    effective: float
    basic: float
    se_effective: float
    se_basic: float
    defined: bool


@dataclass
class RzeroSeries:
    t: np.ndarray
    effective: np.ndarray
    basic: np.ndarray  # NaN where N1(t) == 0
    defined: np.ndarray
    config: RzeroConfig


def initial_r0(params: ModelParams) -> float:
    """Transmission rate times mean infectious duration, ``a / c``."""
    return params.a / params.c


def geometric_survival(c: float, x):
    """``P[X >= x] = (1-c)^(x-1)`` for the geometric infectious duration."""
    x = np.asarray(x)
    if np.any(x < 1):
        raise ValueError("x must be >= 1")
    out = (1.0 - c) ** (x - 1)
    return float(out) if out.ndim == 0 else out


def geometric_pmf(c: float, x):
    x = np.asarray(x)
    return c * (1.0 - c) ** (x - 1)


def forward_susceptibles(state: EpidemicState, params: ModelParams, cfg: RzeroConfig) -> np.ndarray:
    """``(S, H)`` simulated ``N1(t+x)`` for ``x = 0..H-1`` from ``state``.

    The stream for a state is derived from ``cfg.rng`` and the day index, so
    evaluating the same day twice reproduces the same draws.
    """
    if state.N2 == 0 or state.N1 == 0:
        return np.full((cfg.S, cfg.H), state.N1, dtype=np.int64)
    sub = cfg.rng.child("forward", state.t)
    N1, _ = simulate_batch(params, _as_day0(state), cfg.H - 1, cfg.S, sub)
    return N1


def forward_infections(state: EpidemicState, params: ModelParams, cfg: RzeroConfig) -> np.ndarray:
    """``(S, H-1)`` simulated ``N12(t+k)`` for ``k = 1..H-1`` (same draws as above)."""
    if state.N2 == 0 or state.N1 == 0:
        return np.zeros((cfg.S, cfg.H - 1), dtype=np.int64)
    sub = cfg.rng.child("forward", state.t)
    _, N12 = simulate_batch(params, _as_day0(state), cfg.H - 1, cfg.S, sub)
    return N12


def _as_day0(state: EpidemicState) -> EpidemicState:
    return EpidemicState(0, state.N1, state.N2, state.N3)


def _ratios(state, params, cfg) -> RzeroValue:
    fwd = forward_susceptibles(state, params, cfg)
    disc = (1.0 - params.c) ** np.arange(cfg.H)
    per_path = fwd @ disc  # sum_x N1(t+x)(1-c)^x for each replication
    mean = float(per_path.mean())
    se = float(per_path.std(ddof=1) / math.sqrt(cfg.S)) if cfg.S > 1 else float("nan")
    eff = params.a / params.n * mean
    se_eff = params.a / params.n * se
    if state.N1 == 0:
        return RzeroValue(eff, float("nan"), se_eff, float("nan"), False)
    return RzeroValue(eff, params.a / state.N1 * mean, se_eff, params.a / state.N1 * se, True)


def effective_r0(state: EpidemicState, params: ModelParams, cfg: RzeroConfig | None = None) -> float:
    """Expected infections by a case arising at ``t``, normalised by ``n``."""
    return _ratios(state, params, cfg or RzeroConfig()).effective


def basic_r0(state: EpidemicState, params: ModelParams, cfg: RzeroConfig | None = None) -> float:
    """As :func:`effective_r0` but normalised by the current susceptibles ``N1(t)``.

    Returns NaN when ``N1(t) == 0``; use :func:`r0_at` for the explicit flag.
    """
    return _ratios(state, params, cfg or RzeroConfig()).basic


def r0_at(state: EpidemicState, params: ModelParams, cfg: RzeroConfig | None = None) -> RzeroValue:
    return _ratios(state, params, cfg or RzeroConfig())


def rzero_path(path: CountPath, params: ModelParams, cfg: RzeroConfig | None = None, days=None) -> RzeroSeries:
    """Basic and effective ratios on each day of ``path`` (or the given ``days``)."""
    cfg = cfg or RzeroConfig()
    days = np.arange(path.T + 1) if days is None else np.asarray(days, dtype=int)
    eff = np.empty(len(days))
    bas = np.empty(len(days))
    ok = np.empty(len(days), dtype=bool)
    for k, t in enumerate(days):
        v = _ratios(path.state(int(t)), params, cfg)
        eff[k], bas[k], ok[k] = v.effective, v.basic, v.defined
    return RzeroSeries(days, eff, bas, ok, cfg)
