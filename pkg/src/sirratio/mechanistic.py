"""Infinite-population (mechanistic) SIR recursions.

The deterministic analogue of the chain-binomial model replaces frequencies by
probabilities::

    x(t) = x(t-1) - a x(t-1) y(t-1)
    y(t) = y(t-1) + a x(t-1) y(t-1) - c y(t-1)
    z(t) = z(t-1) + c y(t-1)

Also here: the final-size equation, the quadratic recursion for the infection
rate and its linearised renewal form. Only the explosion rate
``1 + c (R00 - 1)`` of the linearised renewal is identifiable from incidence
alone; ``R00`` and ``c`` are not separately identified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidProbabilityError, RootNotFoundError


@dataclass(frozen=True)
class MechanisticState:
    """Susceptible, infectious and recovered population fractions."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if min(self.x, self.y, self.z) < 0:
            raise ValueError("fractions must be non-negative")
        if abs(self.x + self.y + self.z - 1.0) > 1e-12:
            raise ValueError(f"fractions must sum to 1, got {self.x + self.y + self.z!r}")


def deterministic_step(state: MechanisticState, params) -> MechanisticState:
    a, c = params.a, params.c
    x, y, z = state.x, state.y, state.z
    if a * y > 1.0:
        raise InvalidProbabilityError(f"a*y = {a * y!r} exceeds 1", value=a * y)
    inf = a * x * y
    rec = c * y
    return MechanisticState(x - inf, y + inf - rec, z + rec)


def trajectory(params, init: MechanisticState, T: int) -> np.ndarray:
    """``(T+1, 3)`` array of ``(x, y, z)`` from repeated deterministic steps.

    Runs on plain floats; conservation is checked once at the end instead of
    building a state object per day.
    """
    a, c = params.a, params.c
    out = np.empty((T + 1, 3))
    x, y, z = init.x, init.y, init.z
    out[0] = x, y, z
    for t in range(1, T + 1):
        if a * y > 1.0:
            raise InvalidProbabilityError(f"a*y = {a * y!r} exceeds 1 on day {t}", value=a * y)
        inf = a * x * y
        rec = c * y
        x, y, z = x - inf, y + inf - rec, z + rec
        out[t] = x, y, z
    return out


def final_size_equation(x_inf: float, a: float, c: float, x0: float, y0: float) -> float:
    """Left-hand side of ``x - x0 - y0 - (c/a) log(x / x0) = 0``."""
    return x_inf - x0 - y0 - (c / a) * math.log(x_inf / x0)


def final_size(params, x0: float, y0: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Limiting susceptible fraction ``x(inf)`` by bisection.

    The left-hand side decreases on ``(0, min(x0, c/a))`` from ``+inf``; the
    herd-immunity root is the unique zero there. When ``y0 == 0`` and
    ``a x0 <= c`` no epidemic takes off and ``x0`` is returned.
    """
    a, c = params.a, params.c
    if not a > 0:
        raise ValueError("a must be > 0")
    if not 0 < x0 <= 1 or y0 < 0:
        raise ValueError("need 0 < x0 <= 1 and y0 >= 0")
    f = lambda x: final_size_equation(x, a, c, x0, y0)  # noqa: E731
    hi = min(x0, c / a)
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    lo = 1e-15
    flo = f(lo)
    if not (flo > 0 > fhi):
        raise RootNotFoundError(f"final-size equation has no sign change on ({lo}, {hi})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


def attack_rate(params, x0: float, y0: float) -> float:
    """Fraction ever infected, ``x0 + y0 - x(inf)`` (all initially exposed)."""
    return x0 + y0 - final_size(params, x0, y0)


def _geometric_kernel(c: float, length: int) -> np.ndarray:
    # (1-c)^(s-1) for s = 1..length
    return (1.0 - c) ** np.arange(length)


def mechanistic_infections(params, history) -> float:
    """Next infection rate ``p*12(t)`` from the history ``p*12(0..t-1)``.

    ``a [1 - sum_s p*12(t-s)] sum_s (1-c)^(s-1) p*12(t-s)``: the susceptible
    fraction times the geometric-decay weighted infectious load. ``history[0]``
    is the seed fraction infectious on day 0.
    """
    h = np.asarray(history, dtype=float)
    if h.size == 0:
        raise ValueError("history must be non-empty")
    if np.any(h < 0):
        raise ValueError("history entries must be non-negative")
    cum = float(h.sum())
    if cum > 1.0 + 1e-12:
        raise InvalidProbabilityError(f"cumulative incidence {cum!r} exceeds 1", value=cum)
    lagged = h[::-1]  # lagged[s-1] = p*12(t-s)
    load = float(np.dot(_geometric_kernel(params.c, h.size), lagged))
    return params.a * (1.0 - cum) * load


def infection_series(params, seed: float, T: int) -> np.ndarray:
    """Iterate :func:`mechanistic_infections` from a single seed fraction."""
    out = np.zeros(T + 1)
    out[0] = seed
    for t in range(1, T + 1):
        out[t] = mechanistic_infections(params, out[:t])
    return out


def linearized_renewal(r00: float, c: float, history) -> float:
    """``R00 * sum_s w(s) I(t-s)`` with geometric weights ``w(s) = c (1-c)^(s-1)``.

    Weights are not renormalised over the available history.
    """
    h = np.asarray(history, dtype=float)
    if h.size == 0:
        raise ValueError("history must be non-empty")
    w = c * _geometric_kernel(c, h.size)
    return r00 * float(np.dot(w, h[::-1]))


def renewal_series(r00: float, c: float, seed: float, T: int) -> np.ndarray:
    out = np.zeros(T + 1)
    out[0] = seed
    for t in range(1, T + 1):
        out[t] = linearized_renewal(r00, c, out[:t])
    return out


def explosion_rate(r00: float, c: float) -> float:
    """Asymptotic daily growth factor ``1 + c (R00 - 1)`` of the linearised renewal."""
    return 1.0 + c * (r00 - 1.0)
