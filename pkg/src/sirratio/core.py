"""Discrete-time stochastic SIR model: chain-binomial simulation and count algebra.

States are numbered 1 (susceptible), 2 (infectious) and 3 (recovered). Between
day ``t-1`` and day ``t`` each susceptible is infected with probability
``a * N2(t-1) / n`` and each infectious individual recovers with probability
``c``, independently. The aggregate counts ``(N1, N2, N3)`` therefore form a
Markov chain whose one-step law is a pair of independent binomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import (
    InconsistentCountsError,
    InvalidProbabilityError,
    PopulationSizeError,
)
from .rng import as_generator

MAX_INDIVIDUALS = 100_000

# Defaults: a city of three million with a first cluster of 50.
DEFAULT_N = 3_000_000
DEFAULT_I0 = 50


@dataclass(frozen=True)
class ModelParams:
    """Contagion rate ``a``, daily recovery probability ``c``, population ``n``."""

    a: float
    c: float
    n: int

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"contagion rate a must be > 0, got {self.a}")
        if not 0 < self.c < 1:
            raise ValueError(f"recovery probability c must be in (0, 1), got {self.c}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"population size n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def r0(self) -> float:
        return self.a / self.c


@dataclass(frozen=True)
class EpidemicState:
    """Cross-sectional counts on day ``t``."""

    t: int
    N1: int
    N2: int
    N3: int

    def __post_init__(self):
        for name in ("N1", "N2", "N3"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise InconsistentCountsError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))

    @property
    def n(self) -> int:
        return self.N1 + self.N2 + self.N3

    @classmethod
    def initial(cls, n: int = DEFAULT_N, infected: int = DEFAULT_I0, recovered: int = 0):
        """Day-0 state with ``infected`` seeds and the rest susceptible."""
        return cls(0, n - infected - recovered, infected, recovered)


@dataclass(frozen=True)
class TransitionCounts:
    """New infections ``N12`` and new recoveries ``N23`` between ``t-1`` and ``t``."""

    t: int
    N12: int
    N23: int


@dataclass(frozen=True, eq=False)
class CountPath:
    """Marginal counts for days ``0..T`` with the transitions for days ``1..T``.

    Stored column-wise as int64 arrays; ``states`` and ``transitions`` give the
    record view.
    """

    N1: np.ndarray
    N2: np.ndarray
    N3: np.ndarray
    N12: np.ndarray = field(default=None)
    N23: np.ndarray = field(default=None)

    def __post_init__(self):
        n1, n2, n3 = (np.asarray(x, dtype=np.int64) for x in (self.N1, self.N2, self.N3))
        if not (n1.ndim == n2.ndim == n3.ndim == 1 and len(n1) == len(n2) == len(n3) >= 1):
            raise InconsistentCountsError("N1, N2, N3 must be 1-d and of equal length")
        if self.N12 is None or self.N23 is None:
            n12, n23 = transitions_from_arrays(n1, n2, n3)
        else:
            n12 = np.asarray(self.N12, dtype=np.int64)
            n23 = np.asarray(self.N23, dtype=np.int64)
            check_linked(n1, n2, n3, n12, n23)
        for name, arr in zip(("N1", "N2", "N3", "N12", "N23"), (n1, n2, n3, n12, n23)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def T(self) -> int:
        return len(self.N1) - 1

    @property
    def n(self) -> int:
        return int(self.N1[0] + self.N2[0] + self.N3[0])

    @property
    def states(self) -> list[EpidemicState]:
        return [EpidemicState(t, *map(int, row)) for t, row in enumerate(self.marginals())]

    @property
    def transitions(self) -> list[TransitionCounts]:
        return [TransitionCounts(t + 1, int(i), int(r)) for t, (i, r) in enumerate(zip(self.N12, self.N23))]

    def state(self, t: int) -> EpidemicState:
        return EpidemicState(t, int(self.N1[t]), int(self.N2[t]), int(self.N3[t]))

    def marginals(self) -> np.ndarray:
        """``(T+1, 3)`` array of ``N1, N2, N3``."""
        return np.column_stack([self.N1, self.N2, self.N3])

    def head(self, T: int) -> "CountPath":
        """The path restricted to days ``0..T``."""
        return CountPath(self.N1[: T + 1], self.N2[: T + 1], self.N3[: T + 1], self.N12[:T], self.N23[:T])

    def __eq__(self, other):
        if not isinstance(other, CountPath):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("N1", "N2", "N3", "N12", "N23")
        )

    def __len__(self):
        return self.T


def infection_probability(a: float, n2_prev, n: int):
    """``a * N2(t-1) / n``; raises rather than clamping values above one."""
    p = a * np.asarray(n2_prev, dtype=float) / n
    if np.any(p > 1.0):
        worst = float(np.max(p))
        raise InvalidProbabilityError(
            f"infection probability a*N2/n = {worst!r} exceeds 1", value=worst
        )
    return p


def transition_matrix(params: ModelParams, n2_prev: int) -> np.ndarray:
    """Row-stochastic 3x3 matrix of day-to-day transition probabilities."""
    p12 = float(infection_probability(params.a, n2_prev, params.n))
    c = params.c
    return np.array(
        [
            [1.0 - p12, p12, 0.0],
            [0.0, 1.0 - c, c],
            [0.0, 0.0, 1.0],
        ]
    )


def step(state: EpidemicState, params: ModelParams, rng) -> tuple[EpidemicState, TransitionCounts]:
    """Draw one day of the chain: independent binomial infections and recoveries."""
    gen = as_generator(rng)
    p12 = float(infection_probability(params.a, state.N2, params.n))
    n12 = int(gen.binomial(state.N1, p12))
    n23 = int(gen.binomial(state.N2, params.c))
    t = state.t + 1
    nxt = EpidemicState(t, state.N1 - n12, state.N2 + n12 - n23, state.N3 + n23)
    return nxt, TransitionCounts(t, n12, n23)


def simulate(params: ModelParams, init: EpidemicState, T: int, rng) -> CountPath:
    """Simulate ``T`` days of the chain-binomial SIR model from ``init``.

    Parameters
    ----------
    params : ModelParams
    init : EpidemicState
        Day-0 counts; must sum to ``params.n``.
    T : int
        Number of days to simulate (``T >= 1``).
    rng : RngStream, numpy Generator or int
        Source of randomness. Equal streams give equal paths.

    Returns
    -------
    CountPath
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    _check_init(params, init)
    gen = as_generator(rng)
    a, c, n = params.a, params.c, params.n
    N1 = np.empty(T + 1, dtype=np.int64)
    N2 = np.empty(T + 1, dtype=np.int64)
    N3 = np.empty(T + 1, dtype=np.int64)
    N12 = np.empty(T, dtype=np.int64)
    N23 = np.empty(T, dtype=np.int64)
    s, i, r = init.N1, init.N2, init.N3
    N1[0], N2[0], N3[0] = s, i, r
    binomial = gen.binomial
    for t in range(T):
        p = a * i / n
        if p > 1.0:
            raise InvalidProbabilityError(f"infection probability a*N2/n = {p!r} exceeds 1", value=p)
        new_inf = int(binomial(s, p)) if i and s else 0
        new_rec = int(binomial(i, c)) if i else 0
        s -= new_inf
        i += new_inf - new_rec
        r += new_rec
        N12[t], N23[t] = new_inf, new_rec
        N1[t + 1], N2[t + 1], N3[t + 1] = s, i, r
    return CountPath(N1, N2, N3, N12, N23)


def simulate_batch(params: ModelParams, init: EpidemicState, T: int, reps: int, rng):
    """Simulate ``reps`` independent paths in lockstep.

    Returns ``(N1, N12)`` arrays of shape ``(reps, T+1)`` and ``(reps, T)``;
    this is the fast path used for forward expectations.
    """
    _check_init(params, init)
    gen = as_generator(rng)
    a, c, n = params.a, params.c, params.n
    s = np.full(reps, init.N1, dtype=np.int64)
    i = np.full(reps, init.N2, dtype=np.int64)
    N1 = np.empty((reps, T + 1), dtype=np.int64)
    N12 = np.empty((reps, T), dtype=np.int64)
    N1[:, 0] = s
    for t in range(T):
        p = infection_probability(a, i, n)
        new_inf = gen.binomial(s, p)
        new_rec = gen.binomial(i, c)
        s = s - new_inf
        i = i + new_inf - new_rec
        N12[:, t] = new_inf
        N1[:, t + 1] = s
    return N1, N12


def _check_init(params: ModelParams, init: EpidemicState):
    if init.n != params.n:
        raise InconsistentCountsError(
            f"initial counts sum to {init.n}, population size is {params.n}"
        )


def check_linked(N1, N2, N3, N12, N23):
    """Verify the day-to-day identities linking marginals and transitions."""
    N1, N2, N3, N12, N23 = (np.asarray(x, dtype=np.int64) for x in (N1, N2, N3, N12, N23))
    if len(N12) != len(N1) - 1 or len(N23) != len(N1) - 1:
        raise InconsistentCountsError("need T transitions for T+1 marginal days")
    if np.any(N12 < 0) or np.any(N23 < 0):
        raise InconsistentCountsError("transition counts must be non-negative")
    ok = (
        np.array_equal(N1[1:], N1[:-1] - N12)
        and np.array_equal(N2[1:], N2[:-1] + N12 - N23)
        and np.array_equal(N3[1:], N3[:-1] + N23)
    )
    if not ok:
        raise InconsistentCountsError("marginals and transitions are not linked")


def transitions_from_arrays(N1, N2, N3):
    N1, N2, N3 = (np.asarray(x, dtype=np.int64) for x in (N1, N2, N3))
    tot = N1 + N2 + N3
    if np.any(N1 < 0) or np.any(N2 < 0) or np.any(N3 < 0):
        raise InconsistentCountsError("counts must be non-negative")
    if np.any(tot != tot[0]):
        raise InconsistentCountsError("N1 + N2 + N3 is not constant over time")
    N12 = N1[:-1] - N1[1:]
    N23 = N3[1:] - N3[:-1]
    if np.any(N12 < 0):
        raise InconsistentCountsError("N1 increases: susceptibles cannot be created")
    if np.any(N23 < 0):
        raise InconsistentCountsError("N3 decreases: recovery is absorbing")
    if np.any(N23 > N2[:-1]):
        raise InconsistentCountsError("more recoveries than infectious individuals")
    return N12, N23


def transitions_from_marginals(marginals) -> list[TransitionCounts]:
    """Recover ``(N12, N23)`` per day from a ``(T+1, 3)`` array of marginals.

    Uses ``N12(t) = N1(t-1) - N1(t)`` and ``N23(t) = N3(t) - N3(t-1)``; the
    remaining diagonal counts follow as ``N11(t) = N1(t)``,
    ``N22(t) = N2(t-1) - N23(t)`` and ``N33(t) = N3(t-1)``.
    """
    m = np.asarray(marginals, dtype=np.int64)
    if m.ndim != 2 or m.shape[1] != 3:
        raise InconsistentCountsError("marginals must have shape (T+1, 3)")
    N12, N23 = transitions_from_arrays(m[:, 0], m[:, 1], m[:, 2])
    return [TransitionCounts(t + 1, int(i), int(r)) for t, (i, r) in enumerate(zip(N12, N23))]


def marginals_from_transitions(init: EpidemicState, transitions: Sequence) -> np.ndarray:
    """Inverse of :func:`transitions_from_marginals`: rebuild ``(T+1, 3)`` marginals."""
    if len(transitions) and isinstance(transitions[0], TransitionCounts):
        n12 = np.array([tr.N12 for tr in transitions], dtype=np.int64)
        n23 = np.array([tr.N23 for tr in transitions], dtype=np.int64)
    else:
        arr = np.asarray(transitions, dtype=np.int64).reshape(-1, 2)
        n12, n23 = arr[:, 0], arr[:, 1]
    N1 = init.N1 - np.concatenate([[0], np.cumsum(n12)])
    N3 = init.N3 + np.concatenate([[0], np.cumsum(n23)])
    N2 = init.N2 + np.concatenate([[0], np.cumsum(n12 - n23)])
    check_linked(N1, N2, N3, n12, n23)
    if np.any(N1 < 0) or np.any(N2 < 0):
        raise InconsistentCountsError("transitions drive a compartment negative")
    return np.column_stack([N1, N2, N3])


def simulate_individuals(params: ModelParams, init: EpidemicState, T: int, rng) -> np.ndarray:
    """Simulate each individual's state history.

    Returns an int8 array ``Y`` of shape ``(T+1, n)`` with ``Y[t, i]`` the state
    (1, 2 or 3) of individual ``i`` on day ``t``. Individuals are ordered
    susceptible, infectious, recovered on day 0.
    """
    if params.n > MAX_INDIVIDUALS:
        raise PopulationSizeError(
            f"individual simulation is limited to n <= {MAX_INDIVIDUALS}, got {params.n}"
        )
    _check_init(params, init)
    gen = as_generator(rng)
    Y = np.empty((T + 1, params.n), dtype=np.int8)
    y = np.repeat(np.array([1, 2, 3], dtype=np.int8), [init.N1, init.N2, init.N3])
    Y[0] = y
    for t in range(1, T + 1):
        n2 = int(np.count_nonzero(y == 2))
        p12 = float(infection_probability(params.a, n2, params.n))
        u = gen.random(params.n)
        infected = (y == 1) & (u < p12)
        recovered = (y == 2) & (u < params.c)
        y = y.copy()
        y[infected] = 2
        y[recovered] = 3
        Y[t] = y
    return Y


def aggregate_individuals(Y) -> CountPath:
    """Aggregate individual histories into a :class:`CountPath`.

    Transition counts are read off the individual flips, so the linkage check
    in :class:`CountPath` verifies the histories are SIR-consistent.
    """
    Y = np.asarray(Y)
    N1 = (Y == 1).sum(axis=1)
    N2 = (Y == 2).sum(axis=1)
    N3 = (Y == 3).sum(axis=1)
    N12 = ((Y[:-1] == 1) & (Y[1:] == 2)).sum(axis=1)
    N23 = ((Y[:-1] == 2) & (Y[1:] == 3)).sum(axis=1)
    return CountPath(N1, N2, N3, N12, N23)


def recovery_times(Y) -> np.ndarray:
    """Days spent infectious by each individual who starts infectious on day 0.

    Individuals still infectious at the horizon are returned as ``-1``.
    """
    Y = np.asarray(Y)
    start = Y[0] == 2
    rec = Y[:, start] == 3
    out = np.where(rec.any(axis=0), rec.argmax(axis=0), -1)
    return out
