"""Two-population (SIR)^2 model.

Group ``j`` susceptibles are infected with probability
``a_j1 N2^1 / n^1 + a_j2 N2^2 / n^2`` and group ``j`` infectious recover with
probability ``c_j``. A rank-one contagion matrix ``A = beta alpha'`` separates
vulnerability ``beta`` from infectiveness ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CountPath
from .exceptions import InconsistentCountsError, InvalidProbabilityError
from .rng import as_generator


@dataclass(frozen=True, eq=False)
class HeteroParams:
    """Contagion matrix ``A``, recovery probabilities ``c`` and group sizes ``sizes``."""

    A: np.ndarray
    c: np.ndarray
    sizes: np.ndarray
    beta: np.ndarray | None = None
    alpha: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        c = np.asarray(self.c, dtype=float)
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if A.shape != (2, 2) or np.any(A < 0):
            raise ValueError("A must be a non-negative 2x2 matrix")
        if c.shape != (2,) or np.any(c <= 0) or np.any(c >= 1):
            raise ValueError("c must hold two probabilities in (0, 1)")
        if sizes.shape != (2,) or np.any(sizes < 0) or sizes.sum() < 1:
            raise ValueError("sizes must be two non-negative counts with positive total")
        for name, v in (("A", A), ("c", c), ("sizes", sizes)):
            object.__setattr__(self, name, v)

    @classmethod
    def rank_one(cls, beta, alpha, c, sizes) -> "HeteroParams":
        beta = np.asarray(beta, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if np.any(beta < 0) or np.any(alpha < 0):
            raise ValueError("beta and alpha must be non-negative")
        return cls(np.outer(beta, alpha), c, sizes, beta, alpha)


@dataclass(frozen=True)
class HeteroState:
    """Per-group counts: ``counts[j] = (N1^j, N2^j, N3^j)``."""

    counts: tuple

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.shape != (2, 3) or np.any(arr < 0):
            raise InconsistentCountsError("counts must be a non-negative 2x3 table")
        object.__setattr__(self, "counts", tuple(map(tuple, arr.tolist())))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    @property
    def sizes(self) -> np.ndarray:
        return self.array.sum(axis=1)


def infection_probabilities(params: HeteroParams, infectious) -> np.ndarray:
    """Per-group one-step infection probability given group infectious counts."""
    frac = np.divide(
        np.asarray(infectious, dtype=float),
        params.sizes,
        out=np.zeros(2),
        where=params.sizes > 0,
    )
    p = params.A @ frac
    if np.any(p > 1.0):
        worst = float(p.max())
        raise InvalidProbabilityError(f"group infection probability {worst!r} exceeds 1", value=worst)
    return p


def simulate_sir2(params: HeteroParams, init: HeteroState, T: int, rng) -> tuple[CountPath, CountPath]:
    """Simulate both groups for ``T`` days; returns one :class:`CountPath` per group."""
    if not np.array_equal(init.sizes, params.sizes):
        raise InconsistentCountsError("initial counts do not match group sizes")
    gen = as_generator(rng)
    s = init.array[:, 0].copy()
    i = init.array[:, 1].copy()
    r = init.array[:, 2].copy()
    out = np.empty((T + 1, 2, 3), dtype=np.int64)
    trans = np.empty((T, 2, 2), dtype=np.int64)
    out[0] = init.array
    for t in range(T):
        p = infection_probabilities(params, i)
        new_inf = gen.binomial(s, p)
        new_rec = gen.binomial(i, params.c)
        s = s - new_inf
        i = i + new_inf - new_rec
        r = r + new_rec
        out[t + 1] = np.column_stack([s, i, r])
        trans[t] = np.column_stack([new_inf, new_rec])
    return tuple(
        CountPath(out[:, j, 0], out[:, j, 1], out[:, j, 2], trans[:, j, 0], trans[:, j, 1])
        for j in range(2)
    )


def aggregate(paths) -> CountPath:
    """Sum the group paths into a single (non-Markov) aggregate path."""
    p1, p2 = paths
    return CountPath(p1.N1 + p2.N1, p1.N2 + p2.N2, p1.N3 + p2.N3, p1.N12 + p2.N12, p1.N23 + p2.N23)


def matrix_r0(beta, alpha, c1: float, c2: float) -> np.ndarray:
    """Initial reproduction matrix ``beta alpha_tilde'`` with ``alpha_tilde_j = alpha_j / c_j``."""
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    return np.outer(beta, alpha / np.array([c1, c2]))


def implied_a_t(state: HeteroState, beta, alpha) -> float:
    """Homogeneous-model contagion rate implied by a heterogeneous state.

    The aggregate infection probability of a susceptible is the
    vulnerability averaged over the susceptible mix times the infectiveness
    weighted infectious prevalence::

        [sum_j beta_j N1^j / N1] [sum_k alpha_k N2^k / n^k] = a_t N2 / n

    Returns NaN when ``N1`` or ``N2`` is zero.
    """
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    arr = state.array
    sizes = arr.sum(axis=1)
    N1, N2, n = arr[:, 0].sum(), arr[:, 1].sum(), sizes.sum()
    if N1 == 0 or N2 == 0:
        return float("nan")
    vuln = float(np.dot(beta, arr[:, 0]) / N1)
    prev = np.divide(arr[:, 1], sizes, out=np.zeros(2), where=sizes > 0)
    infect = float(np.dot(alpha, prev))
    return vuln * infect * n / N2


def implied_a_series(paths, beta, alpha) -> np.ndarray:
    """:func:`implied_a_t` on each day of a pair of group paths."""
    p1, p2 = paths
    out = np.empty(p1.T + 1)
    for t in range(p1.T + 1):
        st = HeteroState(((p1.N1[t], p1.N2[t], p1.N3[t]), (p2.N1[t], p2.N2[t], p2.N3[t])))
        out[t] = implied_a_t(st, beta, alpha)
    return out
