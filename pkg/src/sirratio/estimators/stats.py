"""Sufficient statistics of a count path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import CountPath


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """Per-day counts for days ``t = 1..T``.

    ``N1_prev[k]`` and ``N2_prev[k]`` are the day ``t-1`` marginals for
    ``t = k + 1``. Frequencies are NaN on days whose denominator is zero; those
    days are listed in ``no_susceptibles`` / ``no_infectious``.
    """

    n: int
    N1_prev: np.ndarray
    N2_prev: np.ndarray
    N12: np.ndarray
    N23: np.ndarray
    N11: np.ndarray
    N22: np.ndarray

    @property
    def T(self) -> int:
        return len(self.N12)

    @property
    def p2_prev(self) -> np.ndarray:
        return self.N2_prev / self.n

    @property
    def p12(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.N1_prev > 0, self.N12 / np.maximum(self.N1_prev, 1), np.nan)

    @property
    def p23(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.N2_prev > 0, self.N23 / np.maximum(self.N2_prev, 1), np.nan)

    @property
    def no_susceptibles(self) -> np.ndarray:
        return np.flatnonzero(self.N1_prev == 0) + 1

    @property
    def no_infectious(self) -> np.ndarray:
        return np.flatnonzero(self.N2_prev == 0) + 1

    def window(self, start: int, stop: int) -> "SufficientStats":
        """Statistics restricted to days ``start..stop`` (1-based, inclusive)."""
        sl = slice(start - 1, stop)
        return SufficientStats(
            self.n,
            self.N1_prev[sl],
            self.N2_prev[sl],
            self.N12[sl],
            self.N23[sl],
            self.N11[sl],
            self.N22[sl],
        )

    def concat(self, other: "SufficientStats") -> "SufficientStats":
        if other.n != self.n:
            raise ValueError("population sizes differ")
        cat = lambda k: np.concatenate([getattr(self, k), getattr(other, k)])  # noqa: E731
        return SufficientStats(
            self.n, cat("N1_prev"), cat("N2_prev"), cat("N12"), cat("N23"), cat("N11"), cat("N22")
        )

    def check(self):
        """Assert the row and column identities of the one-step count table."""
        assert np.array_equal(self.N11 + self.N12, self.N1_prev)
        assert np.array_equal(self.N22 + self.N23, self.N2_prev)
        assert np.all(self.N12 >= 0) and np.all(self.N23 >= 0)
        assert np.all(self.N11 >= 0) and np.all(self.N22 >= 0)


def build_stats(path: CountPath) -> SufficientStats:
    """Sufficient statistics of a validated :class:`CountPath`."""
    if not isinstance(path, CountPath):
        path = CountPath(*np.asarray(path).T)
    st = SufficientStats(
        n=path.n,
        N1_prev=np.asarray(path.N1[:-1]),
        N2_prev=np.asarray(path.N2[:-1]),
        N12=np.asarray(path.N12),
        N23=np.asarray(path.N23),
        N11=np.asarray(path.N1[1:]),
        N22=np.asarray(path.N2[:-1] - path.N23),
    )
    st.check()
    return st
