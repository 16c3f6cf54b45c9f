"""Reproducible random streams keyed by ``(seed, stream id)``.

Every stream is a PCG64 generator seeded through :class:`numpy.random.SeedSequence`
with the stream id as spawn key, so distinct ids give statistically independent
streams and equal ids reproduce the same draws bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

DEFAULT_SEED = 20201215

_MASK64 = (1 << 64) - 1


def stream_id(*parts) -> int:
    """Stable 64-bit id from arbitrary printable parts.

    Python's built-in ``hash`` is salted per process, so a cryptographic digest
    of the ``repr`` is used instead.

    >>> stream_id("table3", 0) == stream_id("table3", 0)
    True
    """
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Parameters
    ----------
    seed : int
        Master seed (64-bit).
    stream : int
        Stream id (64-bit). Use :func:`stream_id` to derive one from labels.
    """

    seed: int = DEFAULT_SEED
    stream: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) <= _MASK64 and 0 <= int(self.stream) <= _MASK64):
            raise ValueError("seed and stream id must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *parts) -> "RngStream":
        """Derived stream for a sub-task (e.g. replication ``r`` of a design)."""
        return RngStream(self.seed, stream_id(self.stream, *parts))


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngStream`, a Generator, an int seed or ``None``."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return RngStream().generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")
