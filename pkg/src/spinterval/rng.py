"""Seedable random streams with deterministic substreams.

Every stream is a numpy ``Generator`` over the PCG64 bit generator, keyed by
a ``SeedSequence`` built from ``(seed, path)``.  ``path`` is the tuple of
substream indices leading from the master stream, and goes in as the
SeedSequence ``spawn_key``, so the child state is a hash of the full lineage.
Two streams with the same lineage produce the same sequence on every
platform; that is what makes benchmark output independent of how
replications are scheduled across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream", "as_stream", "DEFAULT_SEED"]

DEFAULT_SEED = 20130129


class RngStream:
    """A single-owner random stream with lineage ``(seed, path)``."""

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int = DEFAULT_SEED, path: tuple = ()):
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self.seed = int(seed)
        self.path = tuple(int(i) for i in path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"

    @property
    def lineage(self) -> tuple:
        return (self.seed, self.path)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, index: int) -> "RngStream":
        """Child stream; depends only on this stream's lineage and ``index``."""
        if index < 0:
            raise ValueError("substream index must be nonnegative")
        return RngStream(self.seed, self.path + (index,))

    def uniform(self, size=None):
        """Uniform deviates on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def gamma(self, shape: float, size=None):
        return self._gen.standard_gamma(shape, size)

    def exponential(self, size=None):
        return self._gen.standard_exponential(size)

    def integers(self, low: int, high: int, size=None):
        """Integers in ``[low, high)``."""
        return self._gen.integers(low, high, size)


def as_stream(seed) -> RngStream:
    if isinstance(seed, RngStream):
        return seed
    if seed is None:
        return RngStream(DEFAULT_SEED)
    return RngStream(int(seed))
