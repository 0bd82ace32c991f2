"""Deterministic, splittable random streams.

A stream is identified by ``(seed, path)``.  Equal identifiers give equal
draws; children obtained with :func:`split_rng` are seeded through numpy's
``SeedSequence`` spawn keys, so sibling streams are independent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass
class RngStream:
    seed: int
    path: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.seed = int(self.seed) & _MASK64
        self.path = tuple(int(i) for i in self.path)
        if any(i < 0 for i in self.path):
            raise ValueError("split indices must be non-negative")

    @property
    def generator(self) -> np.random.Generator:
        # single owner: every draw advances this generator
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def split(self, index: int) -> RngStream:
        return RngStream(self.seed, self.path + (int(index),))

    def uniform(self, size=None):
        return self.generator.random(size)


def make_rng(seed: int) -> RngStream:
    return RngStream(seed)


def split_rng(stream: RngStream, index: int) -> RngStream:
    """Child stream whose path is ``stream.path + (index,)``.

    The child does not depend on how far the parent has been consumed.
    """
    if index < 0:
        raise ValueError("split index must be non-negative")
    return stream.split(index)
