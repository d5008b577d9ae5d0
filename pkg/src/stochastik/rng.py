"""Seeded random streams.

Every simulation takes an explicit ``numpy.random.Generator``. ``RngStream``
builds one from a 64-bit seed and a stream index using the counter-based
Philox4x64 bit generator (period 2**256); distinct stream indices map to
distinct spawn keys of the same seed sequence, so substreams never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALGORITHM = "philox4x64-10"


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0
    algorithm: str = ALGORITHM
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.stream < 0:
            raise ValueError("stream index must be nonnegative")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        object.__setattr__(self, "generator", np.random.Generator(np.random.Philox(ss)))

    def substream(self, index: int) -> "RngStream":
        """Independent stream derived from the same master seed."""
        # Interleave so that (stream, index) pairs never collide across levels.
        return RngStream(self.seed, (self.stream + 1) * 1_000_003 + index)

    def describe(self) -> dict:
        return {"algorithm": self.algorithm, "seed": self.seed, "stream": self.stream}


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return RngStream(seed, stream).generator


def as_generator(rng) -> np.random.Generator:
    """Accept either an RngStream or a numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")
