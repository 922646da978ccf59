from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np


class Purpose(IntEnum):
    """Independent stream families; one per role so samples never share randomness"""
    PLAIN = 0
    THETA = 1
    CONDITIONED = 2
    DELTA = 3
    SAMPLING = 4


@dataclass(frozen=True)
class RngStream:
    """Counter-based (Philox) stream keyed by (master seed, purpose, index)"""
    master_seed: int
    index: int = 0
    purpose: Purpose = Purpose.PLAIN
    _generator: Optional[np.random.Generator] = field(default=None, init=False, repr=False, compare=False)

    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seq = np.random.SeedSequence(entropy=self.master_seed,
                                         spawn_key=(int(self.purpose), self.index))
            object.__setattr__(self, "_generator", np.random.Generator(np.random.Philox(seq)))
        return self._generator

    def child(self, index: int, purpose: Optional[Purpose] = None) -> RngStream:
        return RngStream(self.master_seed, index, self.purpose if purpose is None else purpose)

    def describe(self) -> dict:
        return {"master_seed": self.master_seed, "purpose": self.purpose.name.lower(), "index": self.index}


class UniformFeed:
    """Uniform draws served from blocks, so samplers consume a stream identically"""

    def __init__(self, rng: np.random.Generator, block: int = 512):
        self._rng = rng
        self._block = block
        self._buffer = rng.random(block)
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._block:
            self._buffer = self._rng.random(self._block)
            self._pos = 0
        u = self._buffer[self._pos]
        self._pos += 1
        return float(u)
