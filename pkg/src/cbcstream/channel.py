"""Memoryless binary symmetric channel with counter-based noise streams."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

# stream tags keep the per-trial substreams for different purposes disjoint
STREAM_CHANNEL = 0
STREAM_SOURCE = 1
STREAM_FRAME = 2
STREAM_BLOCK = 3


def trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Generator keyed on ``(seed, trial, stream)``; no state is shared between trials."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trial), int(stream)])))


@dataclass(frozen=True)
class BscChannel:
    eps0: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eps0 <= 0.5:
            raise InputError(f"crossover probability {self.eps0} outside [0, 0.5]")

    def flips(self, n: int, trial_index: int) -> np.ndarray:
        """Boolean error pattern for trial ``trial_index``.

        The pattern is a threshold on a fixed uniform sequence, so for a common
        seed a larger ``eps0`` flips a superset of the bits a smaller one flips.
        """
        if self.eps0 == 0.0:
            return np.zeros(n, dtype=bool)
        u = trial_rng(self.seed, trial_index, STREAM_CHANNEL).random(n)
        return u < self.eps0

    def transmit(self, bits, trial_index: int = 0) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        return bits ^ self.flips(bits.size, trial_index).reshape(bits.shape).astype(np.uint8)


def transmit(bits, channel: BscChannel, trial_index: int = 0) -> np.ndarray:
    return channel.transmit(bits, trial_index)
