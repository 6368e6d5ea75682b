# src/utils/seeding.py
"""
Seed streams

All randomness in a run flows from one integer seed. Each consumer draws from
its own stream, keyed by (seed, stream id, index), so adding a consumer never
changes the numbers an existing one sees.
"""

from enum import IntEnum

import numpy as np

from src.errors import ArgumentError


class Stream(IntEnum):
    GENERATOR = 0
    SPLIT = 1
    ENCODER_INIT = 2
    DECODER_INIT = 3
    RFF = 4
    SHUFFLE = 5
    HEAD_SHUFFLE = 6
    PROBES = 7


def derive_seed(seed: int, stream: int, index: int = 0) -> int:
    """Independent 63-bit seed for ``stream`` (and sub-index) of ``seed``"""
    if int(seed) < 0:
        raise ArgumentError(f"Seeds must be non-negative, got {seed}")
    state = np.random.SeedSequence([int(seed), int(stream), int(index)])
    return int(state.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def stream_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, stream, index))
