"""Counter-based per-sample random streams.

Every sample owns an independent stream keyed by (master seed, sample
index): the key is hashed through a splitmix64 chain into a xoshiro256**
state, so streams are bit-reproducible for any worker count, call
order, or platform.  No global mutable RNG anywhere.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64
_DOUBLE_NORM = 1.0 / (1 << 53)


@njit(cache=True, inline="always")
def _splitmix64(z):
    z = (z + _U64(0x9E3779B97F4A7C15)) & _U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)) & _U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)) & _U64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> _U64(31))


@njit(cache=True)
def seed_state(master_seed, sample_index):
    state = np.empty(4, dtype=np.uint64)
    z = _splitmix64(_U64(master_seed) ^ (_U64(0xD2B74407B1CE6E93)))
    z = _splitmix64(z ^ _U64(sample_index))
    for i in range(4):
        z = _splitmix64(z)
        state[i] = z
    return state


@njit(cache=True, inline="always")
def _rotl(x, k):
    return ((x << _U64(k)) | (x >> _U64(64 - k))) & _U64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _next_u64(state):
    # xoshiro256**
    result = (_rotl((state[1] * _U64(5)) & _U64(0xFFFFFFFFFFFFFFFF), 7)
              * _U64(9)) & _U64(0xFFFFFFFFFFFFFFFF)
    t = (state[1] << _U64(17)) & _U64(0xFFFFFFFFFFFFFFFF)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = _rotl(state[3], 45)
    return result


@njit(cache=True)
def fill_doubles(state, out):
    for i in range(out.shape[0]):
        out[i] = float(_next_u64(state) >> _U64(11)) * _DOUBLE_NORM


@njit(cache=True)
def next_double(state):
    return float(_next_u64(state) >> _U64(11)) * _DOUBLE_NORM


def make_state(master_seed: int, sample_index: int) -> np.ndarray:
    """uint64-safe wrapper around seed_state for arbitrary Python ints."""
    return seed_state(np.uint64(master_seed % (1 << 64)),
                      np.uint64(sample_index % (1 << 64)))


class SampleStream:
    """Random stream of one sample; draws are uniform doubles in [0, 1)."""

    __slots__ = ("state",)

    def __init__(self, master_seed: int, sample_index: int):
        self.state = make_state(master_seed, sample_index)

    def random(self, n: int | None = None):
        if n is None:
            return next_double(self.state)
        out = np.empty(n, dtype=np.float64)
        fill_doubles(self.state, out)
        return out
