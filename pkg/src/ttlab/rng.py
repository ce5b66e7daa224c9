"""Counter-based random numbers.

Every random draw in the package is a pure function of a 64-bit key and a
64-bit counter: ``draw64(key, c) = mix64(key + (c + 1) * GOLDEN)``, i.e. the
``c``-th output of a SplitMix64 stream started at ``key``.  Keys for tree
nodes, walk vertices and replicas are themselves derived by hashing, so no
generator state is ever shared or advanced.

Three implementations of the same functions live here: plain Python ints
(key derivation), numpy arrays (vectorised draws) and numba scalars (inner
loops of the samplers).  ``tests/test_rng.py`` checks they agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_CHILD_SALT = 0xD1B54A32D192ED03

# Counter offset reserved for child-key derivation; draws use counters below it.
CHILD_SLOT = 1 << 40

# Domain tags: the same SeedSpec used for different purposes yields unrelated keys.
TAG_TREE = 1
TAG_WALK = 2
TAG_RECURSION = 3
TAG_REFERENCE = 4
TAG_REMARK = 5
TAG_CRAMER = 6
TAG_VERTEX = 7
TAG_REPLICA = 8


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def draw64(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GOLDEN)


def child_key(key: int, slot: int) -> int:
    return mix64(draw64(key, CHILD_SLOT + slot) ^ _CHILD_SALT)


def to_uniform(z: int) -> float:
    """Map 64 random bits to the open interval (0, 1)."""
    return ((z >> 12) + 0.5) * 2.0**-52


@dataclass(frozen=True)
class SeedSpec:
    """A (master_seed, stream_id) pair; equal pairs give identical sample paths."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    @property
    def key(self) -> int:
        return mix64(mix64(int(self.master_seed) + GOLDEN) ^ mix64(int(self.stream_id) + 2 * GOLDEN))

    def key_for(self, tag: int) -> int:
        """Key of the sub-stream used for one purpose (see the TAG_* constants)."""
        return draw64(self.key, CHILD_SLOT + tag)

    def replica(self, i: int) -> "SeedSpec":
        """Seed of replica ``i``; a pure function of (master_seed, stream_id, i)."""
        return SeedSpec(int(self.master_seed), draw64(int(self.stream_id) ^ TAG_REPLICA, i))


# ---------------------------------------------------------------- numpy

_U30, _U27, _U31, _U12 = (np.uint64(s) for s in (30, 27, 31, 12))


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U30)) * np.uint64(_M1)
        z = (z ^ (z >> _U27)) * np.uint64(_M2)
    return z ^ (z >> _U31)


def draw64_array(key: int, counters: np.ndarray) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (c + np.uint64(1)) * np.uint64(GOLDEN)
    return mix64_array(z)


def draw64_pairs(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Elementwise ``draw64`` for arrays of keys and counters."""
    k = np.asarray(keys, dtype=np.uint64)
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = k + (c + np.uint64(1)) * np.uint64(GOLDEN)
    return mix64_array(z)


def child_key_pairs(keys: np.ndarray, slots: np.ndarray) -> np.ndarray:
    slots = np.asarray(slots, dtype=np.uint64) + np.uint64(CHILD_SLOT)
    return mix64_array(draw64_pairs(keys, slots) ^ np.uint64(_CHILD_SALT))


def replica_keys_array(seed: "SeedSpec", count: int, tag: int) -> np.ndarray:
    """``seed.replica(i).key_for(tag)`` for i = 0..count-1, vectorised."""
    streams = draw64_array(int(seed.stream_id) ^ TAG_REPLICA, np.arange(count))
    with np.errstate(over="ignore"):
        base = np.uint64(mix64(int(seed.master_seed) + GOLDEN))
        keys = mix64_array(base ^ mix64_array(streams + np.uint64(2 * GOLDEN & MASK64)))
        z = keys + np.uint64(CHILD_SLOT + tag + 1) * np.uint64(GOLDEN)
    return mix64_array(z)


def to_uniform_array(z: np.ndarray) -> np.ndarray:
    return ((np.asarray(z, dtype=np.uint64) >> _U12).astype(np.float64) + 0.5) * 2.0**-52


def uniforms(key: int, counters) -> np.ndarray:
    """Open-interval uniforms for each counter under ``key``."""
    return to_uniform_array(draw64_array(key, counters))


def exponentials(key: int, counters) -> np.ndarray:
    """Exp(1) variates by inversion of open-interval uniforms (never log 0)."""
    return -np.log(uniforms(key, counters))


# ---------------------------------------------------------------- numba

_NB_GOLDEN = np.uint64(GOLDEN)
_NB_M1 = np.uint64(_M1)
_NB_M2 = np.uint64(_M2)
_NB_SALT = np.uint64(_CHILD_SALT)
_NB_CHILD = np.uint64(CHILD_SLOT)
_NB_ONE = np.uint64(1)


@numba.njit(cache=True, nogil=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _NB_M1
    z = (z ^ (z >> np.uint64(27))) * _NB_M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True, inline="always")
def nb_draw64(key, counter):
    return nb_mix64(key + (np.uint64(counter) + _NB_ONE) * _NB_GOLDEN)


@numba.njit(cache=True, nogil=True, inline="always")
def nb_uniform(key, counter):
    z = nb_draw64(key, counter)
    return (float(z >> np.uint64(12)) + 0.5) * 2.220446049250313e-16


@numba.njit(cache=True, nogil=True, inline="always")
def nb_child_key(key, slot):
    return nb_mix64(nb_draw64(key, _NB_CHILD + np.uint64(slot)) ^ _NB_SALT)
