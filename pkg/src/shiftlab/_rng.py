"""Counter-based deterministic RNG streams keyed by (master_seed, trial_index).

Every Monte Carlo trial owns an independent splitmix64 stream derived from the
master seed and its trial index alone, so results are reproducible bit for bit
under any sharding of the trial range across workers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03

# 2^-53; uniforms are ((z >> 11) + 1) * 2^-53, landing in (0, 1].
_U53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finalizer on python ints (mod 2^64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MULT1) & _MASK
    z = ((z ^ (z >> 27)) * _MULT2) & _MASK
    return z ^ (z >> 31)


def derive_stream(master_seed: int, trial_index: int) -> tuple[int, int]:
    """Initial (state, gamma) for one trial. gamma is forced odd."""
    gamma = mix64(trial_index + _GOLDEN) | 1
    state = mix64((master_seed & _MASK) ^ mix64(trial_index + _STREAM_SALT))
    return state, gamma


class StreamRng:
    """Scalar stream for non-vectorized sampling paths."""

    def __init__(self, master_seed: int, trial_index: int = 0):
        self.master_seed = master_seed & _MASK
        self.trial_index = trial_index
        self.state, self.gamma = derive_stream(master_seed, trial_index)

    def next_u64(self) -> int:
        self.state = (self.state + self.gamma) & _MASK
        return mix64(self.state)

    def uniform(self) -> float:
        # in (0, 1]
        return ((self.next_u64() >> 11) + 1) * _U53

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], rejection-free modulo bias < 2^-40 here."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        return lo + self.next_u64() % span


def vec_mix64(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MULT1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MULT2)
    z ^= z >> np.uint64(31)
    return z


def vec_derive_streams(master_seed: int, trial_indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vector (state, gamma) arrays; matches derive_stream per element."""
    idx = trial_indices.astype(np.uint64)
    gamma = vec_mix64(idx + np.uint64(_GOLDEN)) | np.uint64(1)
    state = vec_mix64(np.uint64(master_seed & _MASK) ^ vec_mix64(idx + np.uint64(_STREAM_SALT)))
    return state, gamma


def vec_next_uniform(state: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Advance state in place; return uniforms in (0, 1]."""
    state += gamma
    z = vec_mix64(state)
    return ((z >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53


def vec_next_uniform_at(state: np.ndarray, gamma: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Advance only the selected streams in place; return their uniforms."""
    state[idx] += gamma[idx]
    z = vec_mix64(state[idx])
    return ((z >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
