"""Counter-based deterministic randomness.

Sample ``i`` of a stream is a pure function of ``(seed, i)``, so any chunking
or scheduling of the work reproduces the same draws bit for bit.  The mixer
is the splitmix64 finalizer; the scalar and the vectorised numpy paths use
identical arithmetic and are tested for equality.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_WORDK = 0xD1342543DE82EF95

DEFAULT_SEED = 0xC0FFEE


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def counter_u64(seed: int, index: int, word: int = 0) -> int:
    """64 mixed bits for draw ``index`` (word ``word``) of stream ``seed``."""
    return _mix((seed & _MASK) + _GOLDEN * (index + 1) + _WORDK * word)


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def counter_u64_np(seed: int, indices: np.ndarray, word: int = 0) -> np.ndarray:
    base = np.uint64(seed & _MASK) + np.uint64(_GOLDEN) * (
        indices.astype(np.uint64) + np.uint64(1)
    )
    return _mix_np(base + np.uint64((_WORDK * word) & _MASK))


def sign_matrix(seed: int, m: int, count: int, start: int = 0) -> np.ndarray:
    """(m, count) int8 matrix of +-1 signs for samples start..start+count-1."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    rows = []
    for word in range((m + 63) // 64):
        h = counter_u64_np(seed, idx, word)
        take = min(64, m - 64 * word)
        bits = (h[None, :] >> np.arange(take, dtype=np.uint64)[:, None]) & np.uint64(1)
        rows.append(bits)
    bits = np.concatenate(rows, axis=0)
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def sign_vector(seed: int, m: int, index: int) -> list[int]:
    """Scalar twin of :func:`sign_matrix` for a single sample."""
    out = []
    for word in range((m + 63) // 64):
        h = counter_u64(seed, index, word)
        take = min(64, m - 64 * word)
        out.extend(1 - 2 * ((h >> b) & 1) for b in range(take))
    return out


def uniform01(seed: int, index: int, word: int = 0) -> float:
    return counter_u64(seed, index, word) / float(1 << 64)


def derive_seed(seed: int, *tags: int) -> int:
    """A child seed for a named sub-stream (worker, experiment, ...)."""
    z = seed & _MASK
    for t in tags:
        z = _mix(z ^ ((t + 0x632BE59BD9B4E019) & _MASK))
    return z
