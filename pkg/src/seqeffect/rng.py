"""Counter-based SplitMix64 generator with Box-Muller normals.

The generator is fully specified (no dependence on numpy's bit generators) so
that seeded fuzz runs can be reproduced by any implementation that follows the
same recipe:

* ``next_u64``: ``state += 0x9E3779B97F4A7C15`` then the SplitMix64 finalizer.
* ``uniform``: top 53 bits of ``next_u64`` scaled by ``2**-53``, in ``[0, 1)``.
* ``normal``: Box-Muller on consecutive uniform pairs ``(u1, u2)`` producing
  ``sqrt(-2 ln(1 - u1)) * (cos(2 pi u2), sin(2 pi u2))``.
* ``complex_normal``: real parts then imaginary parts, each ``N(0, 1/2)``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_GAMMA = np.uint64(GOLDEN_GAMMA)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


_S27, _S30, _S31 = np.uint64(27), np.uint64(30), np.uint64(31)


def _finalize(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64 without warnings
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def mix64(value: int) -> int:
    """SplitMix64 finalizer applied to a single integer."""
    return int(_finalize(np.array([value & MASK64], dtype=np.uint64))[0])


class SplitMix64:
    """Seeded generator; state is explicit and owned by the caller."""

    def __init__(self, seed: int = 0):
        if seed < 0 or seed > MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.state = int(seed)

    def __repr__(self):
        return f"SplitMix64(state={self.state:#018x})"

    def spawn(self, index: int) -> "SplitMix64":
        """Independent child stream keyed by ``index``; does not advance self."""
        return SplitMix64(mix64(self.state ^ mix64(index + 0x632BE59BD9B4E019)))

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        counters = np.full(n, self.state, dtype=np.uint64) + steps * _GAMMA
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        return _finalize(counters)

    def uniform(self, n: int) -> np.ndarray:
        bits = self.next_u64(n) >> np.uint64(11)
        return bits.astype(np.float64) * (1.0 / (1 << 53))

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def complex_normal(self, shape) -> np.ndarray:
        shape = tuple(np.atleast_1d(shape))
        size = int(np.prod(shape))
        z = self.normal(2 * size) * np.sqrt(0.5)
        return (z[:size] + 1j * z[size:]).reshape(shape)


def as_rng(seed) -> SplitMix64:
    """Accept an int seed or an existing generator."""
    if isinstance(seed, SplitMix64):
        return seed
    return SplitMix64(int(seed))
