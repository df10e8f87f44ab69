"""Deterministic random number generation shared by every module.

The generator is counter-based: the i-th raw draw is ``mix64(seed + i*GAMMA)``
where ``mix64`` is the splitmix64 finalizer and GAMMA is the 64-bit golden
ratio constant.  Because each output depends only on (seed, counter), draws
vectorize cleanly and the stream is identical across platforms and runs;
scalar draws use exact Python integer arithmetic and match the vectorized
path bit for bit.  Gaussian values use the Box-Muller transform (cosine
branch), so every Gaussian consumes exactly two raw draws.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = 0xFFFFFFFFFFFFFFFF
# 2**-53, converts the top 53 bits of a raw draw to a double in [0, 1)
_INV53 = float(np.ldexp(1.0, -53))


def _mix64_int(z: int) -> int:
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    return z ^ (z >> 31)


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    return int(key) & _MASK


class Rng:
    """Seeded, reproducible generator with a documented draw discipline.

    Same seed, same call sequence => same values, forever.  Distinct streams
    (per run, per purpose) are obtained with :meth:`derive`, never by reusing
    a seed.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rng(seed={self.seed}, counter={self.counter})"

    def _raw1(self) -> int:
        self.counter += 1
        return _mix64_int((self.seed + self.counter * _GAMMA) & _MASK)

    def _raw(self, n: int) -> np.ndarray:
        """Next n raw 64-bit outputs as a uint64 array."""
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + idx * np.uint64(_GAMMA)
            z ^= z >> np.uint64(30)
            z *= np.uint64(_MIX1)
            z ^= z >> np.uint64(27)
            z *= np.uint64(_MIX2)
            z ^= z >> np.uint64(31)
        return z

    def u64(self, n: int | None = None):
        """Raw 64-bit unsigned draws; scalar when n is None."""
        if n is None:
            return self._raw1()
        return self._raw(n)

    def random(self, n: int | None = None):
        """Uniform doubles on [0, 1)."""
        if n is None:
            return (self._raw1() >> 11) * _INV53
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * _INV53

    def uniform(self, low: float, high: float, n: int | None = None):
        """Uniform doubles on [low, high)."""
        return low + (high - low) * self.random(n)

    def normal(self, n: int | None = None):
        """Standard Gaussians, two raw draws each: sqrt(-2 ln(1-u1))*cos(2*pi*u2)."""
        m = 1 if n is None else n
        u = self.random(2 * m)
        r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        out = r * np.cos(2.0 * np.pi * u[1::2])
        return float(out[0]) if n is None else out

    def integers(self, upper: int, n: int | None = None):
        """Uniform integers on [0, upper); floor(u * upper) on 53-bit uniforms."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        if n is None:
            return int(self.random() * upper)
        return (self.random(n) * upper).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        perm = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.integers(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def choice(self, items, n: int | None = None):
        """Index-based choice from a sequence, with replacement."""
        if n is None:
            return items[self.integers(len(items))]
        return [items[i] for i in self.integers(len(items), n)]

    def derive(self, *keys: int | str) -> "Rng":
        """Independent child generator keyed by integers and/or strings.

        Derivation consumes no draws from the parent stream, so deriving and
        drawing commute.
        """
        state = self.seed
        for key in keys:
            state = _mix64_int((state + _GAMMA) & _MASK) ^ _mix64_int(
                (_key_to_int(key) + _MIX1) & _MASK
            )
        return Rng(_mix64_int(state))
