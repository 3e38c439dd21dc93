"""Deterministic random streams: xoshiro256++ seeded through splitmix64.

The whole sampling pipeline is pinned so that a seed reproduces a run:

* a 64-bit user seed is expanded into the 256-bit xoshiro state by four
  successive splitmix64 outputs;
* independent streams are derived from a master seed as
  ``splitmix64(seed + k)`` for stream ``k`` (addition modulo 2**64);
* uniforms are ``(next >> 11) * 2**-53``, i.e. 53-bit doubles in [0, 1);
* normals come from Box-Muller on consecutive draws ``(a, b)``:
  ``r = sqrt(-2 ln(1 - a))``, emitting ``r cos(2 pi b)`` then
  ``r sin(2 pi b)``.  An odd request drops the final sine variate.

:class:`RandomStream` is the scalar reference.  :class:`StreamBank`
advances many streams in lockstep with numpy and yields the same 64-bit
words stream by stream.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "xoshiro256++/splitmix64/box-muller"

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TO_UNIT = 2.0**-53


def splitmix64(state: int) -> int:
    """Output of one splitmix64 step taken from ``state``."""
    z = (state + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def expand_seed(seed: int) -> list[int]:
    """Four splitmix64 outputs used as the xoshiro256++ state."""
    state = seed & MASK64
    words = []
    for _ in range(4):
        words.append(splitmix64(state))
        state = (state + _GOLDEN) & MASK64
    return words


def derive_seed(seed: int, k: int) -> int:
    return splitmix64((seed + k) & MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def box_muller(words: np.ndarray) -> np.ndarray:
    """Map an even-length array of uint64 draws to standard normals."""
    words = np.asarray(words, dtype=np.uint64)
    u = (words >> np.uint64(11)).astype(np.float64) * _TO_UNIT
    a = u[..., 0::2]
    b = u[..., 1::2]
    radius = np.sqrt(-2.0 * np.log1p(-a))
    angle = 2.0 * np.pi * b
    out = np.empty(u.shape, dtype=np.float64)
    out[..., 0::2] = radius * np.cos(angle)
    out[..., 1::2] = radius * np.sin(angle)
    return out


class RandomStream:
    """Single-owner xoshiro256++ stream.  Not safe to share across threads."""

    algorithm = ALGORITHM

    def __init__(self, seed: int):
        if seed < 0 or seed > MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.position = 0
        self._s = expand_seed(seed)

    @classmethod
    def derived(cls, seed: int, k: int) -> "RandomStream":
        return cls(derive_seed(seed, k))

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[0] + s[3]) & MASK64, 23) + s[0]) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        self.position += 1
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * _TO_UNIT

    def words(self, n: int) -> np.ndarray:
        return np.fromiter((self.next_u64() for _ in range(n)), dtype=np.uint64, count=n)

    def normals(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        return box_muller(self.words(2 * pairs))[:n]


class StreamBank:
    """Lockstep xoshiro256++ over many streams held as numpy uint64 columns.

    Row ``k`` produces exactly the words of ``RandomStream(seeds[k])``.
    """

    def __init__(self, seeds):
        seeds = [int(s) for s in seeds]
        self.seeds = seeds
        state = np.array([expand_seed(s) for s in seeds], dtype=np.uint64)
        self._s = [state[:, i].copy() for i in range(4)]
        self.position = 0

    @classmethod
    def derived(cls, seed: int, n_streams: int) -> "StreamBank":
        return cls(derive_seed(seed, k) for k in range(n_streams))

    def __len__(self) -> int:
        return len(self.seeds)

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s
        with np.errstate(over="ignore"):
            x = s0 + s3
            result = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s0
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
        self.position += 1
        return result

    def words(self, n: int) -> np.ndarray:
        out = np.empty((len(self), n), dtype=np.uint64)
        for j in range(n):
            out[:, j] = self.next_u64()
        return out

    def normals(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        return box_muller(self.words(2 * pairs))[:, :n]
