"""Counter-based 64-bit random streams.

Every random word is a pure function of ``(seed, domain, stream, counter)``,
computed with the SplitMix64 finaliser.  A trial ``t`` of any Monte Carlo
experiment reads from stream ``t``, so a batch of trials can be generated
in one vectorised call, split across workers, or replayed one at a time
with :class:`RngState` and always yields the same numbers.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def domain_tag(name: str) -> int:
    """Stable 64-bit tag for a named purpose ("splits", "sigma", ...)."""
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")


def stream_key(seed: int, domain: str | int, stream: int) -> int:
    tag = domain_tag(domain) if isinstance(domain, str) else int(domain) & MASK64
    return _mix(_mix(_mix(seed & MASK64) ^ tag) ^ (stream & MASK64))


def stream_keys(seed: int, domain: str | int, streams: np.ndarray) -> np.ndarray:
    tag = domain_tag(domain) if isinstance(domain, str) else int(domain) & MASK64
    base = np.uint64(_mix(_mix(seed & MASK64) ^ tag))
    return _mix_array(base ^ np.asarray(streams, dtype=np.uint64))


def words(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Random 64-bit words for every (key, counter) pair, broadcast."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix_array(keys ^ (counters * np.uint64(GOLDEN)))


def to_unit(w: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles in [0, 1) using the top 53 bits."""
    return (np.asarray(w, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def bounded(w: np.ndarray, lo, hi) -> np.ndarray:
    """Integers uniform on [lo, hi] (inclusive, broadcast); bias below 2^-40."""
    lo = np.asarray(lo, dtype=np.int64)
    span = np.asarray(hi, dtype=np.int64) - lo + 1
    return lo + np.floor(to_unit(w) * span).astype(np.int64)


class RngState:
    """Sequential view of one substream.

    Not safe to share between workers; derive one per trial instead with
    ``RngState(seed, stream=t)``.
    """

    def __init__(self, seed: int, stream: int = 0, domain: str | int = "splits"):
        if seed < 0 or seed > MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream = int(stream)
        self.domain = domain
        self._key = stream_key(self.seed, domain, self.stream)
        self.counter = 0

    def next_u64(self) -> int:
        c = self.counter
        self.counter += 1
        return _mix(self._key ^ ((c * GOLDEN) & MASK64))

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer on the closed interval [lo, hi]."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + int(self.random() * (hi - lo + 1))

    def spawn(self, stream: int, domain: str | int | None = None) -> "RngState":
        return RngState(self.seed, stream, self.domain if domain is None else domain)

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, stream={self.stream}, domain={self.domain!r}, counter={self.counter})"
