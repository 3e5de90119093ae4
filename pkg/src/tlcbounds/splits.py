"""Sampling test sets uniformly without replacement.

Public objects use 1-based sample indices.  The batch helpers at the bottom
work on 0-based numpy arrays and are what the Monte Carlo code calls.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .rng import RngState, bounded, stream_keys, words

DEFAULT_ENUM_CAP = 10**6


@dataclass(frozen=True)
class DrawVector:
    n: int
    entries: tuple[int, ...]

    def __post_init__(self):
        u = len(self.entries)
        if not 1 <= u <= self.n:
            raise InvalidArgumentError(f"draw vector length {u} must lie in [1, {self.n}]")
        for i, d in enumerate(self.entries, start=1):
            if not i <= d <= self.n:
                raise InvalidArgumentError(f"d_{i}={d} outside [{i}, {self.n}]")

    @property
    def u(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SplitPlan:
    n: int
    test_sequence: tuple[int, ...]
    test_set: frozenset = field(init=False)
    train_set: frozenset = field(init=False)

    def __post_init__(self):
        seq = tuple(int(z) for z in self.test_sequence)
        if len(set(seq)) != len(seq) or any(not 1 <= z <= self.n for z in seq):
            raise InvalidArgumentError("test sequence must hold distinct indices in [1, n]")
        object.__setattr__(self, "test_sequence", seq)
        object.__setattr__(self, "test_set", frozenset(seq))
        object.__setattr__(self, "train_set", frozenset(range(1, self.n + 1)) - frozenset(seq))

    @property
    def u(self) -> int:
        return len(self.test_sequence)

    @property
    def m(self) -> int:
        return self.n - self.u

    def test_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[[z - 1 for z in self.test_sequence]] = True
        return mask


def run_randperm(n: int, draws: Sequence[int]) -> tuple[int, ...]:
    """Test sequence produced by the swap procedure for fixed 1-based draws."""
    pool = list(range(1, n + 1))
    z = []
    for i, d in enumerate(draws):
        z.append(pool[d - 1])
        pool[i], pool[d - 1] = pool[d - 1], pool[i]
    return tuple(z)


def randperm_prefix(n: int, u: int, rng: RngState) -> tuple[DrawVector, SplitPlan]:
    """Draw d_i uniform on [i, n] for i = 1..u and return (d, induced split)."""
    if not 1 <= u <= n:
        raise InvalidArgumentError(f"need 1 <= u <= n, got u={u}, n={n}")
    d = tuple(rng.randint(i, n) for i in range(1, u + 1))
    return DrawVector(n, d), SplitPlan(n, run_randperm(n, d))


def split_from_draws(d: DrawVector) -> SplitPlan:
    return SplitPlan(d.n, run_randperm(d.n, d.entries))


def enumerate_splits(n: int, u: int, cap: int = DEFAULT_ENUM_CAP) -> Iterator[SplitPlan]:
    """Every u-subset of [1, n] once, in lexicographic order."""
    if not 1 <= u <= n:
        raise InvalidArgumentError(f"need 1 <= u <= n, got u={u}, n={n}")
    total = math.comb(n, u)
    if total > cap:
        raise ResourceLimitError(f"C({n},{u}) = {total} exceeds enumeration cap {cap}")
    for combo in itertools.combinations(range(1, n + 1), u):
        yield SplitPlan(n, combo)


def perturb_coordinate(d: DrawVector, i: int, replacement: int) -> DrawVector:
    """Copy of d with coordinate i (1-based) replaced."""
    if not 1 <= i <= d.u:
        raise InvalidArgumentError(f"coordinate {i} outside [1, {d.u}]")
    if not i <= replacement <= d.n:
        raise InvalidArgumentError(f"replacement {replacement} outside [{i}, {d.n}]")
    entries = list(d.entries)
    entries[i - 1] = replacement
    return DrawVector(d.n, tuple(entries))


# --- batch helpers (0-based) -------------------------------------------------


def batch_draws(n: int, u: int, seed: int, trials: np.ndarray, domain: str = "splits") -> np.ndarray:
    """(T, u) array of 1-based draws; row t reproduces ``RngState(seed, trials[t], domain)``."""
    keys = stream_keys(seed, domain, np.asarray(trials, dtype=np.uint64))
    counters = np.arange(u, dtype=np.uint64)
    w = words(keys[:, None], counters[None, :])
    lo = np.arange(1, u + 1, dtype=np.int64)
    return bounded(w, lo[None, :], n)


def batch_test_sequences(n: int, draws: np.ndarray) -> np.ndarray:
    """Run the swap procedure on every row of a (T, u) draw array; 0-based output."""
    draws = np.asarray(draws, dtype=np.int64)
    t, u = draws.shape
    pool = np.tile(np.arange(n, dtype=np.int64), (t, 1))
    rows = np.arange(t)
    z = np.empty((t, u), dtype=np.int64)
    for i in range(u):
        idx = draws[:, i] - 1
        picked = pool[rows, idx]
        z[:, i] = picked
        pool[rows, idx] = pool[rows, i]
        pool[rows, i] = picked
    return z


def masks_from_sequences(n: int, z: np.ndarray) -> np.ndarray:
    mask = np.zeros((z.shape[0], n), dtype=bool)
    mask[np.arange(z.shape[0])[:, None], z] = True
    return mask


def sampled_masks(n: int, u: int, seed: int, start: int, count: int, domain: str = "splits") -> np.ndarray:
    """Boolean (count, n) test masks for trials start..start+count-1."""
    trials = np.arange(start, start + count, dtype=np.uint64)
    return masks_from_sequences(n, batch_test_sequences(n, batch_draws(n, u, seed, trials, domain)))


def all_masks(n: int, u: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Boolean (C(n,u), n) masks of every u-subset, lexicographic order."""
    if not 1 <= u <= n:
        raise InvalidArgumentError(f"need 1 <= u <= n, got u={u}, n={n}")
    total = math.comb(n, u)
    if total > cap:
        raise ResourceLimitError(f"C({n},{u}) = {total} exceeds enumeration cap {cap}")
    combos = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), u)), dtype=np.int64, count=total * u
    ).reshape(total, u)
    return masks_from_sequences(n, combos)


def format_indices(indices) -> str:
    return ";".join(str(int(i)) for i in sorted(indices))


def parse_indices(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(tok) for tok in text.split(";")) if text else ()
