"""Exact and Monte Carlo estimates of transductive and inductive complexities.

Monte Carlo trials are processed in fixed-size chunks.  Trial ``t`` always
uses random stream ``t``, and per-trial values are concatenated in trial order
before averaging, so the result does not depend on the worker count.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .empirical_process import objective_matrix
from .errors import InvalidArgumentError, ResourceLimitError
from .function_class import FunctionTable
from .rng import RngState, bounded, stream_keys, words
from .splits import DEFAULT_ENUM_CAP, all_masks, sampled_masks
from .subroot import SubRootFn

CHUNK = 8192
KIND_MAP = {"u+": "u_plus", "u-": "u_minus", "m+": "m_plus", "m-": "m_minus"}


@dataclass(frozen=True)
class ComplexityEstimate:
    mean: float
    stderr: float
    trials: int
    mode: str


@dataclass(frozen=True)
class LocalizedCurve:
    radii: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        stderr = np.asarray(self.stderr, dtype=np.float64)
        if radii.shape != values.shape or radii.shape != stderr.shape or radii.ndim != 1:
            raise InvalidArgumentError("radii, values and stderr must be equal-length vectors")
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise InvalidArgumentError("radii must be positive and strictly ascending")
        if np.any(values < 0):
            raise InvalidArgumentError("curve values must be nonnegative")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "stderr", stderr)

    def rows(self):
        return [(float(r), float(v), float(s)) for r, v, s in zip(self.radii, self.values, self.stderr)]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "psi_hat", "stderr"])
            for r, v, s in self.rows():
                w.writerow([repr(r), repr(v), repr(s)])


def _seed_of(rng) -> int:
    return rng.seed if isinstance(rng, RngState) else int(rng)


def _summarize(samples: np.ndarray, mode: str) -> ComplexityEstimate:
    t = samples.shape[0]
    mean = float(np.mean(samples))
    if mode == "exact" or t < 2:
        return ComplexityEstimate(mean, 0.0, t, mode)
    return ComplexityEstimate(mean, float(np.std(samples, ddof=1) / math.sqrt(t)), t, mode)


def map_trials(fn: Callable[[int, int], np.ndarray], trials: int, workers: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Apply fn(start, count) over consecutive trial chunks and stack results in trial order."""
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    spans = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]
    if workers <= 1 or len(spans) == 1:
        parts = [fn(s, c) for s, c in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sc: fn(*sc), spans))
    return np.concatenate(parts, axis=0)


def split_statistics(
    fn: Callable[[np.ndarray], np.ndarray],
    n: int,
    u: int,
    trials: int | None,
    rng=0,
    cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
    domain: str = "splits",
) -> tuple[np.ndarray, str]:
    """Per-split statistics fn(masks) over every split (trials=None) or sampled splits."""
    if trials is None:
        masks = all_masks(n, u, cap)
        return fn(masks), "exact"
    seed = _seed_of(rng)
    return map_trials(lambda s, c: fn(sampled_masks(n, u, seed, s, c, domain)), trials, workers), "monte_carlo"


def transductive_complexity(
    kind: str,
    table: FunctionTable,
    u: int,
    trials: int | None = None,
    rng=0,
    cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
) -> ComplexityEstimate:
    """Expected supremum of a signed subset-mean deviation.

    ``kind`` is one of ``u+``, ``u-``, ``m+``, ``m-``.  With ``trials=None``
    the expectation is taken exactly over all C(n, u) test sets.
    """
    if kind not in KIND_MAP:
        raise InvalidArgumentError(f"kind must be one of {sorted(KIND_MAP)}, got {kind!r}")
    n = table.n
    if not 1 <= u <= n - 1:
        raise InvalidArgumentError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    pk = KIND_MAP[kind]
    samples, mode = split_statistics(
        lambda masks: objective_matrix(pk, table.values, masks).max(axis=1), n, u, trials, rng, cap, workers
    )
    return _summarize(samples, mode)


def expected_gap(table: FunctionTable, u: int, trials: int | None = None, rng=0, cap=DEFAULT_ENUM_CAP, workers=1, domain="splits") -> ComplexityEstimate:
    """E[g(d)], exactly or by Monte Carlo."""
    n = table.n
    if not 1 <= u <= n - 1:
        raise InvalidArgumentError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    samples, mode = split_statistics(
        lambda masks: objective_matrix("gap", table.values, masks).max(axis=1), n, u, trials, rng, cap, workers, domain
    )
    return _summarize(samples, mode)


def _inductive_sup(values: np.ndarray, picks: np.ndarray, signs: np.ndarray) -> np.ndarray:
    # values (M, n); picks, signs (T, k) -> (T,) sup over functions of the signed mean
    k = picks.shape[1]
    sums = np.einsum("mtk,tk->tm", values[:, picks], signs) / k
    return sums.max(axis=1)


def inductive_rademacher(
    table: FunctionTable, k: int, trials: int | None = None, rng=0, cap: int = DEFAULT_ENUM_CAP, workers: int = 1
) -> ComplexityEstimate:
    """E sup_h (1/k) sum_i sigma_i h(Y_i) with Y_i drawn uniformly with replacement."""
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    n = table.n
    values = table.values
    if trials is None:
        total = n**k * 2**k
        if total > cap:
            raise ResourceLimitError(f"n^k * 2^k = {total} exceeds enumeration cap {cap}")
        picks = np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64).reshape(-1, k)
        sign_rows = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
        parts = []
        for s in sign_rows:
            parts.append(_inductive_sup(values, picks, np.broadcast_to(s, picks.shape)))
        return _summarize(np.concatenate(parts), "exact")
    seed = _seed_of(rng)

    def chunk(start, count):
        keys = stream_keys(seed, "inductive", np.arange(start, start + count, dtype=np.uint64))
        w = words(keys[:, None], np.arange(2 * k, dtype=np.uint64)[None, :])
        picks = bounded(w[:, :k], 0, n - 1)
        signs = np.where(w[:, k:] >> np.uint64(63), 1.0, -1.0)
        return _inductive_sup(values, picks, signs)

    return _summarize(map_trials(chunk, trials, workers), "monte_carlo")


def _filtered_sup(obj: np.ndarray, keep: np.ndarray) -> np.ndarray:
    if not np.any(keep):
        return np.zeros(obj.shape[0])
    return obj[:, keep].max(axis=1)


def curve_terms(side: str, u: int, n: int) -> list[tuple[str, bool]]:
    """(process kind, use squared class) pairs whose expectations a curve maximises."""
    if side == "u":
        return [("u_plus", False), ("u_plus", True)]
    if side == "m":
        return [("m_minus", False), ("m_plus", True)]
    if side == "joint":
        sq = "u_plus" if u <= n - u else "m_plus"
        return [("u_minus", False), ("m_minus", False), (sq, True)]
    raise InvalidArgumentError(f"side must be 'u', 'm' or 'joint', got {side!r}")


def localized_curve(
    table: FunctionTable,
    tilde_T,
    side: str,
    u: int,
    radii,
    trials: int | None = None,
    rng=0,
    include_squares: bool = True,
    cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
) -> LocalizedCurve:
    """Localized complexity curve over the sub-classes {h : tilde_T(h) <= r}.

    Side ``u`` maximises the test-side deviation of h and of h^2; side ``m``
    the negated train-side deviation of h and the train-side deviation of h^2;
    side ``joint`` the two negated deviations of h and the smaller-side
    deviation of h^2.  Every radius reuses the same splits.
    """
    tilde_T = np.asarray(tilde_T, dtype=np.float64)
    if tilde_T.shape != (table.M,):
        raise InvalidArgumentError("tilde_T needs one value per function")
    radii = np.asarray(radii, dtype=np.float64)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise InvalidArgumentError("radii must be positive and strictly ascending")
    n = table.n
    if not 1 <= u <= n - 1:
        raise InvalidArgumentError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    terms = [t for t in curve_terms(side, u, n) if include_squares or not t[1]]
    squares = table.values**2
    keeps = [tilde_T <= r for r in radii]

    def stats(masks):
        objs = [objective_matrix(kind, squares if sq else table.values, masks) for kind, sq in terms]
        out = np.empty((masks.shape[0], len(radii), len(terms)))
        for j, keep in enumerate(keeps):
            for t, obj in enumerate(objs):
                out[:, j, t] = _filtered_sup(obj, keep)
        return out

    samples, mode = split_statistics(stats, n, u, trials, rng, cap, workers)
    means = samples.mean(axis=0)
    if mode == "exact" or samples.shape[0] < 2:
        errs = np.zeros_like(means)
    else:
        errs = samples.std(axis=0, ddof=1) / math.sqrt(samples.shape[0])
    pick = np.argmax(means, axis=1)
    rows = np.arange(len(radii))
    values = np.maximum(means[rows, pick], 0.0)
    return LocalizedCurve(radii, values, errs[rows, pick])


def subroot_envelope(curve: LocalizedCurve) -> SubRootFn:
    """Smallest function of the form max_j v_j * min(1, sqrt(r / r_j)) through the curve points."""
    radii = np.asarray(curve.radii, dtype=np.float64)
    values = np.asarray(curve.values, dtype=np.float64)
    if np.any(values < 0):
        raise InvalidArgumentError("curve values must be nonnegative")
    pts = [(float(r), float(v)) for r, v in zip(radii, values) if v > 0]
    if not pts:
        return SubRootFn(lambda r: 0.0, "zero")

    def psi(r):
        r = max(float(r), 0.0)
        return max(v if r >= rj else v * math.sqrt(r / rj) for rj, v in pts)

    return SubRootFn(psi, f"envelope of {len(pts)} points")
