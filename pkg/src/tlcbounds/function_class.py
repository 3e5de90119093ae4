"""Finite function classes tabulated on the full sample.

A class of M functions over n points is an (M, n) array.  Loss tables carry
the extra structure needed for the excess-risk analysis: the full-sample
minimiser ``star_index`` and the difference classes built from it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InvalidArgumentError, NotRepresentableError

ROOT8 = 2.0 * math.sqrt(2.0)
ROW_TOL = 1e-12


def h0_floor(raw_max: float) -> float:
    """Range bound max(2*sqrt(2), raw_max)."""
    if raw_max < 0:
        raise InvalidArgumentError("raw_max must be nonnegative")
    return max(ROOT8, float(raw_max))


def _row(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.size == 0:
        raise InvalidArgumentError("expected a nonempty value row")
    return h


def average_loss(h) -> float:
    h = _row(h)
    return math.fsum(h) / h.size


def variance_operator(h) -> float:
    h = _row(h)
    return math.fsum(h * h) / h.size


def row_means(values: np.ndarray) -> np.ndarray:
    # numpy reduces contiguous rows with pairwise summation
    return np.ascontiguousarray(values, dtype=np.float64).sum(axis=1) / values.shape[1]


@dataclass(frozen=True)
class FunctionTable:
    values: np.ndarray
    range_bound: float
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidArgumentError("function table must be a nonempty M x n grid")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("function table holds non-finite values")
        if self.range_bound < ROOT8 - 1e-15:
            raise InvalidArgumentError(f"range bound {self.range_bound} below 2*sqrt(2)")
        if np.max(np.abs(v)) > self.range_bound * (1 + 1e-12):
            raise InvalidArgumentError("a tabulated value exceeds the range bound")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "range_bound", float(self.range_bound))

    @classmethod
    def from_rows(cls, rows, range_bound: float | None = None, names=None) -> "FunctionTable":
        v = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        floor = h0_floor(float(np.max(np.abs(v)))) if v.size else ROOT8
        bound = floor if range_bound is None else max(floor, float(range_bound))
        return cls(v, bound, tuple(names) if names is not None else None)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def M(self) -> int:
        return self.values.shape[0]

    def subset(self, keep) -> "FunctionTable":
        keep = np.asarray(keep)
        names = None if self.names is None else tuple(np.asarray(self.names, dtype=object)[keep])
        return FunctionTable(self.values[keep], self.range_bound, names)

    def negated(self) -> "FunctionTable":
        return FunctionTable(-self.values, self.range_bound, self.names)


def fourth_moment_proxy(table: FunctionTable) -> float:
    """sup over the class of T_n(h^2) = (1/n) sum h(i)^4."""
    return max(math.fsum(row**4) / table.n for row in table.values)


def squared_class(table: FunctionTable) -> FunctionTable:
    return FunctionTable(table.values**2, max(ROOT8, table.range_bound**2), table.names)


@dataclass(frozen=True)
class LossTable:
    loss: np.ndarray
    range_bound: float
    star_index: int = field(init=False)
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        loss = np.array(self.loss, dtype=np.float64)
        if loss.ndim != 2 or loss.shape[0] < 1 or loss.shape[1] < 1:
            raise InvalidArgumentError("loss table must be a nonempty F x n grid")
        if np.any(loss < 0) or not np.all(np.isfinite(loss)):
            raise InvalidArgumentError("losses must be finite and nonnegative")
        if self.range_bound < ROOT8 - 1e-15:
            raise InvalidArgumentError(f"loss bound {self.range_bound} below 2*sqrt(2)")
        if np.max(loss) > self.range_bound * (1 + 1e-12):
            raise InvalidArgumentError("a loss exceeds the loss bound")
        loss.setflags(write=False)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "range_bound", float(self.range_bound))
        means = np.array([average_loss(row) for row in loss])
        object.__setattr__(self, "star_index", int(np.argmin(means)))

    @classmethod
    def from_rows(cls, rows, range_bound: float | None = None, names=None) -> "LossTable":
        v = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        floor = h0_floor(float(np.max(v)) if v.size else 0.0)
        bound = floor if range_bound is None else max(floor, float(range_bound))
        return cls(v, bound, tuple(names) if names is not None else None)

    @property
    def n(self) -> int:
        return self.loss.shape[1]

    @property
    def F(self) -> int:
        return self.loss.shape[0]

    def mean_losses(self) -> np.ndarray:
        return np.array([average_loss(row) for row in self.loss])

    def excess_rows(self) -> np.ndarray:
        """Rows of the class {l_f - l_{f*}}, one per candidate."""
        return self.loss - self.loss[self.star_index]


@dataclass(frozen=True)
class DifferencePair:
    f1: int
    f2: int
    row: np.ndarray

    @classmethod
    def of(cls, losses: LossTable, f1: int, f2: int) -> "DifferencePair":
        return cls(f1, f2, losses.loss[f1] - losses.loss[f2])


def surrogate_variance(target, losses: LossTable, B: float) -> float:
    """Infimum of 2B(L_n(l_f1 - l_*) + L_n(l_f2 - l_*)) over pairs with l_f1 - l_f2 = target."""
    if B < 0:
        raise InvalidArgumentError("B must be nonnegative")
    target = _row(target)
    if target.size != losses.n:
        raise InvalidArgumentError("target row length differs from the loss table")
    excess = losses.mean_losses() - average_loss(losses.loss[losses.star_index])
    best = math.inf
    for f1 in range(losses.F):
        diff = losses.loss[f1][None, :] - losses.loss
        hit = np.all(np.abs(diff - target[None, :]) <= ROW_TOL, axis=1)
        if np.any(hit):
            best = min(best, 2 * B * (excess[f1] + float(np.min(excess[hit]))))
    if math.isinf(best):
        raise NotRepresentableError("row is not a difference of two tabulated losses")
    return best


def estimate_B(losses: LossTable) -> float:
    """Smallest B with T_n(h) <= B L_n(h) for every h in the excess class (inf if none)."""
    best = 0.0
    for row in losses.excess_rows():
        if np.all(np.abs(row) <= ROW_TOL):
            continue
        t, l = variance_operator(row), average_loss(row)
        if l <= 0.0:
            if t > 0.0:
                return math.inf
            continue
        best = max(best, t / l)
    return best


def difference_class(losses: LossTable, B: float) -> tuple[FunctionTable, np.ndarray, list[tuple[int, int]]]:
    """Distinct rows of {l_f1 - l_f2} with their surrogate variances.

    Returns the table (range bound max(2*sqrt(2), L0)), the per-row surrogate
    variance and one representing pair per row.
    """
    excess = losses.mean_losses() - average_loss(losses.loss[losses.star_index])
    rows, costs, pairs = [], [], []
    seen: dict[bytes, int] = {}
    for f1 in range(losses.F):
        for f2 in range(losses.F):
            row = losses.loss[f1] - losses.loss[f2]
            key = (np.round(row, 12) + 0.0).tobytes()
            cost = 2 * B * (excess[f1] + excess[f2])
            j = seen.get(key)
            if j is None:
                seen[key] = len(rows)
                rows.append(row)
                costs.append(cost)
                pairs.append((f1, f2))
            elif cost < costs[j]:
                costs[j] = cost
                pairs[j] = (f1, f2)
    table = FunctionTable(np.array(rows), h0_floor(losses.range_bound))
    return table, np.array(costs), pairs


def star_class(losses: LossTable, B: float) -> tuple[FunctionTable, np.ndarray]:
    """The excess class {l_f - l_*} with localisation values B * L_n(h)."""
    rows = losses.excess_rows()
    loc = np.array([B * average_loss(r) for r in rows])
    return FunctionTable(rows, h0_floor(losses.range_bound)), loc


def _read_rows(path, bound_key: str):
    """Parse a table file into (names, rows, declared bound)."""
    names, rows, declared = [], [], None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip().replace(" ", "")
                if body.upper().startswith(bound_key + "="):
                    try:
                        declared = float(body.split("=", 1)[1])
                    except ValueError:
                        raise InputError(f"{path}:{lineno}: bad {bound_key} value {body!r}") from None
                continue
            cells = [c.strip() for c in next(csv.reader([text]))]
            name = None
            try:
                float(cells[0])
            except ValueError:
                name, cells = cells[0], cells[1:]
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric value in {text!r}") from None
            if not vals:
                raise InputError(f"{path}:{lineno}: row has no values")
            if rows and len(vals) != len(rows[0]):
                raise InputError(f"{path}:{lineno}: expected {len(rows[0])} values, found {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise InputError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
            names.append(name)
    if not rows:
        raise InputError(f"{path}: no data rows")
    named = tuple(nm if nm is not None else f"f{j + 1}" for j, nm in enumerate(names)) if any(names) else None
    return named, np.array(rows), declared


def load_function_table(path) -> FunctionTable:
    """One function per line, optional leading name; ``# H0=<v>`` may only raise the bound."""
    names, rows, declared = _read_rows(path, "H0")
    return FunctionTable.from_rows(rows, declared, names)


def load_loss_table(path) -> LossTable:
    """One candidate per line, optional leading name; ``# L0=<v>`` may only raise the bound."""
    names, rows, declared = _read_rows(path, "L0")
    try:
        return LossTable.from_rows(rows, declared, names)
    except InvalidArgumentError as exc:
        raise InputError(f"{path}: {exc}") from exc
