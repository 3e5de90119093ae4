"""Sub-root functions and their positive fixed points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, NotSubRootError

DEFAULT_TOL = 1e-10
GRID_POINTS = 64
_SLACK = 1e-12


class SubRootFn:
    """A callable r -> psi(r) for r > 0 that is expected to be sub-root.

    The property is not proved on construction; :func:`check_subroot` spot
    checks it on a grid and :func:`fixed_point` always runs that check.
    """

    def __init__(self, rule: Callable[[float], float], label: str = "psi"):
        self.rule = rule
        self.label = label

    def __call__(self, r: float) -> float:
        return float(self.rule(r))

    def __repr__(self) -> str:
        return f"SubRootFn({self.label})"


@dataclass(frozen=True)
class FixedPoint:
    r_star: float
    residual: float
    iterations: int


def power_subroot(a: float, b: float) -> SubRootFn:
    """psi(r) = a * sqrt(r) + b."""
    if a < 0 or b < 0:
        raise InvalidArgumentError("power_subroot needs a, b >= 0")
    a, b = float(a), float(b)
    return SubRootFn(lambda r: a * math.sqrt(max(r, 0.0)) + b, f"{a!r}*sqrt(r)+{b!r}")


def check_subroot(psi: SubRootFn, radii) -> np.ndarray:
    """Evaluate psi on ascending radii and raise NotSubRootError on a violation."""
    radii = np.asarray(radii, dtype=np.float64)
    vals = np.array([psi(r) for r in radii])
    if not np.all(np.isfinite(vals)):
        raise NotSubRootError("psi returned a non-finite value")
    if np.any(vals < 0):
        raise NotSubRootError(f"psi is negative at r={radii[np.argmin(vals)]:.6g}")
    scale = np.maximum(np.abs(vals[1:]), np.abs(vals[:-1])) * 1e-9 + _SLACK
    if np.any(vals[1:] < vals[:-1] - scale):
        j = int(np.argmax(vals[:-1] - vals[1:]))
        raise NotSubRootError(f"psi decreases between r={radii[j]:.6g} and r={radii[j + 1]:.6g}")
    ratio = vals / np.sqrt(radii)
    rscale = np.maximum(ratio[1:], ratio[:-1]) * 1e-9 + _SLACK
    if np.any(ratio[1:] > ratio[:-1] + rscale):
        j = int(np.argmax(ratio[1:] - ratio[:-1]))
        raise NotSubRootError(f"psi(r)/sqrt(r) increases between r={radii[j]:.6g} and r={radii[j + 1]:.6g}")
    return vals


def fixed_point(psi: SubRootFn, tol: float = DEFAULT_TOL) -> FixedPoint:
    """Unique positive solution of psi(r) = r by bisection.

    The bracket is [tol, 2 * max(1, psi(1)^2)]; the upper end always satisfies
    psi(hi) <= hi for a sub-root psi.  If psi vanishes on the validation grid
    the fixed point is 0.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    hi = 2.0 * max(1.0, psi(1.0) ** 2)
    grid = np.geomspace(tol, hi, GRID_POINTS)
    vals = check_subroot(psi, grid)
    if np.all(vals == 0):
        return FixedPoint(0.0, 0.0, 0)
    if psi(hi) > hi:
        raise NotSubRootError(f"psi({hi:.6g}) exceeds its argument; no sub-root bracket")
    lo = tol if psi(tol) >= tol else 0.0
    it = 0
    while hi - lo > tol and it < 400:
        mid = 0.5 * (lo + hi)
        if psi(mid) >= mid:
            lo = mid
        else:
            hi = mid
        it += 1
    r = 0.5 * (lo + hi)
    return FixedPoint(r, abs(psi(r) - r), it)
