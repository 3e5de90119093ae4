"""Closed-form deviation and excess-risk bounds with explicit constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import InvalidArgumentError, InvalidClassError
from .function_class import ROOT8, FunctionTable, average_loss

CONSTANT_KEYS = ("c0", "c1", "c2", "c3", "c5", "hat_c2", "theta")


@dataclass(frozen=True)
class BoundInputs:
    """Scalars shared by the bound formulas.

    ``square_complexity`` is the positive-side complexity of the squared class
    on the smaller of the two sides; ``expected_gap`` is E[g].
    """

    u: int
    m: int
    x: float
    r: float = 0.0
    range_bound: float = ROOT8
    K_peel: float = 2.0
    B: float = 0.0
    expected_gap: float = 0.0
    square_complexity: float = 0.0
    r_u: float = 0.0
    r_m: float = 0.0
    r_star: float = 0.0

    def __post_init__(self):
        if self.u < 1 or self.m < 1:
            raise InvalidArgumentError("u and m must be at least 1")
        if not self.x > 0:
            raise InvalidArgumentError(f"x must be positive, got {self.x}")
        if not self.K_peel > 1:
            raise InvalidArgumentError(f"peeling constant K must exceed 1, got {self.K_peel}")
        for name in ("r", "B", "expected_gap", "square_complexity", "r_u", "r_m", "r_star"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} must be nonnegative")
        if self.range_bound < ROOT8 - 1e-15:
            raise InvalidArgumentError("range bound must be at least 2*sqrt(2)")

    @property
    def n(self) -> int:
        return self.u + self.m

    @property
    def smaller_side(self) -> int:
        return min(self.u, self.m)

    def with_x(self, x: float) -> "BoundInputs":
        return replace(self, x=x)


@dataclass(frozen=True)
class ConstantSet:
    c0: float
    c1: float
    c2: float | None = None
    c3: float | None = None
    c5: float = 1.0
    hat_c2: float | None = None
    theta: float = 1.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in CONSTANT_KEYS:
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidArgumentError(f"constant {name} must be positive, got {v}")


def optimal_alpha_term(A: float, B_coef: float) -> float:
    """inf over alpha > 0 of A / alpha + B_coef * alpha, which is 2 sqrt(A B_coef)."""
    if A < 0 or B_coef < 0:
        raise InvalidArgumentError("optimal_alpha_term needs nonnegative coefficients")
    return 2.0 * math.sqrt(A * B_coef)


def concentration_deviation(inp: BoundInputs) -> float:
    """High-probability upper bound on the test-train process g(d)."""
    s = inp.smaller_side
    x = inp.x
    return (
        inp.expected_gap
        + 8.0 * math.sqrt(3.0 * inp.r * x / s)
        + optimal_alpha_term(4.0 * inp.square_complexity, 4.0 * x / s)
        + 8.0 * inp.range_bound**2 * x / s
    )


def tlc_constants(K_peel: float, range_bound: float) -> ConstantSet:
    if not K_peel > 1:
        raise InvalidArgumentError(f"peeling constant K must exceed 1, got {K_peel}")
    if range_bound < ROOT8 - 1e-15:
        raise InvalidArgumentError("range bound must be at least 2*sqrt(2)")
    c0 = 24.0 * K_peel * 128.0**2 / 49.0
    c1 = 24.0 * K_peel * 192.0 + 16.0 * range_bound**2 + 8.0
    return ConstantSet(c0, c1, provenance={"c0": "formula", "c1": "formula"})


def constant_set(K_peel: float, range_bound: float, B: float | None = None, overrides: dict | None = None) -> ConstantSet:
    """Full constant set, with ``overrides`` (keys as in CONSTANT_KEYS) taking precedence.

    hat_c2 defaults to max(c0, c1).  c2 and c3 need B < K; they stay None
    when B is not given.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(CONSTANT_KEYS)
    if unknown:
        raise InvalidArgumentError(f"unknown constant keys: {sorted(unknown)}")
    base = tlc_constants(K_peel, range_bound)
    prov = dict(base.provenance)
    vals = {"c0": base.c0, "c1": base.c1, "c5": 1.0, "theta": 1.0}
    prov.update(c5="configured", theta="configured")
    for key in ("c0", "c1", "c5", "theta"):
        if key in overrides:
            vals[key] = float(overrides[key])
            prov[key] = "configured"
    hat_c2 = float(overrides.get("hat_c2", max(vals["c0"], vals["c1"])))
    prov["hat_c2"] = "configured"
    c2 = c3 = None
    if B is not None:
        if "c2" in overrides:
            c2 = float(overrides["c2"])
            prov["c2"] = "configured"
        else:
            if not K_peel > B:
                raise InvalidArgumentError(f"peeling constant K={K_peel} must exceed B={B}")
            c2 = hat_c2 / (1.0 - B / K_peel)
            prov["c2"] = "formula"
        if "c3" in overrides:
            c3 = float(overrides["c3"])
            prov["c3"] = "configured"
        else:
            c3 = vals["c1"] + 4.0 * B * c2 / K_peel
            prov["c3"] = "formula"
    return ConstantSet(vals["c0"], vals["c1"], c2, c3, vals["c5"], hat_c2, vals["theta"], prov)


def tlc_uniform_bound(train_loss: float, tilde_T: float, inp: BoundInputs, constants: ConstantSet) -> float:
    """Uniform bound on the test loss of one function from its train loss and surrogate variance."""
    if tilde_T < 0:
        raise InvalidArgumentError("tilde_T must be nonnegative")
    return (
        train_loss
        + tilde_T / inp.K_peel
        + constants.c0 * (inp.r_u + inp.r_m)
        + constants.c1 * inp.x / inp.smaller_side
    )


def excess_risk_bound(inp: BoundInputs, constants: ConstantSet | None = None) -> float:
    """Excess-risk bound of the training-set minimiser."""
    if not inp.K_peel > inp.B:
        raise InvalidArgumentError(f"peeling constant K={inp.K_peel} must exceed B={inp.B}")
    if constants is None or constants.c2 is None:
        overrides = {} if constants is None else {
            k: getattr(constants, k) for k in ("c0", "c1", "c5", "hat_c2", "theta") if getattr(constants, k) is not None
        }
        constants = constant_set(inp.K_peel, inp.range_bound, inp.B, overrides)
    return (
        constants.c0 * (inp.r_u + inp.r_m)
        + 4.0 * inp.B * constants.c2 * inp.r_star / inp.K_peel
        + constants.c3 * inp.x / inp.smaller_side
    )


def general_sup_bound(inp: BoundInputs, table: FunctionTable | None = None) -> float:
    """Deviation bound for sup_h (test mean of h) over a class with zero full-sample mean."""
    if table is not None:
        for j, row in enumerate(table.values):
            if abs(average_loss(row)) > 1e-12:
                raise InvalidClassError(f"function {j} has nonzero full-sample mean {average_loss(row):.3g}")
    s = inp.smaller_side
    x = inp.x
    inner = (
        2.0 * math.sqrt(3.0 * inp.r * x / s)
        + optimal_alpha_term(inp.square_complexity, x / s)
        + 2.0 * inp.range_bound**2 * x / s
    )
    return 4.0 * inp.m / inp.n * inner


def prior_sup_bounds(inp: BoundInputs, E_bar_g: float) -> tuple[float, float]:
    """The two earlier deviation bounds, the second including its expectation gap 2m^2/n."""
    if E_bar_g < 0:
        raise InvalidArgumentError("E_bar_g must be nonnegative")
    n, u, m, t, r = inp.n, inp.u, inp.m, inp.x, inp.r
    v1 = 2.0 * math.sqrt(2.0 * n * r * t / u**2)
    v2 = 2.0 * math.sqrt(2.0 * (r + 2.0 * E_bar_g) * t / u) + t / 3.0 + 2.0 * m**2 / n
    return v1, v2


def generic_prior_excess(inp: BoundInputs, r_u_star: float, r_m_star: float, theta: float = 1.0) -> float:
    """theta (n/u r_m* + n/m r_u* + 1/m + 1/u)."""
    if not theta > 0:
        raise InvalidArgumentError("theta must be positive")
    if r_u_star < 0 or r_m_star < 0:
        raise InvalidArgumentError("fixed points must be nonnegative")
    n, u, m = inp.n, inp.u, inp.m
    return theta * (n / u * r_m_star + n / m * r_u_star + 1.0 / m + 1.0 / u)
