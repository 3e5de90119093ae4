"""Validation experiments and bound comparisons producing CSV tables.

Each runner returns ``(header, rows)``; :func:`write_report` appends the seed
and build columns and formats floats with ``repr`` (shortest round trip).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import BUILD
from .bounds import (
    BoundInputs,
    concentration_deviation,
    constant_set,
    excess_risk_bound,
    general_sup_bound,
    generic_prior_excess,
)
from .complexity import (
    inductive_rademacher,
    localized_curve,
    map_trials,
    split_statistics,
    subroot_envelope,
    transductive_complexity,
)
from .empirical_process import objective_matrix
from .errors import ConfigError, InvalidArgumentError
from .function_class import (
    FunctionTable,
    LossTable,
    average_loss,
    difference_class,
    estimate_B,
    fourth_moment_proxy,
    h0_floor,
    squared_class,
    star_class,
)
from .kernel_spectral import Spectrum, min_r_umQ, prior_fixed_point_formula, synthetic_spectrum
from .splits import DEFAULT_ENUM_CAP, all_masks, batch_draws, batch_test_sequences, format_indices, sampled_masks
from .subroot import fixed_point

MIN_VALIDATION_TRIALS = 10_000


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_report(header, rows, seed: int, out=None) -> str:
    """Render rows as CSV text with trailing seed and build columns; write to ``out`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + ["seed", "build"])
    for row in rows:
        w.writerow([fmt(v) for v in row] + [str(seed), BUILD])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def smaller_side_kind(u: int, n: int) -> str:
    return "u+" if u <= n - u else "m+"


def _exact_possible(n: int, u: int, cap: int) -> bool:
    return math.comb(n, u) <= cap


# --- concentration ---------------------------------------------------------------


def centered_class(table: FunctionTable) -> FunctionTable:
    """h - L_n(h) for every h, so each row has zero full-sample mean."""
    rows = np.array([row - average_loss(row) for row in table.values])
    return FunctionTable(rows, h0_floor(float(np.max(np.abs(rows)))))


def run_validate_concentration(
    table: FunctionTable,
    u: int,
    xs,
    trials: int,
    seed: int,
    inequality: str = "gap",
    cap: int = DEFAULT_ENUM_CAP,
    workers: int = 1,
):
    """Empirical violation frequency of a deviation bound, one row per x.

    ``inequality='gap'`` checks the test-train process bound; ``'sup'`` checks
    the bound for the supremum of test means over the centered class.
    """
    if trials < MIN_VALIDATION_TRIALS:
        raise ConfigError(f"validation needs at least {MIN_VALIDATION_TRIALS} trials, got {trials}")
    if inequality not in ("gap", "sup"):
        raise ConfigError(f"inequality must be 'gap' or 'sup', got {inequality!r}")
    n = table.n
    if not 1 <= u <= n - 1:
        raise ConfigError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    m = n - u
    work = table if inequality == "gap" else centered_class(table)
    kind = "gap" if inequality == "gap" else "u_plus"
    exact = _exact_possible(n, u, cap)
    stat = lambda masks: objective_matrix(kind, work.values, masks).max(axis=1)  # noqa: E731
    if exact:
        mean_g = float(np.mean(split_statistics(stat, n, u, None, seed, cap)[0]))
    else:
        mean_g = float(np.mean(split_statistics(stat, n, u, trials, seed, cap, workers, "expectation")[0]))
    sq_kind = smaller_side_kind(u, n)
    sq_table = squared_class(work)
    sq = transductive_complexity(sq_kind, sq_table, u, None if exact else trials, seed, cap, workers)
    r = fourth_moment_proxy(work)
    observed = map_trials(lambda s, c: stat(sampled_masks(n, u, seed, s, c)), trials, workers)
    header = ["x", "bound", "violations", "trials", "violation_rate", "e_minus_x", "inequality"]
    rows = []
    for x in xs:
        inp = BoundInputs(u, m, x, r=r, range_bound=work.range_bound, expected_gap=mean_g,
                          square_complexity=max(sq.mean, 0.0))
        if inequality == "gap":
            bound = concentration_deviation(inp)
        else:
            bound = mean_g + general_sup_bound(inp)
        viol = int(np.count_nonzero(observed > bound))
        rows.append([float(x), bound, viol, trials, viol / trials, math.exp(-x), inequality])
    return header, rows


# --- kernel comparison ---------------------------------------------------------


def parse_u_rule(rule: str):
    """``fraction:<f>`` gives u = floor(f n); ``power:<b>`` gives u = floor(n^b)."""
    kind, _, val = rule.partition(":")
    try:
        p = float(val)
    except ValueError:
        raise InvalidArgumentError(f"bad u-rule {rule!r}") from None
    if kind == "fraction" and 0 < p < 1:
        return lambda n: int(math.floor(p * n + 1e-9))
    if kind == "power" and 0 < p < 1:
        # the tiny offset keeps exact powers such as 1024^0.3 = 8 from rounding down
        return lambda n: int(math.floor(n**p + 1e-9))
    raise InvalidArgumentError(f"bad u-rule {rule!r}; use fraction:<f> or power:<b> with 0 < f, b < 1")


def compare_point(spectrum: Spectrum, u: int, m: int, c5: float = 1.0, theta: float = 1.0):
    """(tlc_value, prior_value) for one spectrum and split sizes."""
    n = u + m
    tlc = c5 * min_r_umQ(spectrum, u, m)[0]
    r_u = prior_fixed_point_formula(spectrum, u, theta)
    r_m = prior_fixed_point_formula(spectrum, m, theta)
    prior = generic_prior_excess(BoundInputs(u, m, 1.0), r_u, r_m, theta)
    return tlc, prior


def run_compare_tkl(ns, u_rule: str, alpha: float | None = None, spectrum: Spectrum | None = None,
                    c5: float = 1.0, theta: float = 1.0):
    rule = parse_u_rule(u_rule)
    header = ["n", "u", "m", "tlc_value", "prior_value", "ratio"]
    rows = []
    for n in ns:
        spec = spectrum if spectrum is not None else synthetic_spectrum(int(n), alpha)
        n = spec.n if spectrum is not None else int(n)
        u = rule(n)
        m = n - u
        if u < 1 or m < 1:
            raise InvalidArgumentError(f"u-rule {u_rule!r} gives u={u} for n={n}")
        tlc, prior = compare_point(spec, u, m, c5, theta)
        rows.append([n, u, m, tlc, prior, prior / tlc if tlc > 0 else math.inf])
    return header, rows


# --- ERM ---------------------------------------------------------------------


@dataclass(frozen=True)
class ErmResult:
    split_id: int
    test_indices: tuple[int, ...]
    empirical_index: int
    oracle_index: int
    excess_risk: float
    bound: float


def erm_choices(losses: LossTable, masks: np.ndarray):
    """Train minimiser, test minimiser (lowest index on ties) and excess risk per split."""
    masks = np.atleast_2d(masks)
    u = int(masks[0].sum())
    m = losses.n - u
    mf = masks.astype(np.float64)
    test_mean = mf @ losses.loss.T / u
    train_mean = (1.0 - mf) @ losses.loss.T / m
    fm = np.argmin(train_mean, axis=1)
    fu = np.argmin(test_mean, axis=1)
    rows = np.arange(masks.shape[0])
    excess = test_mean[rows, fm] - test_mean[rows, fu]
    return fm, fu, excess


def _radii(loc) -> np.ndarray:
    pos = np.unique(np.asarray(loc)[np.asarray(loc) > 0])
    tiny = min(1e-12, float(pos[0]) / 2) if pos.size else 1e-12
    return np.concatenate([[tiny], pos])


def fixed_point_of(table, loc, side, u, trials, seed, cap, workers) -> float:
    curve = localized_curve(table, loc, side, u, _radii(loc), trials, seed, True, cap, workers)
    return fixed_point(subroot_envelope(curve)).r_star


def erm_bound(losses: LossTable, u: int, x: float, K_peel: float, seed: int, curve_trials: int | None,
              overrides: dict | None = None, cap: int = DEFAULT_ENUM_CAP, workers: int = 1) -> float:
    n = losses.n
    m = n - u
    B = estimate_B(losses)
    if not K_peel > B:
        raise ConfigError(f"peeling constant K={K_peel} must exceed the measured B={B}")
    delta, tilde, _ = difference_class(losses, B)
    star, star_loc = star_class(losses, B)
    trials = None if _exact_possible(n, u, cap) else curve_trials
    r_u = fixed_point_of(delta, tilde, "u", u, trials, seed, cap, workers)
    r_m = fixed_point_of(delta, tilde, "m", u, trials, seed, cap, workers)
    r_star = fixed_point_of(star, star_loc, "joint", u, trials, seed, cap, workers)
    inp = BoundInputs(u, m, x, range_bound=losses.range_bound, K_peel=K_peel, B=B, r_u=r_u, r_m=r_m, r_star=r_star)
    return excess_risk_bound(inp, constant_set(K_peel, losses.range_bound, B, overrides))


def run_erm_experiment(losses: LossTable, u: int, xs, trials: int | None, seed: int, K_peel: float = 2.0,
                       curve_trials: int = 2000, overrides: dict | None = None, cap: int = DEFAULT_ENUM_CAP,
                       workers: int = 1):
    """Per-split excess risk of the train minimiser and the excess-risk bound.

    ``trials=None`` walks every split in lexicographic order.
    """
    n = losses.n
    if not 1 <= u <= n - 1:
        raise ConfigError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    if trials is None:
        masks = all_masks(n, u, cap)
    else:
        masks = np.concatenate(
            [sampled_masks(n, u, seed, s, min(8192, trials - s)) for s in range(0, trials, 8192)]
        )
    fm, fu, excess = erm_choices(losses, masks)
    bounds = {x: erm_bound(losses, u, x, K_peel, seed, curve_trials, overrides, cap, workers) for x in xs}
    header = ["split", "test_indices", "x", "f_hat_m", "f_hat_u", "excess_risk", "bound"]
    rows = []
    for t in range(masks.shape[0]):
        test = np.flatnonzero(masks[t]) + 1
        for x in xs:
            rows.append([t, format_indices(test), float(x), int(fm[t]) + 1, int(fu[t]) + 1, float(excess[t]), bounds[x]])
    return header, rows


# --- complexity report ---------------------------------------------------------


def run_complexity_report(table: FunctionTable, u: int, trials: int | None, seed: int,
                          cap: int = DEFAULT_ENUM_CAP, workers: int = 1):
    """All four transductive complexities against twice the inductive one."""
    n = table.n
    if not 1 <= u <= n - 1:
        raise ConfigError(f"need 1 <= u <= n-1, got u={u}, n={n}")
    header = ["kind", "mean", "stderr", "mode", "trials", "inductive_k", "inductive_2x", "inductive_stderr", "pass"]
    ind_cache = {}
    rows = []
    for kind in ("u+", "u-", "m+", "m-"):
        t_trials = None if trials is None and _exact_possible(n, u, cap) else (trials or 100_000)
        est = transductive_complexity(kind, table, u, t_trials, seed, cap, workers)
        k = u if kind[0] == "u" else n - u
        if k not in ind_cache:
            exact_ind = trials is None and n**k * 2**k <= cap
            ind_cache[k] = inductive_rademacher(table, k, None if exact_ind else (trials or 100_000), seed, cap, workers)
        ind = ind_cache[k]
        slack = 4.0 * math.hypot(est.stderr, 2.0 * ind.stderr)
        ok = est.mean <= 2.0 * ind.mean + slack + 1e-12
        rows.append([kind, est.mean, est.stderr, est.mode, est.trials, k, 2.0 * ind.mean, 2.0 * ind.stderr, ok])
    return header, rows


# --- splits --------------------------------------------------------------------


def run_split(n: int, u: int, trials: int, seed: int):
    draws = batch_draws(n, u, seed, np.arange(trials, dtype=np.uint64))
    seqs = batch_test_sequences(n, draws) + 1
    return ["trial", "test_indices"], [[t, format_indices(seqs[t])] for t in range(trials)]
