"""Command-line entry point (``tlc``)."""

from __future__ import annotations

import argparse
import sys

from . import BUILD
from .complexity import LocalizedCurve, subroot_envelope
from .config import constant_overrides, parse_config
from .errors import (
    ConfigError,
    InputError,
    InvalidArgumentError,
    NotSubRootError,
    NumericError,
    ResourceLimitError,
    TLCError,
)
from .experiments import (
    run_compare_tkl,
    run_complexity_report,
    run_erm_experiment,
    run_split,
    run_validate_concentration,
    write_report,
)
from .function_class import load_function_table, load_loss_table
from .kernel_spectral import KernelSpec, gram_and_spectrum, load_data, load_spectrum, synthetic_spectrum
from .splits import DEFAULT_ENUM_CAP
from .subroot import DEFAULT_TOL, fixed_point, power_subroot

EXIT_CONFIG, EXIT_INPUT, EXIT_NUMERIC = 2, 3, 4

# flag name -> converter; values may come from the command line or from experiment.* config keys
CONVERTERS = {
    "n": str, "u": int, "trials": int, "seed": int, "x": str, "class": str, "losses": str, "data": str,
    "kernel": str, "mu": float, "alpha": float, "out": str, "workers": int, "u_rule": str, "a": float,
    "b": float, "curve": str, "spectrum": str, "k_peel": float, "inequality": str, "curve_trials": int,
    "tol": float,
}


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlc", description="Transductive local complexity bounds and experiments.")
    p.add_argument("--version", action="version", version=BUILD)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value settings file (flags take precedence)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output CSV path (default: stdout)")
        sp.add_argument("--workers", type=int, help="worker threads for Monte Carlo chunks")
        return sp

    sp = common(sub.add_parser("validate-concentration", help="empirical violation rate of a deviation bound"))
    sp.add_argument("--class", dest="class_", metavar="PATH")
    sp.add_argument("--u", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--x", help="comma-separated confidence levels")
    sp.add_argument("--inequality", choices=("gap", "sup"))

    sp = common(sub.add_parser("compare-tkl", help="kernel bound versus the earlier n/u, n/m bound"))
    sp.add_argument("--n", help="comma-separated sample sizes")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--u-rule", dest="u_rule", help="fraction:<f> or power:<b>")
    sp.add_argument("--data")
    sp.add_argument("--kernel")
    sp.add_argument("--spectrum")
    sp.add_argument("--mu", type=float)

    sp = common(sub.add_parser("erm", help="per-split excess risk of the train minimiser"))
    sp.add_argument("--losses")
    sp.add_argument("--u", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--exhaustive", action="store_true", help="walk every split")
    sp.add_argument("--x")
    sp.add_argument("--K", dest="k_peel", type=float, help="peeling constant (> B)")
    sp.add_argument("--curve-trials", dest="curve_trials", type=int)

    sp = common(sub.add_parser("complexity", help="transductive and inductive complexities"))
    sp.add_argument("--class", dest="class_", metavar="PATH")
    sp.add_argument("--u", type=int)
    sp.add_argument("--trials", type=int, help="Monte Carlo trials (default: exact when feasible)")

    sp = common(sub.add_parser("fixed-point", help="fixed point of a*sqrt(r)+b or of a curve envelope"))
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--curve")
    sp.add_argument("--tol", type=float)

    sp = common(sub.add_parser("kernel-spectrum", help="normalized gram spectrum with tail sums"))
    sp.add_argument("--data")
    sp.add_argument("--kernel")
    sp.add_argument("--n", help="size of a synthetic power-law spectrum")
    sp.add_argument("--alpha", type=float)

    sp = common(sub.add_parser("split", help="sampled test sets"))
    sp.add_argument("--n")
    sp.add_argument("--u", type=int)
    sp.add_argument("--trials", type=int)
    return p


def resolve(args) -> tuple[dict, dict, int]:
    """Merge config file and flags; return (settings, constant overrides, enumeration cap)."""
    cfg = parse_config(args.config) if getattr(args, "config", None) else {}
    settings = {}
    for key, value in cfg.items():
        if key.startswith("experiment."):
            name = key.split(".", 1)[1]
            if name == "exhaustive":
                settings[name] = value.lower() in ("1", "true", "yes")
                continue
            try:
                settings[name] = CONVERTERS[name](value)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {value!r}") from None
    for name, value in vars(args).items():
        key = "class" if name == "class_" else name
        if key in ("command", "config") or value is None or value is False:
            continue
        settings[key] = value
    try:
        cap = int(cfg.get("enumeration.cap", DEFAULT_ENUM_CAP))
    except ValueError:
        raise ConfigError("enumeration.cap must be an integer") from None
    return settings, constant_overrides(cfg), cap


def need(settings: dict, key: str):
    if key not in settings:
        raise ConfigError(f"missing required setting --{key.replace('_', '-')}")
    return settings[key]


def dispatch(args) -> tuple[str, str | None]:
    s, overrides, cap = resolve(args)
    seed = int(s.get("seed", 0))
    workers = int(s.get("workers", 1))
    out = s.get("out")
    cmd = args.command
    if cmd == "validate-concentration":
        table = load_function_table(need(s, "class"))
        header, rows = run_validate_concentration(
            table, int(need(s, "u")), _float_list(s.get("x", "1,2,3")), int(s.get("trials", 100_000)), seed,
            s.get("inequality", "gap"), cap, workers,
        )
    elif cmd == "compare-tkl":
        spectrum = None
        if "spectrum" in s:
            spectrum = load_spectrum(s["spectrum"])
        elif "data" in s:
            spectrum = gram_and_spectrum(load_data(s["data"]), KernelSpec.parse(s.get("kernel", "linear")))
        ns = [int(v) for v in _float_list(s.get("n", "1024"))] if spectrum is None else [spectrum.n]
        alpha = float(s.get("alpha", 1.0))
        if spectrum is None and not alpha > 0:
            raise ConfigError("alpha must be positive")
        header, rows = run_compare_tkl(
            ns, s.get("u_rule", "fraction:0.5"), alpha, spectrum, overrides.get("c5", 1.0), overrides.get("theta", 1.0)
        )
    elif cmd == "erm":
        losses = load_loss_table(need(s, "losses"))
        trials = None if s.get("exhaustive") else int(s.get("trials", 1000))
        header, rows = run_erm_experiment(
            losses, int(need(s, "u")), _float_list(s.get("x", "1")), trials, seed, float(s.get("k_peel", 2.0)),
            int(s.get("curve_trials", 2000)), overrides, cap, workers,
        )
    elif cmd == "complexity":
        table = load_function_table(need(s, "class"))
        header, rows = run_complexity_report(table, int(need(s, "u")), s.get("trials"), seed, cap, workers)
    elif cmd == "fixed-point":
        if "curve" in s:
            data = load_data(s["curve"])
            if data.shape[1] < 2:
                raise InputError(f"{s['curve']}: curve needs r and psi_hat columns")
            stderr = data[:, 2] if data.shape[1] > 2 else 0 * data[:, 0]
            try:
                psi = subroot_envelope(LocalizedCurve(data[:, 0], data[:, 1], stderr))
            except InvalidArgumentError as exc:
                raise InputError(f"{s['curve']}: {exc}") from exc
        else:
            psi = power_subroot(float(need(s, "a")), float(s.get("b", 0.0)))
        fp = fixed_point(psi, float(s.get("tol", DEFAULT_TOL)))
        header, rows = ["r_star", "residual", "iterations"], [[fp.r_star, fp.residual, fp.iterations]]
    elif cmd == "kernel-spectrum":
        if "data" in s:
            spec = gram_and_spectrum(load_data(s["data"]), KernelSpec.parse(s.get("kernel", "linear")))
        else:
            spec = synthetic_spectrum(int(need(s, "n")), float(need(s, "alpha")))
        header, rows = ["q", "lambda_hat", "tail_sum"], [list(r) for r in spec.rows()]
    elif cmd == "split":
        header, rows = run_split(int(need(s, "n")), int(need(s, "u")), int(s.get("trials", 10)), seed)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ConfigError(f"unknown command {cmd}")
    return write_report(header, rows, seed, out), out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, out = dispatch(args)
    except (ConfigError, InvalidArgumentError, ResourceLimitError) as exc:
        print(f"tlc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"tlc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, NotSubRootError, ArithmeticError) as exc:
        print(f"tlc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TLCError as exc:
        print(f"tlc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
