"""Flat ``key = value`` configuration files."""

from __future__ import annotations

from .errors import ConfigError

# experiment.* keys mirror the command-line flags
EXPERIMENT_KEYS = {
    "n", "u", "trials", "seed", "x", "class", "losses", "data", "kernel", "mu", "alpha",
    "out", "workers", "u_rule", "a", "b", "curve", "spectrum", "k_peel", "inequality",
    "exhaustive", "curve_trials", "tol",
}
CONSTANT_KEYS = {"c0", "c1", "c2", "c3", "c5", "hat_c2", "theta"}
OTHER_KEYS = {"enumeration.cap"}


def parse_config(path) -> dict[str, str]:
    """Read a config file into a dict of namespaced string values."""
    out: dict[str, str] = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            ns, dot, name = key.partition(".")
            known = (
                (ns == "experiment" and name in EXPERIMENT_KEYS)
                or (ns == "constants" and name in CONSTANT_KEYS)
                or key in OTHER_KEYS
            )
            if not dot or not known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def constant_overrides(cfg: dict[str, str]) -> dict[str, float]:
    result = {}
    for key, value in cfg.items():
        if key.startswith("constants."):
            try:
                result[key.split(".", 1)[1]] = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}") from None
    return result
