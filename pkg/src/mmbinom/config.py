"""TOML config files: schema validation, resolution, and manifest emission.

One file drives every subcommand.  Unknown sections or keys are errors
(anti-typo); syntax errors surface tomli's line/column diagnostics.
A [meta] section is written into run manifests and accepted back on
input, so a manifest is itself a valid config.
"""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

import numpy as np

from .chain import STATIONARY, Generator, validate_generator
from .counting import ProcessSpec
from .limits import Regime, RegimeKind
from .stats import ExperimentConfig

__all__ = ["ConfigError", "load_config", "resolve_config", "dump_toml",
           "make_generator", "make_spec", "make_regime", "make_experiment"]

DEFAULT_SEED = 20260815


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _num_list(x):
    return isinstance(x, list) and len(x) > 0 and all(_is_num(v) for v in x)


def _check(cond, path, msg):
    if not cond:
        raise ConfigError(f"config key '{path}': {msg}")


_REGIME_NAMES = {k.value for k in RegimeKind}

# section -> key -> (validator, description)
_SCHEMA = {
    "run": {
        "seed": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
        "out": lambda v: isinstance(v, str),
        "svg": lambda v: isinstance(v, bool),
        "threads": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1,
    },
    "generator": {
        "q": lambda v: isinstance(v, list) and all(_num_list(r) for r in v),
        "convention": lambda v: v in ("column", "row"),
    },
    "process": {
        "n": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1,
        "lam": lambda v: _is_num(v) or _num_list(v),
        "mu": lambda v: _is_num(v) or _num_list(v),
        "chain_speed": lambda v: _is_num(v) and v > 0,
        "beta": lambda v: _is_num(v) and v > 0,
        "gamma": lambda v: _is_num(v) and v >= 0,
        "horizon": lambda v: _is_num(v) and v > 0,
        "initial_state": lambda v: v == STATIONARY or (isinstance(v, int) and not isinstance(v, bool) and v >= 0),
    },
    "experiment": {
        "regime": lambda v: v in _REGIME_NAMES,
        "beta": lambda v: _is_num(v) and v > 0,
        "gamma": lambda v: _is_num(v) and 0 < v < 1,
        "replicates": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 100,
        "grid": _num_list,
        "centering": lambda v: v in ("deterministic", "pathwise"),
        "significance": lambda v: _is_num(v) and 0 < v < 1,
        "rel_tol": lambda v: _is_num(v) and v > 0,
        "gate": lambda v: v in ("hard", "report"),
        "paths_in_svg": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
    },
    "curves": {
        "grid_points": lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 2,
        "grid": _num_list,
    },
    "meta": {
        "version": lambda v: isinstance(v, str),
        "command": lambda v: isinstance(v, str),
        "preset": lambda v: isinstance(v, str),
        "run_name": lambda v: isinstance(v, str),
    },
}

_DEFAULTS = {
    "run": {"seed": DEFAULT_SEED, "svg": False, "threads": 1},
    "generator": {"convention": "column"},
    "process": {"gamma": 0.0, "initial_state": STATIONARY},
    "experiment": {"centering": "deterministic", "significance": 0.01, "gate": "hard",
                   "paths_in_svg": 5},
    "curves": {"grid_points": 101},
}


def resolve_config(raw: dict) -> dict:
    """Validate a parsed TOML dict against the schema and fill defaults.

    Returns a plain nested dict; unknown sections/keys raise ConfigError
    naming the full key path.
    """
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a table")
    cfg = {}
    for section, table in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section '[{section}]'")
        if not isinstance(table, dict):
            raise ConfigError(f"config section '[{section}]' must be a table")
        cfg[section] = {}
        for key, value in table.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            _check(_SCHEMA[section][key](value), f"{section}.{key}", f"invalid value {value!r}")
            cfg[section][key] = value
    for section, defaults in _DEFAULTS.items():
        cfg.setdefault(section, {})
        for key, value in defaults.items():
            cfg[section].setdefault(key, value)
    proc = cfg["process"]
    if "chain_speed" in proc and "beta" in proc:
        raise ConfigError("config keys 'process.chain_speed' and 'process.beta' are mutually exclusive")
    return cfg


def load_config(path) -> dict:
    """Parse and resolve a TOML config file.

    Syntax errors propagate tomli's TOMLDecodeError, which carries line
    and column; semantic errors raise ConfigError with the key path.
    """
    with open(path, "rb") as f:
        try:
            raw = _toml.load(f)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return resolve_config(raw)


def make_generator(cfg: dict) -> Generator:
    gen = cfg.get("generator", {})
    if "q" not in gen:
        raise ConfigError("missing required key 'generator.q'")
    return validate_generator(np.array(gen["q"], dtype=float), convention=gen["convention"])


def make_spec(cfg: dict) -> ProcessSpec:
    proc = cfg.get("process", {})
    for key in ("n", "lam", "horizon"):
        if key not in proc:
            raise ConfigError(f"missing required key 'process.{key}'")
    lam = proc["lam"] if isinstance(proc["lam"], list) else [proc["lam"]]
    mu = proc.get("mu")
    if mu is not None and not isinstance(mu, list):
        mu = [mu]
    if "beta" in proc:
        speed = float(proc["n"]) ** float(proc["beta"])
    else:
        speed = float(proc.get("chain_speed", 1.0))
    return ProcessSpec(
        n=proc["n"],
        lam=tuple(lam),
        mu=None if mu is None else tuple(mu),
        chain_speed=speed,
        gamma=float(proc["gamma"]),
        horizon=float(proc["horizon"]),
    )


def make_regime(cfg: dict) -> Regime:
    exp = cfg.get("experiment", {})
    if "regime" not in exp:
        raise ConfigError("missing required key 'experiment.regime'")
    kind = RegimeKind(exp["regime"])
    beta = exp.get("beta")
    gamma = exp.get("gamma")
    try:
        return Regime(kind, beta=beta, gamma=gamma)
    except ValueError as exc:
        raise ConfigError(f"experiment.regime: {exc}") from exc


def make_experiment(cfg: dict, seed_override=None) -> ExperimentConfig:
    exp = cfg.get("experiment", {})
    for key in ("replicates", "grid"):
        if key not in exp:
            raise ConfigError(f"missing required key 'experiment.{key}'")
    seed = seed_override if seed_override is not None else cfg["run"]["seed"]
    try:
        return ExperimentConfig(
            spec=make_spec(cfg),
            regime=make_regime(cfg),
            generator=make_generator(cfg),
            replicates=exp["replicates"],
            grid=tuple(float(t) for t in exp["grid"]),
            master_seed=int(seed),
            centering=exp["centering"],
            significance=float(exp["significance"]),
            rel_tol=float(exp["rel_tol"]) if "rel_tol" in exp else None,
            z0=cfg["process"]["initial_state"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)} to TOML")


_SECTION_ORDER = ("meta", "run", "generator", "process", "experiment", "curves")


def dump_toml(cfg: dict) -> str:
    """Serialize a resolved config dict back to TOML (manifests)."""
    out = []
    for section in _SECTION_ORDER:
        if section not in cfg or not cfg[section]:
            continue
        out.append(f"[{section}]")
        for key in sorted(cfg[section]):
            out.append(f"{key} = {_toml_value(cfg[section][key])}")
        out.append("")
    return "\n".join(out)
