"""Canned run configurations.

Figure presets (fig1..fig4) reproduce the package's reference study on a
three-state chain: raw sample paths at increasing modulation speeds, then
centered-and-scaled paths against the limiting Gaussian band.  The
accept-* presets are the Monte-Carlo verification experiments used by the
acceptance suite.

Each preset expands to one or more named runs; every run carries a fully
resolved config dict (the same shape `config.load_config` produces), so a
run manifest can be replayed through the ordinary config path.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import DEFAULT_SEED, ConfigError, resolve_config

__all__ = ["PresetRun", "preset_runs", "PRESET_NAMES",
           "REFERENCE_Q", "REFERENCE_LAM"]

# Three-state reference model used throughout the documentation and demos
# (column convention: q[j][i] is the i->j rate).
REFERENCE_Q = [[-5.0, 1.0, 5.0], [2.0, -2.0, 5.0], [3.0, 1.0, -10.0]]
REFERENCE_LAM = [0.1, 1.0, 3.0]

_PLOT_GRID = [round(0.05 * i, 10) for i in range(1, 201)]  # (0, 10]


@dataclass(frozen=True)
class PresetRun:
    name: str
    command: str  # "simulate" or "clt"
    config: dict


def _simulate_run(name, idx, speed):
    raw = {
        "run": {"seed": DEFAULT_SEED + 1000 * idx},
        "generator": {"q": REFERENCE_Q},
        "process": {"n": 1000, "lam": REFERENCE_LAM, "chain_speed": float(speed),
                    "horizon": 3.0, "initial_state": 0},
    }
    return PresetRun(name, "simulate", resolve_config(raw))


def _joint_clt_run(name, idx, n, *, replicates=200, gate="report"):
    raw = {
        "run": {"seed": DEFAULT_SEED + 1000 * idx},
        "generator": {"q": REFERENCE_Q},
        "process": {"n": n, "lam": REFERENCE_LAM, "beta": 1.0,
                    "horizon": 10.0, "initial_state": 0},
        "experiment": {"regime": "joint-beta", "beta": 1.0,
                       "replicates": replicates, "grid": list(_PLOT_GRID),
                       "gate": gate},
    }
    return PresetRun(name, "clt", resolve_config(raw))


def _fig1():
    return (_simulate_run("speed-1", 0, 1.0), _simulate_run("speed-10", 1, 10.0))


def _fig2():
    return (_simulate_run("speed-100", 0, 100.0), _simulate_run("speed-10000", 1, 10000.0))


def _fig3():
    return (_joint_clt_run("joint-n10", 0, 10), _joint_clt_run("joint-n100", 1, 100))


def _fig4():
    return (_joint_clt_run("joint-n1000", 0, 1000), _joint_clt_run("joint-n10000", 1, 10000))


def _accept_5():
    raw = {
        "run": {"seed": DEFAULT_SEED},
        "generator": {"q": REFERENCE_Q},
        "process": {"n": 2000, "lam": REFERENCE_LAM, "beta": 1.0, "horizon": 3.0},
        "experiment": {"regime": "joint-beta", "beta": 1.0, "replicates": 2000,
                       "grid": [0.5, 1.0, 2.0, 3.0]},
    }
    return (PresetRun("joint-critical", "clt", resolve_config(raw)),)


def _accept_6():
    raw = {
        "run": {"seed": DEFAULT_SEED},
        "generator": {"q": REFERENCE_Q},
        "process": {"n": 1000, "lam": REFERENCE_LAM, "chain_speed": 10000.0,
                    "horizon": 3.0},
        "experiment": {"regime": "iterated-alpha-then-n", "replicates": 2000,
                       "grid": [1.0, 3.0], "centering": "pathwise"},
    }
    return (PresetRun("iterated-fast-chain", "clt", resolve_config(raw)),)


def _accept_7():
    runs = []
    for name, beta, idx in (("joint-slow-chain", 0.5, 0), ("joint-fast-chain", 2.0, 1)):
        raw = {
            "run": {"seed": DEFAULT_SEED + 1000 * idx},
            "generator": {"q": REFERENCE_Q},
            "process": {"n": 10000, "lam": REFERENCE_LAM, "beta": beta, "horizon": 2.0},
            "experiment": {"regime": "joint-beta", "beta": beta, "replicates": 1000,
                           "grid": [1.0, 2.0], "rel_tol": 0.15},
        }
        runs.append(PresetRun(name, "clt", resolve_config(raw)))
    return tuple(runs)


def _accept_8():
    raw = {
        "run": {"seed": DEFAULT_SEED},
        "generator": {"q": REFERENCE_Q},
        "process": {"n": 10000, "lam": REFERENCE_LAM, "beta": 1.0, "gamma": 0.5,
                    "horizon": 3.0},
        "experiment": {"regime": "sparse-intensity", "gamma": 0.5,
                       "replicates": 2000, "grid": [1.0, 3.0],
                       "centering": "pathwise"},
    }
    return (PresetRun("sparse-diffusive", "clt", resolve_config(raw)),)


def _accept_9():
    raw = {
        "run": {"seed": DEFAULT_SEED},
        "generator": {"q": [[0.0]]},
        "process": {"n": 5000, "lam": [1.0], "mu": [0.5], "horizon": 3.0},
        "experiment": {"regime": "recovery-non-modulated", "replicates": 2000,
                       "grid": [1.0, 3.0]},
    }
    return (PresetRun("recovery-flat", "clt", resolve_config(raw)),)


_PRESETS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "accept-5": _accept_5,
    "accept-6": _accept_6,
    "accept-7": _accept_7,
    "accept-8": _accept_8,
    "accept-9": _accept_9,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_runs(name: str):
    """Expand a preset name into its tuple of PresetRun entries."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})") from None
    return factory()
