"""Command-line interface.

Four subcommands over one TOML config format:

    chain      stationary law and deviation-matrix algebra + residual report
    simulate   one exact sample path of (Z, N) as CSV (optionally SVG)
    clt        Monte-Carlo experiment vs. the limit law (summary + gate)
    curves     closed-form limit-law curves as CSV

Every run writes a manifest.toml holding the fully resolved config; a
manifest is itself a valid --config input and replays the run bitwise.
SVG output is additive only: it never changes any CSV byte.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 gate failure.
"""

from __future__ import annotations

import argparse
import copy
import os
import sys

import numpy as np

from . import __version__
from .chain import InvalidGeneratorError, chain_statics, deviation_matrix, stationary_distribution
from .config import (
    ConfigError,
    dump_toml,
    load_config,
    make_experiment,
    make_generator,
    make_regime,
    make_spec,
)
from .counting import UnsupportedRegimeError, simulate_counting, write_event_csv
from .limits import centering_curve, limit_variance_curve, write_curve_csv
from .numerics import RngStream
from .presets import PRESET_NAMES, PresetRun, preset_runs
from .stats import replicate_values, run_experiment, variance_gate
from ._svg import svg_plot

__all__ = ["main"]

_RESIDUAL_TOL = 1e-10
_SVG_STREAM_BASE = 1_000_000  # replicate streams 0..M-1 are the experiment's


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the interface contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sp):
    sp.add_argument("--config", metavar="PATH", help="TOML config file")
    sp.add_argument("--preset", metavar="NAME",
                    help=f"canned run ({', '.join(PRESET_NAMES)})")
    sp.add_argument("--out", metavar="DIR", help="output directory (default mmbinom-out)")
    sp.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
    sp.add_argument("--threads", type=int, metavar="N",
                    help="reserved concurrency hint (engines are single-threaded)")
    sp.add_argument("--svg", action="store_true", help="also write SVG plots")
    sp.add_argument("--force", action="store_true", help="overwrite existing output files")


def _build_parser() -> _Parser:
    p = _Parser(prog="mmbinom",
                description="Markov-modulated binomial counting: simulation and limit-law checks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, help_text in (
        ("chain", "chain algebra: stationary law, deviation matrix, residual report"),
        ("simulate", "one exact sample path as CSV"),
        ("clt", "Monte-Carlo experiment against the limit law"),
        ("curves", "closed-form limit-law curves"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    return p


def _resolve_runs(args, command):
    """Expand --config/--preset (exactly one) into (preset, [(name, cfg)])."""
    if (args.config is None) == (args.preset is None):
        raise SystemExit(_usage(args, "exactly one of --config or --preset is required"))
    if args.config is not None:
        runs = (PresetRun(name="", command=command, config=load_config(args.config)),)
        preset = None
    else:
        runs = preset_runs(args.preset)
        preset = args.preset
        for r in runs:
            if r.command != command:
                raise ConfigError(
                    f"preset '{preset}' belongs to the '{r.command}' command")
    resolved = []
    for idx, r in enumerate(runs):
        cfg = copy.deepcopy(r.config)
        if args.seed is not None:
            cfg["run"]["seed"] = args.seed + 1000 * idx
        if args.svg:
            cfg["run"]["svg"] = True
        if args.threads is not None:
            cfg["run"]["threads"] = args.threads
        resolved.append((r.name, cfg))
    return preset, resolved


def _usage(args, message) -> int:
    print(f"mmbinom {args.command}: error: {message}", file=sys.stderr)
    return 1


def _out_dir(args, cfg, run_name) -> str:
    base = args.out or cfg["run"].get("out") or "mmbinom-out"
    return os.path.join(base, run_name) if run_name else base


def _prepare(dirpath, filenames, force):
    os.makedirs(dirpath, exist_ok=True)
    if not force:
        clashes = [f for f in filenames if os.path.exists(os.path.join(dirpath, f))]
        if clashes:
            raise FileExistsError(
                f"{dirpath}: output files exist ({', '.join(clashes)}); pass --force to overwrite")
    return dirpath


def _write_manifest(dirpath, cfg, command, preset, run_name):
    mcfg = copy.deepcopy(cfg)
    mcfg["run"].pop("out", None)  # keep manifests relocatable
    meta = {"version": __version__, "command": command}
    if preset:
        meta["preset"] = preset
        meta["run_name"] = run_name
    mcfg["meta"] = meta
    with open(os.path.join(dirpath, "manifest.toml"), "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_toml(mcfg))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("no boolean CSV cells")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _matrix_rows(M: np.ndarray):
    return [list(map(float, row)) for row in M]


# ---------------------------------------------------------------- chain ---

def _cmd_chain(args) -> int:
    preset, runs = _resolve_runs(args, "chain")
    run_name, cfg = runs[0]
    G = make_generator(cfg)
    pi = stationary_distribution(G)
    F, D = deviation_matrix(G)
    Q = G.Q.array
    Fa, Da = F.array, D.array
    d = G.d
    ones = np.ones(d)
    Pi = np.outer(pi, ones)

    checks = (
        ("colsum(Q)", np.abs(Q.sum(axis=0)).max()),
        ("Q pi", np.abs(Q @ pi).max()),
        ("(Pi - Q) F - I", np.abs((Pi - Q) @ Fa - np.eye(d)).max()),
        ("Q F - (Pi - I)", np.abs(Q @ Fa - (Pi - np.eye(d))).max()),
        ("1^T F - 1^T", np.abs(ones @ Fa - ones).max()),
        ("F pi - pi", np.abs(Fa @ pi - pi).max()),
        ("1^T D", np.abs(ones @ Da).max()),
        ("D pi", np.abs(Da @ pi).max()),
    )
    ok = all(v <= _RESIDUAL_TOL for _, v in checks)

    have_lam = "lam" in cfg.get("process", {})
    files = ["manifest.toml", "pi.csv", "F.csv", "D.csv", "residuals.txt"]
    if have_lam:
        files.append("statics.csv")
    dirpath = _prepare(_out_dir(args, cfg, run_name), files, args.force)
    _write_manifest(dirpath, cfg, "chain", preset, run_name)

    _write_csv(os.path.join(dirpath, "pi.csv"), ["state", "pi"],
               [(i, float(pi[i])) for i in range(d)])
    header = [f"c{j}" for j in range(d)]
    _write_csv(os.path.join(dirpath, "F.csv"), header, _matrix_rows(Fa))
    _write_csv(os.path.join(dirpath, "D.csv"), header, _matrix_rows(Da))
    with open(os.path.join(dirpath, "residuals.txt"), "w", encoding="utf-8", newline="\n") as f:
        for label, value in checks:
            f.write(f"{label:<18} {value:.3e}  {'ok' if value <= _RESIDUAL_TOL else 'FAIL'}\n")
        f.write(f"all residuals <= {_RESIDUAL_TOL:g}: {'PASS' if ok else 'FAIL'}\n")
    if have_lam:
        spec_cfg = cfg["process"]
        lam = spec_cfg["lam"] if isinstance(spec_cfg["lam"], list) else [spec_cfg["lam"]]
        mu = spec_cfg.get("mu")
        if mu is not None and not isinstance(mu, list):
            mu = [mu]
        st = chain_statics(G, lam, mu)
        _write_csv(os.path.join(dirpath, "statics.csv"),
                   ["lambda_inf", "mu_inf", "V"],
                   [(st.lambda_inf, st.mu_inf, st.V)])

    print(f"chain: d={d}, max residual {max(v for _, v in checks):.3e} "
          f"-> {'PASS' if ok else 'FAIL'} ({dirpath})")
    return 0 if ok else 3


# ------------------------------------------------------------- simulate ---

def _cmd_simulate(args) -> int:
    preset, runs = _resolve_runs(args, "simulate")
    for run_name, cfg in runs:
        G = make_generator(cfg)
        spec = make_spec(cfg)
        svg = cfg["run"]["svg"]
        files = ["manifest.toml", "path.csv"] + (["path.svg"] if svg else [])
        dirpath = _prepare(_out_dir(args, cfg, run_name), files, args.force)
        _write_manifest(dirpath, cfg, "simulate", preset, run_name)

        rng = RngStream(cfg["run"]["seed"], 0)
        path = simulate_counting(spec, G, rng, z0=cfg["process"]["initial_state"])
        with open(os.path.join(dirpath, "path.csv"), "w", encoding="utf-8", newline="\n") as f:
            write_event_csv(path, spec.lam, f)

        if svg:
            grid = np.linspace(0.0, spec.horizon, 2001)
            frac = path.counts_on_grid(grid) / spec.n
            lam = np.asarray(spec.lam)
            intensity = lam[path.chain.states_on_grid(grid)] / lam.max()
            label = run_name or "path"
            svg_plot(os.path.join(dirpath, "path.svg"),
                     f"sample path ({label}, n={spec.n}, speed={spec.chain_speed:g})",
                     "time", "fraction of max",
                     [(grid, frac, "N/n"), (grid, intensity, "intensity (scaled)")])
        print(f"simulate {run_name or 'run'}: {path.event_times.size} counting events, "
              f"final N={int(path.counts[-1]) if path.counts.size else 0} ({dirpath})")
    return 0


# ------------------------------------------------------------------ clt ---

def _cmd_clt(args) -> int:
    preset, runs = _resolve_runs(args, "clt")
    hard_failure = False
    for run_name, cfg in runs:
        exp = make_experiment(cfg)
        svg = cfg["run"]["svg"]
        files = ["manifest.toml", "summary.csv", "gate.txt"] + (["clt.svg"] if svg else [])
        dirpath = _prepare(_out_dir(args, cfg, run_name), files, args.force)
        _write_manifest(dirpath, cfg, "clt", preset, run_name)

        summary = run_experiment(exp)
        report = variance_gate(summary, exp.rel_tol_effective)
        gate_mode = cfg["experiment"]["gate"]

        with open(os.path.join(dirpath, "summary.csv"), "w", encoding="utf-8", newline="\n") as f:
            summary.to_csv(f)
        with open(os.path.join(dirpath, "gate.txt"), "w", encoding="utf-8", newline="\n") as f:
            f.write(f"run: {run_name or 'run'}  regime: {exp.regime.kind.value}  "
                    f"n: {exp.spec.n}  replicates: {exp.replicates}  "
                    f"centering: {exp.centering}\n")
            for line in report.lines:
                f.write(line + "\n")
            f.write(f"gate ({gate_mode}): {'PASS' if report.passed else 'FAIL'}\n")

        if svg:
            grid = np.asarray(exp.grid)
            sd = np.sqrt(np.maximum(summary.theory_var, 0.0))
            series = []
            for j in range(cfg["experiment"]["paths_in_svg"]):
                vals = replicate_values(exp, _SVG_STREAM_BASE + j)
                series.append((grid, vals, f"path {j}" if j < 3 else ""))
            svg_plot(os.path.join(dirpath, "clt.svg"),
                     f"centered paths vs limit band ({run_name or 'run'})",
                     "time", "scaled centered count",
                     series, band=(grid, -2.0 * sd, 2.0 * sd, "theory ±2σ"))

        status = "PASS" if report.passed else "FAIL"
        print(f"clt {run_name or 'run'}: gate {status} ({gate_mode}) ({dirpath})")
        if gate_mode == "hard" and not report.passed:
            hard_failure = True
    return 3 if hard_failure else 0


# --------------------------------------------------------------- curves ---

def _cmd_curves(args) -> int:
    preset, runs = _resolve_runs(args, "curves")
    run_name, cfg = runs[0]
    G = make_generator(cfg)
    spec = make_spec(cfg)
    regime = make_regime(cfg)
    statics = chain_statics(G, spec.lam, spec.mu)
    curves_cfg = cfg.get("curves", {})
    if "grid" in curves_cfg:
        grid = np.asarray(curves_cfg["grid"], dtype=float)
    else:
        grid = np.linspace(0.0, spec.horizon, curves_cfg["grid_points"])

    svg = cfg["run"]["svg"]
    files = ["manifest.toml", "curve.csv"] + (["curve.svg"] if svg else [])
    dirpath = _prepare(_out_dir(args, cfg, run_name), files, args.force)
    _write_manifest(dirpath, cfg, "curves", preset, run_name)

    with open(os.path.join(dirpath, "curve.csv"), "w", encoding="utf-8", newline="\n") as f:
        write_curve_csv(regime, statics, grid, f)
    if svg:
        var = np.atleast_1d(limit_variance_curve(regime, statics, grid))
        mean = np.broadcast_to(np.asarray(centering_curve(regime, statics, grid), dtype=float),
                               grid.shape)
        svg_plot(os.path.join(dirpath, "curve.svg"),
                 f"limit law ({regime.kind.value})", "time", "value",
                 [(grid, var, "variance"), (grid, np.sqrt(np.maximum(var, 0.0)), "stddev"),
                  (grid, mean, "centering")])
    print(f"curves: {regime.kind.value}, {grid.size} points ({dirpath})")
    return 0


_COMMANDS = {
    "chain": _cmd_chain,
    "simulate": _cmd_simulate,
    "clt": _cmd_clt,
    "curves": _cmd_curves,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InvalidGeneratorError, UnsupportedRegimeError,
            FileExistsError, FileNotFoundError, IsADirectoryError,
            PermissionError, ValueError) as exc:
        print(f"mmbinom: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
