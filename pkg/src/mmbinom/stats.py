"""Replicated Monte-Carlo experiments against the limit laws.

run_experiment draws M independent replicates (one derived RngStream
each, reduced in fixed index order, so results are bitwise reproducible
regardless of scheduling), centers and scales them, and compares each
grid-time marginal against the regime's Gaussian limit: mean near 0,
empirical variance against the closed-form curve, and a one-sample KS
test with fully specified null (theory mean and variance, parameters
known rather than estimated).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.special import erfc

from .chain import STATIONARY, Generator, chain_statics
from .counting import ProcessSpec, sample_counts_on_grid, simulate_counting
from .limits import Regime, center_and_scale, centering_curve, limit_variance_curve, scaling_exponent
from .numerics import RngStream, kolmogorov_pvalue

__all__ = [
    "ExperimentConfig",
    "McSummary",
    "GateReport",
    "run_experiment",
    "variance_gate",
    "ks_statistic",
]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One replicated experiment: process, regime, generator, replicate
    count M >= 100, evaluation grid, master seed, centering choice, and
    the tolerance policy (KS significance level and relative variance
    tolerance; rel_tol=None means max(0.10, 3 sqrt(2/(M-1))))."""

    spec: ProcessSpec
    regime: Regime
    generator: Generator
    replicates: int
    grid: tuple
    master_seed: int
    centering: str = "deterministic"
    significance: float = 0.01
    rel_tol: float = None
    z0: object = STATIONARY

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        if self.replicates < 100:
            raise ValueError("statistical gates need at least 100 replicates")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if min(self.grid) < 0 or max(self.grid) > self.spec.horizon * (1 + 1e-12):
            raise ValueError("grid must lie within the spec horizon")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if self.centering not in ("deterministic", "pathwise"):
            raise ValueError(f"unknown centering {self.centering!r}")
        if not 0.0 < self.significance < 1.0:
            raise ValueError("significance must be in (0,1)")

    @property
    def rel_tol_effective(self) -> float:
        if self.rel_tol is not None:
            return self.rel_tol
        return max(0.10, 3.0 * sqrt(2.0 / (self.replicates - 1)))


@dataclass(frozen=True, eq=False)
class McSummary:
    """Per-grid-time comparison of the replicated sample to the limit law."""

    times: np.ndarray
    emp_mean: np.ndarray
    emp_var: np.ndarray
    var_se: np.ndarray
    ks_stat: np.ndarray
    ks_p: np.ndarray
    theory_var: np.ndarray
    rel_err: np.ndarray
    degenerate: np.ndarray
    replicates: int

    def to_csv(self, fileobj):
        w = csv.writer(fileobj, lineterminator="\n")
        w.writerow(["time", "emp_mean", "emp_var", "var_se", "theory_var", "rel_err", "ks_stat", "ks_p"])
        for j in range(self.times.shape[0]):
            w.writerow(
                [
                    float(self.times[j]),
                    float(self.emp_mean[j]),
                    float(self.emp_var[j]),
                    float(self.var_se[j]),
                    float(self.theory_var[j]),
                    float(self.rel_err[j]),
                    float(self.ks_stat[j]),
                    float(self.ks_p[j]),
                ]
            )


def ks_statistic(values, cdf) -> float:
    """One-sample Kolmogorov-Smirnov sup-distance against a vectorized CDF."""
    x = np.sort(np.asarray(values, dtype=float))
    m = x.shape[0]
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1, dtype=float)
    return float(max((i / m - F).max(), (F - (i - 1.0) / m).max()))


def _normal_cdf_vec(x, sd):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / (sd * sqrt(2.0)))


def summarize_samples(values: np.ndarray, grid, theory_var) -> McSummary:
    """Reduce a replicate-by-time sample matrix to an McSummary.

    Exposed separately so the test stage can be fed synthetic samples
    (e.g. exact draws of the limit process) as well as simulation output.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    grid = np.asarray(grid, dtype=float)
    theory_var = np.asarray(theory_var, dtype=float)
    emp_mean = values.mean(axis=0)
    emp_var = values.var(axis=0, ddof=1)
    var_se = emp_var * sqrt(2.0 / (m - 1))
    k = grid.shape[0]
    ks_stat = np.full(k, np.nan)
    ks_p = np.full(k, np.nan)
    rel_err = np.full(k, np.nan)
    degenerate = np.zeros(k, dtype=bool)
    for j in range(k):
        if theory_var[j] <= 0.0 or emp_var[j] == 0.0:
            degenerate[j] = True
        else:
            sd = sqrt(theory_var[j])
            ks_stat[j] = ks_statistic(values[:, j], lambda x: _normal_cdf_vec(x, sd))
            ks_p[j] = kolmogorov_pvalue(ks_stat[j], m)
        if theory_var[j] > 1e-6:
            rel_err[j] = abs(emp_var[j] - theory_var[j]) / theory_var[j]
    return McSummary(
        times=grid,
        emp_mean=emp_mean,
        emp_var=emp_var,
        var_se=var_se,
        ks_stat=ks_stat,
        ks_p=ks_p,
        theory_var=theory_var,
        rel_err=rel_err,
        degenerate=degenerate,
        replicates=m,
    )


def run_experiment(config: ExperimentConfig) -> McSummary:
    """Run M replicates and summarize them against the limit law.

    Replicate i uses RngStream(master_seed, i).  When the chain path is
    not needed (deterministic centering, no recovery) the replicates go
    through sample_counts_on_grid, which may pick the thinning engine;
    the engine choice depends only on the config, never on draws, so a
    config is always bitwise reproducible.
    """
    spec = config.spec
    G = config.generator
    statics = chain_statics(G, spec.lam, spec.mu)
    grid = np.asarray(config.grid, dtype=float)
    m = config.replicates
    values = np.empty((m, grid.shape[0]))
    exponent = scaling_exponent(config.regime)
    n = float(spec.n)
    if config.centering == "deterministic":
        rho = np.asarray(centering_curve(config.regime, statics, grid))
        for i in range(m):
            rng = RngStream(config.master_seed, i)
            counts = sample_counts_on_grid(spec, G, grid, rng, z0=config.z0)
            values[i] = n ** exponent * (counts - n * rho)
    else:
        for i in range(m):
            rng = RngStream(config.master_seed, i)
            path = simulate_counting(spec, G, rng, z0=config.z0)
            values[i] = center_and_scale(path, config.regime, statics, grid, centering="pathwise")
    theory_var = np.atleast_1d(limit_variance_curve(config.regime, statics, grid))
    return summarize_samples(values, grid, theory_var)


def replicate_values(config: ExperimentConfig, stream_index: int, grid=None) -> np.ndarray:
    """Centered-and-scaled values of a single replicate on the grid.

    Stream stream_index of the config's master seed; run_experiment
    consumes indices 0..replicates-1, so larger indices give fresh paths
    from the same family (plot overlays, spot checks).
    """
    spec = config.spec
    G = config.generator
    statics = chain_statics(G, spec.lam, spec.mu)
    grid = np.asarray(config.grid if grid is None else grid, dtype=float)
    rng = RngStream(config.master_seed, stream_index)
    if config.centering == "deterministic":
        rho = np.asarray(centering_curve(config.regime, statics, grid))
        counts = sample_counts_on_grid(spec, G, grid, rng, z0=config.z0)
        return float(spec.n) ** scaling_exponent(config.regime) * (counts - spec.n * rho)
    path = simulate_counting(spec, G, rng, z0=config.z0)
    return center_and_scale(path, config.regime, statics, grid, centering="pathwise")


@dataclass(frozen=True)
class GateReport:
    """Outcome of the variance gate, with one line per check."""

    passed: bool
    lines: tuple


def variance_gate(summary: McSummary, rel_tol) -> GateReport:
    """Pass iff |emp_var - theory|/theory <= rel_tol at every grid time
    with theory > 1e-6, and the empirical mean is within 4 standard
    errors of 0 at those times."""
    lines = []
    passed = True
    for j in range(summary.times.shape[0]):
        t = float(summary.times[j])
        if summary.theory_var[j] <= 1e-6:
            lines.append(f"t={t:g}: theory variance {summary.theory_var[j]:.3g} <= 1e-6, skipped")
            continue
        ok_var = summary.rel_err[j] <= rel_tol
        se_mean = sqrt(summary.emp_var[j] / summary.replicates)
        ok_mean = abs(summary.emp_mean[j]) <= 4.0 * se_mean if se_mean > 0 else summary.emp_mean[j] == 0.0
        passed = passed and ok_var and ok_mean
        lines.append(
            f"t={t:g}: var {summary.emp_var[j]:.6g} vs theory {summary.theory_var[j]:.6g} "
            f"(rel err {summary.rel_err[j]:.3%}, tol {rel_tol:.3%}) "
            f"{'ok' if ok_var else 'FAIL'}; mean {summary.emp_mean[j]:+.4g} "
            f"({abs(summary.emp_mean[j]) / se_mean if se_mean > 0 else 0.0:.2f} se) "
            f"{'ok' if ok_mean else 'FAIL'}"
        )
    return GateReport(passed=passed, lines=tuple(lines))
