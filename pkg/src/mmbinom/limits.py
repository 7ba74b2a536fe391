"""Centerings, scaling exponents, and the limiting Gaussian laws.

Seven regimes are covered, all leading to time-changed
Ornstein-Uhlenbeck-type limits dX = -a X dt + sigma(t) dW (a = 0 gives
Brownian motion):

==========================  =======================================================
regime                      limit variance at t
==========================  =======================================================
NON_MODULATED               e^{-Lt}(1 - e^{-Lt}),              L = lambda_inf
ITERATED_N_THEN_ALPHA       same curve (limit after both iterated limits)
ITERATED_ALPHA_THEN_N       same curve
JOINT_BETA, beta < 1        V t e^{-2Lt}
JOINT_BETA, beta = 1        e^{-2Lt}(V t + e^{Lt} - 1)   (sum of both brackets)
JOINT_BETA, beta > 1        e^{-Lt}(1 - e^{-Lt})
GAMMA (0 < gamma < 1)       L t                                  (driftless BM)
RECOVERY_NON_MODULATED      int_0^t e^{-2a(t-s)} sigma(s)^2 ds,  a = L + mu_inf
RECOVERY_JOINT              same with brackets sigma_1 (chain) and sigma_2 (jumps)
==========================  =======================================================

V is the ergodic variance lam^T S lam.  All recovery integrals are
exponential polynomials and are evaluated in closed form.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from math import sqrt

import numpy as np

from .chain import ChainPath, ChainStatics, accumulated_intensity_grid
from .counting import CountingPath, recovery_mean_ode
from .numerics import RngStream

__all__ = [
    "Regime",
    "RegimeKind",
    "LimitLaw",
    "BracketPart",
    "limit_law",
    "scaling_exponent",
    "centering_curve",
    "pathwise_centering",
    "limit_variance_curve",
    "conditional_limit_variance",
    "sample_limit_process",
    "center_and_scale",
    "write_curve_csv",
]


class RegimeKind(Enum):
    """Scaling regimes; the string value is the config-file token."""

    NON_MODULATED = "non-modulated"
    ITERATED_N_THEN_ALPHA = "iterated-n-then-alpha"
    ITERATED_ALPHA_THEN_N = "iterated-alpha-then-n"
    JOINT_BETA = "joint-beta"
    GAMMA = "sparse-intensity"
    RECOVERY_NON_MODULATED = "recovery-non-modulated"
    RECOVERY_JOINT = "recovery-joint"


_NEEDS_BETA = {RegimeKind.JOINT_BETA, RegimeKind.RECOVERY_JOINT}


@dataclass(frozen=True)
class Regime:
    """A limit regime: the kind plus its beta/gamma parameter when the
    kind uses one (JOINT_BETA and RECOVERY_JOINT take beta > 0; GAMMA
    takes 0 < gamma < 1)."""

    kind: RegimeKind
    beta: float = None
    gamma: float = None

    def __post_init__(self):
        if self.kind in _NEEDS_BETA:
            if self.beta is None or self.beta <= 0:
                raise ValueError(f"{self.kind.value} requires beta > 0")
        elif self.beta is not None:
            raise ValueError(f"{self.kind.value} does not take beta")
        if self.kind is RegimeKind.GAMMA:
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise ValueError("GAMMA requires 0 < gamma < 1")
        elif self.gamma is not None:
            raise ValueError(f"{self.kind.value} does not take gamma")


@dataclass(frozen=True)
class BracketPart:
    """One contributing Gaussian martingale: its label (B, G, W) and
    predictable bracket t -> <.>_t.  Parts are independent, so the
    derivatives of their brackets sum to the squared diffusion
    coefficient of the limit SDE."""

    label: str
    bracket: object  # callable time -> bracket value


@dataclass(frozen=True)
class LimitLaw:
    """Limit SDE dX = -a X dt + sigma(t) dW packaged as its drift rate,
    marginal variance curve, and the brackets of the driving martingales."""

    drift_rate: float
    variance_curve: object  # callable time -> Var X_t
    diffusion_decomposition: tuple

    def __post_init__(self):
        if self.drift_rate < 0:
            raise ValueError("drift rate must be nonnegative")


def drift_rate(regime: Regime, statics: ChainStatics) -> float:
    """Mean-reversion rate a of the limit SDE."""
    if regime.kind is RegimeKind.GAMMA:
        return 0.0
    if regime.kind in (RegimeKind.RECOVERY_NON_MODULATED, RegimeKind.RECOVERY_JOINT):
        return statics.lambda_inf + statics.mu_inf
    return statics.lambda_inf


def scaling_exponent(regime: Regime) -> float:
    """Exponent e with scaled process n^e (N_t - n rho_t):
    JOINT_BETA -> -(1+(1-beta)^+)/2, GAMMA -> (gamma-1)/2, others -> -1/2."""
    if regime.kind is RegimeKind.JOINT_BETA:
        return -0.5 * (1.0 + max(1.0 - regime.beta, 0.0))
    if regime.kind is RegimeKind.GAMMA:
        return 0.5 * (regime.gamma - 1.0)
    return -0.5


def centering_curve(regime: Regime, statics: ChainStatics, t):
    """Deterministic centering rho_t.  GAMMA returns 0 (its centering is
    pathwise only); recovery regimes solve
    rho' = lambda_inf (1-rho) - mu_inf rho; all others rho' = lambda_inf (1-rho)."""
    t = np.asarray(t, dtype=float)
    if regime.kind is RegimeKind.GAMMA:
        out = np.zeros_like(t)
    elif regime.kind in (RegimeKind.RECOVERY_NON_MODULATED, RegimeKind.RECOVERY_JOINT):
        out = recovery_mean_ode(statics.lambda_inf, statics.mu_inf, t)
    else:
        out = -np.expm1(-statics.lambda_inf * t)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def pathwise_centering(path: ChainPath, lam, gamma, t, n=None):
    """Realized-chain centering rho^n_t = 1 - exp(-n^{-gamma} Lambda_t).

    Lambda is the exact accumulated intensity of the raw lam along the
    path; n is required whenever gamma != 0 (the scaling needs it) and
    ignored otherwise.  t may be a scalar or an increasing grid.
    """
    if gamma != 0.0 and n is None:
        raise ValueError("n is required when gamma != 0")
    factor = 1.0 if gamma == 0.0 else float(n) ** (-gamma)
    t = np.asarray(t, dtype=float)
    lam_t = accumulated_intensity_grid(path, lam, np.atleast_1d(t))
    out = -np.expm1(-factor * lam_t)
    return float(out[0]) if t.ndim == 0 else out


def _ou_variance(a: float, c0: float, c1: float, c2: float, t: np.ndarray) -> np.ndarray:
    """Var_t of dX = -aX dt + sigma(t) dW with
    sigma(s)^2 = c0 + c1 e^{-as} + c2 e^{-2as}:
    e^{-2at} [ c0 (e^{2at}-1)/(2a) + c1 (e^{at}-1)/a + c2 t ]."""
    at = a * t
    with np.errstate(over="ignore"):
        term0 = c0 * -np.expm1(-2.0 * at) / (2.0 * a)
        term1 = c1 * (np.exp(-at) - np.exp(-2.0 * at)) / a
        term2 = c2 * t * np.exp(-2.0 * at)
    return term0 + term1 + term2


def _recovery_sigma1_coeffs(statics: ChainStatics):
    """Chain-noise bracket density sigma_1(s)^2 = Phi_s S Phi_s^T with
    Phi_s = (1-rho_s) lam^T - rho_s mu^T, expanded in powers of e^{-as}:
    returns (A, B, C) with sigma_1(s)^2 = A + B e^{-as} + C e^{-2as}."""
    a = statics.lambda_inf + statics.mu_inf
    r = statics.lambda_inf / a
    u = (1.0 - r) * statics.lam - r * statics.mu
    v = r * (statics.lam + statics.mu)
    A = float(u @ statics.S @ u)
    B = 2.0 * float(u @ statics.S @ v)
    C = float(v @ statics.S @ v)
    return A, B, C


def _recovery_sigma2_coeffs(statics: ChainStatics):
    """Jump-noise bracket density sigma_2(s)^2 = lambda_inf (1-rho_s)
    + mu_inf rho_s = c0 + c1 e^{-as}."""
    lam, mu = statics.lambda_inf, statics.mu_inf
    a = lam + mu
    return 2.0 * lam * mu / a, lam * (lam - mu) / a


def limit_variance_curve(regime: Regime, statics: ChainStatics, t):
    """Marginal variance of the limit process at time t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    L = statics.lambda_inf
    if regime.kind is RegimeKind.GAMMA:
        out = L * t
    elif regime.kind in (
        RegimeKind.NON_MODULATED,
        RegimeKind.ITERATED_N_THEN_ALPHA,
        RegimeKind.ITERATED_ALPHA_THEN_N,
    ):
        out = np.exp(-L * t) * -np.expm1(-L * t)
    elif regime.kind is RegimeKind.JOINT_BETA:
        out = np.zeros_like(t)
        if regime.beta <= 1.0:
            out = out + statics.V * t * np.exp(-2.0 * L * t)
        if regime.beta >= 1.0:
            out = out + np.exp(-L * t) * -np.expm1(-L * t)
    elif regime.kind is RegimeKind.RECOVERY_NON_MODULATED:
        a = L + statics.mu_inf
        c0, c1 = _recovery_sigma2_coeffs(statics)
        out = _ou_variance(a, c0, c1, 0.0, t)
    elif regime.kind is RegimeKind.RECOVERY_JOINT:
        a = L + statics.mu_inf
        out = np.zeros_like(t)
        if regime.beta <= 1.0:
            A, B, C = _recovery_sigma1_coeffs(statics)
            out = out + _ou_variance(a, A, B, C, t)
        if regime.beta >= 1.0:
            c0, c1 = _recovery_sigma2_coeffs(statics)
            out = out + _ou_variance(a, c0, c1, 0.0, t)
    else:  # pragma: no cover
        raise ValueError(f"unknown regime kind {regime.kind}")
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def conditional_limit_variance(path: ChainPath, lam, t):
    """Variance of the conditionally Gaussian limit given the chain:
    e^{-Lambda_t} - e^{-2 Lambda_t} (maximal 1/4 where Lambda_t = ln 2)."""
    t = np.asarray(t, dtype=float)
    lam_t = accumulated_intensity_grid(path, lam, np.atleast_1d(t))
    e = np.exp(-lam_t)
    out = e * (1.0 - e)
    return float(out[0]) if t.ndim == 0 else out


def limit_law(regime: Regime, statics: ChainStatics) -> LimitLaw:
    """Package a regime's limit SDE: drift rate, variance curve, and the
    brackets of its driving Gaussian martingales."""
    a = drift_rate(regime, statics)
    L = statics.lambda_inf
    V = statics.V

    def var(t, _r=regime, _s=statics):
        return limit_variance_curve(_r, _s, t)

    parts = []
    k = regime.kind
    if k in (
        RegimeKind.NON_MODULATED,
        RegimeKind.ITERATED_N_THEN_ALPHA,
        RegimeKind.ITERATED_ALPHA_THEN_N,
    ):
        parts.append(BracketPart("B", lambda t: -np.expm1(-L * np.asarray(t, float))))
    elif k is RegimeKind.JOINT_BETA:
        if regime.beta <= 1.0:
            # Chain noise enters the SDE as e^{-Lt} dG^H for a Brownian
            # motion with <G^H>_t = V t; folding the coefficient in
            # gives the driving martingale G_t = int_0^t e^{-Ls} dG^H_s
            # with the bracket below, so the parts stay additive.
            parts.append(
                BracketPart("G", lambda t: V / (2.0 * L) * -np.expm1(-2.0 * L * np.asarray(t, float)))
            )
        if regime.beta >= 1.0:
            parts.append(BracketPart("B", lambda t: -np.expm1(-L * np.asarray(t, float))))
    elif k is RegimeKind.GAMMA:
        parts.append(BracketPart("W", lambda t: L * np.asarray(t, float)))
    elif k is RegimeKind.RECOVERY_NON_MODULATED:
        c0, c1 = _recovery_sigma2_coeffs(statics)
        parts.append(
            BracketPart("B", lambda t: c0 * np.asarray(t, float) + c1 * -np.expm1(-a * np.asarray(t, float)) / a)
        )
    elif k is RegimeKind.RECOVERY_JOINT:
        if regime.beta <= 1.0:
            A, B, C = _recovery_sigma1_coeffs(statics)
            parts.append(
                BracketPart(
                    "G",
                    lambda t: A * np.asarray(t, float)
                    + B * -np.expm1(-a * np.asarray(t, float)) / a
                    + C * -np.expm1(-2.0 * a * np.asarray(t, float)) / (2.0 * a),
                )
            )
        if regime.beta >= 1.0:
            c0, c1 = _recovery_sigma2_coeffs(statics)
            parts.append(
                BracketPart(
                    "B", lambda t: c0 * np.asarray(t, float) + c1 * -np.expm1(-a * np.asarray(t, float)) / a
                )
            )
    return LimitLaw(drift_rate=a, variance_curve=var, diffusion_decomposition=tuple(parts))


def _increment_variances(law: LimitLaw, grid: np.ndarray) -> np.ndarray:
    """Exact Gaussian transition variances over consecutive grid cells:
    Var(t_{j}) - e^{-2a h} Var(t_{j-1}), from the closed-form curve."""
    a = law.drift_rate
    prev = np.concatenate(([0.0], grid[:-1]))
    vprev = np.array([law.variance_curve(t) for t in prev], dtype=float)
    vnext = np.array([law.variance_curve(t) for t in grid], dtype=float)
    incr = vnext - np.exp(-2.0 * a * (grid - prev)) * vprev
    if incr.min() < -1e-10:
        raise RuntimeError(f"negative transition variance {incr.min()}; curve is inconsistent")
    return np.clip(incr, 0.0, None)


def sample_limit_process(law: LimitLaw, grid, rng: RngStream):
    """Sample the limit SDE exactly on an increasing grid from X_0 = 0:
    X_{t+h} = e^{-ah} X_t + N(0, Var(t+h) - e^{-2ah} Var(t)).  No
    discretization bias: marginals match the variance curve exactly."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.array([])
    if grid.min() < 0.0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be increasing and nonnegative")
    gen = rng.generator
    incr = _increment_variances(law, grid)
    prev = np.concatenate(([0.0], grid[:-1]))
    decay = np.exp(-law.drift_rate * (grid - prev))
    out = np.empty(grid.shape[0])
    x = 0.0
    for j in range(grid.shape[0]):
        x = decay[j] * x + sqrt(incr[j]) * gen.standard_normal()
        out[j] = x
    return out


def sample_limit_matrix(law: LimitLaw, grid, n_paths: int, rng: RngStream) -> np.ndarray:
    """n_paths independent copies of sample_limit_process, vectorized per
    grid step; row i is one path."""
    grid = np.asarray(grid, dtype=float)
    if grid.min() < 0.0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be increasing and nonnegative")
    gen = rng.generator
    incr = _increment_variances(law, grid)
    prev = np.concatenate(([0.0], grid[:-1]))
    decay = np.exp(-law.drift_rate * (grid - prev))
    out = np.empty((n_paths, grid.shape[0]))
    x = np.zeros(n_paths)
    for j in range(grid.shape[0]):
        x = decay[j] * x + sqrt(incr[j]) * gen.standard_normal(n_paths)
        out[:, j] = x
    return out


def center_and_scale(path: CountingPath, regime: Regime, statics: ChainStatics,
                     grid, centering="deterministic"):
    """n^e (N_t - n rho_t) on the grid, e = scaling_exponent(regime).

    centering='deterministic' uses centering_curve; 'pathwise' uses the
    realized chain, rho^n_t = 1 - exp(-n^{-gamma} Lambda_t) (with the
    regime's gamma, 0 outside the GAMMA regime).  The algebraic identity
    n^{-1/2}(N - n rho) = n^{-1/2}(N - n rho^n) + n^{1/2}(rho^n - rho)
    holds to 1e-12 by construction.
    """
    grid = np.asarray(grid, dtype=float)
    n = path.n
    counts = path.counts_on_grid(grid).astype(float)
    if centering == "deterministic":
        rho = centering_curve(regime, statics, grid)
    elif centering == "pathwise":
        gamma = regime.gamma if regime.kind is RegimeKind.GAMMA else 0.0
        rho = pathwise_centering(path.chain, statics.lam, gamma, grid, n=n)
    else:
        raise ValueError(f"unknown centering {centering!r}")
    return float(n) ** scaling_exponent(regime) * (counts - n * np.asarray(rho))


def write_curve_csv(regime: Regime, statics: ChainStatics, grid, fileobj):
    """Limit-law curve export: time, mean (centering), variance, stddev."""
    grid = np.asarray(grid, dtype=float)
    mean = np.asarray(centering_curve(regime, statics, grid))
    var = np.asarray(limit_variance_curve(regime, statics, grid))
    w = csv.writer(fileobj, lineterminator="\n")
    w.writerow(["time", "mean", "variance", "stddev"])
    for j in range(grid.shape[0]):
        w.writerow([float(grid[j]), float(mean[j]), float(var[j]), float(sqrt(max(var[j], 0.0)))])
