"""Background-chain algebra and exact chain-path simulation.

The generator Q of the modulating chain lives in COLUMN convention
throughout: q_ji is the rate of jumping from state i to state j, columns
sum to zero (1^T Q = 0), and the stationary law solves Q pi = 0.  The
ergodic projector is Pi = pi 1^T, the fundamental matrix F = (Pi-Q)^{-1}
and the deviation matrix D = F - Pi.  In this convention the F-identities
read 1^T F = 1^T and F pi = pi (their transposes hold in the row
convention).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import ceil, log

import numpy as np

from . import _kernels
from .numerics import DenseMatrix, RngStream, matrix_exponential_action, solve_linear

__all__ = [
    "Generator",
    "ChainStatics",
    "ChainPath",
    "InvalidGeneratorError",
    "validate_generator",
    "stationary_distribution",
    "deviation_matrix",
    "chain_statics",
    "ergodic_variance",
    "sample_chain_path",
    "accumulated_intensity",
]

STATIONARY = "stationary"


class InvalidGeneratorError(ValueError):
    """Rejected generator matrix; ``reason`` is one of
    'entries', 'column-sums', 'reducible'."""

    def __init__(self, reason, message):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class Generator:
    """Validated irreducible CTMC generator in column convention."""

    d: int
    Q: DenseMatrix

    @cached_property
    def exit_rates(self) -> np.ndarray:
        r = -np.diag(self.Q.array)
        r.setflags(write=False)
        return r

    @cached_property
    def _cum_next(self) -> np.ndarray:
        # cumulative next-state law per current state (row-indexed by the
        # current state for kernel locality); degenerate rows for d=1
        q = self.Q.array
        cum = np.zeros((self.d, self.d))
        for i in range(self.d):
            if self.exit_rates[i] > 0.0:
                p = q[:, i].copy()
                p[i] = 0.0
                p /= self.exit_rates[i]
                cum[i] = np.cumsum(p)
            cum[i, self.d - 1] = 1.0
        cum.setflags(write=False)
        return cum


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    d = adj.shape[0]
    seen = np.zeros(d, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        i = stack.pop()
        for j in range(d):
            if adj[i, j] and not seen[j]:
                seen[j] = True
                stack.append(j)
    return seen


def validate_generator(Q, convention="column") -> Generator:
    """Validate a rate matrix and wrap it as a Generator.

    Parameters
    ----------
    Q : DenseMatrix or array-like, square
    convention : {'column', 'row'}
        Row-convention input (rows sum to zero) is transposed into the
        canonical column convention.

    Raises
    ------
    InvalidGeneratorError
        Distinct diagnostics for negative off-diagonal entries, column
        sums away from zero, and reducibility.
    """
    if convention not in ("column", "row"):
        raise ValueError(f"unknown convention {convention!r}")
    if isinstance(Q, DenseMatrix):
        q = np.array(Q.array)
    else:
        q = np.array(Q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InvalidGeneratorError("entries", "generator must be a square matrix")
    if not np.all(np.isfinite(q)):
        raise InvalidGeneratorError("entries", "generator entries must be finite")
    if convention == "row":
        q = q.T.copy()
    d = q.shape[0]
    off = q - np.diag(np.diag(q))
    if off.min() < 0.0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise InvalidGeneratorError(
            "entries",
            f"off-diagonal rate q[{i},{j}] = {q[i, j]} is negative",
        )
    scale = max(np.abs(q).max(), 1.0)
    colsum = q.sum(axis=0)
    if np.abs(colsum).max() > 1e-12 * scale:
        i = int(np.argmax(np.abs(colsum)))
        raise InvalidGeneratorError(
            "column-sums",
            f"column {i} sums to {colsum[i]:.3e}, not 0 (column convention)",
        )
    if d > 1:
        adj = off.T > 0.0  # adj[i, j]: edge i -> j (rate q_ji)
        fwd = _reachable(adj, 0)
        bwd = _reachable(adj.T, 0)
        if not (fwd.all() and bwd.all()):
            missing = int(np.argmin(fwd if not fwd.all() else bwd))
            raise InvalidGeneratorError(
                "reducible",
                f"chain is not irreducible (state {missing} not strongly connected to state 0)",
            )
    return Generator(d, DenseMatrix.from_array(q))


def stationary_distribution(G: Generator) -> np.ndarray:
    """Solve Q pi = 0, 1^T pi = 1 with the last balance row replaced by
    the normalization equation."""
    if G.d == 1:
        return np.array([1.0])
    A = np.array(G.Q.array)
    A[-1, :] = 1.0
    b = np.zeros(G.d)
    b[-1] = 1.0
    pi = solve_linear(A, b)
    if pi.min() <= 0.0:
        raise RuntimeError("internal error: nonpositive stationary entry for an irreducible chain")
    return pi / pi.sum()


def deviation_matrix(G: Generator):
    """Fundamental matrix F = (Pi-Q)^{-1} and deviation matrix D = F - Pi.

    Returns (F, D) satisfying QF = FQ = Pi - I, 1^T F = 1^T, F pi = pi,
    1^T D = 0 and D pi = 0 to 1e-10.
    """
    pi = stationary_distribution(G)
    Pi = np.outer(pi, np.ones(G.d))
    A = Pi - G.Q.array
    F = np.column_stack([solve_linear(A, e) for e in np.eye(G.d)])
    D = F - Pi
    return DenseMatrix.from_array(F), DenseMatrix.from_array(D)


@dataclass(frozen=True, eq=False)
class ChainStatics:
    """Ergodic quantities of a (Q, lambda, mu) triple, immutable and
    shareable: pi, Pi = pi 1^T, F, D, the averaged rates lambda_inf and
    mu_inf, the ergodic variance V = lam^T S lam with
    S = D diag{pi} + diag{pi} D^T, plus the ingredients (lam, mu, S)
    needed by the recovery variance curves."""

    pi: np.ndarray
    Pi: DenseMatrix
    F: DenseMatrix
    D: DenseMatrix
    lambda_inf: float
    mu_inf: float
    V: float
    lam: np.ndarray
    mu: np.ndarray
    S: np.ndarray


def _clip_variance(v: float) -> float:
    if v < -1e-12:
        raise RuntimeError(f"ergodic variance {v} below -1e-12; S should be nonnegative definite")
    return max(v, 0.0)


def ergodic_variance(lam, statics: ChainStatics) -> float:
    """V = lam^T (diag{pi} D^T + D diag{pi}) lam, clipped to 0 when a
    tiny negative (> -1e-12) round-off appears."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape[0] != statics.pi.shape[0]:
        raise ValueError(
            f"dimension mismatch: lambda has {lam.shape[0]} entries, chain has {statics.pi.shape[0]} states"
        )
    return _clip_variance(float(lam @ statics.S @ lam))


def chain_statics(G: Generator, lam, mu=None) -> ChainStatics:
    """Compute all ergodic quantities for a generator and rate vectors."""
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.shape[0] != G.d:
        raise ValueError(f"lambda has {lam.shape[0]} entries for a {G.d}-state chain")
    if mu is None:
        mu = np.zeros(G.d)
    else:
        mu = np.asarray(mu, dtype=float).ravel()
        if mu.shape[0] != G.d:
            raise ValueError(f"mu has {mu.shape[0]} entries for a {G.d}-state chain")
    pi = stationary_distribution(G)
    F, D = deviation_matrix(G)
    S = D.array @ np.diag(pi) + np.diag(pi) @ D.array.T
    S.setflags(write=False)
    pi.setflags(write=False)
    lam = lam.copy()
    mu = mu.copy()
    lam.setflags(write=False)
    mu.setflags(write=False)
    return ChainStatics(
        pi=pi,
        Pi=DenseMatrix.from_array(np.outer(pi, np.ones(G.d))),
        F=F,
        D=D,
        lambda_inf=float(lam @ pi),
        mu_inf=float(mu @ pi),
        V=_clip_variance(float(lam @ S @ lam)),
        lam=lam,
        mu=mu,
        S=S,
    )


@dataclass(frozen=True, eq=False)
class ChainPath:
    """Piecewise-constant chain trajectory on [0, horizon].

    jump_times is strictly increasing in (0, horizon]; post_jump_states
    holds the state entered at each jump; consecutive states differ.
    """

    horizon: float
    initial_state: int
    jump_times: np.ndarray
    post_jump_states: np.ndarray
    speed: float

    def __post_init__(self):
        self.jump_times.setflags(write=False)
        self.post_jump_states.setflags(write=False)

    @cached_property
    def _all_states(self) -> np.ndarray:
        s = np.concatenate(([self.initial_state], self.post_jump_states)).astype(np.int64)
        s.setflags(write=False)
        return s

    def state_at(self, t) -> int:
        """State at time t (right-continuous), by binary search."""
        if t < 0.0 or t > self.horizon * (1.0 + 1e-12):
            raise ValueError(f"t={t} outside the path horizon [0, {self.horizon}]")
        idx = int(np.searchsorted(self.jump_times, t, side="right"))
        return int(self._all_states[idx])

    def states_on_grid(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        idx = np.searchsorted(self.jump_times, grid, side="right")
        return self._all_states[idx]


def sample_chain_path(G: Generator, speed, z0, T, rng: RngStream) -> ChainPath:
    """Exact CTMC path: holding times Exponential(speed*(-q_ii)), next
    state j with probability q_ji / (-q_ii).

    z0 is a state index or the string 'stationary' (a draw from pi).
    """
    if T <= 0:
        raise ValueError("horizon must be positive")
    if speed <= 0:
        raise ValueError("speed must be positive")
    gen = rng.generator
    z0 = _resolve_initial_state(G, z0, gen)
    times, states = _kernels.chain_ssa(
        G.exit_rates * float(speed), G._cum_next, z0, float(T), gen
    )
    return ChainPath(
        horizon=float(T),
        initial_state=z0,
        jump_times=times,
        post_jump_states=states,
        speed=float(speed),
    )


def _resolve_initial_state(G: Generator, z0, gen) -> int:
    if isinstance(z0, str):
        if z0 != STATIONARY:
            raise ValueError(f"unknown initial state spec {z0!r}")
        pi_cum = np.cumsum(stationary_distribution(G))
        pi_cum[-1] = 1.0
        return int(np.searchsorted(pi_cum, gen.random(), side="right"))
    z0 = int(z0)
    if not 0 <= z0 < G.d:
        raise ValueError(f"initial state {z0} out of range for {G.d} states")
    return z0


def _sojourn_cumulative(path: ChainPath, lam: np.ndarray):
    """Cumulative integral of lam[Z_s] at the jump times (and 0)."""
    times = np.concatenate(([0.0], path.jump_times))
    rates = lam[path._all_states]
    cum = np.concatenate(([0.0], np.cumsum(rates[:-1] * np.diff(times))))
    return times, rates, cum


def accumulated_intensity(path: ChainPath, lam, t) -> float:
    """Exact Lambda_t = integral of lam[Z_s] ds over [0, t]: the sum of
    per-state sojourns, piecewise linear in t."""
    if t < 0.0 or t > path.horizon * (1.0 + 1e-12):
        raise ValueError(f"t={t} outside the path horizon [0, {path.horizon}]")
    lam = np.asarray(lam, dtype=float)
    times, rates, cum = _sojourn_cumulative(path, lam)
    idx = int(np.searchsorted(times, t, side="right")) - 1
    return float(cum[idx] + rates[idx] * (t - times[idx]))


def accumulated_intensity_grid(path: ChainPath, lam, grid) -> np.ndarray:
    """Vectorized accumulated_intensity over an increasing grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0.0 or grid.max() > path.horizon * (1.0 + 1e-12)):
        raise ValueError("grid outside the path horizon")
    lam = np.asarray(lam, dtype=float)
    times, rates, cum = _sojourn_cumulative(path, lam)
    idx = np.searchsorted(times, grid, side="right") - 1
    return cum[idx] + rates[idx] * (grid - times[idx])


@lru_cache(maxsize=64)
def iid_cutoff(G: Generator, tol=5e-17) -> float:
    """Unit-speed time gap after which the conditional law of the chain
    is within total-variation tol of pi, for every initial state.

    Uses the exact semigroup identity (exp(Q d) - Pi)^m = exp(Q m d) - Pi:
    one measured contraction factor eps = ||exp(Q d) - Pi||_1 certifies
    ||exp(Q m d) - Pi||_1 <= eps^m, so the cutoff is m*d with
    m = ceil(log(2 tol) / log(eps + slack)), slack covering the 1e-12
    accuracy of the measured eps itself.
    """
    if G.d == 1:
        return 0.0
    pi = stationary_distribution(G)
    Pi = np.outer(pi, np.ones(G.d))
    delta = 1.0
    for _ in range(200):
        E = np.column_stack(
            [matrix_exponential_action(G.Q.array, delta, e) for e in np.eye(G.d)]
        ) - Pi
        eps = np.abs(E).sum(axis=0).max()
        if eps <= 0.5:
            break
        delta *= 2.0
    else:
        raise RuntimeError("mixing cutoff search failed to contract")
    eps = min(eps + 2e-12, 0.75)
    m = max(1, int(ceil(log(2.0 * tol) / log(eps))))
    return m * delta
