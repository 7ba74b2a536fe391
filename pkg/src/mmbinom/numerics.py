"""Dense numerics used everywhere else: small linear algebra, matrix
exponentials, special functions, and the reproducible RNG contract.

Everything here is deliberately small-scale (state spaces of dimension
d <= 100) and tuned for exactness-to-tolerance rather than throughput.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import ceil, exp, log2, pi, sqrt

import numpy as np
from scipy.special import erfc

__all__ = [
    "DenseMatrix",
    "RngStream",
    "SingularMatrixError",
    "solve_linear",
    "matrix_exponential_action",
    "normal_cdf",
    "kolmogorov_pvalue",
]

_U64_MASK = (1 << 64) - 1


class SingularMatrixError(ValueError):
    """Raised when elimination hits a pivot that is zero to working precision."""


@dataclass(frozen=True)
class DenseMatrix:
    """Immutable dense matrix with row-major entries.

    Thin validated container; numerical work happens on the ``array``
    view.  All entries must be finite on construction.
    """

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("DenseMatrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"entry count {len(self.entries)} != rows*cols = {self.rows * self.cols}"
            )
        object.__setattr__(self, "entries", tuple(float(x) for x in self.entries))
        if not all(np.isfinite(self.entries)):
            raise ValueError("DenseMatrix entries must be finite")

    @classmethod
    def from_array(cls, a) -> "DenseMatrix":
        arr = np.asarray(a, dtype=float)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(arr.shape[0], arr.shape[1], tuple(arr.ravel(order="C")))

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.entries, dtype=float).reshape(self.rows, self.cols)
        arr.setflags(write=False)
        return arr

    @property
    def shape(self):
        return (self.rows, self.cols)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by (master_seed, stream_index).

    Backed by the counter-based Philox generator, so substreams are
    derived arithmetically from the key: equal keys give bitwise-equal
    sequences, distinct indices give statistically independent streams.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    @cached_property
    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _U64_MASK, self.stream_index & _U64_MASK],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))


def _as_array(A, square=False) -> np.ndarray:
    if isinstance(A, DenseMatrix):
        a = A.array
    else:
        a = np.asarray(A, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _lu_factor(a: np.ndarray):
    """Partial-pivoting LU in place; returns (lu, piv).

    Pivot threshold 1e-13 * max row norm of the input, to match the
    1e-10 residual contract of solve_linear.
    """
    lu = a.copy()
    n = lu.shape[0]
    piv = np.arange(n)
    row_norm = np.abs(a).sum(axis=1).max()
    threshold = 1e-13 * row_norm
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= threshold:
            raise SingularMatrixError(
                f"matrix is singular to working precision at pivot step {k} "
                f"(pivot magnitude {abs(lu[p, k]):.3e} <= {threshold:.3e})"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            piv[[k, p]] = piv[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, piv


def _lu_solve(lu: np.ndarray, piv: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = b[piv].astype(float)
    for k in range(1, n):          # forward: L y = P b (unit diagonal)
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):  # back: U x = y
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def solve_linear(A, b):
    """Solve A x = b by partial-pivoting elimination.

    Parameters
    ----------
    A : DenseMatrix or array-like, square
    b : vector

    Returns
    -------
    numpy.ndarray
        Solution x with ``max|Ax-b| <= 1e-10 * (1 + max|b|)``; a couple
        of iterative-refinement sweeps keep the residual near machine
        precision for condition numbers up to ~1e6.

    Raises
    ------
    SingularMatrixError
        If a pivot is zero to working precision (names the pivot step).
    """
    a = _as_array(A, square=True)
    bv = np.asarray(b, dtype=float).ravel()
    if bv.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: A is {a.shape}, b has {bv.shape[0]}")
    lu, piv = _lu_factor(a)
    x = _lu_solve(lu, piv, bv)
    for _ in range(2):
        r = bv - a @ x
        if np.abs(r).max() <= 1e-14 * (1.0 + np.abs(bv).max()):
            break
        x = x + _lu_solve(lu, piv, r)
    return x


# Uniformization substeps are capped so the leading Poisson weight
# exp(-eta*dt) stays inside the normal double range.
_MAX_ETA_DT = 500.0


def _is_generator_like(a: np.ndarray) -> bool:
    scale = np.abs(a).max()
    if scale == 0.0:
        return True
    off = a - np.diag(np.diag(a))
    if off.min() < -1e-12 * scale:
        return False
    return a.sum(axis=0).max() <= 1e-12 * scale


def _uniformized_action(a: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    eta = np.abs(np.diag(a)).max() + 1.0
    B = np.eye(a.shape[0]) + a / eta
    nsub = max(1, int(ceil(eta * t / _MAX_ETA_DT)))
    lam = eta * t / nsub
    w0 = exp(-lam)
    kmax = int(lam + 40.0 * sqrt(lam + 4.0) + 50.0)
    for _ in range(nsub):
        term = v
        weight = w0
        acc = weight * v
        cum = weight
        k = 0
        while cum < 1.0 - 1e-15 and k < kmax:
            k += 1
            term = B @ term
            weight *= lam / k
            acc = acc + weight * term
            cum += weight
        # Early exit at the numerical fixed point: exp(a s) is a
        # TV-contraction toward it for every s > 0, so once a substep
        # moves v by <= 1 ulp the remaining substeps cannot move it
        # further.  This caps the loop when eta*t is astronomically
        # large (fast-chain regimes), where v reaches stationarity
        # within a few substeps.
        if np.abs(acc - v).max() <= 1e-16 * max(1.0, np.abs(acc).max()):
            return acc
        v = acc
    return v


def _taylor_action(a: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    m = a * t
    norm1 = np.abs(m).sum(axis=0).max()
    nsq = max(0, int(ceil(log2(norm1)))) if norm1 > 1.0 else 0
    m = m / (2 ** nsq)
    E = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, 60):
        term = term @ m / k
        E = E + term
        if np.abs(term).max() <= 1e-18 * np.abs(E).max():
            break
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(nsq):
            E = E @ E
            if not np.all(np.isfinite(E)):
                raise OverflowError("matrix exponential overflowed double precision")
        out = E @ v
    if not np.all(np.isfinite(out)):
        raise OverflowError("matrix exponential overflowed double precision")
    return out


def matrix_exponential_action(A, t, v):
    """Compute exp(A t) v.

    Uses uniformization when A is a generator or sub-generator
    (off-diagonals >= 0, column sums <= 0), which is exact to a Poisson
    tail below 1e-15; otherwise scaling-and-squaring with a Taylor
    series.  Overflow raises OverflowError rather than returning inf.

    Parameters
    ----------
    A : DenseMatrix or array-like, square
    t : float, >= 0
    v : vector
    """
    a = _as_array(A, square=True)
    vv = np.asarray(v, dtype=float).ravel()
    if vv.shape[0] != a.shape[0]:
        raise ValueError("dimension mismatch between A and v")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0 or np.abs(a).max() == 0.0:
        return vv.copy()
    if _is_generator_like(a):
        return _uniformized_action(a, float(t), vv)
    return _taylor_action(a, float(t), vv)


def normal_cdf(x):
    """Standard normal CDF via the complementary error function.

    Phi(x) = erfc(-x / sqrt(2)) / 2, absolute error well below 1e-12.
    """
    return float(0.5 * erfc(-float(x) / sqrt(2.0)))


def _kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution, P(K > x)."""
    if x <= 0.0:
        return 1.0
    if x < 1.18:
        # Jacobi-theta form of the CDF converges fast for small x.
        w = pi * pi / (8.0 * x * x)
        s = 0.0
        for k in range(1, 201, 2):
            term = exp(-k * k * w)
            s += term
            if term < 1e-17 * max(s, 1.0):
                break
        return min(1.0, max(0.0, 1.0 - sqrt(2.0 * pi) / x * s))
    s = 0.0
    sign = 1.0
    for k in range(1, 121):
        term = exp(-2.0 * k * k * x * x)
        s += sign * term
        sign = -sign
        if term < 1e-17:
            break
    return min(1.0, max(0.0, 2.0 * s))


def kolmogorov_pvalue(stat, n_samples):
    """Asymptotic p-value of a one-sample KS statistic.

    Parameters
    ----------
    stat : float, >= 0
        The KS sup-distance D_n.
    n_samples : int
        Sample size; the statistic is referred to sqrt(n) * D_n.
    """
    if stat < 0:
        raise ValueError("KS statistic must be nonnegative")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    return _kolmogorov_sf(sqrt(n_samples) * float(stat))
