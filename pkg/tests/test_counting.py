"""Simulation engines: joint event-driven, thinning, and the conditional
binomial law, cross-checked against each other and closed forms."""

import io

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from numpy.testing import assert_allclose

from mmbinom import (
    ProcessSpec,
    RngStream,
    UnsupportedRegimeError,
    conditional_binomial_sample,
    expected_fraction_semianalytic,
    recovery_mean_ode,
    sample_chain_path,
    sample_counts_on_grid,
    simulate_counting,
    validate_generator,
)
from mmbinom.counting import write_event_csv

from conftest import REF_LAM, REF_Q

SINGLE = validate_generator(np.array([[0.0]]))


def _two_sample_chisq(a, b, min_expected=10.0):
    """Two-sample chi-square on pooled integer samples; returns p."""
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    edges = np.arange(lo, hi + 2)
    ca, _ = np.histogram(a, bins=edges)
    cb, _ = np.histogram(b, bins=edges)
    tot = ca + cb
    # merge sparse bins left to right
    bins_a, bins_b, acc_a, acc_b, acc = [], [], 0, 0, 0
    for x, y, t in zip(ca, cb, tot):
        acc_a, acc_b, acc = acc_a + x, acc_b + y, acc + t
        if acc * 0.5 >= min_expected:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
            acc_a = acc_b = acc = 0
    if acc:
        bins_a[-1] += acc_a
        bins_b[-1] += acc_b
    obs = np.array([bins_a, bins_b], dtype=float)
    _, p, _, _ = scipy.stats.chi2_contingency(obs)
    return float(p)


# ------------------------------------------------------------ ProcessSpec --

def test_spec_validation_errors():
    with pytest.raises(ValueError):
        ProcessSpec(n=0, lam=(1.0,))
    with pytest.raises(ValueError):
        ProcessSpec(n=5, lam=(-1.0,))
    with pytest.raises(ValueError):
        ProcessSpec(n=5, lam=(1.0,), mu=(1.0, 2.0))
    with pytest.raises(ValueError):
        ProcessSpec(n=5, lam=(1.0,), chain_speed=0.0)
    with pytest.raises(ValueError):
        ProcessSpec(n=5, lam=(1.0,), horizon=-1.0)
    with pytest.raises(ValueError):
        ProcessSpec(n=5, lam=(1.0,), mu=(0.5,), gamma=0.5)


def test_spec_effective_intensity():
    spec = ProcessSpec(n=10000, lam=(2.0,), gamma=0.5)
    assert spec.lam_effective[0] == pytest.approx(0.02, abs=1e-15)
    assert not spec.has_recovery
    assert ProcessSpec(n=5, lam=(1.0,), mu=(0.1,)).has_recovery


# ------------------------------------------------------------- path shape --

def test_counting_path_structure(ref_gen):
    spec = ProcessSpec(n=50, lam=REF_LAM, chain_speed=2.0, horizon=2.0)
    path = simulate_counting(spec, ref_gen, RngStream(20, 0))
    assert np.all(np.diff(path.event_times) > 0)
    assert np.all(path.event_marks == 1)  # no recovery: defaults only
    assert path.counts.max() <= 50
    assert path.count_at(0.0) == 0
    assert path.count_at(2.0) == path.counts[-1] if path.counts.size else 0
    # chain events and counting events never coincide
    both = np.intersect1d(path.event_times, path.chain.jump_times)
    assert both.size == 0


def test_counts_on_grid_matches_count_at(ref_gen):
    spec = ProcessSpec(n=30, lam=REF_LAM, horizon=3.0)
    path = simulate_counting(spec, ref_gen, RngStream(21, 0))
    grid = np.linspace(0.0, 3.0, 17)
    assert_allclose(path.counts_on_grid(grid),
                    [path.count_at(t) for t in grid], rtol=0, atol=0)


def test_recovery_counts_stay_in_range():
    spec = ProcessSpec(n=40, lam=(1.0,), mu=(1.0,), horizon=10.0)
    path = simulate_counting(spec, SINGLE, RngStream(22, 0))
    assert set(np.unique(path.event_marks)) <= {-1, 1}
    assert path.counts.min() >= 0
    assert path.counts.max() <= 40


# ----------------------------------------------------- exact marginal law --

def test_single_state_marginal_is_binomial():
    # d=1: N_t ~ Bin(n, 1-e^{-lam t}) exactly; chi-square at M=4000
    n, lam, t, M = 80, 1.0, 1.0, 4000
    spec = ProcessSpec(n=n, lam=(lam,), horizon=t)
    draws = np.array([simulate_counting(spec, SINGLE, RngStream(23, i)).count_at(t)
                      for i in range(M)])
    p = 1.0 - np.exp(-lam * t)
    ks = np.arange(n + 1)
    pmf = scipy.stats.binom.pmf(ks, n, p)
    expected = M * pmf
    # merge bins to expected >= 10
    obs_counts = np.bincount(draws, minlength=n + 1).astype(float)
    obs_m, exp_m, oa, ea = [], [], 0.0, 0.0
    for o, e in zip(obs_counts, expected):
        oa += o
        ea += e
        if ea >= 10.0:
            obs_m.append(oa)
            exp_m.append(ea)
            oa = ea = 0.0
    obs_m[-1] += oa
    exp_m[-1] += ea
    stat, pval = scipy.stats.chisquare(obs_m, f_exp=np.array(exp_m) * sum(obs_m) / sum(exp_m))
    assert pval > 0.01, (stat, pval)


def test_joint_vs_conditional_binomial(ref_gen):
    # modulated case: joint SSA marginal == Bin(n, 1-exp(-Lambda)) mixture
    n, t, M = 100, 1.0, 3000
    spec = ProcessSpec(n=n, lam=REF_LAM, chain_speed=5.0, horizon=t)
    ssa = np.array([simulate_counting(spec, ref_gen, RngStream(24, i)).count_at(t)
                    for i in range(M)])
    cond = np.empty(M, dtype=int)
    for i in range(M):
        rng = RngStream(25, i)
        chain = sample_chain_path(ref_gen, 5.0, "stationary", t, rng)
        cond[i] = conditional_binomial_sample(chain, spec.lam, n, t, rng)
    p = _two_sample_chisq(ssa, cond)
    assert p > 0.01, p


def test_joint_vs_thinning_engine(ref_gen):
    # same law through both grid engines (fast chain so thinning's lazy
    # iid branch is exercised)
    n, t, M = 60, 1.0, 3000
    spec = ProcessSpec(n=n, lam=REF_LAM, chain_speed=400.0, horizon=t)
    grid = np.array([t])
    a = np.array([sample_counts_on_grid(spec, ref_gen, grid, RngStream(26, i), engine="joint")[0]
                  for i in range(M)])
    b = np.array([sample_counts_on_grid(spec, ref_gen, grid, RngStream(27, i), engine="thinning")[0]
                  for i in range(M)])
    p = _two_sample_chisq(a, b)
    assert p > 0.01, p


def test_engine_validation(ref_gen):
    spec = ProcessSpec(n=10, lam=REF_LAM, horizon=1.0)
    with pytest.raises(ValueError):
        sample_counts_on_grid(spec, ref_gen, [0.5], RngStream(0, 0), engine="bogus")
    with pytest.raises(ValueError):
        sample_counts_on_grid(spec, ref_gen, [2.0], RngStream(0, 0))  # beyond horizon
    rec = ProcessSpec(n=10, lam=(1.0,), mu=(0.5,), horizon=1.0)
    with pytest.raises(UnsupportedRegimeError):
        sample_counts_on_grid(rec, SINGLE, [0.5], RngStream(0, 0), engine="thinning")


def test_conditional_binomial_rejects_recovery(ref_gen):
    chain = sample_chain_path(ref_gen, 1.0, 0, 1.0, RngStream(28, 0))
    with pytest.raises(UnsupportedRegimeError):
        conditional_binomial_sample(chain, REF_LAM, 10, 0.5, RngStream(28, 1), mu=(0.1, 0.0, 0.0))


# ------------------------------------------------------ semianalytic mean --

def test_semianalytic_single_state_closed_form():
    spec = ProcessSpec(n=100, lam=(0.7,), horizon=3.0)
    for t in (0.0, 0.5, 2.0, 3.0):
        assert expected_fraction_semianalytic(SINGLE, spec, 0, t) == pytest.approx(
            1.0 - np.exp(-0.7 * t), abs=1e-12)


def test_semianalytic_matches_ode_oracle(ref_gen):
    # independent route: integrate u' = (speed Q - diag lam) u directly
    spec = ProcessSpec(n=1000, lam=REF_LAM, chain_speed=7.0, horizon=3.0)
    Q = ref_gen.Q.array
    M = 7.0 * Q - np.diag(REF_LAM)
    z0 = np.array([1.0, 0.0, 0.0])
    sol = scipy.integrate.solve_ivp(lambda _, u: M @ u, (0.0, 3.0), z0,
                                    rtol=1e-11, atol=1e-13, dense_output=True)
    for t in (0.4, 1.0, 2.2, 3.0):
        mine = expected_fraction_semianalytic(ref_gen, spec, 0, t)
        oracle = 1.0 - sol.sol(t).sum()
        assert mine == pytest.approx(oracle, abs=1e-8)


def test_semianalytic_matches_monte_carlo(ref_gen):
    spec = ProcessSpec(n=400, lam=REF_LAM, chain_speed=10.0, horizon=1.5)
    t, M = 1.5, 2500
    fractions = np.array([
        simulate_counting(spec, ref_gen, RngStream(29, i)).count_at(t)
        for i in range(M)
    ]) / spec.n
    se = fractions.std(ddof=1) / np.sqrt(M)
    target = expected_fraction_semianalytic(ref_gen, spec, "stationary", t)
    assert abs(fractions.mean() - target) <= 4.0 * se


def test_semianalytic_rejects_recovery():
    rec = ProcessSpec(n=10, lam=(1.0,), mu=(0.5,), horizon=1.0)
    with pytest.raises(UnsupportedRegimeError):
        expected_fraction_semianalytic(SINGLE, rec, 0, 0.5)


# ---------------------------------------------------------------- recovery --

def test_recovery_mean_ode_values():
    # mu=0 reduction and the general closed form
    assert recovery_mean_ode(1.0, 0.0, 2.0) == pytest.approx(1.0 - np.exp(-2.0), abs=1e-15)
    lam, mu, t = 1.0, 0.5, 1.3
    a = lam + mu
    assert recovery_mean_ode(lam, mu, t) == pytest.approx(lam / a * (1 - np.exp(-a * t)), abs=1e-15)
    # ODE residual via central differences
    h = 1e-6
    rho = recovery_mean_ode(lam, mu, t)
    drho = (recovery_mean_ode(lam, mu, t + h) - recovery_mean_ode(lam, mu, t - h)) / (2 * h)
    assert drho == pytest.approx(lam * (1 - rho) - mu * rho, abs=1e-8)


def test_recovery_mean_matches_simulation():
    lam, mu, n, t, M = 1.0, 1.0, 200, 2.0, 2000
    spec = ProcessSpec(n=n, lam=(lam,), mu=(mu,), horizon=t)
    fr = np.array([simulate_counting(spec, SINGLE, RngStream(30, i)).count_at(t)
                   for i in range(M)]) / n
    se = fr.std(ddof=1) / np.sqrt(M)
    assert abs(fr.mean() - recovery_mean_ode(lam, mu, t)) <= 4.0 * se


def test_recovery_equilibrium_level():
    # lam = mu: rho_inf = 1/2
    assert recovery_mean_ode(2.0, 2.0, 50.0) == pytest.approx(0.5, abs=1e-12)


# --------------------------------------------------------------- CSV dump --

def test_write_event_csv_structure(ref_gen):
    spec = ProcessSpec(n=20, lam=REF_LAM, chain_speed=2.0, horizon=1.0)
    path = simulate_counting(spec, ref_gen, RngStream(31, 0), z0=1)
    buf = io.StringIO()
    write_event_csv(path, spec.lam, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,N,chain_state,intensity"
    first = lines[1].split(",")
    assert first[0] == "0.0" and first[1] == "0" and first[2] == "1"
    last = lines[-1].split(",")
    assert float(last[0]) == 1.0
    assert int(last[1]) == (path.counts[-1] if path.counts.size else 0)
    lam = np.array(REF_LAM)
    times = []
    for row in lines[1:]:
        t_, nval, state, inten = row.split(",")
        times.append(float(t_))
        assert float(inten) == pytest.approx(lam[int(state)], abs=0.0)
        assert 0 <= int(nval) <= 20
    assert times == sorted(times)
    # every event accounted for: chain jumps + counting events + 2 sentinels
    assert len(lines) - 1 == path.event_times.size + path.chain.jump_times.size + 2
