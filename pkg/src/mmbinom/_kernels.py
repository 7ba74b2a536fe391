"""Event-loop kernels (numba).

All kernels draw scalars straight from a numpy Generator, so a given
(seed, stream) pair produces the same event sequence as the equivalent
pure-Python loop would.  Buffers grow by doubling; trimmed copies are
returned.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def chain_ssa(exit_rates, cum_next, z0, horizon, gen):
    # exit_rates[i]: total leave rate of state i (speed already folded in)
    # cum_next[i, j]: cumulative next-state law of state i, last entry 1.0
    cap = 256
    times = np.empty(cap, np.float64)
    states = np.empty(cap, np.int64)
    m = 0
    t = 0.0
    i = z0
    while True:
        r = exit_rates[i]
        if r <= 0.0:
            break
        t += gen.standard_exponential() / r
        if t > horizon:
            break
        u = gen.random()
        j = 0
        while u >= cum_next[i, j]:
            j += 1
        if m == cap:
            cap *= 2
            nt = np.empty(cap, np.float64)
            ns = np.empty(cap, np.int64)
            nt[:m] = times
            ns[:m] = states
            times = nt
            states = ns
        times[m] = t
        states[m] = j
        m += 1
        i = j
    return times[:m].copy(), states[:m].copy()


@njit(cache=True)
def joint_ssa(exit_rates, cum_next, lam_eff, mu, n, z0, horizon, gen):
    # Exact competing-clocks simulation of (Z, N): in joint state (i, k)
    # the rates are chain exit_rates[i], default lam_eff[i]*(n-k),
    # recovery mu[i]*k.  Returns chain jumps and counting events.
    ccap = 256
    ecap = 256
    ctimes = np.empty(ccap, np.float64)
    cstates = np.empty(ccap, np.int64)
    etimes = np.empty(ecap, np.float64)
    emarks = np.empty(ecap, np.int8)
    cm = 0
    em = 0
    t = 0.0
    i = z0
    k = 0
    while True:
        rc = exit_rates[i]
        rb = lam_eff[i] * (n - k)
        rd = mu[i] * k
        total = rc + rb + rd
        if total <= 0.0:
            break
        t += gen.standard_exponential() / total
        if t > horizon:
            break
        u = gen.random() * total
        if u < rc:
            j = 0
            w = gen.random()
            while w >= cum_next[i, j]:
                j += 1
            if cm == ccap:
                ccap *= 2
                nt = np.empty(ccap, np.float64)
                ns = np.empty(ccap, np.int64)
                nt[:cm] = ctimes
                ns[:cm] = cstates
                ctimes = nt
                cstates = ns
            ctimes[cm] = t
            cstates[cm] = j
            cm += 1
            i = j
        else:
            if em == ecap:
                ecap *= 2
                nt = np.empty(ecap, np.float64)
                nm = np.empty(ecap, np.int8)
                nt[:em] = etimes
                nm[:em] = emarks
                etimes = nt
                emarks = nm
            if u < rc + rb:
                k += 1
                etimes[em] = t
                emarks[em] = 1
            else:
                k -= 1
                etimes[em] = t
                emarks[em] = -1
            em += 1
    return (
        ctimes[:cm].copy(),
        cstates[:cm].copy(),
        etimes[:em].copy(),
        emarks[:em].copy(),
    )


@njit(cache=True)
def thinning_grid(
    exit_rates,
    cum_next,
    lam_eff,
    lam_max,
    n,
    z0,
    grid,
    iid_gap,
    pi_cum,
    gen,
):
    # Exact Lewis-Shedler thinning for the pure-default process (mu = 0):
    # proposals at rate lam_max*(n-k) dominate the true intensity
    # lam_eff[Z_t]*(n-k).  The chain is only revealed at proposal times;
    # when the elapsed real-time gap is at least iid_gap the state is a
    # fresh stationary draw (mixing certified by the caller), otherwise
    # the chain is evolved jump by jump.  Returns N at the grid times.
    out = np.empty(grid.shape[0], np.int64)
    gi = 0
    t = 0.0
    k = 0
    tz = 0.0
    iz = z0
    while gi < grid.shape[0]:
        rate = lam_max * (n - k)
        if rate <= 0.0:
            break
        t_next = t + gen.standard_exponential() / rate
        while gi < grid.shape[0] and grid[gi] < t_next:
            out[gi] = k
            gi += 1
        if gi >= grid.shape[0]:
            break
        t = t_next
        if t - tz >= iid_gap:
            u = gen.random()
            j = 0
            while u >= pi_cum[j]:
                j += 1
            iz = j
        else:
            while True:
                r = exit_rates[iz]
                if r <= 0.0:
                    break
                dt = gen.standard_exponential() / r
                if tz + dt > t:
                    break
                tz += dt
                u = gen.random()
                j = 0
                while u >= cum_next[iz, j]:
                    j += 1
                iz = j
        tz = t
        if gen.random() * lam_max < lam_eff[iz]:
            k += 1
    while gi < grid.shape[0]:
        out[gi] = k
        gi += 1
    return out
