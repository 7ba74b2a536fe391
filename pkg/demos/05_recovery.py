# Defaults with recovery: obligors cure at rate mu and can default again.
# The default fraction follows a logistic-type ODE and the centered count
# converges to an Ornstein-Uhlenbeck process.

import numpy as np

from mmbinom import (
    ProcessSpec,
    Regime,
    RegimeKind,
    RngStream,
    chain_statics,
    limit_variance_curve,
    recovery_mean_ode,
    simulate_counting,
    validate_generator,
)


def main():
    G = validate_generator(np.array([[0.0]]))  # single state: plain rates
    lam, mu, n = 1.0, 0.5, 2000
    spec = ProcessSpec(n=n, lam=(lam,), mu=(mu,), horizon=4.0)
    st = chain_statics(G, (lam,), (mu,))

    grid = np.linspace(0.5, 4.0, 8)
    M = 500
    counts = np.empty((M, grid.size))
    for i in range(M):
        counts[i] = simulate_counting(spec, G, RngStream(11, i), z0=0).counts_on_grid(grid)

    rho = recovery_mean_ode(lam, mu, grid)
    print("default fraction vs the ODE mean rho_t (equilibrium 2/3):")
    print("  t        :", "  ".join(f"{t:7.2f}" for t in grid))
    print("  simulated:", "  ".join(f"{m:7.4f}" for m in counts.mean(0) / n))
    print("  rho_t    :", "  ".join(f"{r:7.4f}" for r in rho))

    # centered fluctuations against the OU variance curve
    hat = (counts - n * rho) / np.sqrt(n)
    var = limit_variance_curve(Regime(RegimeKind.RECOVERY_NON_MODULATED), st, grid)
    print()
    print("Var of the scaled centered count vs the OU curve:")
    print("  simulated:", "  ".join(f"{v:7.4f}" for v in hat.var(0, ddof=1)))
    print("  theory   :", "  ".join(f"{v:7.4f}" for v in var))
    # for the non-modulated model the OU curve equals rho_t(1 - rho_t) exactly
    print("  rho(1-rho):", " ".join(f"{v:7.4f}" for v in rho * (1 - rho)))


if __name__ == "__main__":
    main()
