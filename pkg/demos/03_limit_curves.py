"""
The Gaussian limit laws, regime by regime
=========================================

Every scaling regime of the centered count converges to a Gaussian
process with an explicit variance curve.  This prints the curves side
by side and checks two of their structural identities numerically.
"""

import numpy as np

from mmbinom import (
    Regime,
    RegimeKind,
    chain_statics,
    limit_law,
    limit_variance_curve,
    scaling_exponent,
    validate_generator,
)

Q = np.array([[-5.0, 1.0, 5.0], [2.0, -2.0, 5.0], [3.0, 1.0, -10.0]])
G = validate_generator(Q)
st = chain_statics(G, (0.1, 1.0, 3.0))

regimes = [
    ("fixed chain, n -> inf", Regime(RegimeKind.NON_MODULATED)),
    ("fast chain, then n", Regime(RegimeKind.ITERATED_ALPHA_THEN_N)),
    ("joint, slow chain (beta=0.5)", Regime(RegimeKind.JOINT_BETA, beta=0.5)),
    ("joint, critical (beta=1)", Regime(RegimeKind.JOINT_BETA, beta=1.0)),
    ("joint, fast chain (beta=2)", Regime(RegimeKind.JOINT_BETA, beta=2.0)),
    ("sparse intensity (gamma=0.5)", Regime(RegimeKind.GAMMA, gamma=0.5)),
]

grid = np.array([0.5, 1.0, 2.0, 3.0])
print("limit variance Var X_t by regime (scaling n^e):")
print("  t              :", "  ".join(f"{t:8.1f}" for t in grid))
for name, r in regimes:
    var = np.atleast_1d(limit_variance_curve(r, st, grid))
    e = scaling_exponent(r)
    print(f"  {name:29s} (e={e:+.2f}):", "  ".join(f"{v:8.4f}" for v in var))

# identity 1: at beta=1 the chain and jump noises are both present, and
# the curve is exactly the sum of the one-sided curves
lo = limit_variance_curve(Regime(RegimeKind.JOINT_BETA, beta=0.5), st, grid)
hi = limit_variance_curve(Regime(RegimeKind.JOINT_BETA, beta=2.0), st, grid)
cr = limit_variance_curve(Regime(RegimeKind.JOINT_BETA, beta=1.0), st, grid)
print()
print("beta-bracket sum residual |lo + hi - critical|:", np.abs(lo + hi - cr).max())

# identity 2: with a flat intensity vector the chain is invisible (V=0)
flat = chain_statics(G, (0.7, 0.7, 0.7))
print("flat intensities: V =", flat.V)

# the decomposition behind the critical curve: one bracket per noise
law = limit_law(Regime(RegimeKind.JOINT_BETA, beta=1.0), st)
print()
print(f"critical limit SDE: dX = -{law.drift_rate:.4f} X dt + ...; driving brackets at t=1:")
for part in law.diffusion_decomposition:
    print(f"  <{part.label}>_1 = {float(part.bracket(1.0)):.6f}")
