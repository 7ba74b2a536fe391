"""A small replicated Monte-Carlo run against the critical-regime law.

M = 400 replicates of n = alpha = 500 obligors, centered and scaled,
compared to the closed-form variance curve and the Gaussian marginal.
(The acceptance suite runs the same machinery at full size.)
"""

import numpy as np

from mmbinom import (
    ExperimentConfig,
    ProcessSpec,
    Regime,
    RegimeKind,
    run_experiment,
    validate_generator,
    variance_gate,
)

Q = np.array([[-5.0, 1.0, 5.0], [2.0, -2.0, 5.0], [3.0, 1.0, -10.0]])

config = ExperimentConfig(
    spec=ProcessSpec(n=500, lam=(0.1, 1.0, 3.0), chain_speed=500.0, horizon=3.0),
    regime=Regime(RegimeKind.JOINT_BETA, beta=1.0),
    generator=validate_generator(Q),
    replicates=400,
    grid=(0.5, 1.0, 2.0, 3.0),
    master_seed=20260815,
)

summary = run_experiment(config)
print(f"M={config.replicates}, variance tolerance {config.rel_tol_effective:.1%}")
print()
print("time  emp var   theory    rel err   KS p")
for j, t in enumerate(summary.times):
    print(f"{t:4.1f}  {summary.emp_var[j]:.5f}  {summary.theory_var[j]:.5f}"
          f"  {summary.rel_err[j]:7.2%}  {summary.ks_p[j]:.3f}")

report = variance_gate(summary, config.rel_tol_effective)
print()
for line in report.lines:
    print(line)
print("gate:", "PASS" if report.passed else "FAIL")
