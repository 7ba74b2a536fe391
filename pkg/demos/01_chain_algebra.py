"""
Chain algebra in five minutes
=============================

Stationary law, fundamental/deviation matrices, and the long-run
intensity statistics of the three-state reference model.
"""

import numpy as np

from mmbinom import (
    chain_statics,
    deviation_matrix,
    stationary_distribution,
    validate_generator,
)
from mmbinom.chain import iid_cutoff

# Column convention: Q[j, i] is the i -> j rate, columns sum to zero.
Q = np.array([[-5.0, 1.0, 5.0],
              [2.0, -2.0, 5.0],
              [3.0, 1.0, -10.0]])
lam = (0.1, 1.0, 3.0)

G = validate_generator(Q)
pi = stationary_distribution(G)
F, D = deviation_matrix(G)

np.set_printoptions(precision=6, suppress=True)
print("stationary law pi:", pi)
print("  (exact: (7.5, 17.5, 4)/29 =", np.array([7.5, 17.5, 4.0]) / 29.0, ")")
print()
print("fundamental matrix F = (pi 1^T - Q)^-1:")
print(F.array)
print("deviation matrix D = F - pi 1^T:")
print(D.array)

# The identities the matrices satisfy (residuals at machine precision):
ones = np.ones(3)
Pi = np.outer(pi, ones)
print()
print("residual of Q F = pi 1^T - I :", np.abs(Q @ F.array - (Pi - np.eye(3))).max())
print("residual of 1^T F = 1^T     :", np.abs(ones @ F.array - ones).max())
print("residual of 1^T D = 0       :", np.abs(ones @ D.array).max())
print("residual of D pi = 0        :", np.abs(D.array @ pi).max())

st = chain_statics(G, lam)
print()
print(f"long-run intensity  lambda_inf = lam . pi = {st.lambda_inf:.15g}")
print(f"ergodic variance    V = 2 lam^T D diag(pi) lam = {st.V:.15g}")
print(f"iid cutoff (scaled time after which the chain state is freshly")
print(f"stationary to 5e-17 total variation): {iid_cutoff(G):g}")
