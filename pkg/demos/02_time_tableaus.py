"""Inspect the time-slab tableaus of the continuous and discontinuous schemes.

The derivative matrix alpha is step-size free; the diagonal weights scale
linearly with the step. For the discontinuous family the jump-augmented
matrix alpha~ = alpha + gamma gamma^T satisfies the upwind energy identity.
"""

import numpy as np

from porosplit import build_cgp_basis, build_dg_basis

np.set_printoptions(precision=6, suppress=True)

for r in (1, 2):
    basis = build_cgp_basis(r)
    print(f"continuous r={r}: nodes {np.round(basis.nodes, 6)}")
    print("  alpha (test rows 1..r):")
    print(basis.alpha[1:])
    print(f"  weights {basis.beta_ref}, end values {np.round(basis.end_values, 6)}")

for r in (0, 1):
    basis = build_dg_basis(r)
    print(f"discontinuous r={r}: nodes {np.round(basis.nodes, 6)}")
    print("  alpha~:")
    print(basis.alpha_tilde)
    print(f"  gamma {np.round(basis.gamma, 6)}, weights {basis.beta_ref}")

# energy identities on random coefficient vectors
rng = np.random.default_rng(0)
basis = build_dg_basis(2)
c = rng.normal(size=3)
c0 = float(basis.evaluate(c, 0.0)[0])
c1 = float(basis.evaluate(c, 1.0)[0])
print("\nupwind energy identity residual:",
      abs(c @ basis.alpha_tilde.T @ c - 0.5 * c1**2 - 0.5 * c0**2))
basis = build_cgp_basis(3)
c = rng.normal(size=4)
c0 = float(basis.evaluate(c, 0.0)[0])
c1 = float(basis.evaluate(c, 1.0)[0])
print("continuous energy identity residual:",
      abs(c @ basis.alpha.T @ c - 0.5 * (c1**2 - c0**2)))
