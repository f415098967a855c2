"""Constant curvature in the matrix basis: the recurrence for phi_n."""

import math

import numpy as np

from moyal_geometry import matrix_basis as mb
from moyal_geometry import recurrence as rc

sol = rc.solve(rc.RecurrenceProblem(R=1.0, phi0=1.0, N=6001))
print("first terms:", np.round(sol.phi[:5], 6))
print("phi_1 is the golden ratio:", sol.phi[1], (1 + math.sqrt(5)) / 2)
print("increasing:", sol.increasing, " max relative residual:", np.abs(sol.residuals).max())

e = sol.exponent
gb = rc.gauss_bonnet_estimate(sol, rc.ESTIMATOR_N)
print(f"\na_hat = log phi_5000 / log 5000 = {e.a_hat:.6f}  bars [{e.bar_low:.6f}, {e.bar_high:.6f}]")
print(f"GB estimate / 8 pi = {gb / (8 * math.pi):.6f}")
print("The two disagree: a_hat carries a log(A)/log(N) bias when phi_n ~ A n^a.")

print("\nSeeds and their exponent estimates:")
for p0, est, err in rc.scan_exponents([0.3, 0.5, 1.0, 2.0, 5.0], 1.0):
    a_gb = rc.gauss_bonnet_estimate(rc.solve(rc.RecurrenceProblem(R=1.0, phi0=p0, N=6001)), 5000) / (8 * math.pi)
    print(f"  phi0={p0:<4} a_hat={est.a_hat:.5f}  GB/8pi={a_gb:.5f}")

# plug phi back into the operator curvature
curv = mb.frame_scalar_curvature(mb.RadialOperator(0.5, sol.phi[:40]))
diag = np.diag(curv.coeff[curv.interior, curv.interior]).real
print("\nframe curvature on the interior, expected R/theta = 2:", diag.min(), diag.max())
