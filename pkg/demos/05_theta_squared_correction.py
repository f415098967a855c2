"""Order theta^2 deformation of the Fubini-Study factor."""

import numpy as np

from moyal_geometry import perturbative as pt
from moyal_geometry.perturbative import SmoothRadialFunction

f = SmoothRadialFunction(lambda r: 1 + r * r)
print("f * f^-1 - 1 at r = 1 shrinks like theta^4:")
for t in (0.05, 0.1, 0.2):
    print(f"  theta={t:<5} {pt.star_theta2(f, pt.moyal_inverse_function(f, t), t, 1.0) - 1:.3e}")

eta = 0.5
print("\nsource of the correction ODE, rebuilt from the expansions vs closed form:")
for r in (0.5, 1.0, 2.0):
    print(f"  r={r}: {pt.linearised_source(eta, r):+.12f} {pt.epsilon_ode_source(eta, r):+.12f}")

r = np.linspace(0, 4, 9)
table = pt.deformed_factor_table(r, [0.0, 0.5, 0.7, 1.0], eta=eta)
print("\n    r   " + "  ".join(f"{k:>16}" for k in list(table)[1:]))
for i, x in enumerate(r):
    print(f"{x:6.2f}  " + "  ".join(f"{table[k][i]:16.6f}" for k in list(table)[1:]))
print("\nFor theta above 1/sqrt(2) the factor first rises away from r = 0.")
