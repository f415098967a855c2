"""The classical constant-curvature family k(r) = A r^(a-1) / (b + r^(2a))."""

import math

import numpy as np

from moyal_geometry import classical as cl

p = cl.ClassicalFactorParams(A=1.0, a=2.0, b=1.0)
k = cl.family_profile(p)

print("Curvature evaluated from the radial formula at a few radii:")
for r in (0.1, 0.5, 1.0, 3.0):
    print(f"  r={r:<4} R(k)={cl.scalar_curvature_radial(k, r):.10f}")
print(f"Closed form 8 a^2 b / A^2 = {cl.family_curvature(p)}")

print("\nThe Gauss-Bonnet integrand is a total derivative, so the integral")
print("is the jump of -r k'/k between the origin and infinity:")
lo, hi = cl.family_boundary_limits(p)
print(f"  limits {lo} and {hi}, so GB = 4 pi ({hi} - ({lo})) = {cl.family_gauss_bonnet(p) / math.pi:.1f} pi")

print("\nTruncating at r_max and doubling it shows the tail:")
for r_max in (10.0, 100.0, 1e4):
    gb = cl.gauss_bonnet_quadrature(k, r_max, warn=False)
    print(f"  r_max={r_max:<8g} GB/pi={gb / math.pi:.6f}")

# a = 1 is the round sphere; a > 1 has a conical point at the origin
r = np.geomspace(1e-3, 1e3, 7)
print("\nk(r) for the sphere (a=1) and for a=2:")
print(np.array([[cl.family_factor(cl.ClassicalFactorParams(1, 1, 1), x), cl.family_factor(p, x)] for x in r]))
