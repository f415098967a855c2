"""Matrix-basis calculus on the Moyal plane."""

import numpy as np

from moyal_geometry import matrix_basis as mb
from moyal_geometry.matrix_basis import MatrixOperator, RadialOperator

theta, N = 1.0, 6

# f_{m,n} * f_{k,l} = delta_{kn} f_{m,l}
a = MatrixOperator.basis_element(0, 1, theta, N)
b = MatrixOperator.basis_element(1, 0, theta, N)
print("f01 * f10 =")
print(mb.star_product(a, b).coeff.real[:3, :3])
print("f01 * f01 is zero:", np.allclose(mb.star_product(a, a).coeff, 0))

# derivations act on coefficients; the last row/column is truncation debris
d = mb.partial(MatrixOperator.basis_element(1, 1, theta, N))
print("\nd f11 (top-left block, exact up to index", d.clean - 1, "):")
print(np.round(d.coeff.real[:4, :4], 6))

print("\nBasis functions at the origin: f00 =", mb.basis_eval(0, 0, theta, 0.0).real,
      " f11 =", mb.basis_eval(1, 1, theta, 0.0).real)

# r^a expands over the diagonal elements
for a_exp in (1, 2, 3):
    print(f"r^{a_exp} coefficients:", np.round(mb.radial_power_coefficients(a_exp, 5, theta), 6))

print("\nPartial sums of sum_n f_nn at r=0 alternate, there is no pointwise limit:")
print([round(float(sum(mb.basis_eval(n, n, theta, 0.0).real for n in range(M))), 3) for M in range(1, 8)])

h = RadialOperator(theta, np.arange(1.0, 9.0))
print("\ntrace of h = sum n f_nn, n=1..8:", mb.trace(h))
