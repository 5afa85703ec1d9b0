"""
Boundary behaviour and eigenfunctions
=====================================

How the two boundary exponents decide what happens at 0 and d, and what
the eigenfunctions look like near each end.
"""

import numpy as np

from jacobi_diffusion.eigenfun import eta, xi, xi_limit_d
from jacobi_diffusion.model import JacobiCoeffs, ShapeParams, classify

# one probe per cell of the alpha/beta table
for alpha in (-1.5, -0.5, 0.5):
    for beta in (-1.5, -0.5, 0.5):
        cl = classify(ShapeParams(alpha, beta))
        print(f"alpha={alpha:5.1f} beta={beta:5.1f}  conservative={cl.conservative!s:5}  "
              f"orthocomplement={cl.orthocomplement_basis.value}")

# drift a - b x and scale sigma map to the exponents
c = JacobiCoeffs(a=0.25, b=1.0, sigma=1.0, d=1.0)
print("\n(a, b, sigma, d) = (0.25, 1, 1, 1) gives", c.shape)

# xi starts at 1 when beta > -1 and blows up at d when alpha >= 0
x = np.linspace(0.05, 0.95, 7)
c = JacobiCoeffs.from_shape(0.5, 0.5)
print("\nxi_1 :", np.round(xi(c, 1.0, x), 4))
print("eta_1:", np.round(eta(c, 1.0, x), 4))
print("limit of xi at d:", xi_limit_d(c, 1.0).kind.value)

c = JacobiCoeffs.from_shape(-0.5, 0.0)
print("alpha=-0.5: limit of xi at d is finite,", round(xi_limit_d(c, 1.0).value, 6))
