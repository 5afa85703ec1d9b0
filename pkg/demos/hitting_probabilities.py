"""
Hitting probabilities: formula against simulation
=================================================

For alpha = -0.5, beta = -1.5 both ends are reachable and the process dies
at 0, so reaching d is a genuine event with probability below one.
"""

import numpy as np

from jacobi_diffusion.hitting import hit_prob_d, lambda_hitting_d
from jacobi_diffusion.mc import estimate_hit_prob
from jacobi_diffusion.model import JacobiCoeffs
from jacobi_diffusion.sde import BoundaryHit, SdeField

c = JacobiCoeffs.from_shape(-0.5, -1.5)
xs = np.linspace(0.1, 0.9, 5)
print("x     P(hit d)")
for x in xs:
    print(f"{x:.1f}   {hit_prob_d(c, x).probability:.5f}")

# the Laplace transform decreases in lambda and tends to the probability
for lam in (1e-6, 0.5, 1.0, 2.0):
    print(f"E exp(-{lam:g} tau_d) at x=0.5: {lambda_hitting_d(c, lam, 0.5):.5f}")

# a small simulation; the horizon is chosen from a pilot run
est = estimate_hit_prob(SdeField(c), 0.5, BoundaryHit.D, dt=1e-3, n_paths=4000, seed=42)
print(f"\nMonte Carlo: {est.mean:.4f} +- {est.stderr:.4f} "
      f"(T={est.diagnostics['T']:.2f}, unresolved {est.diagnostics['censored_fraction']:.4f})")
print(f"closed form: {hit_prob_d(c, 0.5).probability:.4f}")
