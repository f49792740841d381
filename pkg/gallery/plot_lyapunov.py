"""
Classical kicked top: Lyapunov exponents and Ehrenfest time
===========================================================
"""

import numpy as np

from spinoto import protocols as P
from spinoto import spin
from spinoto.semiclassics import SpherePoint, classical_trajectory, ehrenfest_time, lyapunov_exponent

rng = np.random.default_rng(0)
starts = [SpherePoint(*rng.normal(size=3)) for _ in range(20)]

# %%
# Mean exponent over random starts as the kick strength grows.

for k in (0.0, 0.5, 1.0, 2.0, 3.0, 5.0):
    lam = np.mean([lyapunov_exponent(s, k, np.pi / 2, 500).lam for s in starts])
    print(f"k = {k:3.1f}: mean lambda = {lam:.3f}")

# %%
# Ehrenfest time for a chaotic orbit at k = 3.

lam = lyapunov_exponent(SpherePoint(0.2, -0.5, 0.84), 3.0, np.pi / 2, 3000).lam
for N in (50, 100, 500):
    print(f"N = {N}: ln(S)/lambda = {ehrenfest_time(lam, N / 2):.2f} kicks")

# %%
# Large-S quantum expectation values follow the classical map for a few kicks.

S = 500
psi = P.fig4_initial_state(S)
cl = classical_trajectory(SpherePoint(0.5, np.sqrt(0.5), -0.5), 3.0, np.pi / 2, 5)
for n in range(6):
    print(n, np.round(spin.spin_expectations(psi) / S, 3), np.round(cl[n], 3))
    psi = spin.kicked_top_step(psi, 3.0, np.pi / 2)
