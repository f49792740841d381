"""
Quantum trajectories with cavity loss and spontaneous emission
==============================================================

First a small ensemble is checked against the exact master equation. Then a
dissipative run at N = 100, trimmed to 40 trajectories so the script
finishes quickly.
"""

import numpy as np

from spinoto import protocols as P
from spinoto.open_system import DissipationParams, dissipative_correlators, master_equation_oracle, photons_lost

# %%
# Four atoms: trajectory average against the Lindblad solution. The photon
# budget is lifted so both describe the same dynamics.

params = DissipationParams(eta=100, d=20, photon_budget=10**6)
spec = P.fig4_spec(4)
times = [0, 1, 2, 3]
exact = master_equation_oracle(spec, params, times)
est = dissipative_correlators(spec, params, times, n_traj=400, master_seed=1)
for t, m, se, ex in zip(times, est.F.mean, est.F.stderr, exact.F):
    print(f"kick {t}: trajectories {m:.3f} +- {se:.3f}   exact {ex:.3f}")

# %%
# N = 100 with the default five-photon budget.

spec = P.fig4_spec(100)
params = DissipationParams(eta=100, d=20)
times = list(range(6))
res = dissipative_correlators(spec, params, times, n_traj=40, master_seed=2024)
for i, t in enumerate(times):
    unitary = abs(P.interferometric_F(spec, t))
    print(f"kick {t}: |F| {abs(res.F.mean[i]):.3f} (unitary {unitary:.3f}), "
          f"photons {photons_lost(spec, params, t)[0]:.1f}, overflow {res.F.overflow_by_time[i]:.2f}")
