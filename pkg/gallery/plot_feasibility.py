"""
Cavity requirements
===================

Order-of-magnitude requirements for running the protocol in an optical
cavity.
"""

from spinoto.feasibility import CavityParams, eta_min, report

# %%
# The default parameter set used for the dissipative runs.

for key, val in report(CavityParams(eta=100, N=100), d=20).items():
    print(f"{key:14s} {val}")

# %%
# Cooperativity needed to see chaos at k = 3 for growing ensembles.

for N in (10, 100, 1000, 10000):
    print(N, round(eta_min(3, N), 1))
