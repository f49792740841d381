"""
Decay times of F and G in the kicked top
========================================

For k = 3 and phi = 1/sqrt(N) we record the first kick at which |F| and |G|
fall below 0.5. We do this for several atom numbers and compare the two
starting directions discussed in the README.
"""

import numpy as np

from spinoto import protocols as P
from spinoto.observables import series_decay_times

Ns = [50, 100, 200, 400]

# %%
# Decay times versus ln N, with a straight-line fit for |F|.

for y_sign in (1, -1):
    rows = []
    for N in Ns:
        s = P.kicked_top_series(P.fig4_spec(N, y_sign=y_sign), 20)
        tF, tG = series_decay_times(s)
        rows.append((N, tF.t_cross, tG.t_cross))
    arr = np.array(rows, dtype=float)
    b, a = np.polyfit(np.log(arr[:, 0]), arr[:, 1], 1)
    print(f"y_sign = {y_sign:+d}: t_F = {a:.2f} + {b:.2f} ln N")
    for N, tF, tG in rows:
        print(f"  N = {N:4d}  t_F = {tF:5.2f}  t_G = {tG:5.2f}")
