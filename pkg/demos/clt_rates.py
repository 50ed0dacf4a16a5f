"""How fast normalized sums of uniforms approach the Gaussian.

mu_n is the law of (X_1 + ... + X_n)/sqrt(n).  The ladder computes each
mu_n by exact discrete convolution; kernels of mu_n come from the base
kernel by conditioning on the sum.  We print the decay of the discrepancies,
of W2 and of the Zolotarev distance, together with the bounds they obey.

Run with ``python3 demos/clt_rates.py``.
"""

import math

from steinlab.clt import (convolve_ladder, discrepancy_decay_sweep, entropy_rate_check, w2_rate_check,
                          zolotarev_rate_check)
from steinlab.measures import from_spec, uniform

ns = [1, 2, 4, 8, 16, 32, 64]
base = uniform()
ladder = convolve_ladder(base, ns)

s1 = discrepancy_decay_sweep(base, 1, ns, ladder=ladder)
s2 = discrepancy_decay_sweep(base, 2, ns, ladder=ladder)
w2 = w2_rate_check(base, ns, ladder=ladder)
zol = zolotarev_rate_check(base, ns, ladder=ladder)

print(f"{'n':>3} {'S_1':>10} {'S_2':>10} {'n*S_2':>8} {'W2':>10} {'W2 bound':>10} {'d_Zol2':>10}")
for r1, r2, rw, rz in zip(s1.rows, s2.rows, w2.rows, zol.rows):
    n = r1["n"]
    print(f"{n:>3} {r1['Sk1']:10.3e} {r2['Sk2']:10.3e} {n * r2['Sk2']:8.4f} {rw['W2']:10.3e} "
          f"{rw.get('bound_w2', math.nan):10.3e} {rz['dZol2']:10.3e}")

for name, rep, col in (("S_1", s1, "Sk1"), ("S_2", s2, "Sk2"), ("W2", w2, "W2"), ("d_Zol2", zol, "dZol2")):
    slope, err = rep.slopes[col]
    print(f"slope of log {name}: {slope:+.3f} +- {err:.3f}")

# The third moment of the uniform vanishes, so S_1 also falls like 1/n; the
# n^(-1/2) rate of the general bound is an upper bound here, not the truth.
print("all bounds hold:", s1.passed and s2.passed and w2.passed and zol.passed)

# %% relative entropy of sums of a smoothed uniform (finite Fisher information)
smooth = from_spec({"type": "smoothed_uniform", "sigma": 0.05})
ent = entropy_rate_check(smooth, [2, 4, 8, 16])
for r in ent.rows:
    print(f"n={r['n']:>2}: Ent = {r['H']:.3e} <= {r['bound_H']:.3e}")
