"""Functional inequalities on a small battery of one-dimensional laws.

For each law we compute relative entropy H, Fisher information I, W2 to the
Gaussian and the Stein discrepancies, then check HSI, the L2 transport
bound and the Fisher-information decay along the Ornstein-Uhlenbeck flow.
Laws without a kernel of the requested order have infinite discrepancy,
and jump densities have infinite Fisher information; the verdicts say so.

Run with ``python3 demos/inequalities.py``.
"""

from steinlab.cli import default_battery, stein_discrepancy
from steinlab.metrics import (entropy, fisher_or_inf, gaussian_reference, verify_debruijn, verify_fisher_decay,
                              verify_hsi, verify_transport, wasserstein2_1d)

print(f"{'law':<18} {'H':>9} {'I':>9} {'W2':>8} {'S_1':>8} {'S_2':>8}  HSI  transport")
for name, mu in default_battery():
    s1, s2 = stein_discrepancy(mu, 1), stein_discrepancy(mu, 2)
    H, I = entropy(mu), fisher_or_inf(mu)
    w2 = wasserstein2_1d(mu, gaussian_reference(mu))
    hsi = verify_hsi(mu, 2, s2, H=H, I=I)
    tr = verify_transport(mu, 2, s1, s2, w2=w2)
    print(f"{name:<18} {H:9.5f} {I:9.4g} {w2:8.5f} {s1:8.4g} {s2:8.4g}  {hsi.passed!s:<4} {tr.passed}")

# %% Fisher information of the uniform along the flow
_, unif = default_battery()[3]
rows = verify_fisher_decay(unif, 2, stein_discrepancy(unif, 2), (0.1, 0.25, 0.5, 1.0, 2.0), include_decay=False)
for r in rows:
    print(f"t={r.params['t']:<5} I(mu_t) = {r.lhs:.4e} <= {r.rhs:.4e}")

# %% entropy dissipation: H(mu) - H(mu_T) equals the integrated Fisher information
_, smooth = default_battery()[4]
d = verify_debruijn(smooth, 3.0)
print(f"de Bruijn on the smoothed uniform: drop {d.params['entropy_drop']:.6f}, "
      f"integral {d.params['fisher_integral']:.6f}, relative gap {d.lhs:.1e}")
