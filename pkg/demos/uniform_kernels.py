"""Stein kernels of the uniform law, built two ways.

The uniform on [-sqrt 3, sqrt 3] is centered with unit variance, so its
first kernels exist and are polynomials: tau_1 = (1 - x^2)/2 and
tau_2 = x^3/6 - x/2.  We tabulate them by tail integration, rebuild tau_2
from tau_1 by the Galerkin method, and compare.

Run with ``python3 demos/uniform_kernels.py``.
"""

import math

import numpy as np

from steinlab.kernels import discrepancy, function_battery, kernel_1d_iterative, stein_identity_residual
from steinlab.measures import poincare_constant, uniform
from steinlab.variational import existence_bound_check, solve_next_kernel

mu = uniform()
x = mu.x

# %% tail integration
tau1 = kernel_1d_iterative(mu, 1)
tau2 = kernel_1d_iterative(mu, 2)
print("max |tau_1 - (1 - x^2)/2|     =", np.max(np.abs(tau1.table - (1 - x**2) / 2)))
print("max |tau_2 - (x^3/6 - x/2)|   =", np.max(np.abs(tau2.table - (x**3 / 6 - x / 2))))
print(f"S_1^2 = {discrepancy(tau1, mu) ** 2:.6f}   (1/5)")
print(f"S_2^2 = {discrepancy(tau2, mu) ** 2:.6f}   (2/35 = {2 / 35:.6f})")

# %% the identity holds for every test function in the battery
worst = max(stein_identity_residual(t, mu, f) for t in (tau1, tau2) for f in function_battery())
print(f"worst identity residual over the battery: {worst:.2e}")

# %% Galerkin: minimize J(g) over Hermite polynomials of degree <= 8
gal = solve_next_kernel(mu, tau1, max_degree=8)
gap = math.sqrt(float(np.sum(mu.mass_weights * (gal.table - tau2.table) ** 2)))
print(f"L2(mu) gap between Galerkin and tail-integral tau_2: {gap:.2e}")
print(f"Gram condition number: {gal.info['condition']:.2e}")

# %% the discrepancies sit under C_P^(k-1) (C_P - 1)
cp = poincare_constant(mu).constant
print(f"C_P = {cp:.6f}   (12/pi^2 = {12 / math.pi**2:.6f})")
for k in (1, 2):
    chk = existence_bound_check(mu, k, poincare=cp)
    print(f"k={k}: S_k^2 = {chk.discrepancy_sq:.4f} <= {chk.bound:.4f}  {chk.passed}")

# %% order 4 does not exist: the fourth moment is 9/5, not 3
try:
    kernel_1d_iterative(mu, 4)
except ValueError as exc:
    print("order 4:", exc)
