"""The Gaussian Poisson equation and the regularity of its solution.

For a test function f, h'' - x h' = f - E f(G) has a solution given by an
integral over the Ornstein-Uhlenbeck semigroup.  Derivatives of h of order
k + 1 are controlled by derivatives of f of order k, with constant 1; the
table shows the ratio of the two sup norms on |x| <= 5.  The last part
closes the loop: with a kernel tau_k of mu,
    E f(X) - E f(G) = -E <tau_k(X), h^(k+1)(X)>.

Run with ``python3 demos/poisson_regularity.py``.
"""

from steinlab.flow import barbour_solve, regularity_check, stein_chain
from steinlab.kernels import Monomial, Trig, kernel_1d_iterative
from steinlab.measures import uniform

tests = [Monomial(2), Monomial(4), Trig(0.5), Trig(1.0, 0.7), Trig(2.0)]
print(f"{'f':<40} {'k':>2} {'ratio':>8} {'residual':>10}")
for f in tests:
    for k in (1, 2):
        sol = barbour_solve(f, order=k)
        rep = regularity_check(sol)
        print(f"{f!r:<40} {k:>2} {rep.ratio:8.4f} {sol.residual():10.1e}")

mu = uniform()
for k in (1, 2):
    tau = kernel_1d_iterative(mu, k)
    lhs, rhs = stein_chain(mu, tau, Trig(1.0, 0.3))
    print(f"k={k}: E f(X) - E f(G) = {lhs:+.8f},  -E <tau_k, h^(k+1)> = {rhs:+.8f}")
