"""Ornstein-Uhlenbeck flow on densities and functions, and the Poisson equation.

mu_t is the law of exp(-t) X + sqrt(1 - exp(-2t)) G with X ~ mu and G
standard Gaussian; on functions P_t H_alpha = exp(-|alpha| t) H_alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelField
from .measures import GridDensity, gaussian_convolve, trapezoid_weights
from .tensors import gauss_hermite
from .variational import HermiteExpansion

__all__ = [
    "FlowState",
    "PoissonSolution",
    "RegularityReport",
    "evolve_density",
    "apply_semigroup",
    "barbour_solve",
    "regularity_check",
    "stein_chain",
    "gaussian_expectation",
    "write_poisson_csv",
]


@dataclass(frozen=True)
class FlowState:
    t: float
    density: GridDensity
    base: str = ""


def _default_target(mu: GridDensity, t: float, points_per_width: int) -> np.ndarray:
    lo = min(-8.0, float(mu.x[0]))
    hi = max(8.0, float(mu.x[-1]))
    # resolve the smoothing width, but never go below the rescaled source spacing
    step = max(math.sqrt(-math.expm1(-2 * t)) / points_per_width, math.exp(-t) * mu.h)
    return np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)


def evolve_density(mu: GridDensity, t: float, grid=None, points_per_width: int = 20) -> FlowState:
    """Density of mu_t on ``grid``.

    The default grid covers [-8, 8] (or the source box if wider) with
    ``points_per_width`` nodes per standard deviation of the Gaussian
    smoothing.  The smoothing is applied by trapezoid quadrature over the
    source nodes.  When its width is below one (rescaled) source spacing that
    quadrature under-resolves the kernel; the rescaled source then takes one
    explicit heat step on its own nodes instead (stable there, since the step
    coefficient stays below 1/2).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if mu.dim != 1:
        raise ValueError("evolve_density is implemented for d = 1")
    if t == 0:
        return FlowState(0.0, mu, mu.label)
    scale = math.exp(-t)
    var = -math.expm1(-2 * t)
    if math.sqrt(var) >= scale * mu.h:
        y = _default_target(mu, t, points_per_width) if grid is None else np.asarray(grid, dtype=float)
        p = gaussian_convolve(mu.x, mu.p * trapezoid_weights(mu.x), y, var, scale)
    else:
        # rescale exactly, then one explicit heat step with the discrete Laplacian
        # (conserves mass and adds exactly var to the variance); two empty nodes
        # per side give mass at the box edge room to spread
        src = mu.embedded(mu.x[0] - 2 * mu.h, mu.x[-1] + 2 * mu.h)
        lap = np.zeros_like(src.p)
        lap[1:-1] = (src.p[2:] - 2 * src.p[1:-1] + src.p[:-2]) / src.h**2
        ys = scale * src.x
        ps = (src.p + 0.5 * var / scale**2 * lap) / scale
        if grid is None:
            y, p = ys, ps
        else:
            y = np.asarray(grid, dtype=float)
            p = np.interp(y, ys, ps, left=0.0, right=0.0)
    return FlowState(t, GridDensity.on_line(y, p, label=f"{mu.label}@t={t:g}"), mu.label)


def apply_semigroup(f: HermiteExpansion, t: float) -> HermiteExpansion:
    return f.apply_semigroup(t)


def gaussian_expectation(f, n: int = 64) -> float:
    y, w = gauss_hermite(n)
    return float(np.sum(w * f.derivative(y, 0).reshape(-1)))


@dataclass(frozen=True)
class PoissonSolution:
    """Tabulated solution h of h'' - x h' = f - int f dgamma and its derivatives.

    ``derivs[j]`` holds h^{(j)} on ``x`` for j = 0..order+1.
    """

    f: object
    x: np.ndarray = field(repr=False)
    derivs: dict = field(repr=False)
    order: int

    def residual(self, core: float = 5.0) -> float:
        m = np.abs(self.x) <= core
        fx = self.f.derivative(self.x, 0).reshape(-1)
        lhs = self.derivs[2] - self.x * self.derivs[1]
        return float(np.max(np.abs(lhs - (fx - gaussian_expectation(self.f)))[m]))


def barbour_solve(f, x=None, order: int = 1, n_theta: int = 200, n_gh: int = 64) -> PoissonSolution:
    """Solve the Poisson equation by Barbour's integral representation.

    With t = sin^2(theta) the solution and its derivatives are

        h(x)        = -int cot(th) E[f(sin th x + cos th Y) - f(Y)] dth
        h^{(j)}(x)  = -int sin^{j-1}(th) cos(th) E[f^{(j)}(sin th x + cos th Y)] dth,  1 <= j <= k
        h^{(k+1)}(x)= -int sin^k(th) E[Y f^{(k)}(sin th x + cos th Y)] dth

    over th in (0, pi/2), Y standard Gaussian.  Only derivatives of f up to
    order k are used.  The theta integral uses Gauss-Legendre nodes and the
    Gaussian expectation Gauss-Hermite nodes.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.linspace(-6.0, 6.0, 1201) if x is None else np.asarray(x, dtype=float)
    th, wth = np.polynomial.legendre.leggauss(n_theta)
    th = (th + 1) * math.pi / 4
    wth = wth * math.pi / 4
    y, wy = gauss_hermite(n_gh)
    s, c = np.sin(th), np.cos(th)
    derivs = {}
    for j in range(order + 2):
        out = np.empty_like(x)
        for start in range(0, x.size, 256):
            xs = x[start : start + 256]
            arg = s[:, None, None] * xs[None, :, None] + c[:, None, None] * y[None, None, :]
            shape = arg.shape
            if j == order + 1:
                vals = f.derivative(arg.ravel(), order).reshape(shape) * y
                ker = s**order
            else:
                vals = f.derivative(arg.ravel(), j).reshape(shape)
                if j == 0:
                    vals = vals - f.derivative(y, 0).reshape(1, 1, -1)
                    ker = c / s
                else:
                    ker = s ** (j - 1) * c
            inner = vals @ wy  # (theta, x)
            out[start : start + 256] = -(wth * ker) @ inner
        derivs[j] = out
    return PoissonSolution(f, x, derivs, order)


@dataclass(frozen=True)
class RegularityReport:
    sup_h: float
    sup_f: float
    ratio: float  # nan when sup_f == 0 (0/0)


def regularity_check(sol: PoissonSolution, core: float = 5.0) -> RegularityReport:
    """sup |h^{(k+1)}| against sup |f^{(k)}| over |x| <= core."""
    m = np.abs(sol.x) <= core
    sup_h = float(np.max(np.abs(sol.derivs[sol.order + 1][m])))
    sup_f = float(np.max(np.abs(sol.f.derivative(sol.x[m], sol.order))))
    ratio = sup_h / sup_f if sup_f > 0 else float("nan")
    return RegularityReport(sup_h, sup_f, ratio)


def stein_chain(mu: GridDensity, tau: KernelField, f, **kw) -> tuple[float, float]:
    """(int f dmu - int f dgamma, -int tau_k h^{(k+1)} dmu) for the Barbour solution h.

    The two agree when tau is a kernel of order k for mu.
    """
    k = tau.order
    nodes = tau.valid
    sol = barbour_solve(f, mu.x[nodes], order=k, **kw)
    w = mu.mass_weights
    lhs = float(np.sum(w * f.derivative(mu.x, 0).reshape(-1))) - gaussian_expectation(f)
    rhs = -float(np.sum(w[nodes] * tau.table[nodes] * sol.derivs[k + 1]))
    return lhs, rhs


def write_poisson_csv(sol: PoissonSolution, path) -> None:
    cols = ["x", "h"] + [f"h{j}" for j in range(1, sol.order + 2)]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i, xi in enumerate(sol.x):
            row = [xi] + [sol.derivs[j][i] for j in range(sol.order + 2)]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
