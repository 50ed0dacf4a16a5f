"""Galerkin construction of the next-order Stein kernel.

Given tau_k, the kernel of order k+1 is D^{k+1} g where g minimizes

    J(g) = 1/2 int |D^{k+1} g|^2 dmu - int <tau_k, D^k g> dmu

over vector fields g.  We minimize over vector-valued Hermite polynomials of
total degree k+1..N; lower degrees are annihilated by D^{k+1}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelField, _check_moments, kernel_1d_iterative, discrepancy
from .measures import GridDensity, poincare_constant
from .tensors import canonical_indices, graded_basis, hermite_1d, index_to_exponents, multiplicity

__all__ = [
    "HermiteExpansion",
    "GalerkinSystem",
    "IllConditioned",
    "ExistenceCheck",
    "hermite_derivative",
    "assemble_galerkin",
    "solve_next_kernel",
    "functional_value",
    "existence_bound_check",
    "write_coefficients_csv",
]


class IllConditioned(RuntimeError):
    def __init__(self, cond: float):
        super().__init__(f"Galerkin matrix condition number {cond:.3e}; raise the ridge or lower N")
        self.cond = cond


def _falling(a: int, b: int) -> int:
    return math.factorial(a) // math.factorial(a - b)


def hermite_derivative(alphas, points, order: int, canonical: bool = True) -> np.ndarray:
    """Derivatives of order ``order`` of each H_alpha at ``points``.

    Uses d/dx_j H_alpha = alpha_j H_{alpha - e_j}.  Returns shape
    ``(len(alphas), N, n_canonical)`` (or ``(len(alphas), N) + (d,) * order``
    when ``canonical`` is False).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    top = max(sum(a) for a in alphas) if alphas else 0
    tables = [hermite_1d(top, pts[:, j]) for j in range(d)]
    can = canonical_indices(d, order)
    out = np.zeros((len(alphas), n, len(can)))
    for a_pos, alpha in enumerate(alphas):
        for c_pos, idx in enumerate(can):
            beta = index_to_exponents(idx, d)
            if any(b > a for a, b in zip(alpha, beta)):
                continue
            val = np.ones(n)
            coef = 1
            for j in range(d):
                coef *= _falling(alpha[j], beta[j])
                val = val * tables[j][alpha[j] - beta[j]]
            out[a_pos, :, c_pos] = coef * val
    if canonical:
        return out
    return _expand(out, d, order)


def _expand(can_vals: np.ndarray, d: int, order: int) -> np.ndarray:
    """Canonical storage on the last axis -> full symmetric tensor axes."""
    import itertools

    pos = {idx: n for n, idx in enumerate(canonical_indices(d, order))}
    full = np.empty(can_vals.shape[:-1] + (d,) * order)
    for idx in itertools.product(range(d), repeat=order):
        full[(...,) + idx] = can_vals[..., pos[tuple(sorted(idx))]]
    return full


@dataclass(frozen=True)
class HermiteExpansion:
    """Vector field x -> sum_alpha coefs[alpha, i] H_alpha(x) e_i on R^dim.

    ``basis`` lists exponent vectors; ``coefs`` has shape
    ``(len(basis), ncomp)``.  Scalar functions use ``ncomp = 1``.
    """

    dim: int
    basis: tuple
    coefs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        object.__setattr__(self, "basis", tuple(tuple(int(a) for a in b) for b in self.basis))
        object.__setattr__(self, "coefs", c)

    @classmethod
    def single(cls, alpha, coef: float = 1.0) -> "HermiteExpansion":
        alpha = tuple(np.atleast_1d(alpha))
        return cls(len(alpha), (alpha,), np.array([[coef]]))

    @property
    def ncomp(self) -> int:
        return self.coefs.shape[1]

    @property
    def max_degree(self) -> int:
        return max((sum(a) for a in self.basis), default=0)

    def coefficient(self, alpha, comp: int = 0) -> float:
        alpha = tuple(np.atleast_1d(alpha))
        return float(self.coefs[self.basis.index(alpha), comp]) if alpha in self.basis else 0.0

    def derivative(self, points, order: int) -> np.ndarray:
        """D^order of the field: shape ``(N, ncomp) + (dim,) * order``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        vals = hermite_derivative(list(self.basis), pts, order)  # (B, N, C)
        out = np.einsum("bnc,bi->nic", vals, self.coefs)
        return _expand(out, self.dim, order)

    def __call__(self, points) -> np.ndarray:
        out = self.derivative(points, 0)
        return out[:, 0] if self.ncomp == 1 else out

    def apply_semigroup(self, t: float) -> "HermiteExpansion":
        """Ornstein-Uhlenbeck semigroup: H_alpha -> exp(-|alpha| t) H_alpha."""
        decay = np.exp(-t * np.array([sum(a) for a in self.basis], dtype=float))
        return HermiteExpansion(self.dim, self.basis, self.coefs * decay[:, None])

    def partial(self, j: int) -> "HermiteExpansion":
        """Exact partial derivative along coordinate ``j`` (same basis type)."""
        basis, coefs = [], []
        for a, c in zip(self.basis, self.coefs):
            if a[j] == 0:
                continue
            b = list(a)
            b[j] -= 1
            basis.append(tuple(b))
            coefs.append(a[j] * c)
        if not basis:
            return HermiteExpansion(self.dim, ((0,) * self.dim,), np.zeros((1, self.ncomp)))
        return HermiteExpansion(self.dim, tuple(basis), np.array(coefs))

    def gaussian_mean(self) -> np.ndarray:
        zero = (0,) * self.dim
        return self.coefs[self.basis.index(zero)] if zero in self.basis else np.zeros(self.ncomp)


@dataclass(frozen=True)
class GalerkinSystem:
    """Normal equations for one component block (blocks are identical)."""

    matrix: np.ndarray = field(repr=False)
    loads: np.ndarray = field(repr=False)  # (n_basis, d): one load vector per component
    ridge: float
    basis: tuple

    def solve(self) -> np.ndarray:
        a = self.matrix + self.ridge * np.eye(self.matrix.shape[0])
        return np.linalg.solve(a, self.loads)

    def residual(self, coefs: np.ndarray) -> float:
        a = self.matrix + self.ridge * np.eye(self.matrix.shape[0])
        return float(np.linalg.norm(a @ coefs - self.loads) / max(np.linalg.norm(self.loads), 1e-300))

    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix + self.ridge * np.eye(self.matrix.shape[0])))


def _weights_points(mu):
    return mu.mass_weights, mu.points


def _symmetric_rest(tau: KernelField, comp: int) -> np.ndarray:
    """tau[:, comp, rest...] in canonical storage of the remaining slots."""
    d, k = tau.dim, tau.order
    sub = tau.values[:, comp]
    can = canonical_indices(d, k)
    if k == 0:
        return sub.reshape(-1, 1)
    return np.stack([sub[(slice(None),) + idx] for idx in can], axis=1)


def assemble_galerkin(mu, tau_k: KernelField, max_degree: int, ridge_rel: float = 1e-10) -> GalerkinSystem:
    """Gram matrix of D^{k+1} H_alpha and loads int <tau_k, e_i (x) D^k H_alpha> dmu."""
    k, d = tau_k.order, tau_k.dim
    if max_degree < k + 2:
        raise ValueError("max_degree must be >= k + 2")
    w, pts = _weights_points(mu)
    basis = tuple(graded_basis(d, k + 1, max_degree))
    g = hermite_derivative(list(basis), pts, k + 1)  # (B, N, C)
    mult = np.array([multiplicity(i) for i in canonical_indices(d, k + 1)], dtype=float)
    gram = np.einsum("anc,bnc,n,c->ab", g, g, w, mult)
    gram = 0.5 * (gram + gram.T)
    lower = hermite_derivative(list(basis), pts, k)  # (B, N, C')
    mult_k = np.array([multiplicity(i) for i in canonical_indices(d, k)], dtype=float)
    loads = np.empty((len(basis), d))
    for i in range(d):
        rest = _symmetric_rest(tau_k, i)
        loads[:, i] = np.einsum("bnc,nc,n,c->b", lower, rest, w, mult_k)
    ridge = ridge_rel * np.trace(gram) / gram.shape[0]
    return GalerkinSystem(gram, loads, ridge, basis)


def solve_next_kernel(mu, tau_k: KernelField, max_degree: int = 10, ridge_rel: float = 1e-10,
                      max_cond: float = 1e13, moment_tol: float | None = None) -> KernelField:
    """Kernel of order k+1 from tau_k by Galerkin minimization of J.

    Raises
    ------
    IllConditioned
        The regularized Gram matrix is too ill-conditioned to trust.
    MomentMismatch
        When ``moment_tol`` is given and moments up to degree k+1 are off.
    """
    k, d = tau_k.order, tau_k.dim
    if moment_tol is not None:
        _check_moments(mu, k + 1, moment_tol)
    system = assemble_galerkin(mu, tau_k, max_degree, ridge_rel)
    cond = system.condition()
    if cond > max_cond:
        raise IllConditioned(cond)
    coefs = system.solve()
    g = HermiteExpansion(d, system.basis, coefs)
    values = g.derivative(mu.points, k + 1)
    valid = np.ones(values.shape[0], dtype=bool)
    info = {"system": system, "solver_residual": system.residual(coefs), "condition": cond}
    return KernelField(k + 1, d, values, valid, "variational", expansion=g, info=info)


def functional_value(g: HermiteExpansion, mu, tau_k: KernelField) -> float:
    """J(g) = 1/2 int |D^{k+1} g|^2 dmu - int <tau_k, D^k g> dmu."""
    k = tau_k.order
    w, pts = _weights_points(mu)
    top = g.derivative(pts, k + 1)
    low = g.derivative(pts, k)
    quad = 0.5 * float(np.sum(w * np.sum(top.reshape(top.shape[0], -1) ** 2, axis=1)))
    lin = float(np.sum(w * np.sum((tau_k.values * low).reshape(low.shape[0], -1), axis=1)))
    return quad - lin


@dataclass(frozen=True)
class ExistenceCheck:
    order: int
    discrepancy_sq: float
    bound: float
    poincare: float
    passed: bool | None  # None when C_P < 1 and the bound is not meaningful

    @property
    def slack(self) -> float:
        return self.bound - self.discrepancy_sq


def existence_bound_check(mu: GridDensity, k: int, discrepancy_sq: float | None = None,
                          poincare: float | None = None, tol: float = 1e-9) -> ExistenceCheck:
    """Compare S_k^2 with C_P^{k-1} (C_P - 1) d."""
    if discrepancy_sq is None:
        tau = kernel_1d_iterative(mu, k)
        discrepancy_sq = discrepancy(tau, mu) ** 2
    cp = poincare if poincare is not None else poincare_constant(mu).constant
    d = mu.dim
    bound = cp ** (k - 1) * (cp - 1) * d
    if cp < 1:
        return ExistenceCheck(k, discrepancy_sq, bound, cp, None)
    return ExistenceCheck(k, discrepancy_sq, bound, cp, discrepancy_sq <= bound + tol)


def write_coefficients_csv(g: HermiteExpansion, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "component", "coef"])
        for alpha, row in zip(g.basis, g.coefs):
            for i, c in enumerate(row):
                w.writerow(["-".join(map(str, alpha)), i, repr(float(c))])
