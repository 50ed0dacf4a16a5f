"""Probability measures on grids and as samples.

Grid densities are the reference representation in one dimension; all
integrals over them use the trapezoid rule.  A density with a jump carries
the average of its one-sided limits at the jump node, which keeps the
trapezoid rule second-order accurate across the discontinuity.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, special

from .tensors import gauss_hermite, graded_basis

__all__ = [
    "GridDensity",
    "SampleMeasure",
    "MomentReport",
    "PoincareEstimate",
    "MomentMatchError",
    "trapezoid_weights",
    "standard_gaussian",
    "gaussian",
    "uniform",
    "unit_uniform",
    "mixture",
    "product",
    "moments",
    "gaussian_moment",
    "match_moments",
    "poincare_constant",
    "smooth",
    "gaussian_convolve",
    "from_spec",
    "smoothed_uniform",
    "load_spec",
    "write_grid_csv",
    "read_grid_csv",
]

SQRT3 = math.sqrt(3.0)


class MomentMatchError(RuntimeError):
    """Raised when no family member reproduces the requested Gaussian moments."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = np.empty_like(x)
    dx = np.diff(x)
    w[0] = dx[0] / 2
    w[-1] = dx[-1] / 2
    w[1:-1] = (dx[:-1] + dx[1:]) / 2
    return w


@dataclass(frozen=True)
class GridDensity:
    """Density tabulated on a tensor grid of uniformly spaced axes (d = 1 or 2).

    Parameters
    ----------
    axes : tuple of ndarray
        One increasing, uniformly spaced node array per coordinate.
    p : ndarray
        Density values, shape ``tuple(len(a) for a in axes)``.
    label : str
        Free-form provenance tag carried into reports.
    """

    axes: tuple
    p: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        p = np.asarray(self.p, dtype=float)
        if p.shape != tuple(len(a) for a in axes):
            raise ValueError(f"density shape {p.shape} does not match axes")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("density must be finite and nonnegative")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "p", p)

    @classmethod
    def on_line(cls, x, p, label: str = "", normalize: bool = True) -> "GridDensity":
        p = np.clip(np.asarray(p, dtype=float), 0.0, None)
        g = cls((np.asarray(x, dtype=float),), p, label)
        return g.normalized() if normalize else g

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def x(self) -> np.ndarray:
        if self.dim != 1:
            raise AttributeError("x is only defined for one-dimensional grids")
        return self.axes[0]

    @property
    def h(self) -> float | tuple:
        hs = tuple(float(a[1] - a[0]) for a in self.axes)
        return hs[0] if self.dim == 1 else hs

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on the full tensor grid."""
        w = trapezoid_weights(self.axes[0])
        for a in self.axes[1:]:
            w = np.multiply.outer(w, trapezoid_weights(a))
        return w

    @property
    def points(self) -> np.ndarray:
        """Grid nodes as an ``(N, d)`` array (C order, matching ``p.ravel()``)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def mass_weights(self) -> np.ndarray:
        """Quadrature weights of the measure itself, flattened (sum = mass)."""
        return (self.weights * self.p).ravel()

    def mass(self) -> float:
        return float(np.sum(self.weights * self.p))

    def normalized(self) -> "GridDensity":
        m = self.mass()
        if not m > 0:
            raise ValueError("density has zero mass")
        return GridDensity(self.axes, self.p / m, self.label)

    def expect(self, values) -> float | np.ndarray:
        """Integrate node values (shape ``p.shape + extra``) against the density."""
        values = np.asarray(values, dtype=float)
        wp = self.weights * self.p
        extra = values.ndim - wp.ndim
        return np.tensordot(wp, values, axes=(list(range(wp.ndim)), list(range(wp.ndim)))) if extra else float(np.sum(wp * values))

    def mean(self) -> np.ndarray:
        return np.array([self.expect(m) for m in np.meshgrid(*self.axes, indexing="ij")])

    def covariance(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        mu = self.mean()
        c = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                c[i, j] = self.expect((mesh[i] - mu[i]) * (mesh[j] - mu[j]))
        return c

    def variance(self) -> float:
        return float(self.covariance()[0, 0]) if self.dim == 1 else float(np.trace(self.covariance()))

    def cdf(self) -> np.ndarray:
        """Cumulative trapezoid CDF at the nodes (d = 1)."""
        p = self.p
        c = np.concatenate([[0.0], np.cumsum((p[1:] + p[:-1]) / 2 * np.diff(self.x))])
        return c / c[-1]

    def support(self, rel_floor: float = 0.0) -> tuple[int, int]:
        """First and last node index where ``p > rel_floor * max(p)`` (d = 1)."""
        idx = np.nonzero(self.p > rel_floor * self.p.max())[0]
        return int(idx[0]), int(idx[-1])

    def trimmed(self, rel_floor: float) -> "GridDensity":
        i, j = self.support(rel_floor)
        return GridDensity((self.x[i : j + 1],), self.p[i : j + 1], self.label).normalized()

    def embedded(self, lo: float, hi: float) -> "GridDensity":
        """Zero-pad to cover ``[lo, hi]`` at the same spacing (d = 1).

        A nonzero edge value becomes a jump once padded, so it is halved.
        """
        x, h = self.x, self.h
        n_lo = max(0, int(math.ceil((x[0] - lo) / h - 1e-9)))
        n_hi = max(0, int(math.ceil((hi - x[-1]) / h - 1e-9)))
        if n_lo == 0 and n_hi == 0:
            return self
        p = self.p.copy()
        if n_lo:
            p[0] *= 0.5
        if n_hi:
            p[-1] *= 0.5
        xs = x[0] + h * np.arange(-n_lo, x.size + n_hi)
        p = np.concatenate([np.zeros(n_lo), p, np.zeros(n_hi)])
        return GridDensity((xs,), p, self.label)

    def pdf(self, y) -> np.ndarray:
        """Linear interpolation of the tabulated density (zero outside, d = 1)."""
        return np.interp(y, self.x, self.p, left=0.0, right=0.0)


@dataclass(frozen=True)
class SampleMeasure:
    """Empirical measure of ``points`` (shape ``(n, d)``)."""

    points: np.ndarray = field(repr=False)
    seed: int | None = None
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample points must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def draw(cls, sampler, n: int, seed: int, label: str = "") -> "SampleMeasure":
        rng = np.random.default_rng(seed)
        return cls(sampler(rng, n), seed, label)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def mass_weights(self) -> np.ndarray:
        n = self.points.shape[0]
        return np.full(n, 1.0 / n)

    def expect(self, values) -> float | np.ndarray:
        values = np.asarray(values, dtype=float)
        return values.mean(axis=0) if values.ndim > 1 else float(values.mean())

    def mean(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def covariance(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.points, rowvar=False, bias=True))


# --- constructors --------------------------------------------------------


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _aligned_axis(half_width: float, break_at: float, n_target: int) -> np.ndarray:
    """Symmetric axis whose spacing puts ``+-break_at`` exactly on nodes."""
    h0 = 2 * half_width / (n_target - 1)
    m = max(1, round(break_at / h0))
    h = break_at / m
    j = int(math.ceil(half_width / h - 1e-9))
    return h * np.arange(-j, j + 1)


def _gaussian_pdf(x, mean=0.0, var=1.0):
    return np.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def standard_gaussian(d: int = 1, n: int = 4096, half_width: float = 8.0) -> GridDensity:
    """Standard Gaussian on ``[-half_width, half_width]^d``.

    Raises ``ValueError`` if the box drops more than 1e-8 of the mass.
    """
    deficit = d * math.erfc(half_width / math.sqrt(2))
    if deficit > 1e-8:
        raise ValueError(f"grid too narrow: Gaussian mass deficit {deficit:.2e}")
    x = _axis(-half_width, half_width, n)
    if d == 1:
        return GridDensity.on_line(x, _gaussian_pdf(x), label="gaussian")
    p = _gaussian_pdf(x)
    return GridDensity((x, x), np.multiply.outer(p, p), label="gaussian").normalized()


def gaussian(variance: float = 1.0, mean: float = 0.0, n: int = 4096, half_width: float | None = None) -> GridDensity:
    s = math.sqrt(variance)
    half_width = half_width or max(8.0, abs(mean) + 10 * s)
    x = _axis(-half_width, half_width, n)
    return GridDensity.on_line(x, _gaussian_pdf(x, mean, variance), label=f"gaussian(var={variance:g})")


def uniform(half_width: float = SQRT3, n: int = 4097) -> GridDensity:
    """Uniform law on ``[-a, a]``, tabulated on exactly its support."""
    x = _axis(-half_width, half_width, n)
    return GridDensity.on_line(x, np.full(n, 1 / (2 * half_width)), label=f"uniform(a={half_width:g})")


def unit_uniform(n: int = 4097) -> GridDensity:
    """Centered uniform whose trapezoid variance on ``n`` nodes is exactly 1.

    The trapezoid second moment of the uniform on [-a, a] is a^2/3 + h^2/6
    (exact for x^2), so the half width sits O(h^2) below sqrt(3).
    """
    a = 1 / math.sqrt(1 / 3 + 2 / (3 * (n - 1) ** 2))
    return uniform(a, n=n)


def mixture(components: list[dict], n: int = 4096, half_width: float = 10.0) -> GridDensity:
    """Finite mixture of Gaussian and uniform components on a 1-D grid.

    Each component is ``{"kind": "gaussian", "weight", "mean", "variance"}`` or
    ``{"kind": "uniform", "weight", "center", "half_width"}``.  The grid is
    aligned so that the first uniform component's endpoints are nodes.
    """
    uni = [c for c in components if c["kind"] == "uniform"]
    if uni and abs(uni[0].get("center", 0.0)) == 0.0:
        x = _aligned_axis(half_width, uni[0]["half_width"], n)
    else:
        x = _axis(-half_width, half_width, n)
    h = x[1] - x[0]
    p = np.zeros_like(x)
    for c in components:
        w = float(c.get("weight", 1.0))
        if c["kind"] == "gaussian":
            p += w * _gaussian_pdf(x, c.get("mean", 0.0), c.get("variance", 1.0))
        elif c["kind"] == "uniform":
            lo = c.get("center", 0.0) - c["half_width"]
            hi = c.get("center", 0.0) + c["half_width"]
            ind = ((x > lo) & (x < hi)).astype(float)
            ind[np.abs(x - lo) < 1e-9 * h] = 0.5
            ind[np.abs(x - hi) < 1e-9 * h] = 0.5
            p += w * ind / (hi - lo)
        else:
            raise ValueError(f"unknown component kind {c['kind']!r}")
    return GridDensity.on_line(x, p, label="mixture")


def product(*factors: GridDensity) -> GridDensity:
    """Product measure of one-dimensional grid densities."""
    p = factors[0].p
    for f in factors[1:]:
        p = np.multiply.outer(p, f.p)
    return GridDensity(tuple(f.x for f in factors), p, label="x".join(f.label for f in factors)).normalized()


def gaussian_convolve(x_src, mass_src, y, var: float, scale: float = 1.0, derivative: bool = False, chunk: int = 512) -> np.ndarray:
    """Density of ``scale * X + N(0, var)`` at ``y`` for discrete ``X``.

    ``mass_src`` holds quadrature masses (density times weight) at ``x_src``.
    With ``derivative=True`` the y-derivative of that density is returned.
    """
    keep = mass_src != 0
    xs = scale * np.asarray(x_src)[keep]
    ms = np.asarray(mass_src)[keep]
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    c = 1 / math.sqrt(2 * math.pi * var)
    reach = 12 * math.sqrt(var)  # kernel below 1e-31 of its peak beyond this
    order = np.argsort(xs, kind="stable")
    xs, ms = xs[order], ms[order]
    for i in range(0, y.size, chunk):
        yc = y[i : i + chunk]
        a = np.searchsorted(xs, yc.min() - reach)
        b = np.searchsorted(xs, yc.max() + reach, side="right")
        diff = yc[:, None] - xs[None, a:b]
        k = c * np.exp(-(diff**2) / (2 * var))
        if derivative:
            k = k * (-diff / var)
        out[i : i + chunk] = k @ ms[a:b]
    return out


def smoothed_uniform(half_width: float, sigma: float, n: int = 2049, reach: float = 9.0) -> GridDensity:
    """Uniform on [-a, a] convolved with N(0, sigma^2), in closed form.

    The grid spans [-a - reach sigma, a + reach sigma].
    """
    a = float(half_width)
    x = np.linspace(-a - reach * sigma, a + reach * sigma, n)
    r = np.abs(x)  # written with lower tails so the far tails keep full precision
    p = (special.ndtr((a - r) / sigma) - special.ndtr((-a - r) / sigma)) / (2 * a)
    return GridDensity.on_line(x, p, label=f"uniform({a:.4g})*N(0,{sigma:g}^2)")


def smooth(mu: GridDensity, sigma: float) -> GridDensity:
    """Convolve a 1-D density with N(0, sigma^2); the grid grows by 8 sigma per side."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x, h = mu.x, mu.h
    pad = int(math.ceil(8 * sigma / h))
    y = x[0] + h * np.arange(-pad, x.size + pad)
    p = gaussian_convolve(x, mu.p * trapezoid_weights(x), y, sigma**2)
    return GridDensity.on_line(y, p, label=f"{mu.label}*N(0,{sigma:g}^2)")


# --- moments -------------------------------------------------------------


def gaussian_moment(alpha) -> float:
    """E_gamma[x^alpha] = prod (a_j - 1)!! for even a_j, else 0."""
    out = 1.0
    for a in np.atleast_1d(alpha):
        a = int(a)
        if a % 2:
            return 0.0
        out *= float(special.factorial2(a - 1)) if a > 0 else 1.0
    return out


@dataclass(frozen=True)
class MomentReport:
    """Mixed moments of a measure next to their Gaussian values."""

    entries: dict  # alpha -> (mu_moment, gamma_moment, difference)

    def __getitem__(self, alpha):
        return self.entries[tuple(np.atleast_1d(alpha))][0]

    def max_deviation(self, max_degree: int | None = None, min_degree: int = 1) -> tuple[int, float]:
        """Largest |difference| over degrees in range, with its degree."""
        worst, deg = 0.0, 0
        for alpha, (_, _, diff) in self.entries.items():
            m = sum(alpha)
            if m < min_degree or (max_degree is not None and m > max_degree):
                continue
            if abs(diff) > worst:
                worst, deg = abs(diff), m
        return deg, worst

    def first_mismatch(self, max_degree: int, tol: float):
        """Lowest degree <= max_degree with a deviation above ``tol`` (None if all match)."""
        for m in range(1, max_degree + 1):
            bad = [abs(d) for a, (_, _, d) in self.entries.items() if sum(a) == m and abs(d) > tol]
            if bad:
                return m, max(bad)
        return None

    def lines(self) -> list[str]:
        return [
            f"alpha={''.join(map(str, a))} mu={m:+.9f} gamma={g:+.9f} diff={d:+.3e}"
            for a, (m, g, d) in self.entries.items()
        ]


def moments(mu: GridDensity | SampleMeasure, max_degree: int) -> MomentReport:
    """All mixed moments up to ``max_degree`` with the Gaussian comparison."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    d = mu.dim
    if isinstance(mu, GridDensity):
        pts = mu.points
    else:
        pts = mu.points
    w = mu.mass_weights
    entries = {}
    for alpha in graded_basis(d, 1, max_degree):
        mono = np.prod(pts ** np.array(alpha), axis=1)
        val = float(np.sum(w * mono))
        if not math.isfinite(val):
            raise OverflowError(f"non-finite moment for alpha={alpha}")
        g = gaussian_moment(alpha)
        entries[alpha] = (val, g, val - g)
    return MomentReport(entries)


# --- moment matching -----------------------------------------------------

_FAMILIES = {
    # parameters theta -> component list; all members are symmetric
    "uniform_gaussian_mixture": (
        lambda th: [
            {"kind": "uniform", "weight": 0.5, "half_width": math.sqrt(th[0])},
            {"kind": "gaussian", "weight": 0.5, "variance": th[1]},
        ],
        np.array([2.0, 1.0]),
        (np.array([1e-3, 1e-3]), np.array([30.0, 30.0])),
    ),
    "gaussian_scale_mixture": (
        lambda th: [
            {"kind": "gaussian", "weight": 0.5, "variance": th[0]},
            {"kind": "gaussian", "weight": 0.5, "variance": th[1]},
        ],
        np.array([0.5, 1.8]),
        (np.array([1e-3, 1e-3]), np.array([30.0, 30.0])),
    ),
}


def match_moments(family: str | dict, degree: int, n: int = 4096, half_width: float = 10.0,
                  tol: float = 1e-10, max_iter: int = 100) -> GridDensity:
    """Find a family member whose moments up to ``degree`` are Gaussian.

    Members are symmetric, so odd moments vanish; the even moments
    2, 4, ... <= degree are solved for by damped Newton iteration on the
    moment map of the tabulated density (so the returned grid itself matches).

    Families: ``"symmetric"`` (degree <= 3, returns the unit-variance uniform),
    ``"uniform_gaussian_mixture"`` and ``"gaussian_scale_mixture"``.

    Raises
    ------
    MomentMatchError
        No admissible parameters, or the solution degenerates to the Gaussian.
    """
    if isinstance(family, dict):
        family = family.get("family", "uniform_gaussian_mixture")
    if family == "symmetric":
        if degree > 3:
            raise MomentMatchError("the symmetric family only fixes moments up to degree 3")
        return unit_uniform(n + 1)
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    build, theta, (lo, hi) = _FAMILIES[family]
    orders = list(range(2, degree + 1, 2))
    if len(orders) > theta.size:
        raise MomentMatchError(f"{family} has {theta.size} parameters for {len(orders)} constraints")
    targets = np.array([gaussian_moment((m,)) for m in orders])

    def residual(th):
        g = mixture(build(th), n=n, half_width=half_width)
        return np.array([g.expect(g.x**m) for m in orders]) - targets

    theta = theta.copy()
    r = residual(theta)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            break
        jac = np.empty((len(orders), theta.size))
        for j in range(theta.size):
            e = np.zeros_like(theta)
            e[j] = 1e-6 * max(1.0, abs(theta[j]))
            jac[:, j] = (residual(theta + e) - residual(theta - e)) / (2 * e[j])
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            cand = np.clip(theta + lam * step, lo, hi)
            rc = residual(cand)
            if np.linalg.norm(rc) < np.linalg.norm(r):
                break
            lam /= 2
        else:
            raise MomentMatchError(f"no solution found for {family} up to degree {degree}",
                                   float(np.max(np.abs(r))))
        theta, r = cand, rc
    res = float(np.max(np.abs(r)))
    if res >= tol:
        raise MomentMatchError(f"no solution found for {family} up to degree {degree}", res)
    comps = build(theta)
    if family == "gaussian_scale_mixture" and abs(theta[0] - theta[1]) < 1e-3:
        raise MomentMatchError(
            "no solution: the scale mixture only matches by collapsing to the Gaussian", res)
    g = mixture(comps, n=n, half_width=half_width)
    return GridDensity(g.axes, g.p, label=f"{family}{tuple(round(float(t), 6) for t in theta)}")


# --- Poincare constant ---------------------------------------------------


@dataclass(frozen=True)
class PoincareEstimate:
    constant: float
    eigenvalue: float
    size: int
    residual: float


def poincare_constant(mu: GridDensity, rel_floor: float = 1e-13) -> PoincareEstimate:
    """Poincare constant of a 1-D density as the inverse spectral gap.

    Solves the Neumann problem ``-(p f')' = lam p f`` by a conservative
    finite-difference scheme on the nodes where ``p > rel_floor * max(p)``
    (half cells at the ends, flux at midpoints).
    """
    if mu.dim != 1:
        raise ValueError("poincare_constant is implemented for d = 1")
    i, j = mu.support(rel_floor)
    p = mu.p[i : j + 1]
    if np.any(p <= rel_floor * mu.p.max()):
        raise ValueError("density has interior zeros; Poincare inequality fails")
    x = mu.x[i : j + 1]
    h = x[1] - x[0]
    flux = 0.5 * (p[1:] + p[:-1]) / h
    mass = p * trapezoid_weights(x)
    diag = np.zeros_like(p)
    diag[:-1] += flux
    diag[1:] += flux
    s = 1 / np.sqrt(mass)
    d_sym = diag * s * s
    e_sym = -flux * s[:-1] * s[1:]
    vals, vecs = linalg.eigh_tridiagonal(d_sym, e_sym, select="i", select_range=(0, 1))
    lam = float(vals[1])
    v = vecs[:, 1]
    resid = np.zeros_like(v)
    resid += d_sym * v
    resid[:-1] += e_sym * v[1:]
    resid[1:] += e_sym * v[:-1]
    resid -= lam * v
    return PoincareEstimate(1 / lam, lam, int(p.size), float(np.linalg.norm(resid)))


# --- specs and files -----------------------------------------------------


def from_spec(spec: dict) -> GridDensity:
    """Build a grid density from a distribution spec dictionary.

    ``type`` is one of ``uniform``, ``gaussian``, ``mixture``,
    ``smoothed_uniform`` or ``grid_file``.  ``smoothed_uniform`` shrinks the
    uniform so that the smoothed law has unit variance.
    """
    kind = spec.get("type")
    n = int(spec.get("n", spec.get("grid", 4096)))
    if kind == "uniform":
        m = n + 1 if n % 2 == 0 else n
        if "half_width" in spec:
            return uniform(float(spec["half_width"]), n=m)
        return unit_uniform(m)
    if kind == "gaussian":
        var = float(spec.get("variance", 1.0))
        if var == 1.0 and float(spec.get("mean", 0.0)) == 0.0:
            return standard_gaussian(1, n=n, half_width=float(spec.get("half_width", 12.0)))
        return gaussian(var, float(spec.get("mean", 0.0)), n=n)
    if kind == "smoothed_uniform":
        sigma = float(spec.get("sigma", 0.05))
        a = math.sqrt(3 * (1 - sigma**2)) if spec.get("unit_variance", True) else float(spec.get("half_width", SQRT3))
        return smoothed_uniform(a, sigma, n=int(spec.get("n", 2049)))
    if kind == "mixture":
        if "components" in spec:
            return mixture(spec["components"], n=n, half_width=float(spec.get("half_width", 10.0)))
        return match_moments(spec.get("family", "uniform_gaussian_mixture"),
                             int(spec.get("match_degree", 4)), n=n)
    if kind == "grid_file":
        return read_grid_csv(spec["path"])
    raise ValueError(f"unknown distribution type {kind!r}")


def load_spec(path) -> tuple[GridDensity, dict]:
    spec = json.loads(Path(path).read_text())
    if spec.get("type") == "grid_file" and not Path(spec["path"]).is_absolute():
        spec = dict(spec, path=str(Path(path).parent / spec["path"]))
    return from_spec(spec), spec


def write_grid_csv(mu: GridDensity, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "p"])
        for xi, pi in zip(mu.x, mu.p):
            w.writerow([repr(float(xi)), repr(float(pi))])


def read_grid_csv(path) -> GridDensity:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return GridDensity.on_line(data[:, 0], data[:, 1], label=Path(path).stem)
