"""Distances and information functionals relative to the standard Gaussian,
and checks of the functional inequalities that tie them to Stein discrepancies.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .flow import evolve_density
from .kernels import MomentMismatch
from .measures import GridDensity, SampleMeasure

__all__ = [
    "NonSmoothDensity",
    "SinkhornDiverged",
    "W2Estimate",
    "InequalityVerdict",
    "FunctionalReport",
    "entropy",
    "fisher",
    "fisher_or_inf",
    "wasserstein1",
    "wasserstein1_cdf",
    "wasserstein2_1d",
    "wasserstein2_2d",
    "zolotarev_1d",
    "gaussian_reference",
    "functional_report",
    "verify_hsi",
    "verify_transport",
    "verify_fisher_decay",
    "verify_debruijn",
    "verify_ov",
    "write_verdicts_csv",
]

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


class NonSmoothDensity(ValueError):
    """Finite differences of log p do not converge (jumps or kinks)."""


class SinkhornDiverged(RuntimeError):
    pass


# --- entropy and Fisher information --------------------------------------


def entropy(mu: GridDensity) -> float:
    """Relative entropy int p log(p / phi) with 0 log 0 = 0."""
    p = mu.p.reshape(-1)
    if np.any(p < 0):
        raise ValueError("density has negative nodes")
    pts = mu.points
    log_phi = -0.5 * np.sum(pts**2, axis=1) - mu.dim * LOG_SQRT_2PI
    w = mu.weights.reshape(-1)
    pos = p > 0
    val = float(np.sum(w[pos] * p[pos] * (np.log(p[pos]) - log_phi[pos])))
    return max(val, 0.0)


def _score_sq(x: np.ndarray, logp: np.ndarray, step: int) -> tuple[np.ndarray, slice]:
    """(dlogp/dx + x)^2 by 4th-order central differences with node stride ``step``."""
    h = (x[1] - x[0]) * step
    s = step
    core = slice(2 * s, x.size - 2 * s)
    d = (logp[: -4 * s or None] - 8 * logp[s : -3 * s] + 8 * logp[3 * s : -s] - logp[4 * s :]) / (12 * h)
    return (d + x[core]) ** 2, core


def fisher(mu: GridDensity, rel_floor: float = 1e-10, smooth_tol: float = 1e-2) -> float:
    """Relative Fisher information int p |(log p)' + x|^2 (d = 1).

    The score is taken from 4th-order differences of log p where p exceeds
    ``rel_floor * max p``.  The same quantity on the twice coarser stencil must
    agree within ``smooth_tol`` (relative, or absolute below 1e-6), otherwise
    the density is treated as non-smooth.

    Raises
    ------
    NonSmoothDensity
        Jump at the edge of the support or non-converging differences.
    """
    if mu.dim != 1:
        raise ValueError("fisher is implemented for d = 1")
    i, j = mu.support(rel_floor)
    p = mu.p[i : j + 1]
    x = mu.x[i : j + 1]
    if x.size < 20:
        raise NonSmoothDensity("support too narrow for finite differences")
    edge = max(p[0], p[-1]) / p.max()
    if edge > 1e-6:
        raise NonSmoothDensity(f"density jumps at the support edge (relative height {edge:.2e})")
    if np.any(p <= 0):
        raise NonSmoothDensity("density vanishes inside its support")
    logp = np.log(p)
    vals = []
    for step in (1, 2):
        sq, core = _score_sq(x, logp, step)
        w = np.full(sq.size, (x[1] - x[0]))
        w[0] = w[-1] = 0.5 * (x[1] - x[0])
        vals.append(float(np.sum(w * p[core] * sq)))
    fine, coarse = vals
    if abs(fine - coarse) > smooth_tol * max(abs(fine), 1e-4):
        raise NonSmoothDensity(f"Fisher information not resolved ({fine:.4g} vs {coarse:.4g} on a coarser stencil)")
    return max(fine, 0.0)


def fisher_or_inf(mu: GridDensity, **kw) -> float:
    try:
        return fisher(mu, **kw)
    except NonSmoothDensity:
        return math.inf


# --- one-dimensional transport distances ---------------------------------


def _quantile_pieces(mu: GridDensity):
    """Breakpoints (u, x) of the piecewise-linear quantile function.

    Zero-mass cells are dropped, so flat stretches of the CDF become jumps of
    the quantile function between consecutive pieces.
    """
    x = mu.x
    F = mu.cdf()
    F = F / F[-1]
    du = np.diff(F)
    keep = du > 0
    return F[:-1][keep], F[1:][keep], x[:-1][keep], x[1:][keep]


def _eval_pieces(pieces, u_lo, u_hi):
    """Quantile values at u_lo, midpoint and u_hi, each interval inside one piece."""
    ua, ub, xa, xb = pieces
    mid = 0.5 * (u_lo + u_hi)
    k = np.clip(np.searchsorted(ub, mid), 0, ub.size - 1)
    slope = (xb[k] - xa[k]) / (ub[k] - ua[k])
    return (xa[k] + slope * (u_lo - ua[k]), xa[k] + slope * (mid - ua[k]), xa[k] + slope * (u_hi - ua[k]))


def _quantile_diff(mu: GridDensity, nu: GridDensity):
    if mu.dim != 1 or nu.dim != 1:
        raise ValueError("one-dimensional grid densities required")
    pm, pn = _quantile_pieces(mu), _quantile_pieces(nu)
    u = np.unique(np.concatenate([[0.0, 1.0], pm[0], pm[1], pn[0], pn[1]]))
    u = u[(u >= 0) & (u <= 1)]
    lo, hi = u[:-1], u[1:]
    a = _eval_pieces(pm, lo, hi)
    b = _eval_pieces(pn, lo, hi)
    return hi - lo, a[0] - b[0], a[1] - b[1], a[2] - b[2]


def wasserstein2_1d(mu: GridDensity, nu: GridDensity) -> float:
    """W2 by integrating the squared quantile difference.

    Both CDFs are taken piecewise linear on their grids, so each quantile
    function is piecewise linear and Simpson's rule on the merged breakpoints
    integrates the squared difference exactly.
    """
    L, dl, dm, dr = _quantile_diff(mu, nu)
    return math.sqrt(max(float(np.sum(L / 6 * (dl**2 + 4 * dm**2 + dr**2))), 0.0))


def _abs_linear_integral(L, a, b):
    """int_0^L |linear from a to b| exactly."""
    same = a * b >= 0
    out = np.where(same, 0.5 * L * np.abs(a + b), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = 0.5 * L * (a * a + b * b) / (np.abs(a) + np.abs(b))
    return np.where(same, out, cross)


def wasserstein1(mu: GridDensity, nu: GridDensity) -> float:
    """W1 from the quantile coupling, int_0^1 |F_mu^{-1} - F_nu^{-1}| du."""
    L, dl, _, dr = _quantile_diff(mu, nu)
    return float(np.sum(_abs_linear_integral(L, dl, dr)))


def _cdf_diff(mu: GridDensity, nu: GridDensity):
    x = np.union1d(mu.x, nu.x)
    Fm = np.interp(x, mu.x, mu.cdf() / mu.cdf()[-1], left=0.0, right=1.0)
    Fn = np.interp(x, nu.x, nu.cdf() / nu.cdf()[-1], left=0.0, right=1.0)
    return x, Fm - Fn


def wasserstein1_cdf(mu: GridDensity, nu: GridDensity) -> float:
    """W1 as int |F_mu - F_nu| dx (dual of the 1-Lipschitz sup)."""
    x, D = _cdf_diff(mu, nu)
    return float(np.sum(_abs_linear_integral(np.diff(x), D[:-1], D[1:])))


def zolotarev_1d(mu: GridDensity, nu: GridDensity, k: int = 1, mean_tol: float = 1e-6) -> float:
    """Zolotarev distance of order 1 or 2 between two laws on the line.

    k = 1 is int |F_mu - F_nu|.  For k = 2 (sup over |f''| <= 1) and equal
    means the value is int |G| with G(x) = int_{-inf}^x (F_mu - F_nu).

    Raises
    ------
    MomentMismatch
        k = 2 and the means differ by more than ``mean_tol``.
    """
    if k == 1:
        return wasserstein1_cdf(mu, nu)
    if k != 2:
        raise ValueError("only k in {1, 2} is available in d = 1")
    gap = abs(float(mu.mean()[0]) - float(nu.mean()[0]))
    if gap > mean_tol:
        raise MomentMismatch(1, gap)
    x, D = _cdf_diff(mu, nu)
    L = np.diff(x)
    G = np.concatenate([[0.0], np.cumsum(0.5 * L * (D[:-1] + D[1:]))])
    Dm = 0.5 * (D[:-1] + D[1:])
    Gm = G[:-1] + 0.5 * L * 0.5 * (D[:-1] + Dm)
    return float(np.sum(L / 6 * (np.abs(G[:-1]) + 4 * np.abs(Gm) + np.abs(G[1:]))))


# --- two-dimensional W2 by debiased Sinkhorn ------------------------------


@dataclass(frozen=True)
class W2Estimate:
    value: float
    error: float  # change against the previous epsilon level
    eps: float
    n_points: tuple

    def __float__(self) -> float:
        return self.value


def _as_points(m, max_points: int, seed: int, floor: float = 1e-14):
    if isinstance(m, SampleMeasure):
        pts = m.points
        if pts.shape[0] > max_points:
            idx = np.random.default_rng(seed).choice(pts.shape[0], max_points, replace=False)
            pts = pts[np.sort(idx)]
        return pts, np.full(pts.shape[0], 1.0 / pts.shape[0])
    w = m.mass_weights.reshape(-1)
    keep = w > floor * w.max()
    pts, w = m.points[keep], w[keep]
    if pts.shape[0] > max_points:
        idx = np.random.default_rng(seed).choice(pts.shape[0], max_points, replace=True, p=w / w.sum())
        pts = pts[np.sort(idx)]
        return pts, np.full(max_points, 1.0 / max_points)
    return pts, w / w.sum()


def _sinkhorn_cost(a, x, b, y, eps_levels, tol, max_iter):
    """Entropic OT value <a, f> + <b, g> at each epsilon level (log domain).

    Each level warm-starts from the previous potentials and stops once the
    L1 violation of the row marginal drops below ``tol``.
    """
    C = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2)
    la, lb = np.log(a), np.log(b)
    f = np.zeros(a.size)
    g = np.zeros(b.size)
    values = []
    for eps in eps_levels:
        for it in range(max_iter):
            f = -eps * logsumexp(lb[None, :] + (g[None, :] - C) / eps, axis=1)
            g = -eps * logsumexp(la[:, None] + (f[:, None] - C) / eps, axis=0)
            if it % 5 == 4:
                # columns are exact after the g-update; test the rows
                row = np.exp(la + logsumexp(lb[None, :] + (f[:, None] + g[None, :] - C) / eps, axis=1))
                if np.sum(np.abs(row - a)) < tol:
                    break
        else:
            if eps == eps_levels[-1]:
                raise SinkhornDiverged(f"marginal error above {tol} after {max_iter} iterations at eps={eps:.3g}")
        values.append(float(a @ f + b @ g))
    return values


def _sinkhorn_self(a, x, eps_levels, tol, max_iter):
    """Symmetric entropic OT value 2 <a, f> for the debiasing terms.

    The averaged fixed-point update f <- (f + T(f)) / 2 converges in a
    handful of iterations per level.
    """
    C = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
    la = np.log(a)
    f = np.zeros(a.size)
    values = []
    for eps in eps_levels:
        for _ in range(max_iter):
            f_new = 0.5 * (f - eps * logsumexp(la[None, :] + (f[None, :] - C) / eps, axis=1))
            moved = np.max(np.abs(f_new - f))
            f = f_new
            if moved < tol * eps:
                break
        else:
            if eps == eps_levels[-1]:
                raise SinkhornDiverged(f"symmetric potential still moving after {max_iter} iterations at eps={eps:.3g}")
        values.append(float(2 * a @ f))
    return values


def wasserstein2_2d(mu, nu, max_points: int = 2000, seed: int = 0, eps_rel: float = 1e-3,
                    tol: float = 1e-4, max_iter: int = 5000) -> W2Estimate:
    """Debiased entropic W2 between two point clouds or grid densities.

    Epsilon is halved from the cost scale down to ``eps_rel`` times the mean
    cost; the error estimate is the change from the previous level.
    """
    x, a = _as_points(mu, max_points, seed)
    y, b = _as_points(nu, max_points, seed + 1)
    scale = float(np.mean(np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2)))
    if scale == 0:
        return W2Estimate(0.0, 0.0, 0.0, (x.shape[0], y.shape[0]))
    top, last = max(scale, 1e-12), eps_rel * scale
    levels = [top]
    while levels[-1] / 2 > last:
        levels.append(levels[-1] / 2)
    levels.append(last)
    xy = _sinkhorn_cost(a, x, b, y, levels, tol, max_iter)
    xx = _sinkhorn_self(a, x, levels, tol, max_iter)
    yy = _sinkhorn_self(b, y, levels, tol, max_iter)
    div = [p - 0.5 * (q + r) for p, q, r in zip(xy, xx, yy)]
    w = math.sqrt(max(div[-1], 0.0))
    prev = math.sqrt(max(div[-2], 0.0)) if len(div) > 1 else w
    return W2Estimate(w, abs(w - prev), last, (x.shape[0], y.shape[0]))


# --- reports and verdicts ------------------------------------------------


@dataclass
class FunctionalReport:
    H: float
    I: float
    W1: float
    W2: float
    zolotarev: dict = field(default_factory=dict)
    discrepancies: dict = field(default_factory=dict)
    methods: dict = field(default_factory=dict)


def functional_report(mu: GridDensity, reference: GridDensity, discrepancies: dict | None = None,
                      zol_orders=(1, 2)) -> FunctionalReport:
    zol = {}
    for k in zol_orders:
        try:
            zol[k] = zolotarev_1d(mu, reference, k)
        except MomentMismatch:
            zol[k] = math.nan
    return FunctionalReport(
        H=entropy(mu),
        I=fisher_or_inf(mu),
        W1=wasserstein1(mu, reference),
        W2=wasserstein2_1d(mu, reference),
        zolotarev=zol,
        discrepancies=dict(discrepancies or {}),
        methods={"H": "trapezoid", "I": "fd4-logp", "W1": "quantile", "W2": "quantile", "zol": "cdf"},
    )


@dataclass(frozen=True)
class InequalityVerdict:
    name: str
    lhs: float
    rhs: float
    tol: float = 1e-9
    params: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        if math.isinf(self.rhs) and math.isinf(self.lhs):
            return 0.0 if self.rhs == self.lhs else self.rhs
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol)

    def row(self) -> list:
        return [self.name, _fmt(self.lhs), _fmt(self.rhs), _fmt(self.slack), str(self.passed).lower(),
                json.dumps(self.params, sort_keys=True, default=_fmt)]


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def gaussian_reference(mu: GridDensity, half_width: float = 8.0) -> GridDensity:
    """Standard Gaussian tabulated at the spacing of ``mu``'s grid, covering
    ``mu``'s box and at least [-half_width, half_width].

    Sharing the grid makes the interpolation errors of the two CDFs cancel.
    """
    x, h = mu.x, mu.h
    n_lo = max(0, int(math.ceil((x[0] + half_width) / h)))
    n_hi = max(0, int(math.ceil((half_width - x[-1]) / h)))
    y = x[0] + h * np.arange(-n_lo, x.size + n_hi)
    return GridDensity.on_line(y, np.exp(-0.5 * y * y), label="gamma")


def verify_hsi(mu: GridDensity, k: int, sbar_k: float, H: float | None = None, I: float | None = None,
               tol: float = 1e-9, label: str = "") -> InequalityVerdict:
    """H <= 1/2 min(I, k I^{(k-1)/k} S_k^{2/k})."""
    H = entropy(mu) if H is None else H
    I = fisher_or_inf(mu) if I is None else I
    if sbar_k == 0 or I == 0:
        stein = 0.0
    else:
        stein = k * I ** ((k - 1) / k) * sbar_k ** (2 / k)
    rhs = 0.5 * min(I, stein)
    params = {"measure": label, "k": k, "S_k": sbar_k, "I": I, "logsobolev_branch": 0.5 * I,
              "stein_branch": 0.5 * stein}
    return InequalityVerdict("hsi", H, rhs, tol, params)


def transport_bound(k: int, s1: float, sk: float) -> tuple[float, float]:
    """(stated bound, bound reached by the optimized proof) for W2(mu, gamma)."""
    if k == 2:
        if sk == 0:
            return 0.0, 0.0
        if math.isinf(sk):
            return math.inf, math.inf
        log_term = 1 - math.log(sk / s1)
        return max(sk * log_term, sk), (s1 * log_term if sk <= s1 else sk)
    if k < 2:
        raise ValueError("k >= 2 required")
    stated = 2 * k * s1 ** (1 - 1 / (k - 1)) * sk ** (1 / (k - 1))
    proof = 2 * math.factorial(k) ** (1 / (2 * (k - 1))) * s1 ** (1 - 1 / (k - 1)) * sk ** (1 / (k - 1))
    return stated, proof


def verify_transport(mu, k: int, s1: float, sk: float, w2: float | None = None, tol: float = 1e-9,
                     label: str = "") -> InequalityVerdict:
    """W2(mu, gamma) against the stated transport bound; the proof variant is logged."""
    if w2 is None:
        w2 = wasserstein2_1d(mu, gaussian_reference(mu)) if mu.dim == 1 else float(wasserstein2_2d(mu, _std_samples(mu.dim)))
    stated, proof = transport_bound(k, s1, sk)
    params = {"measure": label, "k": k, "S_1": s1, "S_k": sk, "proof_variant": proof}
    return InequalityVerdict("transport", w2, stated, tol, params)


def _std_samples(d: int, n: int = 2000, seed: int = 0) -> SampleMeasure:
    return SampleMeasure(np.random.default_rng(seed).standard_normal((n, d)), seed, "gamma")


def fisher_decay_bound(k: int, sbar_k: float, t: float) -> float:
    return math.exp(-2 * (k + 1) * t) / (-math.expm1(-2 * t)) ** k * math.factorial(k) * sbar_k**2


def verify_fisher_decay(mu: GridDensity, k: int, sbar_k: float, times, tol: float = 1e-9,
                        label: str = "", include_decay: bool = True) -> list[InequalityVerdict]:
    """I(mu_t) <= exp(-2(k+1)t) (1 - exp(-2t))^{-k} k! S_k^2 at each t.

    With ``include_decay`` the plain decay I(mu_t) <= exp(-2t) I(mu) is
    checked too (vacuous when I(mu) is infinite).
    """
    out = []
    I0 = fisher_or_inf(mu) if include_decay else None
    for t in times:
        if t < 0.05:
            raise ValueError("Fisher decay is checked for t >= 0.05")
        It = fisher(evolve_density(mu, t).density)
        out.append(InequalityVerdict("fisher-decay", It, fisher_decay_bound(k, sbar_k, t), tol,
                                     {"measure": label, "k": k, "t": t, "S_k": sbar_k}))
        if include_decay:
            out.append(InequalityVerdict("fisher-monotone", It, math.exp(-2 * t) * I0, tol,
                                         {"measure": label, "t": t, "I0": I0}))
    return out


def _fisher_along(mu: GridDensity):
    def f(t):
        if t <= 0:
            return fisher(mu)
        return fisher(evolve_density(mu, t).density)
    return f


def verify_debruijn(mu: GridDensity, T: float = 3.0, rel_tol: float = 1e-2, label: str = "") -> InequalityVerdict:
    """H(mu) - H(mu_T) against int_0^T I(mu_t) dt.

    The verdict's lhs is the mismatch relative to H(mu) and rhs the tolerance.
    """
    H0 = entropy(mu)
    drop = H0 - entropy(evolve_density(mu, T).density)
    integral, err = integrate.quad(_fisher_along(mu), 0.0, T, epsabs=1e-9, epsrel=1e-6, limit=200)
    # relative to H(mu); absolute for the Gaussian fixed point
    mismatch = abs(drop - integral) / H0 if H0 > 1e-12 else abs(drop - integral)
    params = {"measure": label, "T": T, "H": H0, "entropy_drop": drop, "fisher_integral": integral, "quad_error": err}
    return InequalityVerdict("debruijn", mismatch, rel_tol, 0.0, params)


def verify_ov(mu: GridDensity, T: float = 30.0, tol: float = 1e-9, label: str = "") -> InequalityVerdict:
    """W2(mu, gamma) <= int_0^inf I(mu_s)^{1/2} ds (truncated at T)."""
    w2 = wasserstein2_1d(mu, gaussian_reference(mu))
    fis = _fisher_along(mu)
    integral, err = integrate.quad(lambda s: math.sqrt(fis(s)), 0.0, T, epsabs=1e-10, epsrel=1e-6, limit=200)
    return InequalityVerdict("ov", w2, integral, tol, {"measure": label, "T": T, "quad_error": err})


def write_verdicts_csv(verdicts, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["inequality", "lhs", "rhs", "slack", "pass", "params"])
        for v in verdicts:
            w.writerow(v.row())
