"""Laws of normalized sums U_n = n^{-1/2}(X_1 + ... + X_n) on grids, Stein
kernels of sums by conditioning, and convergence-rate sweeps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .kernels import KernelField, MomentMismatch, discrepancy, kernel_1d_iterative
from .measures import GridDensity, poincare_constant
from .metrics import entropy, fisher, gaussian_reference, wasserstein2_1d, zolotarev_1d

__all__ = [
    "AliasingError",
    "ConvolutionLadder",
    "RateReport",
    "convolve_ladder",
    "kernel_of_sums",
    "sum_discrepancies",
    "discrepancy_decay_sweep",
    "zolotarev_rate_check",
    "w2_rate_check",
    "entropy_rate_check",
    "rate_sweep",
    "product_rates",
    "fit_slope",
    "parse_ns",
    "write_rate_csv",
]

MAX_NODES = 2**16 + 1
TRIM_SD = 10.0


class AliasingError(RuntimeError):
    """Mass reached the edge of the working box."""


def _standardized(base: GridDensity) -> GridDensity:
    """Affine copy with mean 0 and variance 1 under the grid's own quadrature."""
    m = float(base.mean()[0])
    sd = math.sqrt(base.variance())
    return GridDensity.on_line((base.x - m) / sd, base.p * sd, label=base.label)


def _coarsened(base: GridDensity, n_max: int, max_nodes: int) -> GridDensity:
    """Subsample the grid so the trimmed sum grid for n_max fits in max_nodes."""
    i, j = base.support(1e-300)
    x, p = base.x[i : j + 1], base.p[i : j + 1]
    h = x[1] - x[0]
    sd = math.sqrt(base.variance())
    width = min(n_max * (x[-1] - x[0]), 2 * TRIM_SD * math.sqrt(n_max) * sd)
    stride = max(1, math.ceil(width / h / (max_nodes - 1)))
    while (x.size - 1) % stride and stride < x.size // 8:
        stride += 1  # keep both end nodes when possible (jump densities)
    return GridDensity.on_line(x[::stride], p[::stride], label=base.label)


def _padded(a: np.ndarray, fill=0.0) -> np.ndarray:
    return np.concatenate([[fill], a, [fill]])


@dataclass
class _SumLaw:
    """Point masses of S_n on x0 + h * (offset + arange(size))."""

    masses: np.ndarray
    offset: int


@dataclass
class ConvolutionLadder:
    """Laws of U_n for a one-dimensional base, built by exact discrete convolution.

    The base grid's trapezoid masses are convolved with themselves; S_n lives
    on the grid n * x0 + h * j.  Each level is trimmed to +-10 standard
    deviations of S_n, which discards far less than 1e-10 of mass.
    """

    base: GridDensity
    levels: dict = field(repr=False)  # n -> _SumLaw
    h: float
    x0: float
    edge_mass: dict = field(default_factory=dict)  # n -> mass removed by trimming

    requested: tuple = ()

    @property
    def ns(self) -> list:
        return list(self.requested)

    def _grid(self, n: int) -> np.ndarray:
        """Nodes of S_n with one empty node added at each end."""
        lev = self.levels[n]
        return n * self.x0 + self.h * (lev.offset + np.arange(-1, lev.masses.size + 1))

    def density(self, n: int) -> GridDensity:
        """Law of U_n on its own grid (spacing h / sqrt(n)).

        The zero end nodes make the trapezoid weights reproduce the discrete
        masses exactly, so moments are those of the discrete law.
        """
        if n == 1:
            return self.base
        rt = math.sqrt(n)
        x = self._grid(n) / rt
        p = _padded(self.levels[n].masses) * rt / self.h
        return GridDensity.on_line(x, p, label=f"{self.base.label}[n={n}]")

    def __getitem__(self, n: int) -> GridDensity:
        return self.density(n)


def convolve_ladder(base: GridDensity, ns, max_nodes: int = MAX_NODES, mass_tol: float = 1e-10,
                    standardize: bool = True) -> ConvolutionLadder:
    """Build mu_n for each n in ``ns``.

    Raises
    ------
    AliasingError
        Trimming a level would drop more than ``mass_tol`` of mass.
    """
    if base.dim != 1:
        raise ValueError("convolve_ladder needs a one-dimensional base")
    ns = sorted({int(n) for n in ns})
    if not ns or ns[0] < 1:
        raise ValueError("ns must be positive integers")
    n_max = ns[-1]
    b = _coarsened(base, n_max, max_nodes)
    if standardize:
        b = _standardized(b)
    elif abs(float(b.mean()[0])) > 1e-8 or abs(b.variance() - 1) > 1e-6:
        raise MomentMismatch(2, abs(b.variance() - 1))
    h = float(b.x[1] - b.x[0])
    m1 = b.mass_weights / b.mass_weights.sum()
    keep = set(ns) | {n - 1 for n in ns if n > 1} | {1}
    levels, edge = {}, {}
    cur = _SumLaw(m1.copy(), 0)
    x0 = float(b.x[0])
    for n in range(1, n_max + 1):
        if n > 1:
            cur = _SumLaw(np.convolve(cur.masses, m1), cur.offset)
            # trim to +-TRIM_SD standard deviations of S_n (mean 0, variance n)
            grid = n * x0 + h * (cur.offset + np.arange(cur.masses.size))
            inside = np.abs(grid) <= TRIM_SD * math.sqrt(n)
            lo, hi = np.argmax(inside), inside.size - np.argmax(inside[::-1])
            dropped = cur.masses[:lo].sum() + cur.masses[hi:].sum()
            if dropped > mass_tol:
                raise AliasingError(f"trimming S_{n} drops mass {dropped:.2e}")
            cur = _SumLaw(cur.masses[lo:hi].copy(), cur.offset + lo)
            edge[n] = float(dropped)
        if n in keep:
            levels[n] = cur
    return ConvolutionLadder(b, levels, h, x0, edge, tuple(ns))


def kernel_of_sums(ladder: ConvolutionLadder, n: int, order: int, tau_base: KernelField | None = None,
                   rel_floor: float = 1e-12) -> KernelField:
    """Order-k kernel of mu_n from the base kernel by conditioning.

    tau_n(m) = n^{(1-k)/2} E[tau(X_1) | U_n = m], evaluated as a ratio of
    discrete convolutions on the grid of S_n.  Nodes where the density of
    mu_n is below ``rel_floor`` times its maximum are marked invalid.
    """
    tau = kernel_1d_iterative(ladder.base, order) if tau_base is None else tau_base
    if n == 1:
        return tau
    m1 = ladder.levels[1].masses
    prev, cur = ladder.levels[n - 1], ladder.levels[n]
    num = np.convolve(tau.table * m1, prev.masses)
    # num lives on offsets prev.offset + j; align with cur
    start = cur.offset - prev.offset
    num = num[start : start + cur.masses.size]
    den = cur.masses
    valid = den > rel_floor * den.max()
    vals = np.zeros_like(den)
    vals[valid] = num[valid] / den[valid]
    vals *= n ** ((1 - order) / 2)
    return KernelField(order, 1, _padded(vals), _padded(valid, False), "conditional")


def sum_discrepancies(ladder: ConvolutionLadder, n: int, order: int) -> tuple[float, float]:
    """S_k(mu_n) from the conditional kernel and from the iterative kernel of mu_n."""
    mu = ladder.density(n)
    cond = discrepancy(kernel_of_sums(ladder, n, order), mu)
    it = discrepancy(kernel_1d_iterative(mu, order, check_moments=False), mu)
    return cond, it


# --- reports ---------------------------------------------------------------


def fit_slope(ns, values):
    """Least-squares slope of log(values) against log(n) with its standard error.

    Returns (None, None) with fewer than three positive points.
    """
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < 3:
        return None, None
    fit = stats.linregress(np.log(ns[ok]), np.log(v[ok]))
    return float(fit.slope), float(fit.stderr)


CSV_COLUMNS = ["n", "Sk1", "Sk2", "W2", "H", "dZol2", "bound_w2", "bound_S", "bound_H",
               "pass_S1", "pass_S2", "pass_w2", "pass_zol", "pass_H"]


@dataclass
class RateReport:
    """Per-n measurements with the bounds they are checked against.

    ``rows`` are dicts keyed by CSV_COLUMNS (missing entries are left blank);
    ``slopes`` maps a column to (slope, stderr); ``formulas`` names the bound
    behind each bound column.
    """

    rows: list
    slopes: dict = field(default_factory=dict)
    formulas: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failing_rows()

    def failing_rows(self) -> list:
        return [r for r in self.rows if any(v is False for c, v in r.items() if c.startswith("pass_"))]

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, np.nan) for r in self.rows], dtype=float)

    def merged(self, other: "RateReport") -> "RateReport":
        by_n = {r["n"]: dict(r) for r in self.rows}
        for r in other.rows:
            by_n.setdefault(r["n"], {"n": r["n"]}).update({k: v for k, v in r.items() if v is not None})
        return RateReport([by_n[n] for n in sorted(by_n)], {**self.slopes, **other.slopes},
                          {**self.formulas, **other.formulas}, {**self.params, **other.params},
                          self.notes + other.notes)


def _pass(lhs: float, rhs: float, tol: float) -> bool:
    return bool(lhs <= rhs + tol)


def discrepancy_decay_sweep(base: GridDensity, k: int, ns, tol: float = 1e-9,
                            ladder: ConvolutionLadder | None = None) -> RateReport:
    """S_k(mu_n)^2 <= n^{-k} S_k(mu)^2 for each n, with the slope of log S_k."""
    ns = sorted(ns)
    ladder = ladder or convolve_ladder(base, ns)
    tau = kernel_1d_iterative(ladder.base, k)
    s_base = discrepancy(tau, ladder.base)
    col = f"Sk{k}" if k in (1, 2) else f"S{k}"
    rows = []
    for n in ns:
        s = discrepancy(kernel_of_sums(ladder, n, k, tau), ladder.density(n))
        bound = n ** (-k / 2) * s_base
        rows.append({"n": n, col: s, "bound_S": bound, f"pass_S{k}": _pass(s, bound, tol)})
    rep = RateReport(rows, formulas={"bound_S": f"S_{k}(mu) n^(-{k}/2), bound on S_{k}(mu_n)"},
                     params={f"S{k}_base": s_base})
    rep.slopes[col] = fit_slope(ns, [r[col] for r in rows])
    return rep


def zolotarev_rate_check(base: GridDensity, ns, poincare: float | None = None, k: int = 2, tol: float = 1e-9,
                         ladder: ConvolutionLadder | None = None) -> RateReport:
    """d_Zol2(mu_n, gamma) against S_2(mu_n) and sqrt(C_P (C_P - 1) d) n^{-k/2}."""
    if k != 2:
        raise ValueError("the one-dimensional Zolotarev distance is available for k = 2")
    ns = sorted(ns)
    ladder = ladder or convolve_ladder(base, ns)
    cp = poincare_constant(ladder.base).constant if poincare is None else poincare
    tau = kernel_1d_iterative(ladder.base, k)
    rows = []
    for n in ns:
        mu = ladder.density(n)
        zol = zolotarev_1d(mu, gaussian_reference(mu), 2)
        s = discrepancy(kernel_of_sums(ladder, n, k, tau), mu)
        bound = math.sqrt(max(cp ** (k - 1) * (cp - 1), 0.0)) * n ** (-k / 2)
        rows.append({"n": n, "dZol2": zol, "Sk2": s, "bound_zol": bound,
                     "pass_zol": _pass(zol, s, tol) and _pass(zol, bound, tol)})
    rep = RateReport(rows, formulas={"bound_zol": "sqrt(C_P^(k-1) (C_P-1) d) n^(-k/2)",
                                     "pass_zol": "dZol2 <= Sk2 and dZol2 <= bound_zol"},
                     params={"C_P": cp},
                     notes=["decaying reading n^(-k/2) of the Zolotarev rate bound"])
    rep.slopes["dZol2"] = fit_slope(ns, [r["dZol2"] for r in rows])
    return rep


def w2_bound(n: int, cp: float, d: int = 1) -> float:
    c = math.sqrt(d * cp * (cp - 1))
    return c / n * (1 + 0.5 * math.log(n) + 0.5 * math.log(cp))


def w2_rate_check(base: GridDensity, ns, poincare: float | None = None, d: int = 1, tol: float = 1e-9,
                  ladder: ConvolutionLadder | None = None) -> RateReport:
    """W2(mu_n, gamma) against (sqrt(d C_P (C_P-1))/n)(1 + log(n)/2 + log(C_P)/2)."""
    ns = sorted(ns)
    ladder = ladder or convolve_ladder(base, ns)
    cp = poincare_constant(ladder.base).constant if poincare is None else poincare
    threshold = math.sqrt(max(d * cp * (cp - 1), 0.0))
    rows = []
    for n in ns:
        mu = ladder.density(n)
        w2 = wasserstein2_1d(mu, gaussian_reference(mu))
        row = {"n": n, "W2": w2}
        if n >= threshold and cp >= 1:
            row["bound_w2"] = w2_bound(n, cp, d)
            row["pass_w2"] = _pass(w2, row["bound_w2"], tol)
        rows.append(row)
    ratio = [r["n"] * r["W2"] / (1 + 0.5 * math.log(r["n"])) for r in rows]
    rep = RateReport(rows, formulas={"bound_w2": "sqrt(d C_P (C_P-1))/n (1 + log(n)/2 + log(C_P)/2)"},
                     params={"C_P": cp, "d": d, "compensated_max": max(ratio), "prefactor": threshold})
    rep.slopes["W2"] = fit_slope(ns, [r["W2"] for r in rows])
    if cp > 1:
        # second display, logged with k = 2 substituted; not asserted
        rep.params["second_display_k2"] = [2 * threshold / ((2 - 1) * n) for n in ns]
    return rep


def entropy_rate_check(base: GridDensity, ns, poincare: float | None = None, d: int = 1, tol: float = 1e-9,
                       ladder: ConvolutionLadder | None = None) -> RateReport:
    """Ent(mu_n) <= (2 C_P sqrt(d) / n) I(mu)^{1/2}."""
    ns = sorted(ns)
    ladder = ladder or convolve_ladder(base, ns)
    cp = poincare_constant(ladder.base).constant if poincare is None else poincare
    I = fisher(ladder.base)
    rows = []
    for n in ns:
        H = entropy(ladder.density(n))
        bound = 2 * cp * math.sqrt(d) / n * math.sqrt(I)
        rows.append({"n": n, "H": H, "bound_H": bound, "pass_H": _pass(H, bound, tol)})
    rep = RateReport(rows, formulas={"bound_H": "2 C_P sqrt(d) I(mu)^(1/2) / n"}, params={"C_P": cp, "I": I})
    rep.slopes["H"] = fit_slope(ns, [r["H"] for r in rows])
    return rep


def rate_sweep(base: GridDensity, orders, ns, tol: float = 1e-9) -> RateReport:
    """Every per-n measurement the base admits, one ladder shared by all checks.

    Orders whose kernels do not exist are skipped with a note; the entropy
    check runs only for bases with finite Fisher information.
    """
    ns = sorted(ns)
    ladder = convolve_ladder(base, ns)
    cp = poincare_constant(ladder.base).constant
    rep = RateReport([{"n": n} for n in ns], params={"orders": list(orders), "ns": ns, "C_P": cp})
    for k in sorted(orders):  # bound_S ends up describing the highest order
        try:
            rep = rep.merged(discrepancy_decay_sweep(base, k, ns, tol, ladder))
        except MomentMismatch as exc:
            rep.notes.append(f"order {k} skipped: {exc}")
    rep = rep.merged(w2_rate_check(base, ns, cp, tol=tol, ladder=ladder))
    if 2 in orders and "Sk2" in rep.slopes:
        rep = rep.merged(zolotarev_rate_check(base, ns, cp, tol=tol, ladder=ladder))
    try:
        rep = rep.merged(entropy_rate_check(base, ns, cp, tol=tol, ladder=ladder))
    except ValueError as exc:
        rep.notes.append(f"entropy rate skipped: {exc}")
    return rep


def product_rates(base: GridDensity, ns, k: int = 2, d: int = 2) -> RateReport:
    """Rates for the product of d copies of a one-dimensional base.

    Laws, kernels and W2 factorize: S_k(mu_n^{(x)d})^2 = d S_k(mu_n)^2 and
    W2 = sqrt(d) W2 of one coordinate.
    """
    ns = sorted(ns)
    one = discrepancy_decay_sweep(base, k, ns)
    ladder = convolve_ladder(base, ns)
    cp = poincare_constant(ladder.base).constant
    rows = []
    for r in one.rows:
        n = r["n"]
        s = math.sqrt(d) * r[f"Sk{k}"]
        w2 = math.sqrt(d) * wasserstein2_1d(ladder.density(n), gaussian_reference(ladder.density(n)))
        bound = math.sqrt(d) * r["bound_S"]
        row = {"n": n, f"Sk{k}": s, "W2": w2, "bound_S": bound, f"pass_S{k}": _pass(s, bound, 1e-9)}
        if n >= math.sqrt(d * cp * (cp - 1)):
            row["bound_w2"] = w2_bound(n, cp, d)
            row["pass_w2"] = _pass(w2, row["bound_w2"], 1e-9)
        rows.append(row)
    rep = RateReport(rows, params={"d": d, "C_P": cp, "k": k},
                     formulas={"bound_S": f"sqrt(d) S_{k}(base) n^(-{k}/2)", "bound_w2": "sqrt(d C_P (C_P-1))/n (1 + log(n)/2 + log(C_P)/2)"})
    rep.slopes[f"Sk{k}"] = fit_slope(ns, [r[f"Sk{k}"] for r in rows])
    return rep


def parse_ns(spec: str) -> list[int]:
    """'2:64:geometric' -> [2, 4, ..., 64]; '2:8' or '2:8:linear' -> 2..8; '2,5,9' -> list."""
    spec = spec.strip()
    if "," in spec or ":" not in spec:
        return [int(s) for s in spec.split(",") if s]
    parts = spec.split(":")
    lo, hi = int(parts[0]), int(parts[1])
    kind = parts[2] if len(parts) > 2 else "linear"
    if lo < 1 or hi < lo:
        raise ValueError(f"bad n range {spec!r}")
    if kind == "geometric":
        out, n = [], lo
        while n <= hi:
            out.append(n)
            n *= 2
        return out
    if kind == "linear":
        return list(range(lo, hi + 1))
    raise ValueError(f"unknown n spacing {kind!r}")


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rate_csv(report: RateReport, path, sidecar: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.rows:
            w.writerow([_cell(r.get(c)) for c in CSV_COLUMNS])
    if sidecar:
        meta = {"params": report.params, "slopes": report.slopes, "formulas": report.formulas, "notes": report.notes}
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=_cell)
            fh.write("\n")
