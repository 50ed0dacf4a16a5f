"""Command-line front end.

    steinlab kernel --dist uniform.json --order 2
    steinlab sweep  --dist uniform.json --orders 1,2 --n 2:64:geometric
    steinlab verify --suite all --battery default

Exit codes: 0 success, 1 configuration or I/O error, 2 moment mismatch,
3 a checked inequality failed.  Outputs go to --out, else $STEINLAB_OUT,
else the current directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .clt import parse_ns, rate_sweep, write_rate_csv
from .flow import barbour_solve, regularity_check, stein_chain
from .kernels import (
    MomentMismatch,
    Trig,
    discrepancy,
    function_battery,
    kernel_1d_iterative,
    write_kernel_csv,
)
from .measures import (
    gaussian,
    load_spec,
    match_moments,
    moments,
    poincare_constant,
    standard_gaussian,
    uniform,
    from_spec,
)
from .metrics import (
    InequalityVerdict,
    verify_debruijn,
    verify_fisher_decay,
    verify_hsi,
    verify_ov,
    verify_transport,
    write_verdicts_csv,
)
from .variational import existence_bound_check

EXIT_OK, EXIT_CONFIG, EXIT_MOMENTS, EXIT_FAILED = 0, 1, 2, 3
SUITES = ("hsi", "transport", "fisher-decay", "debruijn", "ov", "existence-bound", "regularity", "stein-chain")
DEFAULT_TIMES = (0.1, 0.25, 0.5, 1.0, 2.0)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed command line; every field has a default."""

    command: str
    dist: str | None = None
    order: int = 2
    orders: tuple = (1, 2)
    ns: tuple = (2, 4, 8, 16, 32, 64)
    grid: int | None = None
    tol: float = 1e-6
    out: Path = field(default_factory=lambda: Path(os.environ.get("STEINLAB_OUT", ".")))
    seed: int = 0
    suite: str = "all"
    battery: str = "default"
    times: tuple = DEFAULT_TIMES


# --- measures --------------------------------------------------------------


def _load(cfg: RunConfig):
    if cfg.dist is None:
        raise ConfigError("--dist is required")
    try:
        mu, spec = load_spec(cfg.dist)
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read {cfg.dist}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad distribution spec {cfg.dist}: {exc}") from exc
    if cfg.grid is not None:
        mu, spec = from_spec(dict(spec, n=cfg.grid)), dict(spec, n=cfg.grid)
    return spec.get("name", Path(cfg.dist).stem), mu


def default_battery() -> list:
    """(name, density) pairs used when no --dist is given."""
    return [
        ("gamma", standard_gaussian(1, n=6145, half_width=12.0)),
        ("gauss_var0.5", gaussian(0.5)),
        ("gauss_var1.21", gaussian(1.21)),
        ("uniform", uniform()),
        ("smoothed_uniform", from_spec({"type": "smoothed_uniform", "sigma": 0.05})),
        ("matched_mixture", match_moments("uniform_gaussian_mixture", 4)),
    ]


def stein_discrepancy(mu, k: int, tol: float = 1e-6) -> float:
    """S_k of the iterative kernel, or inf when the kernel does not exist."""
    try:
        return discrepancy(kernel_1d_iterative(mu, k, tol=tol), mu)
    except MomentMismatch:
        return math.inf


def _has_centered_kernel(mu, k: int, tol: float) -> bool:
    return moments(mu, k + 1).first_mismatch(k + 1, tol) is None


# --- suites ----------------------------------------------------------------


def _suite_rows(suite: str, name: str, mu, cfg: RunConfig, battery_mode: bool) -> list:
    k = cfg.order
    if suite == "hsi":
        return [verify_hsi(mu, k, stein_discrepancy(mu, k, cfg.tol), label=name)]
    if suite == "transport":
        rows = []
        orders = (2, 3) if battery_mode else (k,)
        for kk in orders:
            if kk >= 3 and not _has_centered_kernel(mu, kk, cfg.tol):
                continue
            rows.append(verify_transport(mu, kk, stein_discrepancy(mu, 1, cfg.tol),
                                         stein_discrepancy(mu, kk, cfg.tol), label=name))
        return rows
    if suite == "fisher-decay":
        rows = []
        orders = (1, 2) if battery_mode else (k,)
        for kk in orders:
            s = stein_discrepancy(mu, kk, cfg.tol)
            if math.isinf(s):
                continue
            rows += verify_fisher_decay(mu, kk, s, cfg.times, label=name, include_decay=battery_mode and kk == 1)
        return rows
    if suite == "debruijn":
        return [verify_debruijn(mu, 3.0, label=name)]
    if suite == "ov":
        return [verify_ov(mu, label=name)]
    if suite == "existence-bound":
        rows = []
        cp = poincare_constant(mu).constant
        for kk in ((1, 2) if battery_mode else (k,)):
            s = stein_discrepancy(mu, kk, cfg.tol)
            if math.isinf(s):
                continue
            chk = existence_bound_check(mu, kk, s * s, cp)
            if chk.passed is None:
                continue
            rows.append(InequalityVerdict("existence-bound", chk.discrepancy_sq, chk.bound, 1e-9,
                                          {"measure": name, "k": kk, "C_P": cp}))
        return rows
    if suite == "stein-chain":
        rows = []
        for kk in ((1, 2) if battery_mode else (k,)):
            try:
                tau = kernel_1d_iterative(mu, kk, tol=cfg.tol)
            except MomentMismatch:
                continue
            for f in (Trig(1.0, 0.3), Trig(0.5, 1.1), Trig(2.0, 0.0)):
                lhs, rhs = stein_chain(mu, tau, f)
                rows.append(InequalityVerdict("stein-chain", abs(lhs - rhs), 1e-3, 0.0,
                                              {"measure": name, "k": kk, "f": repr(f), "lhs": lhs, "rhs": rhs}))
        return rows
    raise ConfigError(f"unknown suite {suite!r}")


def regularity_rows(orders=(1, 2)) -> list:
    """Barbour regularity and Poisson residual over the function battery."""
    rows = []
    for k in orders:
        for f in function_battery():
            sol = barbour_solve(f, order=k)
            rep = regularity_check(sol)
            ratio = 0.0 if math.isnan(rep.ratio) else rep.ratio
            rows.append(InequalityVerdict("regularity", ratio, 1 + 1e-3, 0.0,
                                          {"f": repr(f), "k": k, "sup_h": rep.sup_h, "sup_f": rep.sup_f}))
            rows.append(InequalityVerdict("poisson-residual", sol.residual(), 1e-3, 0.0, {"f": repr(f), "k": k}))
    return rows


# Which battery members each suite runs on (smoothness or moment requirements).
_BATTERY_SUITES = {
    "hsi": ("gamma", "gauss_var0.5", "gauss_var1.21", "smoothed_uniform", "matched_mixture"),
    "transport": ("gamma", "gauss_var0.5", "gauss_var1.21", "uniform", "smoothed_uniform", "matched_mixture"),
    "fisher-decay": ("gamma", "uniform", "smoothed_uniform"),
    "debruijn": ("gamma", "gauss_var0.5", "smoothed_uniform"),
    "ov": ("gamma", "gauss_var0.5", "smoothed_uniform"),
    "existence-bound": ("uniform", "smoothed_uniform", "matched_mixture"),
    "stein-chain": ("uniform", "smoothed_uniform", "matched_mixture"),
}


def run_verify(cfg: RunConfig) -> list:
    suites = SUITES if cfg.suite == "all" else (cfg.suite,)
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(SUITES + ('all',))}")
    rows = []
    if cfg.dist is not None:
        name, mu = _load(cfg)
        for s in suites:
            rows += regularity_rows((cfg.order,)) if s == "regularity" else _suite_rows(s, name, mu, cfg, False)
        return rows
    if cfg.battery != "default":
        raise ConfigError(f"unknown battery {cfg.battery!r}")
    battery = default_battery()
    for s in suites:
        if s == "regularity":
            rows += regularity_rows()
            continue
        for name, mu in battery:
            if name in _BATTERY_SUITES[s]:
                rows += _suite_rows(s, name, mu, cfg, True)
    return rows


# --- commands --------------------------------------------------------------


def cmd_kernel(cfg: RunConfig) -> int:
    name, mu = _load(cfg)
    k = cfg.order
    rep = moments(mu, k + 1)
    bad = rep.first_mismatch(k + 1, cfg.tol)
    if bad is not None:
        print(f"error: {name}: moment of degree {bad[0]} differs from the Gaussian by {bad[1]:.3e}; "
              f"a centered kernel of order {k} needs moments up to degree {k + 1}", file=sys.stderr)
        for line in rep.lines():
            print("  " + line, file=sys.stderr)
        return EXIT_MOMENTS
    tau = kernel_1d_iterative(mu, k, tol=cfg.tol)
    s = discrepancy(tau, mu)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"kernel_{name}_k{k}.csv"
    write_kernel_csv(tau, mu, path)
    summary = {"dist": name, "order": k, "S": s, "S_sq": s * s, "nodes": int(mu.x.size)}
    (cfg.out / f"kernel_{name}_k{k}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{name}: order {k}, S_{k} = {s:.6g}, S_{k}^2 = {s * s:.6g} -> {path}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    name, mu = _load(cfg)
    rep = rate_sweep(mu, cfg.orders, cfg.ns)
    rep.params.update({"dist": name, "seed": cfg.seed})
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"sweep_{name}.csv"
    write_rate_csv(rep, path)
    for col, (slope, err) in sorted(rep.slopes.items()):
        shown = "n/a (fewer than 3 points)" if slope is None else f"{slope:.4f} +- {err:.4f}"
        print(f"slope {col}: {shown}")
    for note in rep.notes:
        print(f"note: {note}")
    if not rep.passed:
        for row in rep.failing_rows():
            print(f"FAIL {json.dumps(row, sort_keys=True, default=str)}", file=sys.stderr)
        return EXIT_FAILED
    print(f"all {len(rep.rows)} rows pass -> {path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    rows = run_verify(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"verify_{cfg.suite}.csv"
    write_verdicts_csv(rows, path)
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {','.join(r.row())}", file=sys.stderr)
    print(f"{len(rows) - len(failed)}/{len(rows)} verdicts pass -> {path}")
    return EXIT_FAILED if failed else EXIT_OK


# --- parsing ---------------------------------------------------------------


def _float_list(s: str) -> tuple:
    return tuple(float(v) for v in s.split(",") if v)


def _int_list(s: str) -> tuple:
    return tuple(int(v) for v in s.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", help="distribution spec (JSON)")
    common.add_argument("--grid", type=int, help="grid nodes for the distribution")
    common.add_argument("--tol", type=float, default=1e-6, help="moment tolerance (default 1e-6)")
    common.add_argument("--out", type=Path, help="output directory (default $STEINLAB_OUT or .)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled subroutines")
    p = argparse.ArgumentParser(prog="steinlab", description="Higher-order Stein kernels and Gaussian approximation checks.")
    sub = p.add_subparsers(dest="command", required=True)
    k = sub.add_parser("kernel", parents=[common], help="tabulate a Stein kernel and its discrepancy")
    k.add_argument("--order", type=int, default=2)
    s = sub.add_parser("sweep", parents=[common], help="convergence rates of normalized sums")
    s.add_argument("--orders", default="1,2", help="kernel orders, e.g. 1,2")
    s.add_argument("--n", default="2:64:geometric", help="n values: LO:HI[:geometric|linear] or a list")
    v = sub.add_parser("verify", parents=[common], help="check functional inequalities")
    v.add_argument("--suite", default="all", help="one of " + ", ".join(SUITES) + ", all")
    v.add_argument("--battery", default="default")
    v.add_argument("--order", type=int, default=2)
    v.add_argument("--times", default=",".join(str(t) for t in DEFAULT_TIMES))
    return p


def parse_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, dist=args.dist, grid=args.grid, tol=args.tol, seed=args.seed)
    if args.out is not None:
        cfg.out = args.out
    try:
        if args.command == "kernel":
            cfg.order = args.order
        elif args.command == "sweep":
            cfg.orders = _int_list(args.orders)
            cfg.ns = tuple(parse_ns(args.n))
        else:
            cfg.suite, cfg.battery, cfg.order = args.suite, args.battery, args.order
            cfg.times = _float_list(args.times)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.order < 1 or any(o < 1 for o in cfg.orders):
        raise ConfigError("orders must be >= 1")
    return cfg


COMMANDS = {"kernel": cmd_kernel, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MomentMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            for line in exc.report.lines():
                print("  " + line, file=sys.stderr)
        return EXIT_MOMENTS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
