import json
import math

import numpy as np
import pytest
from scipy import stats

from steinlab.clt import (AliasingError, RateReport, convolve_ladder, discrepancy_decay_sweep, fit_slope,
                          kernel_of_sums, parse_ns, product_rates, rate_sweep, sum_discrepancies,
                          w2_rate_check, write_rate_csv, zolotarev_rate_check)
from steinlab.kernels import discrepancy, kernel_1d_iterative
from steinlab.measures import GridDensity, standard_gaussian, uniform


@pytest.fixture(scope="module")
def ladder():
    return convolve_ladder(uniform(), [1, 2, 4, 8, 12, 16])


def test_moments_of_sums(ladder):
    for n in ladder.ns:
        mu = ladder.density(n)
        assert mu.mass() == pytest.approx(1.0, abs=1e-12)
        assert float(mu.mean()[0]) == pytest.approx(0.0, abs=1e-12)
        assert mu.variance() == pytest.approx(1.0, abs=1e-8)


def test_two_fold_sum_is_triangular(ladder):
    mu = ladder.density(2)
    c = math.sqrt(6)  # U_2 = (X1 + X2)/sqrt 2 lives on [-sqrt 6, sqrt 6]
    tri = np.clip(c - np.abs(mu.x), 0, None) / c**2
    assert np.max(np.abs(mu.p - tri)) < 5e-3 * tri.max()
    inner = np.abs(mu.x) < c - 0.05
    assert np.max(np.abs(mu.p - tri)[inner]) < 1e-4  # O(h) rounding of the kink at 0


def irwin_hall_pdf(x, n):
    """Density of the sum of n U(0,1) variables (closed form)."""
    x = np.atleast_1d(x)
    out = np.zeros_like(x, dtype=float)
    for k in range(n + 1):
        out += (-1) ** k * math.comb(n, k) * np.clip(x - k, 0, None) ** (n - 1)
    return out / math.factorial(n - 1)


def test_twelve_fold_sum_is_irwin_hall(ladder):
    # U_12 = sum of the centered U(0,1) variables = Irwin-Hall(12) - 6
    mu = ladder.density(12)
    inner = np.abs(mu.x) <= 5
    exact = irwin_hall_pdf(mu.x[inner] + 6, 12)
    assert np.max(np.abs(mu.p[inner] - exact)) < 1e-6
    # the sup distance to the Gaussian sits at the origin: 0.39393 vs 0.39894
    sup = np.max(np.abs(mu.p - stats.norm.pdf(mu.x)))
    assert sup == pytest.approx(0.0050167, abs=1e-6)


def test_gaussian_base_is_stable():
    g = standard_gaussian(n=2049, half_width=10.0)
    lad = convolve_ladder(g, [2, 4])
    for n in (2, 4):
        mu = lad.density(n)
        assert np.max(np.abs(mu.p - stats.norm.pdf(mu.x))) < 1e-6


def test_kernel_of_sums_trivial_cases(ladder):
    tau = kernel_1d_iterative(ladder.base, 2)
    assert kernel_of_sums(ladder, 1, 2, tau) is tau
    g = standard_gaussian(n=2049, half_width=10.0)
    lad = convolve_ladder(g, [2, 3])
    for n in (2, 3):
        assert np.max(np.abs(kernel_of_sums(lad, n, 1).table)) < 1e-6


def test_kernel_of_sums_is_a_kernel(ladder):
    for n in (2, 8):
        for k in (1, 2):
            cond, it = sum_discrepancies(ladder, n, k)
            assert cond == pytest.approx(it, rel=1e-4)
    # conditioning contracts the L2 norm: S_2(mu_n) <= S_2(mu) / n
    s_base = discrepancy(kernel_1d_iterative(ladder.base, 2), ladder.base)
    s8 = discrepancy(kernel_of_sums(ladder, 8, 2), ladder.density(8))
    assert s8 <= s_base / 8


def test_aliasing_detected():
    # a Laplace base tabulated out to ~21 sd puts ~1e-9 of the mass of S_2 beyond +-10 sd
    x = np.linspace(-120, 120, 4801)
    base = GridDensity.on_line(x, np.exp(-np.abs(x) / 4))
    with pytest.raises(AliasingError):
        convolve_ladder(base, [2])


def test_sweeps_on_gaussian_are_zero():
    g = standard_gaussian(n=2049, half_width=10.0)
    rep = discrepancy_decay_sweep(g, 1, [2, 4, 8])
    assert np.all(rep.column("Sk1") < 1e-6)
    assert rep.passed


def test_uniform_rates(ladder):
    ns = [2, 4, 8, 16]
    rep = discrepancy_decay_sweep(uniform(), 2, ns, ladder=ladder)
    assert rep.passed
    assert rep.slopes["Sk2"][0] == pytest.approx(-1.0, abs=0.05)
    w2 = w2_rate_check(uniform(), ns, ladder=ladder)
    assert w2.passed and "second_display_k2" in w2.params
    zol = zolotarev_rate_check(uniform(), ns, ladder=ladder)
    assert zol.passed


def test_rate_sweep_merges_orders():
    rep = rate_sweep(uniform(), (1, 2), [2, 4, 8])
    assert rep.passed
    assert {"Sk1", "Sk2", "W2", "dZol2"} <= set(rep.slopes)
    assert any("entropy" in n for n in rep.notes)  # jump base has infinite Fisher information


def test_product_rates():
    rep = product_rates(uniform(), [2, 4, 8], k=2, d=2)
    assert rep.passed
    s1 = discrepancy_decay_sweep(uniform(), 2, [2, 4, 8]).column("Sk2")
    np.testing.assert_allclose(rep.column("Sk2"), math.sqrt(2) * s1)


def test_parse_ns():
    assert parse_ns("2:64:geometric") == [2, 4, 8, 16, 32, 64]
    assert parse_ns("2:5") == [2, 3, 4, 5]
    assert parse_ns("2,5,9") == [2, 5, 9]
    assert parse_ns("2") == [2]
    with pytest.raises(ValueError):
        parse_ns("8:2")
    with pytest.raises(ValueError):
        parse_ns("2:8:cubic")


def test_fit_slope():
    ns = [2, 4, 8, 16]
    slope, err = fit_slope(ns, [3.0 / n for n in ns])
    assert slope == pytest.approx(-1.0) and err == pytest.approx(0.0, abs=1e-12)
    assert fit_slope([2, 4], [1.0, 0.5]) == (None, None)


def test_rate_csv_roundtrip(tmp_path):
    rep = RateReport([{"n": 2, "Sk2": 0.1, "bound_S": 0.2, "pass_S2": True}, {"n": 4, "Sk2": 0.05}],
                     slopes={"Sk2": (None, None)}, params={"C_P": 1.2})
    write_rate_csv(rep, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].split(",")[:3] == ["n", "Sk1", "Sk2"]
    assert lines[1].startswith("2,,0.1,")
    meta = json.loads((tmp_path / "r.csv.json").read_text())
    assert meta["slopes"]["Sk2"] == [None, None]
    assert rep.failing_rows() == []
    bad = RateReport([{"n": 2, "pass_w2": False}])
    assert not bad.passed
