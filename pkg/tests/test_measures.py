import math

import numpy as np
import pytest
from scipy import stats

from steinlab.measures import (GridDensity, MomentMatchError, SampleMeasure, from_spec, gaussian,
                               gaussian_moment, load_spec, match_moments, mixture, moments,
                               poincare_constant, product, read_grid_csv, smooth, smoothed_uniform,
                               standard_gaussian, uniform, write_grid_csv)


def test_standard_gaussian_moments():
    g = standard_gaussian(1, n=4096, half_width=8.0)
    rep = moments(g, 4)
    assert float(np.sum(g.mass_weights)) == pytest.approx(1.0, abs=1e-10)
    assert rep[(2,)] == pytest.approx(1.0, abs=1e-8)
    assert rep[(4,)] == pytest.approx(3.0, abs=1e-6)
    assert rep.first_mismatch(4, 1e-8) is None


def test_standard_gaussian_too_narrow_box():
    with pytest.raises(ValueError):
        standard_gaussian(1, n=512, half_width=3.0)


def test_gaussian_moment_values():
    assert gaussian_moment((6,)) == pytest.approx(15.0, rel=1e-14)
    assert gaussian_moment((2, 2)) == 1.0
    assert gaussian_moment((3, 1)) == 0.0


def test_uniform_moments_closed_form():
    rep = moments(uniform(), 6)
    h = 2 * math.sqrt(3) / 4096
    assert rep[(2,)] == pytest.approx(1.0 + h * h / 6, abs=1e-12)  # trapezoid is exact up to h^2 f''/12
    assert rep[(4,)] == pytest.approx(9 / 5, abs=1e-6)
    assert rep[(6,)] == pytest.approx(27 / 7, abs=1e-5)  # h^2 a^4 / 2 trapezoid error
    assert rep.first_mismatch(6, 1e-6)[0] == 4


def test_moments_of_samples():
    rng = np.random.default_rng(0)
    s = SampleMeasure(rng.standard_normal((4000, 2)), 0)
    rep = moments(s, 2)
    assert rep[(1, 1)] == pytest.approx(np.mean(s.points[:, 0] * s.points[:, 1]))


def test_match_moments_symmetric_family():
    u = match_moments("symmetric", 3)
    assert moments(u, 3).first_mismatch(3, 1e-9) is None


def test_match_moments_mixture_solves_closed_form_system():
    g = match_moments("uniform_gaussian_mixture", 4)
    assert moments(g, 5).first_mismatch(5, 1e-9) is None
    # independent Newton oracle on a^2/6 + s^2/2 = 1, a^4/10 + 3 s^4/2 = 3 (a = half width)
    th = np.array([2.0, 1.0])  # (a^2, s^2)
    for _ in range(50):
        a2, s2 = th
        r = np.array([a2 / 6 + s2 / 2 - 1, a2**2 / 10 + 1.5 * s2**2 - 3])
        J = np.array([[1 / 6, 1 / 2], [a2 / 5, 3 * s2]])
        th = th - np.linalg.solve(J, r)
    a2_lib, s2_lib = (float(v) for v in g.label.split("(")[1].rstrip(")").split(","))
    assert a2_lib == pytest.approx(th[0], rel=1e-4)
    assert s2_lib == pytest.approx(th[1], rel=1e-4)


def test_match_moments_scale_mixture_has_no_solution():
    with pytest.raises(MomentMatchError):
        match_moments("gaussian_scale_mixture", 4)


def test_poincare_uniform_and_gaussian():
    a = 1.3
    est = poincare_constant(uniform(a, n=2049))
    assert est.constant == pytest.approx((2 * a / math.pi) ** 2, rel=1e-5)
    assert poincare_constant(uniform()).constant == pytest.approx(12 / math.pi**2, abs=1e-3)
    assert poincare_constant(standard_gaussian()).constant == pytest.approx(1.0, abs=1e-3)


def test_poincare_converges_at_second_order():
    exact = 12 / math.pi**2
    errs = [abs(poincare_constant(uniform(n=n)).constant - exact) for n in (257, 513, 1025)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)


def test_poincare_rejects_interior_zero():
    x = np.linspace(-3, 3, 601)
    p = np.where(np.abs(x) > 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        poincare_constant(GridDensity.on_line(x, p))


def test_smooth_adds_variance_and_limits():
    u = uniform(n=2049)
    s = smooth(u, 0.3)
    assert s.variance() == pytest.approx(u.variance() + 0.09, abs=1e-6)
    tiny = smooth(u, 1e-3)
    assert np.max(np.abs(tiny.pdf(u.x[200:-200]) - u.p[200:-200])) < 1e-6


def test_smooth_spike_is_gaussian():
    x = np.linspace(-1, 1, 2001)
    p = np.exp(-0.5 * (x / 1e-3) ** 2)
    s = smooth(GridDensity.on_line(x, p), 1.0)
    assert np.max(np.abs(s.p - stats.norm.pdf(s.x, scale=math.sqrt(1 + 1e-6)))) < 1e-6


def test_smoothed_uniform_closed_form():
    sig = 0.05
    a = math.sqrt(3 * (1 - sig**2))
    mu = smoothed_uniform(a, sig)
    assert mu.variance() == pytest.approx(1.0, abs=1e-12)
    ref = (stats.norm.cdf((mu.x + a) / sig) - stats.norm.cdf((mu.x - a) / sig)) / (2 * a)
    np.testing.assert_allclose(mu.p, ref, atol=1e-9)


def test_mixture_and_product():
    m = mixture([{"kind": "gaussian", "weight": 0.3, "mean": -1.0, "variance": 0.5},
                 {"kind": "gaussian", "weight": 0.7, "mean": 1.0, "variance": 2.0}], n=4096, half_width=14)
    assert float(m.mean()[0]) == pytest.approx(0.4, abs=1e-8)
    u = uniform(n=257)
    p2 = product(u, u)
    assert p2.dim == 2
    np.testing.assert_allclose(p2.covariance(), np.eye(2), atol=1e-4)


def test_from_spec_and_grid_roundtrip(tmp_path):
    assert from_spec({"type": "uniform"}).variance() == pytest.approx(1.0, abs=1e-6)
    assert from_spec({"type": "gaussian", "variance": 0.5}).variance() == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(ValueError):
        from_spec({"type": "cauchy"})
    g = gaussian(0.7, n=801)
    write_grid_csv(g, tmp_path / "g.csv")
    (tmp_path / "spec.json").write_text('{"type": "grid_file", "path": "g.csv"}')
    back, _ = load_spec(tmp_path / "spec.json")
    np.testing.assert_allclose(back.p, g.p, rtol=1e-12)
    np.testing.assert_allclose(read_grid_csv(tmp_path / "g.csv").x, g.x)


def test_grid_density_validation():
    with pytest.raises(ValueError):
        GridDensity((np.linspace(0, 1, 5),), np.array([1.0, -1, 1, 1, 1]))
    with pytest.raises(ValueError):
        GridDensity((np.linspace(0, 1, 5),), np.ones(4))


def test_unit_uniform_has_exact_grid_variance():
    from steinlab.measures import unit_uniform
    for n in (129, 1025, 4097):
        assert unit_uniform(n).variance() == pytest.approx(1.0, abs=1e-13)
    assert from_spec({"type": "uniform", "n": 1025}).variance() == pytest.approx(1.0, abs=1e-13)
