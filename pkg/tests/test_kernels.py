import math

import numpy as np
import pytest
from scipy import integrate

from steinlab.kernels import (DensityZero, KernelField, Monomial, MomentMismatch, Trig, discrepancy,
                              function_battery, iterative_consistency, kernel_1d_iterative, kernel_mean,
                              stein_identity_residual, stein_sides, tail_integral, write_kernel_csv)
from steinlab.measures import GridDensity, gaussian, match_moments, standard_gaussian, uniform


@pytest.fixture(scope="module")
def unif():
    return uniform()


@pytest.fixture(scope="module")
def gam():
    return standard_gaussian(n=6145, half_width=12.0)


def test_uniform_kernels_closed_form(unif):
    x = unif.x
    t1, t2 = kernel_1d_iterative(unif, 1), kernel_1d_iterative(unif, 2)
    np.testing.assert_allclose(t1.table, (1 - x**2) / 2, atol=1e-6)
    np.testing.assert_allclose(t2.table, x**3 / 6 - x / 2, atol=1e-6)
    assert discrepancy(t1, unif) ** 2 == pytest.approx(0.2, abs=1e-4)
    assert discrepancy(t2, unif) ** 2 == pytest.approx(2 / 35, abs=1e-4)


def test_uniform_tau3_against_independent_quadrature(unif):
    # oracle: nested adaptive quadrature of the tail formula for the exact uniform law
    a = math.sqrt(3)
    t2 = lambda y: y**3 / 6 - y / 2
    t3 = kernel_1d_iterative(unif, 3, tol=2e-6)
    for x0 in (-1.2, -0.3, 0.0, 0.8, 1.5):
        ref = integrate.quad(t2, x0, a)[0]
        i = int(np.argmin(np.abs(unif.x - x0)))
        assert t3.table[i] == pytest.approx(integrate.quad(t2, unif.x[i], a)[0], abs=1e-6)
        assert abs(ref - t3.table[i]) < 1e-3


def test_gaussian_kernels_vanish(gam):
    for k in (1, 2, 3):
        t = kernel_1d_iterative(gam, k)
        assert discrepancy(t, gam) < 1e-8
        assert max(stein_identity_residual(t, gam, f) for f in function_battery()) < 1e-8


def test_identity_on_battery(unif):
    mix = match_moments("uniform_gaussian_mixture", 4)
    for mu, orders in ((unif, (1, 2)), (mix, (1, 2, 3))):
        for k in orders:
            t = kernel_1d_iterative(mu, k)
            assert max(stein_identity_residual(t, mu, f) for f in function_battery()) < 1e-5


def test_constant_test_function_gives_zero(unif):
    t = kernel_1d_iterative(unif, 2)
    lhs, rhs = stein_sides(t, unif, Monomial(0, 3.0))
    assert lhs == 0.0
    assert abs(rhs) < 1e-15


def test_cubic_at_order_two(unif):
    # f = x^3: D^2 f = 6x, int x f - f' = E x^4 - 3 E x^2 = 9/5 - 3
    t = kernel_1d_iterative(unif, 2)
    lhs, rhs = stein_sides(t, unif, Monomial(3))
    assert rhs == pytest.approx(9 / 5 - 3, abs=1e-5)
    assert lhs == pytest.approx(rhs, abs=1e-6)


def test_iterative_consistency(unif):
    t1, t2 = kernel_1d_iterative(unif, 1), kernel_1d_iterative(unif, 2)
    lhs_sq = stein_sides(t2, unif, Monomial(2))
    assert abs(lhs_sq[0]) < 1e-12
    assert iterative_consistency(t2, t1, unif, Monomial(2)) < 1e-12
    for f in function_battery():
        assert iterative_consistency(t2, t1, unif, f) < 1e-5


def test_moment_mismatch():
    with pytest.raises(MomentMismatch) as exc:
        kernel_1d_iterative(gaussian(0.5), 2)
    assert exc.value.degree == 2
    assert exc.value.residual == pytest.approx(0.5, abs=1e-6)
    # the uniform matches moments up to degree 3 only
    kernel_1d_iterative(uniform(), 3, tol=2e-6)
    with pytest.raises(MomentMismatch):
        kernel_1d_iterative(uniform(), 4)
    # order 1 only needs a centered law
    assert kernel_1d_iterative(gaussian(0.5), 1).order == 1


def test_density_zero_inside_support():
    x = np.linspace(-2.5, 2.5, 2001)
    p = ((np.abs(x) > 0.5) & (np.abs(x) < 2.0)).astype(float)
    mu = GridDensity.on_line(x, p)
    with pytest.raises(DensityZero):
        kernel_1d_iterative(mu, 1, check_moments=False)


def test_tail_integral_matches_cumulative_quadrature():
    x = np.linspace(-3, 3, 601)
    f = np.exp(-x**2 / 2)
    tail = tail_integral(f, x[1] - x[0])
    ref = math.sqrt(math.pi / 2) * np.array([math.erfc(v / math.sqrt(2)) - math.erfc(3 / math.sqrt(2)) for v in x])
    np.testing.assert_allclose(tail, ref, atol=1e-9)


def test_kernel_mean_is_zero_for_centered_kernels(unif):
    for k in (1, 2):
        # exact zero up to the h^2/6 trapezoid variance excess of the grid
        assert abs(float(kernel_mean(kernel_1d_iterative(unif, k), unif).ravel()[0])) < 1e-6


def test_trig_derivatives():
    f = Trig(2.0, 0.3)
    x = np.array([0.1, 1.7])
    np.testing.assert_allclose(f.derivative(x, 1).ravel(), 2 * np.cos(2 * x + 0.3))
    np.testing.assert_allclose(f.derivative(x, 3).ravel(), -8 * np.cos(2 * x + 0.3))


def test_kernel_field_shapes_and_csv(tmp_path, unif):
    t = kernel_1d_iterative(unif, 2)
    assert t.values.shape == (unif.x.size, 1, 1, 1)
    assert t.asymmetry() == 0.0
    assert not t.zero_like()
    write_kernel_csv(t, unif, tmp_path / "k.csv")
    data = np.loadtxt(tmp_path / "k.csv", delimiter=",", skiprows=2)
    np.testing.assert_array_equal(data[:, 1], t.table)
    z = KernelField(1, 1, np.zeros(5), np.ones(5, bool))
    assert z.zero_like()
