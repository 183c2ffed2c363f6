"""Quadrature, Hermite, zeta-sum continuation and extrapolation kernels."""

import math

import numpy as np
import pytest

from zetalab.numerics import (ExtrapolationResult, gauss_legendre, hermite_poly,
                              lerch_sum, periodic_trapezoid, richardson, sym_eig)


def test_one_point_rule_is_midpoint():
    rule = gauss_legendre(1, -1.0, 1.0)
    assert rule.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert rule.weights[0] == pytest.approx(2.0, abs=1e-15)


def test_two_point_rule_integrates_x_squared():
    rule = gauss_legendre(2, -1.0, 1.0)
    assert rule.integrate(lambda x: x**2) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_exponential_on_unit_interval():
    # closed-form antiderivative oracle: int_0^1 exp = e - 1
    rule = gauss_legendre(20, 0.0, 1.0)
    assert rule.integrate(np.exp) == pytest.approx(math.e - 1.0, abs=1e-12)


def test_polynomial_exactness_random_degrees():
    rng = np.random.default_rng(7)
    for n in (3, 6, 11):
        rule = gauss_legendre(n, -2.0, 1.5)
        for _ in range(5):
            deg = int(rng.integers(0, 2 * n))
            coeffs = rng.normal(size=deg + 1)
            poly = np.polynomial.Polynomial(coeffs)
            exact = (poly.integ()(1.5) - poly.integ()(-2.0))
            assert rule.integrate(poly) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        gauss_legendre(0, 0.0, 1.0)
    with pytest.raises(ValueError):
        gauss_legendre(4, 1.0, 1.0)


def test_periodic_trapezoid_smooth_exactness():
    rule = periodic_trapezoid(16)
    assert rule.integrate(lambda t: np.cos(3 * t) ** 2) == pytest.approx(math.pi, abs=1e-13)


def test_hermite_low_orders():
    x = np.linspace(-3.0, 3.0, 11)
    assert np.allclose(hermite_poly(0, x), 1.0)
    assert np.allclose(hermite_poly(2, x), x**2 - 1.0)
    assert np.allclose(hermite_poly(4, x), x**4 - 6.0 * x**2 + 3.0)


def test_hermite_derivative_recurrence():
    # h'_n = n h_{n-1}, checked by central differences (relative to the
    # polynomial scale, which reaches ~1e7 at n = 10, x = 5)
    eps = 1e-5
    for n in range(1, 11):
        for x in np.linspace(-5.0, 5.0, 9):
            fd = (hermite_poly(n, x + eps) - hermite_poly(n, x - eps)) / (2 * eps)
            scale = max(1.0, abs(hermite_poly(n, x)), abs(hermite_poly(max(n - 1, 0), x)))
            assert abs(fd - n * hermite_poly(n - 1, x)) <= 1e-6 * scale


def test_lerch_sum_basel():
    # direct-summation oracles with integral tail bounds
    assert lerch_sum(2.0, 1.0) == pytest.approx(math.pi**2 / 6.0, rel=1e-12)
    assert lerch_sum(2.0, 0.5) == pytest.approx(math.pi**2 / 2.0, rel=1e-12)


def test_lerch_sum_continuation_at_zero():
    # Euler-Maclaurin continuation: zeta(0, a) = 1/2 - a
    for a in (1.0, 0.5, 0.25, 2.0):
        assert lerch_sum(0.0, a) == pytest.approx(0.5 - a, abs=1e-12)
    assert lerch_sum(0.0, 1.0) == pytest.approx(-0.5, abs=1e-13)


def test_lerch_sum_pole_rejected():
    with pytest.raises(ValueError):
        lerch_sum(1.0, 1.0)


def test_richardson_linear_and_quadratic_models():
    samples1 = [(h, 1.0 + h) for h in (0.4, 0.2, 0.1)]
    res = richardson(samples1, order=1)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    samples2 = [(h, 2.0 + 3.0 * h**2) for h in (0.4, 0.2, 0.1)]
    res = richardson(samples2, order=2)
    assert res.value == pytest.approx(2.0, abs=1e-12)


def test_richardson_synthetic_log_model():
    # seeded oracle f(h) = c0 + c1 h log h; eliminated approximately, the
    # extrapolated limit must fall within the reported error estimate
    rng = np.random.default_rng(3)
    c0, c1 = rng.normal(size=2)
    hs = [0.1 * 2.0**-k for k in range(6)]
    samples = [(h, c0 + c1 * h * math.log(h)) for h in hs]
    res = richardson(samples, order=1)
    assert abs(res.value - c0) <= max(res.error_estimate, 1e-10) * 3


def test_richardson_validation():
    with pytest.raises(ValueError):
        richardson([(0.1, 1.0), (0.05, 1.0)], order=1)
    with pytest.raises(ValueError):
        richardson([(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)], order=1)


def test_sym_eig_identity_and_diag():
    vals, _ = sym_eig(np.eye(3))
    assert np.allclose(vals, [1.0, 1.0, 1.0])
    vals, _ = sym_eig(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(vals, [1.0, 2.0, 3.0])


def test_sym_eig_cycle_laplacian_c4():
    # DFT oracle: eigenvalues 2 - 2cos(pi k / 2), k = 0..3
    a = np.zeros((4, 4))
    for i in range(4):
        a[i, (i + 1) % 4] = a[(i + 1) % 4, i] = 1.0
    lap = np.diag(a.sum(1)) - a
    vals, _ = sym_eig(lap)
    expected = np.sort([2.0 - 2.0 * math.cos(math.pi * k / 2.0) for k in range(4)])
    assert np.allclose(vals, expected, atol=1e-12)


def test_sym_eig_trace_identity_random():
    rng = np.random.default_rng(11)
    for n in (20, 100, 200):
        a = rng.normal(size=(n, n))
        a = a + a.T
        vals, _ = sym_eig(a)
        assert np.sum(vals) == pytest.approx(np.trace(a), rel=1e-10)


def test_sym_eig_rejects_bad_input():
    with pytest.raises(ValueError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        sym_eig(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_extrapolation_result_fields():
    res = ExtrapolationResult(1.0, 0.1, [1, 2], True)
    assert res.as_dict()["converged"] is True
