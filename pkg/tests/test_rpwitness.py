"""Reflection-positivity violation witnesses and positivity controls."""

import math

import numpy as np
import pytest

from zetalab.rpwitness import (ball_target_integral, bump_profile, compact_witness,
                               cylinder_witness, fourier_ball_witness,
                               lattice_reweight_check, line_pairing,
                               line_uncut_pairing, line_witness)


def test_line_witness_kappa_one():
    cert = line_witness(1.0)
    assert cert.negative
    assert cert.parameters["n"] <= 40
    assert cert.pairing_value < 0.0
    # trend from n = 0 upward is recorded for audit
    assert cert.trend[0][0] == 0
    assert cert.trend[-1][1] == cert.pairing_value


def test_line_nonnegative_bump_at_zero_order():
    assert line_pairing(0, 1.0) > 0.0


def test_line_uncut_positive_all_orders():
    # Kallen-Lehmann-type rewrite: the full-line pairing is a square
    for kappa in (0.3, 1.0, 4.0):
        for n in range(0, 8):
            assert line_uncut_pairing(n, kappa) >= 0.0


def test_line_certificate_reevaluates():
    cert = line_witness(1.0)
    again = line_pairing(cert.parameters["n"], cert.parameters["kappa"])
    assert again == pytest.approx(cert.pairing_value, abs=1e-10)


def test_bump_support():
    nodes, _, vals = bump_profile()
    assert np.all(nodes > 0.0)
    assert np.all(vals >= 0.0) and vals.max() > 0.0  # edge values may underflow
    assert nodes.min() >= math.pi / 2.0 - 0.4 - 1e-12
    assert nodes.max() <= math.pi / 2.0 + 0.4 + 1e-12


def test_cylinder_witness_negative_across_lambdas():
    for lam in (1.0, 10.0, 100.0):
        cert = cylinder_witness(lam)
        assert cert.negative
        assert cert.uncut_pairing >= 0.0


def test_cylinder_reduces_to_line():
    cert1 = cylinder_witness(1.0)
    n = cert1.parameters["n"]
    assert cert1.pairing_value == pytest.approx(line_pairing(n, 1.0), rel=1e-12)


def test_cylinder_sqrt_lambda_scaling():
    # scaling-law oracle from the proof's substitution: sqrt(Lambda) times the
    # line pairing at kappa = 1/Lambda, with slope -> 1/2 at large Lambda
    n = cylinder_witness(1.0).parameters["n"]
    lams = np.array([100.0, 400.0, 1600.0])
    vals = np.array([math.sqrt(l) * line_pairing(n, 1.0 / l) for l in lams])
    slope = np.polyfit(np.log(lams), np.log(-vals), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.02)
    with pytest.raises(ValueError):
        cylinder_witness(0.5)


def test_compact_witness_closed_form():
    for lam, star in ((1.0, 1.0), (4.0, 4.0), (16.0, 16.0)):
        cert = compact_witness(lam)
        assert cert.parameters["lambda_star"] == star
        assert cert.pairing_value == pytest.approx(-1.0 / (star + 1.0), abs=1e-8)
        assert cert.negative
        assert cert.uncut_pairing >= -1e-12


def test_compact_below_first_odd_eigenvalue():
    with pytest.raises(ValueError):
        compact_witness(0.5)


def test_ball_witness_negative_and_close_to_target():
    cert = fourier_ball_witness(4.0)
    target = -ball_target_integral(4.0)
    assert cert.negative
    assert cert.pairing_value < 0.0
    assert abs(cert.pairing_value / target - 1.0) <= 0.10
    # truncated full-covariance pairing stays nonnegative
    assert cert.uncut_pairing >= -1e-9


def test_ball_target_radial_quadrature():
    # (4 pi/3) int_0^2 r^4/(1+r^2) dr = (4 pi/3)(8/3 - 2 + atan 2)
    exact = 4.0 * math.pi / 3.0 * (8.0 / 3.0 - 2.0 + math.atan(2.0))
    assert ball_target_integral(4.0) == pytest.approx(exact, rel=1e-12)


def test_ball_single_bump_recorded_not_error():
    cert = fourier_ball_witness(4.0, basis_shifts=1, basis_widths=1)
    assert cert.parameters["n_basis"] == 1
    assert isinstance(cert.pairing_value, float)


def test_ball_pairing_improves_with_basis():
    small = fourier_ball_witness(4.0, basis_shifts=2, basis_widths=2)
    full = fourier_ball_witness(4.0)
    target = -ball_target_integral(4.0)
    assert abs(full.pairing_value - target) <= abs(small.pairing_value - target)


def test_lattice_reweight_small_coupling():
    res = lattice_reweight_check(side=4, coupling=1e-3, n_samples=200000, seed=3)
    assert res["gaussian_pairing"] < 0.0          # cut covariance violates RP
    assert res["uncut_pairing"] >= -1e-12         # full covariance does not
    assert abs(res["z_score"]) <= 3.0             # reweighted agrees as c -> 0
