"""Anomaly quadratures, renormalization, scaling identity, weights, entropy."""

import math

import numpy as np
import pytest

from zetalab.anomaly import (anomaly_regular_conical, anomaly_renormalized,
                             anomaly_smooth, branched_weights, cone_radial_distance,
                             conical_scaling_check, log_integral_asymptotics,
                             pullback_surface, renyi_entropy, shift_surface,
                             sphere_poly, spindle_surface, two_point_function)


def spindle_ra_closed_form(gamma: float) -> float:
    """Semi-analytic oracle for RA(spindle, round) via the renormalized-anomaly
    evaluation lemma: the boundary terms give the -log(gamma+1) and potential
    contributions, and the remaining integral uses Delta sigma = -gamma/2 and
    int sigma dV = 2 pi gamma (2 log 2 - 1) in closed form."""
    lemma_part = -gamma**2 * math.log(gamma + 1.0) / (12.0 * (gamma + 1.0))
    integral_part = (gamma / 2.0 + 2.0) * 2.0 * math.pi * gamma \
        * (2.0 * math.log(2.0) - 1.0) / (24.0 * math.pi)
    return lemma_part + integral_part


def test_zero_sigma_gives_zero():
    av = anomaly_smooth(sphere_poly())
    assert abs(av.value) <= 1e-14


def test_constant_sigma_equals_third():
    # Gauss-Bonnet oracle: int K dV = 4 pi on the round sphere
    for c in (0.7, -1.3):
        av = anomaly_smooth(sphere_poly(c0=c))
        assert av.value == pytest.approx(c / 3.0, abs=1e-12)


def test_cocycle_property():
    rng = np.random.default_rng(1)
    s1 = sphere_poly(0.13, (0.2, -0.1, 0.05), 0.05 * rng.normal(size=(3, 3)))
    h1 = sphere_poly(-0.21, (0.02, 0.14, -0.07), 0.04 * rng.normal(size=(3, 3)))
    a32 = anomaly_smooth(s1 + h1, ref_h=s1)
    a21 = anomaly_smooth(s1)
    a31 = anomaly_smooth(s1 + h1)
    assert abs(a32.value + a21.value - a31.value) <= 1e-8


def test_radial_distance_flat_cases():
    # gamma -> 0: distance reduces to the arc length r itself
    surf = spindle_surface(1e-12)
    res = cone_radial_distance(surf, 0, [0.3])
    assert res["distances"][0] == pytest.approx(0.3, rel=1e-10)
    # spindle gamma = 1: exact radial integral 4 (1 - cos(r/2)) ~ r^2/2
    surf1 = spindle_surface(1.0)
    res = cone_radial_distance(surf1, 0, [0.1])
    assert res["distances"][0] == pytest.approx(4.0 * (1.0 - math.cos(0.05)), rel=1e-12)


def test_radial_distance_leading_coefficient():
    for gamma in (0.5, 1.0):
        surf = spindle_surface(gamma)
        res = cone_radial_distance(surf, 0, np.geomspace(0.2, 0.01, 6))
        assert res["leading_coefficient"] == pytest.approx(
            res["expected_coefficient"], rel=1e-4)
    # symbolic pullback oracle: phi(0) = log d + (d-1) log(1/2) for z -> z^d
    surf = pullback_surface(2)
    res = cone_radial_distance(surf, 0, np.geomspace(0.2, 0.01, 6))
    assert res["expected_coefficient"] == pytest.approx(2.0 * 0.5, rel=1e-14)
    assert res["leading_coefficient"] == pytest.approx(1.0, rel=1e-4)


def test_radial_distance_remainder_order():
    # relative remainder of the leading law is O(r^2) in the round chart
    surf = spindle_surface(1.0)
    radii = np.geomspace(0.2, 0.0125, 5)
    res = cone_radial_distance(surf, 0, radii)
    rel = np.abs(res["per_radius_coefficient"] / res["expected_coefficient"] - 1.0)
    slope = np.polyfit(np.log(radii), np.log(rel), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_renormalized_anomaly_spindle_closed_form():
    for gamma in (0.5, 1.0):
        surf = spindle_surface(gamma)
        ra = anomaly_renormalized(surf)
        assert ra.epsilon_extrapolation.converged
        assert ra.value == pytest.approx(spindle_ra_closed_form(gamma), abs=5e-6)


def test_renormalized_anomaly_empty_divisor_reduces_to_smooth():
    # a spindle with gamma -> 0 carries no counterterm and matches the
    # smooth anomaly of its (vanishing) conformal factor
    surf = spindle_surface(1e-14)
    ra = anomaly_renormalized(surf)
    assert abs(ra.value) <= 1e-6


def test_reference_independence():
    surf = pullback_surface(2)
    h = sphere_poly(0.1, (0.15, -0.1, 0.2),
                    [[0.02, 0.0, 0.0], [0.0, -0.03, 0.01], [0.0, 0.01, 0.05]])
    ra_g = anomaly_renormalized(surf)
    ra_h = anomaly_renormalized(surf, ref_h=h)
    a_h = anomaly_smooth(h)
    assert abs((ra_g.value - ra_h.value) - a_h.value) <= 1e-4


def test_counterterm_slope():
    surf = pullback_surface(2)
    run = anomaly_renormalized(surf, include_counterterm=False)
    expected = -(1.0 / 12.0) * surf.counterterm_coefficient()
    assert run.log_slope == pytest.approx(expected, rel=0.02)
    assert not run.epsilon_extrapolation.converged


def test_regular_anomaly_constant_h():
    # conical Gauss-Bonnet: int K~ dV~ = 2 pi chi + 2 pi sum gamma_j over the
    # smooth part (verified directly by the pullback curvature computation),
    # so RA_reg(const c) = (c/6)(chi + sum gamma_j)
    c = 0.4
    surf = pullback_surface(2)
    av = anomaly_regular_conical(sphere_poly(c0=c), surf)
    assert av.value == pytest.approx(c / 6.0 * (2.0 + 2.0), rel=1e-6)
    surf_s = spindle_surface(1.0)
    av = anomaly_regular_conical(sphere_poly(c0=c), surf_s)
    assert av.value == pytest.approx(c / 6.0 * (2.0 + 1.0), rel=1e-6)


def test_regular_anomaly_zero_and_antipodal_symmetry():
    surf = pullback_surface(2)
    assert abs(anomaly_regular_conical(sphere_poly(), surf).value) <= 1e-14
    h = sphere_poly(0.0, (0.3, 0.1, 0.0))
    h_flip = sphere_poly(0.0, (-0.3, -0.1, 0.0))
    a1 = anomaly_regular_conical(h, surf)
    a2 = anomaly_regular_conical(h_flip, surf)
    assert abs(a1.value - a2.value) <= 1e-8


def test_conical_scaling_identity():
    surf = pullback_surface(2)
    for h in (sphere_poly(0.2, (0.1, 0.05, -0.12)),
              sphere_poly(-0.1, (0.0, 0.2, 0.1),
                          [[0.03, 0.01, 0.0], [0.01, 0.0, 0.0], [0.0, 0.0, -0.02]])):
        res = conical_scaling_check(surf, h)
        assert abs(res["residual"]) <= 1e-4


def test_conical_scaling_trivial_h():
    surf = spindle_surface(1.0)
    res = conical_scaling_check(surf, sphere_poly())
    assert abs(res["residual"]) <= 1e-6
    assert res["weight_term"] == 0.0


def test_conical_scaling_cubic_pullback():
    # gamma = 2 at both poles (z -> z^3 replica geometry)
    surf = pullback_surface(3)
    res = conical_scaling_check(surf, sphere_poly(0.15, (0.1, -0.05, 0.08)))
    assert abs(res["residual"]) <= 1e-4


def test_renormalized_anomaly_negative_exponent():
    # cone angle pi (gamma = -1/2): the closed-form spindle oracle still applies
    gamma = -0.5
    ra = anomaly_renormalized(spindle_surface(gamma))
    assert ra.epsilon_extrapolation.converged
    assert ra.value == pytest.approx(spindle_ra_closed_form(gamma), abs=1e-8)


def test_reference_independence_fractional_spindle():
    surf = spindle_surface(0.7)
    h = sphere_poly(0.05, (0.12, 0.0, -0.1))
    ra_g = anomaly_renormalized(surf)
    ra_h = anomaly_renormalized(surf, ref_h=h)
    a_h = anomaly_smooth(h)
    assert abs((ra_g.value - ra_h.value) - a_h.value) <= 1e-4


def test_scaling_correction_linear_in_gamma():
    # formula limit: gamma (gamma+2)/(gamma+1) h(z) -> 2 gamma h(z) as gamma -> 0
    h = sphere_poly(0.3)
    for gamma in (1e-3, 1e-4):
        surf = spindle_surface(gamma)
        shifted = shift_surface(surf, h)
        term = sum(cp.gamma * (cp.gamma + 2.0) / (cp.gamma + 1.0) * h.val(cp.point)
                   for cp in shifted.cones) / 12.0
        assert term == pytest.approx(2.0 * gamma * 0.3 / 12.0, rel=1e-3)


def test_log_integral_annulus():
    surf = spindle_surface(1.0)
    res = log_integral_asymptotics(surf, "annulus", q_ratio=2.0,
                                   delta_list=np.geomspace(0.05, 5e-4, 6))
    assert res["target"] == pytest.approx(2.0 * math.pi * math.log(2.0))
    assert abs(res["residuals"][-1]) <= 1e-6


def test_log_integral_green_stokes():
    surf = spindle_surface(1.0)
    h = sphere_poly(0.3, (0.2, -0.1, 0.15))
    res = log_integral_asymptotics(surf, "green", h=h,
                                   delta_list=np.geomspace(0.05, 5e-4, 6))
    assert res["target"] == pytest.approx(-2.0 * math.pi * h.val(np.array([0.0, 0.0, 1.0])))
    assert abs(res["residuals"][-1]) <= 1e-6
    assert res["rate"] == pytest.approx(2.0, abs=0.3)


def test_log_integral_basic_renormalization():
    surf = spindle_surface(1.0)
    res = log_integral_asymptotics(surf, "basic",
                                   delta_list=np.geomspace(0.05, 5e-4, 6))
    assert abs(res["residuals"][-1]) <= 1e-5
    assert res["rate"] >= 1.4  # O(delta^2 log delta) vanishing


def test_branched_weights():
    # formula instances: z^2 gives 1/8 at each critical value for c = 1
    w = branched_weights([[2], [2]], 1.0, 2)
    assert w == [pytest.approx(0.125), pytest.approx(0.125)]
    for d in (2, 3, 7):
        for c in (1.0, 0.37):
            assert branched_weights([[d]], c, d)[0] == pytest.approx(
                c / 12.0 * (d - 1.0 / d))
    assert branched_weights([[1, 1, 1]], 1.0, 3)[0] == 0.0
    with pytest.raises(ValueError):
        branched_weights([[3, 2]], 1.0, 4)


def test_weight_additivity_under_composition():
    # ord_{f o g} = ord_f * ord_g at matched points
    c = 1.0
    for d1, d2 in ((2, 3), (2, 2)):
        composed = branched_weights([[d1 * d2]], c, d1 * d2)[0]
        assert composed == pytest.approx(c / 12.0 * (d1 * d2 - 1.0 / (d1 * d2)))


def test_renyi_entropy_values():
    # formula instance: c=1, d=2, ell = L/2 gives C (L/pi)^{-1/4}
    L = 2.0 * math.pi
    res = renyi_entropy(L, L / 2.0, 2, 1.0, 1.0)
    assert res["trace"] == pytest.approx((L / math.pi) ** (-0.25), rel=1e-14)
    assert res["exponent"] == pytest.approx(-2.0 * res["weight"])
    # d -> 1 continuation: exponent -(c/6)(d - 1/d) -> 0
    assert -(1.0 / 6.0) * (1.0 - 1.0) == 0.0


def test_renyi_validation():
    with pytest.raises(ValueError):
        renyi_entropy(2.0, 3.0, 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        renyi_entropy(2.0, 1.0, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        renyi_entropy(2.0, 1.0, 2, 1.0, -1.0)


def test_two_point_form():
    assert two_point_function(math.pi / 2.0, 0.125, 2.0) == pytest.approx(
        2.0 * math.sin(math.pi / 4.0) ** (-0.25))
    with pytest.raises(ValueError):
        two_point_function(0.0, 0.125, 1.0)


def test_surface_validation():
    with pytest.raises(ValueError):
        spindle_surface(-1.5)
    with pytest.raises(ValueError):
        pullback_surface(1)
