"""Transfer-operator discretization, Gibbs states, mixing, MCMC."""

import math

import numpy as np
import pytest

from zetalab.transfer import (GibbsQuery, build_transfer, free_energy_density,
                              free_energy_mcmc, gaussian_chain_log_z,
                              gibbs_expectation, log_partition_function, mcmc_chain,
                              mixing_check, partition_function, top_eigenpair)

# Mehler-kernel eigendata for P = s^2: K = exp(-(3/2)(x^2+y^2) + 2xy) has
# lambda_n = sqrt(pi/(a+c)) (b/(a+c))^n with a = 3/2, b = 1, c = sqrt(a^2-b^2)
MEHLER_A = 1.5
MEHLER_C = math.sqrt(MEHLER_A**2 - 1.0)
MEHLER_LAMBDA0 = math.sqrt(math.pi / (MEHLER_A + MEHLER_C))
MEHLER_RATIO = 1.0 / (MEHLER_A + MEHLER_C)


def quadratic_model(grid=200, halfwidth=8.0):
    return build_transfer([0.0, 0.0, 1.0], grid, halfwidth)


def test_kernel_positive_for_flat_and_quartic():
    for coeffs in ([0.0], [0.0, 0.0, 0.0, 0.0, 1.0]):
        model = build_transfer(coeffs, 32, 3.0)
        assert np.all(model.t_matrix > 0.0)
        assert np.all(np.isfinite(model.t_matrix.sum(axis=1)))


def test_build_rejects_odd_or_unbounded():
    with pytest.raises(ValueError):
        build_transfer([0.0, 1.0], 32, 4.0)  # odd term
    with pytest.raises(ValueError):
        build_transfer([0.0, 0.0, -1.0], 32, 4.0)  # unbounded below
    with pytest.raises(ValueError):
        build_transfer([0.0, 0.0, 1.0], 8, 4.0)  # degenerate grid


def test_top_eigenvalue_matches_mehler():
    # dense high-resolution Nystrom oracle plus the Gaussian-kernel closed form
    model = quadratic_model()
    lam0, _, alpha = top_eigenpair(model)
    assert lam0 == pytest.approx(MEHLER_LAMBDA0, abs=1e-8)
    assert alpha == pytest.approx(MEHLER_RATIO, abs=1e-10)
    fine = build_transfer([0.0, 0.0, 1.0], 800, 8.0)
    lam0_fine, _, _ = top_eigenpair(fine)
    assert lam0 == pytest.approx(lam0_fine, abs=1e-8)


def test_partition_function_gaussian_closed_form():
    model = quadratic_model()
    for n in (8, 32, 64):
        lhs = log_partition_function(model, n)
        assert lhs == pytest.approx(gaussian_chain_log_z(1.0, n), abs=1e-9)
    assert partition_function(model, 1) == pytest.approx(np.trace(model.t_matrix))


def test_partition_composition_exactness():
    model = quadratic_model(64, 6.0)
    lam, _ = model.eig()
    for n1, n2 in ((3, 5), (10, 7)):
        lhs = np.sum(lam**n1 * lam**n2)
        rhs = np.sum(lam ** (n1 + n2))
        assert lhs == pytest.approx(rhs, rel=1e-14)


def test_top_eigenvector_positive_all_polys():
    for coeffs, hw in (([0.0, 0.0, 1.0], 8.0), ([0.0] * 4 + [1.0], 5.0),
                       ([0.0, 0.0, -1.0, 0.0, 1.0], 5.0)):
        model = build_transfer(coeffs, 200, hw)
        lam0, omega, alpha = top_eigenpair(model)
        assert np.all(omega > 0.0)
        assert 0.0 < alpha < 1.0


def test_degenerate_gap_detected():
    model = quadratic_model(48, 6.0)
    doubled = build_transfer([0.0, 0.0, 1.0], 48, 6.0)
    t = np.zeros((96, 96))
    t[:48, :48] = model.t_matrix
    t[48:, 48:] = doubled.t_matrix
    model.t_matrix = t
    model._eig = None
    model.nodes = np.concatenate([model.nodes, model.nodes + 20.0])
    model.weights = np.concatenate([model.weights, model.weights])
    with pytest.raises(ArithmeticError):
        top_eigenpair(model)


def test_gibbs_normalization_and_symmetry():
    model = quadratic_model()
    assert gibbs_expectation(model, GibbsQuery([lambda s: np.ones_like(s)], [7], 16)) \
        == pytest.approx(1.0, abs=1e-12)
    # odd observable vanishes by the s -> -s symmetry of the kernel
    assert abs(gibbs_expectation(model, GibbsQuery([lambda s: s], [3], 16))) < 1e-12


def test_gibbs_square_matches_circulant_covariance():
    # circulant Gaussian-moments oracle: <s_i^2> = diag of (2(A + m^2 I))^{-1}
    model = quadratic_model()
    n = 32
    val = gibbs_expectation(model, GibbsQuery([lambda s: s**2], [5], n))
    k = np.arange(n)
    cov = np.mean(1.0 / (2.0 * (2.0 - 2.0 * np.cos(2.0 * math.pi * k / n)) + 2.0))
    assert val == pytest.approx(cov, abs=1e-10)


def test_gibbs_two_point_positions():
    model = quadratic_model()
    n = 24
    # distance-dependent two-point function from the circulant inverse
    val = gibbs_expectation(model, GibbsQuery([lambda s: s, lambda s: s], [3, 7], n))
    k = np.arange(n)
    spec = 2.0 * (2.0 - 2.0 * np.cos(2.0 * math.pi * k / n)) + 2.0
    cov4 = np.mean(np.cos(2.0 * math.pi * k * 4.0 / n) / spec)
    assert val == pytest.approx(cov4, abs=1e-10)


def test_gibbs_query_validation():
    with pytest.raises(ValueError):
        GibbsQuery([], [], 8)
    with pytest.raises(ValueError):
        GibbsQuery([lambda s: s], [9], 8)
    with pytest.raises(ValueError):
        GibbsQuery([lambda s: s, lambda s: s], [5, 3], 8)


def test_mixing_bound_random_pairs():
    rng = np.random.default_rng(0)
    for coeffs, hw in (([0.0, 0.0, 1.0], 8.0), ([0.0] * 4 + [1.0], 5.0)):
        model = build_transfer(coeffs, 150, hw)
        for _ in range(5):
            f = rng.normal(size=model.grid_size)
            g = rng.normal(size=model.grid_size)
            assert mixing_check(model, f, g, 50) <= 1e-10


def test_mixing_eigenvector_is_exact():
    model = quadratic_model(100, 6.0)
    lam0, omega, alpha = top_eigenpair(model)
    # F = G = Omega0: correlation minus disconnected part is exactly zero
    lam, vec = model.eig()
    fc = vec.T @ omega
    for k in (1, 5, 20):
        corr = float(np.sum(fc * (lam / lam[-1]) ** k * fc))
        assert corr - fc[-1] ** 2 == pytest.approx(0.0, abs=1e-12)


def test_gibbs_state_thermodynamic_convergence():
    # the single-insertion expectation converges to the Perron-vector form
    # <O, F O> with empirical rate bounded by the gap ratio alpha
    model = quadratic_model(120, 7.0)
    lam0, omega, alpha = top_eigenpair(model)
    f_diag = model.nodes**2
    limit = float(omega @ (f_diag * omega))
    gaps = []
    n_list = [6, 10, 14, 18, 22]
    for n in n_list:
        val = gibbs_expectation(model, GibbsQuery([lambda s: s**2], [1], n))
        gaps.append(abs(val - limit))
    rate = np.exp(np.polyfit(n_list, np.log(gaps), 1)[0])
    assert gaps[-1] < 1e-8
    assert rate <= alpha + 0.05


def test_free_energy_density_limit():
    model = quadratic_model()
    fe = free_energy_density(model, [8, 16, 32, 64])
    exact = 0.5 * math.log(math.pi) - math.asinh(0.5)
    assert fe["limit"] == pytest.approx(exact, abs=1e-10)
    gaps = np.abs(fe["values"] - fe["limit"])
    assert gaps[-1] < gaps[0]
    assert fe["empirical_rate"] <= fe["alpha"] + 0.05


def test_flat_potential_rejected():
    model = build_transfer([0.0], 32, 4.0)
    with pytest.raises(ValueError):
        free_energy_density(model, [4, 8])


def test_grid_refinement_cauchy():
    for coeffs in ([0.0, 0.0, 1.0], [0.0] * 4 + [1.0], [0.0, 0.0, -1.0, 0.0, 1.0]):
        vals = []
        for grid in (100, 200, 400):
            model = build_transfer(coeffs, grid, 8.0)
            lam, _ = model.eig()
            vals.append(lam[-1])
        d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
        assert d2 < 0.3 * d1 or d2 < 1e-12


def test_mcmc_gaussian_covariance():
    # exact Gaussian oracle: sample <s^2> vs circulant inverse diagonal
    res = mcmc_chain([0.0, 0.0, 1.0], 16, 200000, seed=11)
    k = np.arange(16)
    cov = np.mean(1.0 / (2.0 * (2.0 - 2.0 * np.cos(2.0 * math.pi * k / 16)) + 2.0))
    ms = res["mean_square"]
    se = np.std(ms, ddof=1) / math.sqrt(len(ms))
    assert abs(np.mean(ms) - cov) <= 3.0 * se


def test_mcmc_acceptance_and_determinism():
    res = mcmc_chain([0.0, 0.0, 1.0], 16, 10**5, seed=7)
    assert 0.1 < res["acceptance_rate"] < 0.9
    res2 = mcmc_chain([0.0, 0.0, 1.0], 16, 10**5, seed=7)
    assert np.array_equal(res["config"], res2["config"])
    with pytest.raises(ValueError):
        mcmc_chain([0.0, 0.0, 1.0], 16, 0, seed=1)
    with pytest.raises(ValueError):
        mcmc_chain([0.0, 0.0, 1.0], 16, 5000, seed=1)  # below the 1e5 floor


def test_thermodynamic_integration_gaussian_target():
    # exact circulant target: TI must agree within 3 standard errors
    exact = gaussian_chain_log_z(math.sqrt(2.0), 16) / 16
    ti = free_energy_mcmc([0.0, 0.0, 2.0], 16, 200000, seed=1)
    assert abs(ti["free_energy_density"] - exact) <= 3.0 * ti["standard_error"]


def test_thermodynamic_integration_quartic():
    model = build_transfer([0.0] * 4 + [1.0], 200, 5.0)
    f_transfer = log_partition_function(model, 32) / 32
    ti = free_energy_mcmc([0.0] * 4 + [1.0], 32, 400000, seed=202, n_chains=32)
    assert abs(ti["free_energy_density"] - f_transfer) <= 3.0 * ti["standard_error"]
