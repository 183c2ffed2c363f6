"""Gaussian network identities, Wick calculus, amplitude gluing."""

import math

import numpy as np
import pytest

from zetalab.gaussnet import (GaussianNetwork, NetworkPiece, amplitude_compose,
                              amplitude_params, cn_minus_cd_check, dirichlet_energy,
                              dn_schur, doubling_trace_residual, exact_exp_quadratic,
                              glue_pieces, markov_bayes_check, mirror_grid_network,
                              mirror_path_network, network_from_graph, one_sided_dn,
                              poisson_extend, random_connected_graph, rp_gram,
                              rp_identity_residual, sample_field, wick_interaction,
                              wick_power, wick_product_expectation)


def test_identity_precision_no_edges():
    net = GaussianNetwork(np.eye(4))
    dn = dn_schur(net, [0, 2])
    assert np.allclose(dn, np.eye(2))


def test_path_graph_dn_inverse_is_covariance_block():
    net = network_from_graph(3, [(0, 1), (1, 2)], 1.0)
    dn = dn_schur(net, [0, 2])
    block = net.covariance()[np.ix_([0, 2], [0, 2])]
    assert np.max(np.abs(np.linalg.inv(dn) - block)) <= 1e-12


def test_schur_duality_random_graphs():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 61))
        net = network_from_graph(n, random_connected_graph(n, rng),
                                 float(rng.uniform(0.3, 2.0)))
        k = int(rng.integers(1, min(n // 2 + 1, 8)))
        sigma = rng.choice(n, size=k, replace=False)
        dn = dn_schur(net, sigma)
        cov = net.covariance()
        worst = max(worst, float(np.max(np.abs(np.linalg.inv(dn)
                                               - cov[np.ix_(sigma, sigma)]))))
    assert worst <= 1e-12


def test_dn_additivity_across_sides():
    net = mirror_path_network(3, 1.0)
    sig = net.region("sigma")
    full = dn_schur(net, sig)
    s_plus = one_sided_dn(net, sig, net.region("omega+"))
    s_minus = one_sided_dn(net, sig, net.region("omega-"))
    assert np.max(np.abs(full - (s_plus + s_minus))) <= 1e-12


def test_poisson_extension_properties():
    rng = np.random.default_rng(5)
    net = network_from_graph(8, random_connected_graph(8, rng), 1.0)
    sigma = np.array([0, 3])
    assert np.allclose(poisson_extend(net, sigma, [0.0, 0.0]), 0.0)
    u = poisson_extend(net, sigma, [1.0, -2.0])
    assert u[0] == pytest.approx(1.0) and u[3] == pytest.approx(-2.0)
    # near-harmonicity of constants at tiny mass
    net_small = network_from_graph(8, net.edges, 1e-6)
    u = poisson_extend(net_small, sigma, [3.0, 3.0])
    assert np.max(np.abs(u - 3.0)) <= 1e-6


def test_energy_identity():
    rng = np.random.default_rng(77)
    for _ in range(20):
        n = int(rng.integers(6, 40))
        net = network_from_graph(n, random_connected_graph(n, rng), 1.0)
        sigma = rng.choice(n, size=3, replace=False)
        f = rng.normal(size=3)
        u = poisson_extend(net, sigma, f)
        dn = dn_schur(net, sigma)
        assert abs(float(f @ dn @ f) - dirichlet_energy(net, u)) <= 1e-10


def test_cn_cd_two_by_two():
    # hand-expandable 2x2: one interior, one boundary vertex
    net = network_from_graph(2, [(0, 1)], 1.0)
    res = cn_minus_cd_check(net, [0], [1])
    assert res["identity_residual"] <= 1e-15
    assert res["min_eig_cn_minus_cd"] >= -1e-15


def test_cn_cd_random_trees_and_graphs():
    rng = np.random.default_rng(100)
    for _ in range(100):
        n = int(rng.integers(4, 61))
        net = network_from_graph(n, random_connected_graph(n, rng),
                                 float(rng.uniform(0.4, 1.5)))
        bnd = rng.choice(n, size=int(rng.integers(1, 5)), replace=False)
        interior = np.setdiff1d(np.arange(n), bnd)
        res = cn_minus_cd_check(net, interior, bnd)
        assert res["identity_residual"] <= 1e-12
        assert res["min_eig_cn_minus_cd"] >= -1e-12


def test_cn_cd_isolated_boundary_rejected():
    q = np.eye(3)
    q[0, 1] = q[1, 0] = -0.5
    q += 0.6 * np.eye(3)
    net = GaussianNetwork(q)
    with pytest.raises(ValueError):
        cn_minus_cd_check(net, [0, 1], [2])  # vertex 2 decoupled


def test_markov_bayes_chain_and_grid():
    net = network_from_graph(9, [(i, i + 1) for i in range(8)], 1.0,
                             regions={"omega+": [0, 1, 2], "omega-": [6, 7, 8]})
    res = markov_bayes_check(net, [3], [5])
    assert res["split_residual"] <= 1e-12
    assert res["indep_residual"] <= 1e-12
    assert res["bayes_residual"] <= 1e-12
    grid = mirror_grid_network(5, 2, 1.0)
    res = markov_bayes_check(grid, grid.region("sigma"), np.array([0, 1]))
    assert res["markov_residual"] <= 1e-12


def test_markov_bayes_empty_second_separator():
    net = mirror_path_network(2, 1.0)
    res = markov_bayes_check(net, net.region("sigma"), np.array([], dtype=int))
    assert res["split_residual"] <= 1e-12


def test_markov_bayes_rejects_non_separator():
    net = mirror_path_network(3, 1.0)
    with pytest.raises(ValueError):
        # a single omega+ vertex does not cut the path between the two sides
        markov_bayes_check(net, np.array([0]), np.array([5]))


def test_rp_gram_positive():
    rng = np.random.default_rng(8)
    net = mirror_grid_network(4, 3, 0.8)
    vecs = [rng.normal(size=net.region("omega+").size) for _ in range(100)]
    res = rp_gram(net, vecs)
    assert res["min_eig"] >= -1e-12


def test_rp_sigma_supported_vector():
    # f supported on the mirror set: Theta f = f, so the pairing is a plain
    # covariance quadratic form, nonnegative
    net = mirror_path_network(3, 1.0)
    f = np.zeros(net.n)
    f[net.region("sigma")] = 1.3
    th = net.permutation_matrix()
    val = float(f @ th @ net.covariance() @ f)
    assert val >= 0.0
    assert val == pytest.approx(float(f @ net.covariance() @ f))


def test_rp_identity_exact():
    rng = np.random.default_rng(21)
    for net in (mirror_path_network(4, 0.9), mirror_grid_network(4, 2, 1.1)):
        for _ in range(10):
            f = rng.normal(size=net.region("omega+").size)
            assert rp_identity_residual(net, f) <= 1e-12


def test_rp_rejects_crossing_support():
    net = mirror_path_network(3, 1.0)
    f = np.ones(net.n)
    with pytest.raises(ValueError):
        rp_gram(net, [f])


def test_wick_moment_examples():
    cov1 = np.array([[1.0]])
    assert wick_product_expectation(cov1, [(0,), (0,), (0,), (0,)]) == pytest.approx(3.0)
    rho = 0.37
    cov2 = np.array([[1.0, rho], [rho, 1.0]])
    assert wick_product_expectation(cov2, [(0, 0), (1, 1)]) == pytest.approx(2.0 * rho**2)
    assert wick_product_expectation(cov2, [(0, 0, 0), (1, 1, 1)]) \
        == pytest.approx(6.0 * rho**3)


def test_wick_orthogonality_and_odd_degree():
    rho = 0.5
    cov = np.array([[1.0, rho], [rho, 1.0]])
    for n in range(1, 7):
        for m in range(1, 7):
            if n + m > 12:
                continue
            val = wick_product_expectation(cov, [(0,) * n, (1,) * m])
            expected = math.factorial(n) * rho**n if n == m else 0.0
            assert val == pytest.approx(expected, abs=1e-12)
    assert wick_product_expectation(cov, [(0,), (0,), (1,)]) == 0.0
    with pytest.raises(ValueError):
        wick_product_expectation(cov, [(0,) * 7, (1,) * 7])


def test_wick_monte_carlo_cubed():
    rho = 0.37
    rng = np.random.default_rng(17)
    chol = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    z = rng.standard_normal((10**6, 2)) @ chol.T
    prod = wick_power(z[:, 0], 3, 1.0) * wick_power(z[:, 1], 3, 1.0)
    se = np.std(prod, ddof=1) / math.sqrt(len(prod))
    assert abs(np.mean(prod) - 6.0 * rho**3) <= 3.0 * se


def test_sample_field_covariance():
    rng = np.random.default_rng(0)
    net = network_from_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], 1.0)
    phi = sample_field(net, 200000, seed=3)
    emp = phi.T @ phi / len(phi)
    assert np.max(np.abs(emp - net.covariance())) <= 0.01


def test_wick_interaction_centered():
    net = network_from_graph(8, [(i, (i + 1) % 8) for i in range(8)], 1.0)
    res2 = wick_interaction(net, [0.0, 0.0, 1.0], 200000, seed=5)
    assert abs(res2["mean_s"]) <= 3.0 * res2["se_s"]
    res4 = wick_interaction(net, [0.0] * 4 + [1.0], 10**6, seed=6)
    assert abs(res4["mean_s"]) <= 3.0 * res4["se_s"]
    with pytest.raises(ValueError):
        wick_interaction(net, [1.0, 0.0, 1.0], 100, seed=0)


def test_exp_quadratic_matches_fredholm_determinant():
    net = network_from_graph(8, [(i, (i + 1) % 8) for i in range(8)], 1.0)
    a = 0.05
    exact = exact_exp_quadratic(net, a)
    res = wick_interaction(net, [0.0, 0.0, a], 400000, seed=7)
    assert abs(res["mean_exp"] - exact) <= 3.0 * res["se_exp"]


def test_amplitude_composition_intervals():
    p = NetworkPiece(3, [(0, 1), (1, 2)], 1.0, {"in": [0], "out": [2]})
    res = amplitude_compose(p, "out", "in", p, "out", "in")
    assert res["quad_residual"] <= 1e-10
    assert res["norm_residual"] <= 1e-10


def test_amplitude_composition_wide_interfaces():
    p1 = NetworkPiece(6, [(0, 2), (1, 3), (2, 3), (2, 4), (3, 5)], 0.9,
                      {"in": [0, 1], "out": [4, 5]})
    p2 = NetworkPiece(5, [(0, 2), (1, 2), (2, 3), (2, 4)], 0.9,
                      {"in": [0, 1], "out": [3, 4]})
    res = amplitude_compose(p2, "out", "in", p1, "out", "in")
    assert res["quad_residual"] <= 1e-10
    assert res["norm_residual"] <= 1e-10


def test_amplitude_empty_collar_is_identity():
    # gluing nothing: the glued piece with an empty second network is the
    # piece itself, so the kernels coincide trivially
    p = NetworkPiece(3, [(0, 1), (1, 2)], 1.0, {"in": [0], "out": [2]})
    empty = NetworkPiece(1, [], 1.0, {"mid": [0]})
    glued = glue_pieces(p, "out", empty, "mid")
    assert glued.n_vertices == p.n_vertices
    assert sorted(glued.edges) == sorted(p.edges)
    amp_p = amplitude_params(p)
    amp_g = amplitude_params(NetworkPiece(glued.n_vertices, glued.edges, glued.mass,
                                          {"in": glued.boundaries["in"],
                                           "out": p.boundaries["out"]}))
    assert np.max(np.abs(amp_p.quad - amp_g.quad)) <= 1e-14


def test_doubling_trace_identity():
    p = NetworkPiece(4, [(0, 1), (1, 2), (2, 3)], 1.1, {"sigma": [3]})
    assert doubling_trace_residual(p, "sigma") <= 1e-10
    p2 = NetworkPiece(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)], 0.7,
                      {"sigma": [0, 4]})
    assert doubling_trace_residual(p2, "sigma") <= 1e-10


def test_glue_rejects_mismatches():
    p1 = NetworkPiece(3, [(0, 1), (1, 2)], 1.0, {"out": [2]})
    p2 = NetworkPiece(3, [(0, 1), (1, 2)], 1.0, {"in": [0, 1]})
    with pytest.raises(ValueError):
        glue_pieces(p1, "out", p2, "in")
    p3 = NetworkPiece(3, [(0, 1), (1, 2)], 0.5, {"in": [0]})
    with pytest.raises(ValueError):
        glue_pieces(p1, "out", p3, "in")


def test_network_validation():
    with pytest.raises(ValueError):
        GaussianNetwork(np.array([[1.0, 2.0], [2.0, 1.0]]))  # not PD
    with pytest.raises(ValueError):
        GaussianNetwork(np.array([[1.0, 0.3], [0.2, 1.0]]))  # not symmetric
    q = network_from_graph(3, [(0, 1), (1, 2)], 1.0).q
    with pytest.raises(ValueError):
        GaussianNetwork(q, involution=np.array([1, 0, 2]))  # breaks Q


def test_empty_sigma_rejected():
    net = network_from_graph(3, [(0, 1), (1, 2)], 1.0)
    with pytest.raises(ValueError):
        dn_schur(net, [])
