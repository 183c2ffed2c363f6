"""Model spectra and cyclic graph covers."""

import math

import numpy as np
import pytest

from zetalab.spectra import (CoverGraph, Spectrum, TwistedCircle, block_union_spectrum,
                             cover_spectrum, cycle_cover_build, cycle_graph,
                             deck_shift_matrix, hermitian_eigenvalues,
                             interval_dirichlet_spectrum, torus_spectrum,
                             twisted_block_decompose, twisted_block_laplacian,
                             twisted_circle_spectrum)


def test_untwisted_circle_spectrum():
    sp = twisted_circle_spectrum(TwistedCircle(2.0 * math.pi), 4)
    assert sp.kernel_dim == 1
    assert np.allclose(sp.eigenvalues[:5], [0.0, 1.0, 1.0, 4.0, 4.0])


def test_half_twist_doubles_half_integers():
    sp = twisted_circle_spectrum(TwistedCircle(2.0 * math.pi, theta=math.pi), 4)
    # direct formula oracle: (n + 1/2)^2 each twice
    expected = np.sort([(n + 0.5) ** 2 for n in range(-4, 4)])
    assert np.allclose(sp.eigenvalues[:8], expected[:8])
    assert sp.kernel_dim == 0


def test_massive_circle_is_shifted():
    sp0 = twisted_circle_spectrum(TwistedCircle(2.0 * math.pi), 4)
    sp1 = twisted_circle_spectrum(TwistedCircle(2.0 * math.pi, m=1.0), 4)
    assert np.allclose(sp1.eigenvalues, sp0.eigenvalues + 1.0)
    assert np.allclose(sp1.eigenvalues[:3], [1.0, 2.0, 2.0])


def test_twist_parity():
    a = twisted_circle_spectrum(TwistedCircle(3.0, 0.3, 1.1), 12)
    b = twisted_circle_spectrum(TwistedCircle(3.0, 0.3, -1.1), 12)
    assert np.allclose(a.eigenvalues, b.eigenvalues)


def test_lambda0_vanishes_iff_trivial_twist():
    for theta in (0.0, 2.0 * math.pi, -4.0 * math.pi):
        sp = twisted_circle_spectrum(TwistedCircle(2.0, theta=theta), 3)
        assert sp.kernel_dim == 1
    for theta in (0.5, math.pi, 5.0):
        sp = twisted_circle_spectrum(TwistedCircle(2.0, theta=theta), 3)
        assert sp.kernel_dim == 0
        assert sp.eigenvalues[0] == pytest.approx(
            min((2.0 * math.pi * n + theta) ** 2 / 4.0 for n in range(-6, 7)))


def test_torus_spectrum_lattice_oracle():
    sp = torus_spectrum(2.0 * math.pi, 2.0 * math.pi, 0.0, n_max=3)
    # lattice-sum oracle j^2 + k^2
    expected = np.sort([j**2 + k**2 for j in range(-3, 4) for k in range(-3, 4)])
    assert np.allclose(sp.eigenvalues, expected)
    assert sp.kernel_dim == 1
    spm = torus_spectrum(2.0 * math.pi, 2.0 * math.pi, 0.7, n_max=3)
    assert np.allclose(spm.eigenvalues, expected + 0.49)


def test_interval_spectrum():
    sp = interval_dirichlet_spectrum(math.pi, 0.0, 4)
    assert np.allclose(sp.eigenvalues, [1.0, 4.0, 9.0, 16.0])
    spm = interval_dirichlet_spectrum(math.pi, 1.0, 4)
    assert np.allclose(spm.eigenvalues, [2.0, 5.0, 10.0, 17.0])
    assert interval_dirichlet_spectrum(1.0, 0.0, 3).kernel_dim == 0


def test_cycle_cover_unrolls_cycle():
    g = cycle_graph(3)
    g2 = CoverGraph(g.n_vertices, g.edges, 2)
    _, lap = cycle_cover_build(g2)
    c6 = cycle_graph(6).base_laplacian()
    assert np.allclose(np.sort(hermitian_eigenvalues(lap)),
                       np.sort(hermitian_eigenvalues(c6)), atol=1e-12)


def test_degree_one_cover_is_base():
    g = cycle_graph(3)
    _, lap = cycle_cover_build(g)
    assert np.allclose(lap, g.base_laplacian())


def test_double_edge_cover_gives_c6():
    # base: two vertices, double edge, one marked; explicit unrolling oracle
    base = CoverGraph(2, [(0, 1, 0), (1, 0, 1)], 3)
    _, lap = cycle_cover_build(base)
    expected = np.sort([2.0 - 2.0 * math.cos(2.0 * math.pi * k / 6.0) for k in range(6)])
    assert np.allclose(np.sort(hermitian_eigenvalues(lap)), expected, atol=1e-12)


def test_deck_shift_commutes():
    rng = np.random.default_rng(5)
    edges = [(0, 1, 1), (1, 2, 0), (2, 0, 0), (0, 3, 1), (3, 1, 0)]
    g = CoverGraph(4, edges, 5)
    _, lap = cycle_cover_build(g)
    p = deck_shift_matrix(g)
    assert np.max(np.abs(p @ lap - lap @ p)) == 0.0


def test_block_spectra_c3_degree2():
    # discrete Fourier oracle: theta=0 block {0,3,3}, theta=pi block {1,1,4};
    # union equals the C6 spectrum {0,1,1,3,3,4}
    g = CoverGraph(3, cycle_graph(3).edges, 2)
    blocks = twisted_block_decompose(g)
    b0 = hermitian_eigenvalues(blocks[0])
    b1 = hermitian_eigenvalues(blocks[1])
    assert np.allclose(b0, [0.0, 3.0, 3.0], atol=1e-12)
    assert np.allclose(b1, [1.0, 1.0, 4.0], atol=1e-12)
    union = np.sort(np.concatenate([b0, b1]))
    assert np.allclose(union, [0.0, 1.0, 1.0, 3.0, 3.0, 4.0], atol=1e-12)


def test_block_union_matches_cover_various():
    rng = np.random.default_rng(2)
    for trial in range(3):
        n = int(rng.integers(3, 7))
        edges = []
        for i in range(n):
            edges.append((i, (i + 1) % n, int(rng.integers(0, 2))))
        if not any(w for (_, _, w) in edges):
            edges[0] = (edges[0][0], edges[0][1], 1)
        for n_deg in (2, 5, 12):
            g = CoverGraph(n, edges, n_deg)
            direct = cover_spectrum(g).eigenvalues
            union = block_union_spectrum(g).eigenvalues
            assert np.max(np.abs(direct - union)) < 1e-10


def test_theta_zero_block_kernel_counts_components():
    g = cycle_graph(4)
    block = twisted_block_laplacian(CoverGraph(4, g.edges, 3), 0.0)
    assert Spectrum(np.maximum(hermitian_eigenvalues(block), 0.0)).kernel_dim == 1


def test_disconnected_base_rejected():
    with pytest.raises(ValueError):
        CoverGraph(4, [(0, 1, 0), (2, 3, 1)], 2)


def test_bad_degree_rejected():
    with pytest.raises(ValueError):
        CoverGraph(3, cycle_graph(3).edges, 0)


def test_spectrum_rows_groups_multiplicity():
    sp = twisted_circle_spectrum(TwistedCircle(2.0 * math.pi), 2)
    rows = sp.rows()
    assert rows[0] == (0, 0.0, 1)
    assert rows[1][2] == 2  # eigenvalue 1 with multiplicity 2
