"""Cyclic-cover free-energy asymptotics: heat-trace deck sums vs eigenvalue
sums, twisted-block free-energy sequences with two independent computations,
the lowest-twisted-eigenvalue power law, the small-eigenvalue heat bound,
and rough eigenvalue counting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import ExtrapolationResult, extrapolate_basis
from .spectra import (CircleFamily, CoverGraph, Spectrum, TorusFamily,
                      cover_spectrum, hermitian_eigenvalues,
                      twisted_block_laplacian)
from .zeta import log_det_zeta

__all__ = [
    "CoverFreeEnergySeq",
    "Lambda0Curve",
    "heat_trace_cover",
    "free_energy_sequence",
    "lambda0_analysis",
    "small_eigen_heat_bound",
    "eigencount_check",
]


@dataclass
class CoverFreeEnergySeq:
    n_list: list
    values: np.ndarray
    limit_estimate: ExtrapolationResult
    cross_check: np.ndarray | None = None

    def max_cross_residual(self) -> float:
        if self.cross_check is None:
            return 0.0
        return float(np.max(np.abs(self.values - self.cross_check)))


@dataclass
class Lambda0Curve:
    theta_grid: np.ndarray
    values: np.ndarray
    p: int
    a: float
    b: float
    r_squared: float


def heat_trace_cover(L: float, N: int, t: float):
    """Heat trace of the degree-N circle cover, computed two ways.

    (i) eigenvalue sum over (2 pi n / (N L))^2 and (ii) the deck/image sum
    N * sum_k (4 pi t)^{-1/2} L exp(-(k N L)^2 / 4t). The two agree by the
    Jacobi theta identity.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if L <= 0 or N < 1:
        raise ValueError("need L > 0 and N >= 1")
    total = N * L
    n_max = int(total * math.sqrt(45.0 / t) / (2.0 * math.pi)) + 2
    n = np.arange(-n_max, n_max + 1)
    eig_sum = float(np.sum(np.exp(-t * (2.0 * math.pi * n / total) ** 2)))
    k_max = int(math.sqrt(45.0 * 4.0 * t) / total) + 2
    k = np.arange(-k_max, k_max + 1)
    deck_sum = float(N * L / math.sqrt(4.0 * math.pi * t)
                     * np.sum(np.exp(-((k * total) ** 2) / (4.0 * t))))
    return eig_sum, deck_sum


def _fit_limit(n_list, values):
    """Adaptive limit extraction.

    Geometrically converging tails (massive families) get an Aitken-style
    geometric correction of the last value; slowly converging ones
    (massless, log-volume corrections) are fitted against {1/N, log N / N}.
    """
    ns = np.asarray(n_list, dtype=float)
    values = np.asarray(values, dtype=float)
    diffs = np.diff(values)
    scale = max(float(np.max(np.abs(values))), 1e-30)
    if np.all(np.abs(diffs) < 1e-13 * scale):
        return ExtrapolationResult(float(values[-1]), float(np.max(np.abs(diffs), initial=0.0)),
                                   orders_used=[0], converged=True)
    basis = [lambda x: 1.0 / x, lambda x: np.log(x) / x]

    def basis_predict_last():
        cols = [np.ones(len(ns) - 1)] + [b(ns[:-1]) for b in basis]
        coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), values[:-1], rcond=None)
        pred = coef[0] + sum(c * b(ns[-1:]) for c, b in zip(coef[1:], basis))
        return abs(float(pred[0]) - values[-1])

    def geometric_predict_last():
        d = np.diff(values[:-1])
        if len(d) < 2 or abs(d[-2]) < 1e-300:
            return math.inf
        r = d[-1] / d[-2]
        if not 0.0 < abs(r) < 0.95:
            return math.inf
        return abs(values[-2] + d[-1] * r - values[-1])

    # pick the model that better predicts the last computed value
    if len(values) >= 4 and basis_predict_last() <= geometric_predict_last():
        return extrapolate_basis(ns, values, basis)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(diffs[1:]) / np.abs(diffs[:-1])
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size >= 2 and np.all(ratios < 0.95):
        r = float(ratios[-1])
        corr = diffs[-1] * r / (1.0 - r)
        limit = float(values[-1] + corr)
        err = abs(corr) + abs(diffs[-1]) * r**2
        return ExtrapolationResult(limit, float(err), orders_used=[1], converged=True)
    return extrapolate_basis(ns, values, basis)


def free_energy_sequence(geometry: str, m: float, n_list, L: float = 1.0,
                         L1: float = 2.0 * math.pi, L2: float = 2.0 * math.pi,
                         graph: CoverGraph | None = None) -> CoverFreeEnergySeq:
    """Volume-normalized log det'_zeta along a tower of cyclic covers.

    Each value is computed twice: from the direct cover spectrum and from
    the product of twisted-block determinants; the pair must agree. The
    limit is extrapolated, never hard-coded.
    """
    n_list = list(n_list)
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("need an increasing N_list with at least 2 entries")

    direct = np.zeros(len(n_list))
    product = np.zeros(len(n_list))
    if geometry == "circle":
        for i, n_deg in enumerate(n_list):
            vol = n_deg * L
            direct[i] = log_det_zeta(CircleFamily(n_deg * L, m))[0] / vol
            acc = 0.0
            for p in range(n_deg):
                acc += log_det_zeta(CircleFamily(L, m, 2.0 * math.pi * p / n_deg))[0]
            product[i] = acc / vol
    elif geometry == "torus-strip":
        for i, n_deg in enumerate(n_list):
            vol = n_deg * L1 * L2
            direct[i] = log_det_zeta(TorusFamily(n_deg * L1, L2, m))[0] / vol
            acc = 0.0
            for p in range(n_deg):
                acc += log_det_zeta(TorusFamily(L1, L2, m, 2.0 * math.pi * p / n_deg))[0]
            product[i] = acc / vol
    elif geometry == "graph":
        if graph is None:
            raise ValueError("graph geometry needs a CoverGraph")
        for i, n_deg in enumerate(n_list):
            g = CoverGraph(graph.n_vertices, graph.edges, n_deg)
            vol = n_deg * graph.n_vertices
            lam = cover_spectrum(g).positive + m**2
            direct[i] = float(np.sum(np.log(lam))) / vol
            acc = 0.0
            for p in range(n_deg):
                block = twisted_block_laplacian(g, 2.0 * math.pi * p / n_deg)
                bl = hermitian_eigenvalues(block) + m**2
                bl = bl[bl > 1e-12]
                acc += float(np.sum(np.log(bl)))
            product[i] = acc / vol
    else:
        raise ValueError(f"unknown geometry {geometry!r}")

    fit = _fit_limit(n_list, direct)
    # type invariant: converged implies |values[last] - limit| <= 2 * error,
    # so the error estimate covers the remaining distance of the raw sequence
    if fit.converged:
        fit.error_estimate = max(fit.error_estimate,
                                 0.5000001 * abs(float(direct[-1]) - fit.value))
    return CoverFreeEnergySeq(n_list, direct, fit, cross_check=product)


def lambda0_analysis(operator_family, theta_grid, fit_window: float = 0.3,
                     r2_min: float = 0.999) -> Lambda0Curve:
    """Fit lambda_0(theta) = a theta^{2p} near theta = 0 by log-log regression.

    ``operator_family`` maps theta to either a Hermitian matrix or directly
    to the lowest eigenvalue (a float). The grid must be symmetric about 0.
    ``b`` is certified as min lambda_0/theta^{2p} over the fit window.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    if np.max(np.abs(theta_grid + theta_grid[::-1])) > 1e-12:
        raise ValueError("theta grid must be symmetric about 0")
    values = np.empty_like(theta_grid)
    for i, th in enumerate(theta_grid):
        op = operator_family(th)
        values[i] = float(op) if np.isscalar(op) else float(hermitian_eigenvalues(op)[0])
    values = np.maximum(values, 0.0)
    spacing = float(np.min(np.abs(np.diff(theta_grid))))
    at_zero = values[np.abs(theta_grid) < 1e-12]
    if at_zero.size and at_zero[0] >= 1e-12:
        raise ValueError("lambda_0(0) does not vanish: not a trivially-twisted family")
    away = values[np.abs(theta_grid) >= spacing - 1e-15]
    if np.any(away <= 0.0):
        raise ValueError("lambda_0 vanishes away from theta = 0")

    window = (np.abs(theta_grid) > 1e-9) & (np.abs(theta_grid) <= fit_window)
    if np.sum(window) < 4:
        raise ValueError("fit window too small for the given grid")
    lx = np.log(np.abs(theta_grid[window]))
    ly = np.log(values[window])
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if r2 < r2_min:
        raise ArithmeticError(f"lambda0 fit is not a power law (R^2 = {r2:.5f})")
    p = int(round(slope / 2.0))
    if p < 1:
        raise ArithmeticError(f"fitted exponent 2p = {slope:.3f} is not a positive even power")
    a = math.exp(intercept)
    b = float(np.min(values[window] / np.abs(theta_grid[window]) ** (2 * p)))
    b = min(b, a)  # certified lower-bound coefficient never exceeds the leading one
    return Lambda0Curve(theta_grid, values, p, a, b, r2)


def small_eigen_heat_bound(lam0_of_theta, curve: Lambda0Curve, t_grid, n_list,
                           eps0: float | None = None, lambda1_floor: float | None = None):
    """Max violation of (1/N) sum_{0<lambda<eps0} e^{-t lambda} <= C4 t^{-1/2p}.

    C4 = Gamma(1/(2p)) / (p b^{1/(2p)}) from the Gamma-integral bound; the
    small eigenvalues of the degree-N cover are lambda_0(2 pi k / N).
    eps0 defaults to half the lambda_1 floor over the twist circle, which
    must be supplied (computed, not assumed).
    """
    p, b = curve.p, curve.b
    if eps0 is None:
        if lambda1_floor is None:
            raise ValueError("provide eps0 or a computed lambda1 floor")
        eps0 = 0.5 * lambda1_floor
    if lambda1_floor is not None and eps0 > lambda1_floor:
        raise ValueError("eps0 must sit below the uniform lambda_1 floor")
    c4 = math.gamma(1.0 / (2 * p)) / (p * b ** (1.0 / (2 * p)))
    worst = -np.inf
    records = []
    for n_deg in n_list:
        k = np.arange(-(n_deg // 2), n_deg - n_deg // 2)
        thetas = 2.0 * math.pi * k / n_deg
        lam = np.array([lam0_of_theta(th) for th in thetas])
        small = lam[(lam > 1e-12) & (lam < eps0)]
        for t in np.asarray(t_grid, dtype=float):
            lhs = float(np.sum(np.exp(-t * small))) / n_deg
            violation = lhs - c4 * t ** (-1.0 / (2 * p))
            records.append((n_deg, t, lhs, violation))
            worst = max(worst, violation)
    return {"max_violation": float(worst), "c4": c4, "eps0": eps0, "records": records}


def eigencount_check(sp: Spectrum, vol: float, lambda_grid, dim: int = 1):
    """Max of count(lambda <= L) / (vol L^{d/2}) over the grid (Weyl-form bound)."""
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if np.any(lambda_grid < 1.0):
        raise ValueError("counting thresholds must be >= 1")
    ev = sp.eigenvalues
    ratios = []
    for lam in lambda_grid:
        count = int(np.sum(ev <= lam))
        ratios.append(count / (vol * lam ** (dim / 2.0)))
    return {"max_ratio": float(np.max(ratios)), "ratios": ratios}
