"""Shared numerical kernels: quadrature rules, probabilists' Hermite polynomials,
Hurwitz-type zeta sums with Euler-Maclaurin continuation, Richardson
extrapolation, and a residual-checked dense symmetric eigensolver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "QuadratureRule",
    "ExtrapolationResult",
    "gauss_legendre",
    "gauss_hermite_weighted",
    "periodic_trapezoid",
    "hermite_poly",
    "lerch_sum",
    "richardson",
    "extrapolate_basis",
    "sym_eig",
]

EULER_GAMMA = 0.5772156649015328606


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a 1D quadrature rule.

    ``kind`` is one of ``legendre``, ``hermite-weighted``,
    ``periodic-trapezoid``; ``interval`` records the domain
    (an (a, b) pair, or the strings "line"/"circle").
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    interval: tuple | str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass
class ExtrapolationResult:
    value: float
    error_estimate: float
    orders_used: list = field(default_factory=list)
    converged: bool = False

    def as_dict(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "orders_used": list(self.orders_used),
            "converged": self.converged,
        }


def gauss_legendre(n: int, a: float, b: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [a, b]; exact for degree <= 2n-1."""
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(0.5 * (a + b) + half * x, half * w, "legendre", (a, b))


def gauss_hermite_weighted(n: int) -> QuadratureRule:
    """Rule for integrals against exp(-x^2) on the whole line."""
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    x, w = np.polynomial.hermite.hermgauss(n)
    return QuadratureRule(x, w, "hermite-weighted", "line")


def periodic_trapezoid(n: int, period: float = 2.0 * math.pi) -> QuadratureRule:
    """Equispaced rule on the circle; spectrally accurate for smooth periodic f."""
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    h = period / n
    nodes = h * np.arange(n)
    return QuadratureRule(nodes, np.full(n, h), "periodic-trapezoid", "circle")


def hermite_poly(n: int, x):
    """Probabilists' Hermite polynomial h_n via h_{n+1} = x*h_n - n*h_{n-1}.

    Normalization follows the generating function exp(z*x - z^2/2),
    so h_0 = 1, h_2 = x^2 - 1, h_4 = x^4 - 6x^2 + 3.
    """
    if n < 0:
        raise ValueError("Hermite degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h, h_prev = x * h - k * h_prev, h
    return h if h.ndim else float(h)


# Bernoulli numbers B_2, B_4, ... used by the order-4 Euler-Maclaurin tail.
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)


def lerch_sum(s: complex, shift: float, n_terms: int = 64, em_order: int = 4) -> complex:
    """Hurwitz-type sum sum_{n>=0} (n + shift)^{-s}, continued in s.

    Direct summation of the first ``n_terms`` terms plus an Euler-Maclaurin
    tail of order ``em_order`` (number of Bernoulli correction terms).
    Relative accuracy ~1e-12 for moderate |s| with the defaults.
    """
    if shift <= 0:
        raise ValueError("shift must be positive")
    s = complex(s)
    if abs(s - 1.0) < 1e-14:
        raise ValueError("s=1 is a pole of the continued sum")
    if em_order > len(_BERNOULLI):
        raise ValueError(f"em_order <= {len(_BERNOULLI)} supported")
    n = np.arange(n_terms)
    head = np.sum((n + shift) ** (-s))
    x = float(n_terms + shift)
    # Euler-Maclaurin: integral + half endpoint + Bernoulli corrections.
    tail = x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** (-s)
    deriv_coeff = s  # (s)_{2j-1} builds up the rising factorial
    power = x ** (-s - 1.0)
    for j, b2j in enumerate(_BERNOULLI[:em_order], start=1):
        tail += b2j / math.factorial(2 * j) * deriv_coeff * power
        deriv_coeff *= (s + 2 * j - 1) * (s + 2 * j)
        power *= x ** (-2.0)
    total = head + tail
    if abs(total.imag) < 1e-15 * max(1.0, abs(total.real)):
        return complex(total.real, 0.0)
    return complex(total)


def richardson(samples: Sequence[tuple], order: int = 1, ratio: float | None = None) -> ExtrapolationResult:
    """Richardson-extrapolate samples (h_i, f(h_i)) with error model sum c_k h^{order*k}.

    Requires at least 3 samples with strictly decreasing h. The error estimate
    is the difference between the last two extrapolation stages; ``converged``
    requires the stage-wise corrections to have shrunk monotonically.
    """
    hs = np.array([h for h, _ in samples], dtype=float)
    vals = np.array([v for _, v in samples], dtype=float)
    if len(hs) < 3:
        raise ValueError("need at least 3 samples")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("h values must be strictly decreasing")
    if order < 1:
        raise ValueError("order must be a positive integer")

    # Neville interpolation at 0 of a polynomial in x = h^order; the stagewise
    # top-row differences track the real error even when the power model is
    # misspecified (e.g. lurking h log h terms)
    x = hs**order if ratio is None else np.array(
        [ratio ** (order * k) for k in range(len(hs), 0, -1)])
    n = len(hs)
    tab = vals.copy()
    tops = [tab[0]]
    for j in range(1, n):
        new = np.empty(n - j)
        for i in range(n - j):
            new[i] = (x[i] * tab[i + 1] - x[i + j] * tab[i]) / (x[i] - x[i + j])
        tab = new
        tops.append(tab[0])
    corrections = np.abs(np.diff(tops))
    err = float(corrections[-1]) if corrections.size else 0.0
    nonzero = corrections[corrections > 0]
    converged = bool(nonzero.size == 0 or np.all(np.diff(np.log(nonzero + 1e-300)) < 0.5))
    return ExtrapolationResult(float(tab[0]), err,
                               orders_used=[order * k for k in range(1, n)],
                               converged=converged)


def extrapolate_basis(xs, values, basis) -> ExtrapolationResult:
    """Least-squares limit extraction against explicit decay basis functions.

    ``basis`` is a list of callables b_k(x) -> 0 as x -> infinity; fits
    values ~ L + sum_k c_k b_k(x) and returns L. The error estimate is the
    change in L when the first sample is dropped.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(xs) < len(basis) + 2:
        raise ValueError("need at least len(basis)+2 samples")

    def fit(x, v):
        cols = [np.ones_like(x)] + [b(x) for b in basis]
        A = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(A, v, rcond=None)
        resid = v - A @ coef
        return coef[0], float(np.max(np.abs(resid)))

    full, resid_full = fit(xs, values)
    drop, _ = fit(xs[1:], values[1:])
    err = abs(full - drop) + resid_full
    return ExtrapolationResult(float(full), float(err), orders_used=list(range(1, len(basis) + 1)),
                               converged=bool(err < 0.1 * (abs(full) + 1.0)))


def sym_eig(matrix: np.ndarray, rtol: float = 1e-12, residual_tol: float = 1e-10):
    """Eigendecomposition of a dense real symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as columns). Raises on
    asymmetric or non-finite input; verifies the residual contract
    ||A v - lambda v|| <= residual_tol * ||A|| for every pair.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = np.max(np.abs(a)) or 1.0
    if np.max(np.abs(a - a.T)) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    a = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(a)
    norm = np.linalg.norm(a, 2) or 1.0
    resid = np.max(np.abs(a @ vecs - vecs * vals))
    if resid > residual_tol * norm:
        raise ArithmeticError(f"eigen residual {resid:.3e} exceeds {residual_tol:.1e}*||A||")
    return vals, vecs
