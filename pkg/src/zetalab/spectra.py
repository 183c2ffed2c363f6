"""Exact eigenvalue data for model geometries (twisted circles, flat tori,
Dirichlet intervals, cycle graphs) and cyclic graph covers with their
twisted-block decomposition.

Each analytic family carries its exact heat trace split into a small-time
power model A(t) = sum c_j t^rho_j plus an exponentially small remainder, so
zeta continuation can subtract the singular part analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import sym_eig

__all__ = [
    "Spectrum",
    "TwistedCircle",
    "CircleFamily",
    "TorusFamily",
    "IntervalFamily",
    "CoverGraph",
    "twisted_circle_spectrum",
    "torus_spectrum",
    "interval_dirichlet_spectrum",
    "cycle_cover_build",
    "twisted_block_decompose",
    "deck_shift_matrix",
    "cycle_graph",
]

KERNEL_TOL = 1e-12


@dataclass
class Spectrum:
    """Ascending eigenvalue multiset with explicit kernel dimension."""

    eigenvalues: np.ndarray
    truncation: dict | None = None

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        if ev.size and ev[0] < -1e-10:
            raise ValueError(f"negative eigenvalue {ev[0]:.3e} in spectrum")
        self.eigenvalues = ev

    @property
    def kernel_dim(self) -> int:
        return int(np.sum(self.eigenvalues < KERNEL_TOL))

    @property
    def positive(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues >= KERNEL_TOL]

    def __len__(self):
        return len(self.eigenvalues)

    def rows(self):
        """(index, eigenvalue, multiplicity) rows, grouping within 1e-9."""
        out = []
        i = 0
        ev = self.eigenvalues
        while i < len(ev):
            j = i
            while j + 1 < len(ev) and abs(ev[j + 1] - ev[i]) <= 1e-9 * max(1.0, abs(ev[i])):
                j += 1
            out.append((len(out), float(ev[i]), j - i + 1))
            i = j + 1
        return out


# ---------------------------------------------------------------------------
# Analytic families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwistedCircle:
    """Circle of length L with mass m and flux twist theta (radians).

    Eigenvalues ((2 pi n + theta)/L)^2 + m^2 over integer n; the kernel is
    nonempty iff m = 0 and theta in 2 pi Z.
    """

    L: float
    m: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("circle length must be positive")
        if self.m < 0:
            raise ValueError("mass must be nonnegative")

    def eigenvalue(self, n):
        return ((2.0 * math.pi * n + self.theta) / self.L) ** 2 + self.m**2


class CircleFamily:
    """Heat-trace model for a (twisted, massive) circle."""

    def __init__(self, L: float, m: float = 0.0, theta: float = 0.0):
        self.geom = TwistedCircle(L, m, theta)
        self.L, self.m, self.theta = L, float(m), float(theta)
        self.image_scale = L**2 / 4.0  # exponent scale of the image-sum remainder

    @property
    def kernel_dim(self) -> int:
        twist_trivial = abs(math.remainder(self.theta, 2.0 * math.pi)) < 1e-12
        return 1 if (self.m < 1e-12 and twist_trivial) else 0

    def eigenvalues(self, n_max: int) -> np.ndarray:
        n = np.arange(-n_max, n_max + 1)
        return np.sort(self.geom.eigenvalue(n))

    def spectrum(self, n_max: int) -> Spectrum:
        return Spectrum(self.eigenvalues(n_max),
                        truncation={"n_max": n_max, "tail": "circle", "L": self.L,
                                    "m": self.m, "theta": self.theta})

    def lambda1(self) -> float:
        lam = np.sort(self.eigenvalues(2))
        return float(lam[self.kernel_dim])

    def model_terms(self, k_max: int = 40):
        # A(t) = (L/sqrt(4 pi t)) e^{-t m^2} expanded in powers of t
        c = self.L / math.sqrt(4.0 * math.pi)
        terms = []
        coeff = 1.0
        for k in range(k_max + 1):
            terms.append((c * coeff, k - 0.5))
            coeff *= -self.m**2 / (k + 1)
            if abs(c * coeff) < 1e-300:
                break
        return terms

    def heat_remainder(self, t):
        """theta(t) - A(t), via the image sum (exponentially small as t->0)."""
        t = np.asarray(t, dtype=float)
        k = np.arange(1, 64)
        expo = np.exp(-np.outer(1.0 / (4.0 * t), k**2 * self.L**2))
        csum = 2.0 * expo @ np.cos(k * self.theta)
        return self.L / np.sqrt(4.0 * math.pi * t) * np.exp(-t * self.m**2) * csum

    def heat_trace(self, t, n_max: int | None = None):
        """Eigenvalue-sum heat trace, accurate for t bounded away from 0."""
        t = np.asarray(t, dtype=float)
        if n_max is None:
            tmin = float(np.min(t))
            n_max = int(self.L * math.sqrt(45.0 / tmin) / (2.0 * math.pi)) + 2
        lam = self.eigenvalues(n_max)
        return np.exp(-np.outer(t, lam)).sum(axis=1)


class TorusFamily:
    """Heat-trace model for a flat torus L1 x L2 with mass m and an optional
    flux twist theta along the first cycle."""

    def __init__(self, L1: float, L2: float, m: float = 0.0, theta: float = 0.0):
        if L1 <= 0 or L2 <= 0:
            raise ValueError("torus side lengths must be positive")
        if m < 0:
            raise ValueError("mass must be nonnegative")
        self.L1, self.L2, self.m, self.theta = float(L1), float(L2), float(m), float(theta)
        self._c1 = CircleFamily(L1, 0.0, theta)
        self._c2 = CircleFamily(L2, 0.0, 0.0)
        self.image_scale = min(L1, L2) ** 2 / 4.0

    @property
    def kernel_dim(self) -> int:
        twist_trivial = abs(math.remainder(self.theta, 2.0 * math.pi)) < 1e-12
        return 1 if (self.m < 1e-12 and twist_trivial) else 0

    def eigenvalues(self, n_max: int) -> np.ndarray:
        j = np.arange(-n_max, n_max + 1)
        w1 = ((2.0 * math.pi * j + self.theta) / self.L1) ** 2
        w2 = (2.0 * math.pi * j / self.L2) ** 2
        lam = (w1[:, None] + w2[None, :] + self.m**2).ravel()
        return np.sort(lam)

    def spectrum(self, n_max: int) -> Spectrum:
        return Spectrum(self.eigenvalues(n_max),
                        truncation={"n_max": n_max, "tail": "torus", "L1": self.L1,
                                    "L2": self.L2, "m": self.m, "theta": self.theta})

    def lambda1(self) -> float:
        lam = self.eigenvalues(2)
        return float(np.sort(lam)[self.kernel_dim])

    def model_terms(self, k_max: int = 40):
        c = self.L1 * self.L2 / (4.0 * math.pi)
        terms = []
        coeff = 1.0
        for k in range(k_max + 1):
            terms.append((c * coeff, k - 1.0))
            coeff *= -self.m**2 / (k + 1)
            if abs(c * coeff) < 1e-300:
                break
        return terms

    def heat_remainder(self, t):
        # theta = (a1 + r1)(a2 + r2) e^{-t m^2};  A = a1 a2 e^{-t m^2}
        t = np.asarray(t, dtype=float)
        a1 = self.L1 / np.sqrt(4.0 * math.pi * t)
        a2 = self.L2 / np.sqrt(4.0 * math.pi * t)
        r1 = self._c1.heat_remainder(t)
        r2 = self._c2.heat_remainder(t)
        return np.exp(-t * self.m**2) * (a1 * r2 + r1 * a2 + r1 * r2)

    def heat_trace(self, t, n_max: int | None = None):
        t = np.asarray(t, dtype=float)
        if n_max is None:
            tmin = float(np.min(t))
            n_max = int(max(self.L1, self.L2) * math.sqrt(45.0 / tmin) / (2.0 * math.pi)) + 2
        lam = self.eigenvalues(n_max)
        return np.exp(-np.outer(t, lam)).sum(axis=1)


class IntervalFamily:
    """Dirichlet interval [0, T] with mass mu: eigenvalues (pi j / T)^2 + mu^2."""

    def __init__(self, T: float, mu: float = 0.0):
        if T <= 0:
            raise ValueError("interval length must be positive")
        if mu < 0:
            raise ValueError("mass must be nonnegative")
        self.T, self.mu = float(T), float(mu)
        self.image_scale = T**2

    kernel_dim = 0

    def eigenvalues(self, j_max: int) -> np.ndarray:
        j = np.arange(1, j_max + 1)
        return (math.pi * j / self.T) ** 2 + self.mu**2

    def spectrum(self, j_max: int) -> Spectrum:
        return Spectrum(self.eigenvalues(j_max),
                        truncation={"j_max": j_max, "tail": "interval-dirichlet",
                                    "T": self.T, "mu": self.mu})

    def lambda1(self) -> float:
        return (math.pi / self.T) ** 2 + self.mu**2

    def model_terms(self, k_max: int = 40):
        # A(t) = e^{-t mu^2} ( T/(2 sqrt(pi t)) - 1/2 )
        c1 = self.T / (2.0 * math.sqrt(math.pi))
        terms = []
        coeff = 1.0
        for k in range(k_max + 1):
            terms.append((c1 * coeff, k - 0.5))
            terms.append((-0.5 * coeff, float(k)))
            coeff *= -self.mu**2 / (k + 1)
            if abs(coeff) < 1e-300:
                break
        return terms

    def heat_remainder(self, t):
        t = np.asarray(t, dtype=float)
        k = np.arange(1, 64)
        img = np.exp(-np.outer(1.0 / t, k**2 * self.T**2)).sum(axis=1)
        return np.exp(-t * self.mu**2) * self.T / np.sqrt(math.pi * t) * img

    def heat_trace(self, t, j_max: int | None = None):
        t = np.asarray(t, dtype=float)
        if j_max is None:
            tmin = float(np.min(t))
            j_max = int(self.T * math.sqrt(45.0 / tmin) / math.pi) + 2
        lam = self.eigenvalues(j_max)
        return np.exp(-np.outer(t, lam)).sum(axis=1)


def twisted_circle_spectrum(c: TwistedCircle, n_max: int) -> Spectrum:
    """Truncated twisted-circle spectrum with its exact tail law recorded."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return CircleFamily(c.L, c.m, c.theta).spectrum(n_max)


def torus_spectrum(L1: float, L2: float, m: float = 0.0, n_max: int = 32) -> Spectrum:
    return TorusFamily(L1, L2, m).spectrum(n_max)


def interval_dirichlet_spectrum(T: float, mu: float = 0.0, j_max: int = 64) -> Spectrum:
    return IntervalFamily(T, mu).spectrum(j_max)


# ---------------------------------------------------------------------------
# Graph covers
# ---------------------------------------------------------------------------


@dataclass
class CoverGraph:
    """A base multigraph with an integer edge cocycle and a cover degree N.

    Edges are directed triples (u, v, w); w is the intersection number of the
    edge with the marked cut, so the copy of (u, v) on sheet s connects to
    sheet s + w on the cover.
    """

    n_vertices: int
    edges: list = field(default_factory=list)
    degree: int = 1

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("cover degree N must be >= 1")
        for (u, v, w) in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            if int(w) != w:
                raise ValueError("cocycle weights must be integers")
        if not self._connected():
            raise ValueError("base graph must be connected")

    def _connected(self) -> bool:
        adj = [[] for _ in range(self.n_vertices)]
        for (u, v, _) in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == self.n_vertices

    def base_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        for (u, v, _) in self.edges:
            a[u, v] += 1.0
            a[v, u] += 1.0
        return a

    def base_laplacian(self) -> np.ndarray:
        a = self.base_adjacency()
        return np.diag(a.sum(axis=1)) - a


def cycle_graph(n: int, marked: int = 1) -> CoverGraph:
    """Cycle C_n with ``marked`` of its edges carrying cocycle weight 1."""
    edges = [(i, (i + 1) % n, 1 if i < marked else 0) for i in range(n)]
    return CoverGraph(n, edges)


def cycle_cover_build(g: CoverGraph):
    """Adjacency and Laplacian of the degree-N cyclic cover of ``g``.

    Cover vertex (v, s) has flat index s * n + v. Edges crossing the marked
    cut are rerouted to the next sheet according to their cocycle weight.
    """
    n, N = g.n_vertices, g.degree
    a = np.zeros((n * N, n * N))
    for s in range(N):
        for (u, v, w) in g.edges:
            t = (s + int(w)) % N
            a[s * n + u, t * n + v] += 1.0
            a[t * n + v, s * n + u] += 1.0
    lap = np.diag(a.sum(axis=1)) - a
    return a, lap


def deck_shift_matrix(g: CoverGraph) -> np.ndarray:
    """Permutation of cover vertices advancing every sheet by one."""
    n, N = g.n_vertices, g.degree
    p = np.zeros((n * N, n * N))
    for s in range(N):
        for v in range(n):
            p[((s + 1) % N) * n + v, s * n + v] = 1.0
    return p


def twisted_block_laplacian(g: CoverGraph, theta: float) -> np.ndarray:
    """Base Laplacian with marked edges twisted by the phase e^{i theta w}."""
    n = g.n_vertices
    a = np.zeros((n, n), dtype=complex)
    deg = np.zeros(n)
    for (u, v, w) in g.edges:
        phase = np.exp(1j * theta * w)
        a[u, v] += phase
        a[v, u] += np.conj(phase)
        deg[u] += 1.0
        deg[v] += 1.0
    return np.diag(deg).astype(complex) - a


def twisted_block_decompose(g: CoverGraph):
    """The N twisted base Laplacians L_{theta_p}, theta_p = 2 pi p / N.

    The multiset union of the block spectra equals the cover spectrum.
    """
    return [twisted_block_laplacian(g, 2.0 * math.pi * p / g.degree)
            for p in range(g.degree)]


def hermitian_eigenvalues(mat: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (complex allowed)."""
    m = np.asarray(mat)
    if np.iscomplexobj(m):
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("matrix is not Hermitian")
        return np.linalg.eigvalsh(m)
    vals, _ = sym_eig(m)
    return vals


def cover_spectrum(g: CoverGraph) -> Spectrum:
    _, lap = cycle_cover_build(g)
    return Spectrum(hermitian_eigenvalues(lap))


def block_union_spectrum(g: CoverGraph) -> Spectrum:
    vals = np.concatenate([hermitian_eigenvalues(b) for b in twisted_block_decompose(g)])
    return Spectrum(np.maximum(vals, 0.0))
