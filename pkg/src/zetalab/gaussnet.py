"""Exact finite-dimensional Gaussian-field laboratory on graphs.

A GaussianNetwork is a multivariate Gaussian with precision matrix
Q = graph Laplacian + m^2 (the graph GFF). The module verifies, in exact
linear algebra, the identities that organize the continuum theory:
Dirichlet-to-Neumann Schur complements, Poisson extensions and energy
identities, the Green-operator difference C_N - C_D, Markov/Bayes
decompositions across separators, reflection positivity, Wick calculus by
pairing enumeration, Wick-ordered interactions with sampling, and the
composition of Gaussian boundary amplitudes under gluing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .numerics import hermite_poly
from .zeta import det_fredholm

__all__ = [
    "GaussianNetwork",
    "network_from_graph",
    "random_connected_graph",
    "mirror_path_network",
    "mirror_grid_network",
    "dn_schur",
    "poisson_extend",
    "dirichlet_energy",
    "one_sided_dn",
    "cn_minus_cd_check",
    "markov_bayes_check",
    "rp_gram",
    "rp_identity_residual",
    "sample_field",
    "wick_product_expectation",
    "wick_power",
    "wick_interaction",
    "exact_exp_quadratic",
    "NetworkPiece",
    "GaussianAmplitude",
    "amplitude_params",
    "closed_log_partition",
    "doubling_trace_residual",
    "REFERENCE_PRECISION",
    "glue_pieces",
    "amplitude_compose",
]


# ---------------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------------


@dataclass
class GaussianNetwork:
    q: np.ndarray
    edges: list = field(default_factory=list)
    mass: float = 1.0
    regions: dict = field(default_factory=dict)
    involution: np.ndarray | None = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if np.max(np.abs(q - q.T)) > 1e-12 * max(np.max(np.abs(q)), 1.0):
            raise ValueError("precision matrix must be symmetric")
        try:
            np.linalg.cholesky(q)
        except np.linalg.LinAlgError as exc:
            raise ValueError("precision matrix must be positive definite") from exc
        self.q = 0.5 * (q + q.T)
        if self.involution is not None:
            th = self.permutation_matrix()
            if np.max(np.abs(th @ self.q @ th - self.q)) > 1e-10:
                raise ValueError("involution does not preserve the precision matrix")
        if "omega+" in self.regions and "omega-" in self.regions:
            plus, minus = self.region("omega+"), self.region("omega-")
            if np.max(np.abs(self.q[np.ix_(plus, minus)])) > 0:
                raise ValueError("the mirror set does not separate omega+ from omega-")

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.q)

    def permutation_matrix(self) -> np.ndarray:
        th = np.zeros((self.n, self.n))
        th[np.arange(self.n), self.involution] = 1.0
        return th

    def region(self, name: str) -> np.ndarray:
        return np.asarray(self.regions[name], dtype=int)


def network_from_graph(n: int, edges, mass: float, regions=None, involution=None) -> GaussianNetwork:
    """Graph GFF precision: Laplacian of the edge list plus mass^2 identity."""
    a = np.zeros((n, n))
    for (u, v) in edges:
        a[u, v] += 1.0
        a[v, u] += 1.0
    q = np.diag(a.sum(axis=1)) - a + mass**2 * np.eye(n)
    return GaussianNetwork(q, edges=list(edges), mass=mass,
                           regions=dict(regions or {}), involution=involution)


def random_connected_graph(n: int, rng, extra_edge_prob: float = 0.15):
    """Random spanning tree plus independent extra edges; always connected."""
    edges = []
    order = rng.permutation(n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((int(order[i]), int(order[j])))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra_edge_prob and (u, v) not in edges and (v, u) not in edges:
                edges.append((u, v))
    return edges


def mirror_path_network(side_len: int, mass: float) -> GaussianNetwork:
    """Path of 2*side_len+1 vertices, reflection-symmetric about the middle."""
    n = 2 * side_len + 1
    edges = [(i, i + 1) for i in range(n - 1)]
    invol = np.arange(n)[::-1].copy()
    regions = {"omega+": np.arange(side_len),
               "sigma": np.array([side_len]),
               "omega-": np.arange(side_len + 1, n)}
    return network_from_graph(n, edges, mass, regions, invol)


def mirror_grid_network(rows: int, half_cols: int, mass: float) -> GaussianNetwork:
    """(rows) x (2*half_cols+1) grid; the middle column is the mirror set."""
    cols = 2 * half_cols + 1
    n = rows * cols

    def idx(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((idx(r, c), idx(r, c + 1)))
            if r + 1 < rows:
                edges.append((idx(r, c), idx(r + 1, c)))
    invol = np.array([idx(r, cols - 1 - c) for r in range(rows) for c in range(cols)])
    regions = {"omega+": np.array([idx(r, c) for r in range(rows) for c in range(half_cols)]),
               "sigma": np.array([idx(r, half_cols) for r in range(rows)]),
               "omega-": np.array([idx(r, c) for r in range(rows)
                                   for c in range(half_cols + 1, cols)])}
    return network_from_graph(n, edges, mass, regions, invol)


# ---------------------------------------------------------------------------
# DN / Poisson / Green identities
# ---------------------------------------------------------------------------


def _split(net: GaussianNetwork, sigma):
    sigma = np.asarray(sigma, dtype=int)
    if sigma.size == 0:
        raise ValueError("boundary set must be nonempty")
    interior = np.setdiff1d(np.arange(net.n), sigma)
    return sigma, interior


def dn_schur(net: GaussianNetwork, sigma) -> np.ndarray:
    """Discrete Dirichlet-to-Neumann operator: the Schur complement of Q onto sigma.

    Its inverse equals the sigma x sigma block of the covariance Q^{-1}.
    """
    sigma, interior = _split(net, sigma)
    q = net.q
    if interior.size == 0:
        return q[np.ix_(sigma, sigma)].copy()
    qii = q[np.ix_(interior, interior)]
    qis = q[np.ix_(interior, sigma)]
    qss = q[np.ix_(sigma, sigma)]
    return qss - qis.T @ np.linalg.solve(qii, qis)


def poisson_extend(net: GaussianNetwork, sigma, boundary_data) -> np.ndarray:
    """Harmonic (Q-annihilated in the interior) extension of boundary data."""
    sigma, interior = _split(net, sigma)
    f = np.asarray(boundary_data, dtype=float)
    u = np.zeros(net.n)
    u[sigma] = f
    if interior.size:
        q = net.q
        rhs = -q[np.ix_(interior, sigma)] @ f
        u[interior] = np.linalg.solve(q[np.ix_(interior, interior)], rhs)
        resid = np.max(np.abs(q[interior, :] @ u))
        if resid > 1e-10 * max(np.max(np.abs(f)), 1.0):
            raise ArithmeticError(f"interior equation residual {resid:.2e}")
    return u


def dirichlet_energy(net: GaussianNetwork, u) -> float:
    return float(u @ net.q @ u)


def one_sided_dn(net: GaussianNetwork, sigma, side) -> np.ndarray:
    """Schur complement of the one-sided piece, with the sigma diagonal split
    so that the two one-sided DN operators add up to the full (jumpy) one."""
    sigma = np.asarray(sigma, dtype=int)
    side = np.asarray(side, dtype=int)
    q = net.q
    deg_into_side = np.array([sum(1 for (u, v) in net.edges
                                  if (u == s and v in side) or (v == s and u in side))
                              for s in sigma], dtype=float)
    l_sigma = np.zeros((sigma.size, sigma.size))
    pos = {int(s): i for i, s in enumerate(sigma)}
    for (u, v) in net.edges:
        if u in pos and v in pos:
            l_sigma[pos[u], pos[u]] += 1.0
            l_sigma[pos[v], pos[v]] += 1.0
            l_sigma[pos[u], pos[v]] -= 1.0
            l_sigma[pos[v], pos[u]] -= 1.0
    d_side = np.diag(deg_into_side) + 0.5 * (net.mass**2 * np.eye(sigma.size) + l_sigma)
    qii = q[np.ix_(side, side)]
    qis = q[np.ix_(side, sigma)]
    return d_side - qis.T @ np.linalg.solve(qii, qis)


def cn_minus_cd_check(net_side: GaussianNetwork, interior, boundary) -> dict:
    """Verify PI DN^{-1} PI^T = C_N - C_D and C_N >= C_D on a one-sided piece.

    C_N is the full inverse of the piece precision (Neumann closure: the
    subgraph Laplacian plus mass term); C_D is the interior-block inverse,
    zero-extended over the boundary.
    """
    interior = np.asarray(interior, dtype=int)
    boundary = np.asarray(boundary, dtype=int)
    if np.intersect1d(interior, boundary).size:
        raise ValueError("interior and boundary must be disjoint")
    q = net_side.q
    deg_iso = [b for b in boundary if np.all(np.abs(np.delete(q[b], b)) < 1e-14)]
    if deg_iso:
        raise ValueError(f"isolated boundary vertices {deg_iso}: Neumann closure ill-defined")
    order = np.concatenate([interior, boundary])
    qo = q[np.ix_(order, order)]
    ni = interior.size
    c_n = np.linalg.inv(qo)
    c_d = np.zeros_like(qo)
    c_d[:ni, :ni] = np.linalg.inv(qo[:ni, :ni])
    dn = dn_schur(net_side, boundary)
    # Poisson operator in the reordered coordinates
    pi = np.zeros((order.size, boundary.size))
    pi[ni:, :] = np.eye(boundary.size)
    pi[:ni, :] = -np.linalg.solve(qo[:ni, :ni], qo[:ni, ni:])
    lhs = pi @ np.linalg.solve(dn, pi.T)
    resid = float(np.max(np.abs(lhs - (c_n - c_d))))
    min_eig = float(np.linalg.eigvalsh(0.5 * ((c_n - c_d) + (c_n - c_d).T))[0])
    return {"identity_residual": resid, "min_eig_cn_minus_cd": min_eig}


def _require_separator(net: GaussianNetwork, sigma) -> None:
    """Raise when removing sigma leaves a Q-path between omega+ and omega-."""
    blocked = set(int(s) for s in sigma)
    plus = [v for v in net.region("omega+") if v not in blocked]
    minus = set(int(v) for v in net.region("omega-")) - blocked
    seen = set(plus)
    stack = list(plus)
    while stack:
        v = stack.pop()
        for w in np.nonzero(net.q[v])[0]:
            w = int(w)
            if w == v or w in blocked or w in seen:
                continue
            seen.add(w)
            stack.append(w)
    if seen & minus:
        raise ValueError("sigma1 does not separate omega+ from omega-")


def markov_bayes_check(net: GaussianNetwork, sigma1, sigma2) -> dict:
    """Markov decomposition and Bayes-consistency residuals.

    (i) covariance between the boundary part and the Dirichlet remainder
    vanishes; (ii) C = PI DN^{-1} PI^T + C_D; (iii) conditioning through
    sigma1 then sigma2 or in the reverse order assembles the same joint
    Gaussian on sigma1 u sigma2; (iv) when sigma1 separates the network,
    the conditional cross-covariance of the two sides is zero.
    """
    s1 = np.asarray(sigma1, dtype=int)
    s2 = np.asarray(sigma2, dtype=int)
    if np.intersect1d(s1, s2).size:
        raise ValueError("separators must be disjoint")
    if "omega+" in net.regions and "omega-" in net.regions:
        _require_separator(net, s1)
    c = net.covariance()
    out = {}

    # (i)+(ii): split along s1
    sigma, interior = _split(net, s1)
    dn = dn_schur(net, sigma)
    pi = np.zeros((net.n, sigma.size))
    pi[sigma, np.arange(sigma.size)] = 1.0
    if interior.size:
        pi[interior, :] = -np.linalg.solve(net.q[np.ix_(interior, interior)],
                                           net.q[np.ix_(interior, sigma)])
    decomp = pi @ np.linalg.solve(dn, pi.T)
    c_d = np.zeros_like(c)
    if interior.size:
        c_d[np.ix_(interior, interior)] = np.linalg.inv(net.q[np.ix_(interior, interior)])
    out["split_residual"] = float(np.max(np.abs(c - (decomp + c_d))))
    # cov(tau phi, phi - PI tau phi) = C[sigma,:] - DN^{-1} PI^T = 0
    out["indep_residual"] = float(np.max(np.abs(c[sigma, :] - np.linalg.solve(dn, pi.T))))

    # (iii): Bayes two-route assembly of the joint law on (s1, s2)
    c11 = c[np.ix_(s1, s1)]
    c22 = c[np.ix_(s2, s2)]
    c21 = c[np.ix_(s2, s1)]
    joint = c[np.ix_(np.concatenate([s1, s2]), np.concatenate([s1, s2]))]

    def assemble(ca, cb, cba):
        m = cba @ np.linalg.inv(ca)
        d = cb - m @ cba.T
        top = np.hstack([ca, (m @ ca).T])
        bot = np.hstack([m @ ca, d + m @ ca @ m.T])
        return np.vstack([top, bot])

    route12 = assemble(c11, c22, c21)
    route21 = assemble(c22, c11, c21.T)
    # route21 is in (s2, s1) block order; permute back to (s1, s2)
    perm = np.concatenate([np.arange(s2.size, s2.size + s1.size), np.arange(s2.size)])
    out["bayes_residual"] = float(max(np.max(np.abs(route12 - joint)),
                                      np.max(np.abs(route21[np.ix_(perm, perm)] - joint))))

    # (iv): Markov property across s1 when it separates omega+ from omega-
    if "omega+" in net.regions and "omega-" in net.regions:
        om_p, om_m = net.region("omega+"), net.region("omega-")
        cond = c_d if interior.size else np.zeros_like(c)
        out["markov_residual"] = float(np.max(np.abs(cond[np.ix_(om_p, om_m)])))
    return out


def rp_gram(net: GaussianNetwork, test_vectors) -> dict:
    """Minimum eigenvalue of the reflection Gram matrix [<Theta f_i, C f_j>].

    Test vectors must be supported on omega+ (support crossing sigma is
    rejected); the graph GFF is reflection positive, so the minimum
    eigenvalue is >= -1e-12 up to roundoff.
    """
    if net.involution is None:
        raise ValueError("network carries no involution")
    om_p = net.region("omega+")
    mask = np.zeros(net.n, dtype=bool)
    mask[om_p] = True
    vecs = []
    for f in test_vectors:
        f = np.asarray(f, dtype=float)
        if f.shape != (net.n,):
            full = np.zeros(net.n)
            full[om_p] = f
            f = full
        if np.any(np.abs(f[~mask]) > 0):
            raise ValueError("test vector support crosses the mirror set")
        vecs.append(f)
    th = net.permutation_matrix()
    c = net.covariance()
    gram = np.array([[vi @ th @ c @ vj for vj in vecs] for vi in vecs])
    gram = 0.5 * (gram + gram.T)
    return {"min_eig": float(np.linalg.eigvalsh(gram)[0]), "gram": gram}


def rp_identity_residual(net: GaussianNetwork, f_side) -> float:
    """Residual of 2 <f, Theta C f> = <f, (C_N - C_D) f> for one-sided f.

    C_N here is the inverse of the *folded* operator: the (omega+, sigma)
    block of Q with the sigma diagonal halved, which is the half-mass
    boundary closure that makes the finite-dimensional identity exact.
    """
    om_p, sig = net.region("omega+"), net.region("sigma")
    f = np.asarray(f_side, dtype=float)
    full = np.zeros(net.n)
    full[om_p] = f
    th = net.permutation_matrix()
    lhs = 2.0 * full @ th @ net.covariance() @ full
    side = np.concatenate([om_p, sig])
    q_fold = net.q[np.ix_(side, side)].copy()
    ns = om_p.size
    q_fold[ns:, ns:] = 0.5 * net.q[np.ix_(sig, sig)]
    c_n = np.linalg.inv(q_fold)
    c_d = np.zeros_like(q_fold)
    c_d[:ns, :ns] = np.linalg.inv(net.q[np.ix_(om_p, om_p)])
    fs = np.concatenate([f, np.zeros(sig.size)])
    rhs = fs @ (c_n - c_d) @ fs
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Wick calculus
# ---------------------------------------------------------------------------


def wick_product_expectation(cov, groups) -> float:
    """E[ :X_1...: :X_2...: ... ] by Feynman pairing enumeration.

    ``groups`` is a list of tuples of variable indices into the covariance
    matrix; each group is Wick ordered, so pairings inside a group are
    excluded. Plain moments are singleton groups. Odd total degree gives 0;
    total degree is capped at 12.
    """
    cov = np.asarray(cov, dtype=float)
    flat = [(gi, v) for gi, grp in enumerate(groups) for v in grp]
    if len(flat) > 12:
        raise ValueError("total degree capped at 12 for pairing enumeration")
    if len(flat) % 2 == 1:
        return 0.0

    def rec(rem):
        if not rem:
            return 1.0
        (g0, v0) = rem[0]
        rest = rem[1:]
        total = 0.0
        for i, (g1, v1) in enumerate(rest):
            if g1 == g0:
                continue
            total += cov[v0, v1] * rec(rest[:i] + rest[i + 1:])
        return total

    return float(rec(flat))


def wick_power(x, k: int, variance: float):
    """Wick-ordered power :x^k: = c^{k/2} h_k(x / sqrt(c)) with c the variance."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    root = math.sqrt(variance)
    return variance ** (k / 2.0) * hermite_poly(k, np.asarray(x) / root)


def sample_field(net: GaussianNetwork, n_samples: int, seed: int) -> np.ndarray:
    """Exact Gaussian samples with covariance Q^{-1} via the precision Cholesky."""
    chol = np.linalg.cholesky(net.q)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, net.n))
    return solve_triangular(chol.T, z.T, lower=False).T


def wick_interaction(net: GaussianNetwork, coeffs, n_samples: int, seed: int) -> dict:
    """Statistics of S = sum_x sum_k coeffs[k] :phi_x^k: and of exp(-S).

    Wick variance at x is the covariance diagonal (Q^{-1})_xx. For pure Wick
    monomials E[S] = 0; means and standard errors are reported from i.i.d.
    samples. Divergent exp(-S) statistics are flagged.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size and abs(coeffs[0]) > 0:
        raise ValueError("constant term is not a Wick monomial")
    phi = sample_field(net, n_samples, seed)
    var = np.diag(net.covariance())
    s = np.zeros(n_samples)
    for k in range(1, coeffs.size):
        if coeffs[k] == 0.0:
            continue
        for x in range(net.n):
            s += coeffs[k] * wick_power(phi[:, x], k, var[x])
    exp_s = np.exp(-s)
    out = {
        "mean_s": float(np.mean(s)),
        "se_s": float(np.std(s, ddof=1) / math.sqrt(n_samples)),
        "mean_exp": float(np.mean(exp_s)),
        "se_exp": float(np.std(exp_s, ddof=1) / math.sqrt(n_samples)),
        "n_samples": n_samples,
    }
    if not np.isfinite(out["mean_exp"]) or out["se_exp"] > 10 * abs(out["mean_exp"]):
        out["flag"] = "divergent exp(-S) statistics"
    return out


def exact_exp_quadratic(net: GaussianNetwork, a: float) -> float:
    """Closed form E[exp(-a sum_x :phi_x^2:)] = det_F(1 + 2aC)^{-1/2} e^{a tr C}."""
    c = net.covariance()
    lam = np.linalg.eigvalsh(2.0 * a * c)
    return det_fredholm(lam) ** (-0.5) * math.exp(a * float(np.trace(c)))


# ---------------------------------------------------------------------------
# Gaussian amplitudes and gluing
# ---------------------------------------------------------------------------

REFERENCE_PRECISION = 2.0  # boundary reference measure N(0, (2 I)^{-1}), fixed


@dataclass
class NetworkPiece:
    """A network cobordism: vertices, edges, mass, and named boundary sets.

    Boundary vertices carry half the mass term (the interface is shared by
    the two sides of a gluing), mirroring the split of the on-site potential
    in the chain transfer kernel. Edges belong wholly to their piece.
    """

    n_vertices: int
    edges: list
    mass: float
    boundaries: dict

    def boundary_vector(self) -> np.ndarray:
        out = []
        for name in self.boundaries:
            out.extend(int(v) for v in self.boundaries[name])
        if len(set(out)) != len(out):
            raise ValueError("boundary sets must be disjoint")
        return np.asarray(out, dtype=int)

    def precision(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        for (u, v) in self.edges:
            a[u, v] += 1.0
            a[v, u] += 1.0
        q = np.diag(a.sum(axis=1)) - a + self.mass**2 * np.eye(self.n_vertices)
        for b in self.boundary_vector():
            q[b, b] -= 0.5 * self.mass**2
        return q


@dataclass
class GaussianAmplitude:
    """Boundary kernel N * exp(-1/2 f^T S f) relative to the reference measure.

    The half-density convention divides the raw Gaussian integral by
    sqrt(reference density) in each boundary argument, which makes
    composition against the reference measure exact.
    """

    quad: np.ndarray
    log_norm: float
    block_names: list
    block_sizes: list

    def log_value(self, f) -> float:
        f = np.asarray(f, dtype=float)
        return self.log_norm - 0.5 * float(f @ self.quad @ f)


def amplitude_params(piece: NetworkPiece) -> GaussianAmplitude:
    """Integrate out the interior: Schur quadratic form and normalization."""
    q = piece.precision()
    bnd = piece.boundary_vector()
    interior = np.setdiff1d(np.arange(piece.n_vertices), bnd)
    if interior.size:
        qii = q[np.ix_(interior, interior)]
        qib = q[np.ix_(interior, bnd)]
        schur = q[np.ix_(bnd, bnd)] - qib.T @ np.linalg.solve(qii, qib)
        sign, logdet = np.linalg.slogdet(qii)
        if sign <= 0:
            raise ArithmeticError("interior block is not positive definite")
        log_norm = 0.5 * interior.size * math.log(2.0 * math.pi) - 0.5 * logdet
    else:
        schur = q[np.ix_(bnd, bnd)].copy()
        log_norm = 0.0
    k = bnd.size
    # half-density against the reference Gaussian rho(f) ~ N(0, r^{-1} I)
    r = REFERENCE_PRECISION
    quad = schur - 0.5 * r * np.eye(k)
    log_norm -= 0.25 * k * math.log(r / (2.0 * math.pi))
    return GaussianAmplitude(quad, log_norm,
                             list(piece.boundaries), [len(piece.boundaries[b]) for b in piece.boundaries])


def glue_pieces(p1: NetworkPiece, iface1: str, p2: NetworkPiece, iface2: str) -> NetworkPiece:
    """Glue two pieces along named interfaces (matched in listed order)."""
    b1 = list(p1.boundaries[iface1])
    b2 = list(p2.boundaries[iface2])
    if len(b1) != len(b2):
        raise ValueError("mismatched interface sizes")
    if abs(p1.mass - p2.mass) > 1e-14:
        raise ValueError("pieces must share the mass parameter")
    # vertices of p2 are appended, with the glued interface identified to b1
    remap = {}
    next_id = p1.n_vertices
    for v in range(p2.n_vertices):
        if v in b2:
            remap[v] = b1[b2.index(v)]
        else:
            remap[v] = next_id
            next_id += 1
    edges = list(p1.edges) + [(remap[u], remap[v]) for (u, v) in p2.edges]
    boundaries = {name: list(p1.boundaries[name]) for name in p1.boundaries if name != iface1}
    for name in p2.boundaries:
        if name != iface2:
            boundaries[name] = [remap[v] for v in p2.boundaries[name]]
    return NetworkPiece(next_id, edges, p1.mass, boundaries)


def _compose_amplitudes(a2: GaussianAmplitude, a1: GaussianAmplitude,
                        k_mid: int) -> GaussianAmplitude:
    """Integrate the shared boundary block against the reference measure.

    a1's boundary vector is ordered (mid, in); a2's is (out, mid); the
    result is ordered (out, in).
    """
    r = REFERENCE_PRECISION
    k_out = a2.quad.shape[0] - k_mid
    k_in = a1.quad.shape[0] - k_mid
    # combined exponent over (out, mid, in)
    big = np.zeros((k_out + k_mid + k_in,) * 2)
    big[:k_out + k_mid, :k_out + k_mid] += a2.quad
    big[k_out:, k_out:] += a1.quad
    big[k_out:k_out + k_mid, k_out:k_out + k_mid] += r * np.eye(k_mid)
    mid = slice(k_out, k_out + k_mid)
    rest = np.r_[0:k_out, k_out + k_mid:k_out + k_mid + k_in]
    m = big[mid, mid]
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise ArithmeticError("interface precision is not positive definite")
    cross = big[np.ix_(rest, np.arange(k_out, k_out + k_mid))]
    quad = big[np.ix_(rest, rest)] - cross @ np.linalg.solve(m, cross.T)
    log_norm = (a1.log_norm + a2.log_norm
                + 0.5 * k_mid * math.log(r / (2.0 * math.pi))  # reference density norm
                + 0.5 * k_mid * math.log(2.0 * math.pi) - 0.5 * logdet)
    return GaussianAmplitude(quad, log_norm, ["out", "in"], [k_out, k_in])


def closed_log_partition(piece: NetworkPiece) -> float:
    """log of the Gaussian integral over a piece with no boundary left."""
    q = piece.precision()
    sign, logdet = np.linalg.slogdet(q)
    if sign <= 0:
        raise ArithmeticError("closed network precision is not positive definite")
    return 0.5 * piece.n_vertices * math.log(2.0 * math.pi) - 0.5 * logdet


def doubling_trace_residual(piece: NetworkPiece, iface: str) -> float:
    """Residual of Z(double) = integral of |amplitude|^2 against the reference.

    Gluing a piece to its mirror image along ``iface`` closes the network;
    its partition function must equal int |A~(f)|^2 dmu_ref(f), which for the
    half-density amplitude is the plain Gaussian integral of A(f)^2 df.
    """
    amp = amplitude_params(NetworkPiece(piece.n_vertices, piece.edges, piece.mass,
                                        {iface: piece.boundaries[iface]}))
    double = glue_pieces(piece, iface, piece, iface)
    log_z = closed_log_partition(double)
    r = REFERENCE_PRECISION
    k = amp.quad.shape[0]
    schur = amp.quad + 0.5 * r * np.eye(k)
    raw_log_norm = amp.log_norm + 0.25 * k * math.log(r / (2.0 * math.pi))
    sign, logdet = np.linalg.slogdet(2.0 * schur)
    if sign <= 0:
        raise ArithmeticError("boundary kernel is not square integrable")
    log_int = 2.0 * raw_log_norm + 0.5 * k * math.log(2.0 * math.pi) - 0.5 * logdet
    return float(abs(log_z - log_int))


def amplitude_compose(outer: NetworkPiece, outer_out: str, outer_mid: str,
                      inner: NetworkPiece, inner_mid: str, inner_in: str) -> dict:
    """Residuals between composed boundary kernels and the glued piece's kernel.

    ``inner`` carries boundaries (inner_mid, inner_in) and ``outer`` carries
    (outer_out, outer_mid); the mid interfaces are glued. The composition
    integrates the mid block against the reference measure and must equal
    the amplitude of the glued network exactly (Chapman-Kolmogorov).
    """
    for piece, names in ((outer, (outer_out, outer_mid)), (inner, (inner_mid, inner_in))):
        for name in names:
            if name not in piece.boundaries:
                raise ValueError(f"unknown interface {name!r}")
    glued = glue_pieces(outer, outer_mid, inner, inner_mid)
    # order the boundary blocks as (out, mid) and (mid, in)
    a2 = amplitude_params(NetworkPiece(outer.n_vertices, outer.edges, outer.mass,
                                       {outer_out: outer.boundaries[outer_out],
                                        outer_mid: outer.boundaries[outer_mid]}))
    a1 = amplitude_params(NetworkPiece(inner.n_vertices, inner.edges, inner.mass,
                                       {inner_mid: inner.boundaries[inner_mid],
                                        inner_in: inner.boundaries[inner_in]}))
    k_mid = len(inner.boundaries[inner_mid])
    composed = _compose_amplitudes(a2, a1, k_mid)
    target = amplitude_params(NetworkPiece(glued.n_vertices, glued.edges, glued.mass,
                                           {outer_out: glued.boundaries[outer_out],
                                            inner_in: glued.boundaries[inner_in]}))
    quad_resid = float(np.max(np.abs(composed.quad - target.quad)))
    norm_resid = float(abs(composed.log_norm - target.log_norm))
    return {"quad_residual": quad_resid, "norm_residual": norm_resid,
            "composed": composed, "target": target}
