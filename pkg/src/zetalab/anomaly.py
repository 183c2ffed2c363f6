"""Polyakov anomaly quadrature on the round sphere, the renormalized anomaly
for conical metrics with its log counterterm, the conical scaling identity,
branched-cover conformal weights, the two-point form, and Renyi entropies.

Geometry conventions: points are unit vectors in R^3; the reference metric is
the unit round sphere (Fubini-Study in stereographic coordinates), with
K_g = 1 and the analyst's Laplacian (so the Liouville relation reads
K_{e^{2s}g} = e^{-2s}(-Delta_g s + K_g)). Cone points sit at the poles
+-e3; a single cone point is placed at the north pole, and two-point
divisors must be antipodal, which covers pullbacks under z -> z^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import ExtrapolationResult, extrapolate_basis, gauss_legendre

__all__ = [
    "AnomalyValue",
    "SphereFun",
    "sphere_poly",
    "ConicalSurface",
    "spindle_surface",
    "pullback_surface",
    "shift_surface",
    "anomaly_smooth",
    "anomaly_renormalized",
    "anomaly_regular_conical",
    "conical_scaling_check",
    "cone_radial_distance",
    "log_integral_asymptotics",
    "branched_weights",
    "renyi_entropy",
    "two_point_function",
]

NORTH = np.array([0.0, 0.0, 1.0])
SOUTH = -NORTH


@dataclass
class AnomalyValue:
    value: float
    quadrature_error: float
    epsilon_extrapolation: ExtrapolationResult | None = None
    log_slope: float | None = None  # only for counterterm-free diagnostics


# ---------------------------------------------------------------------------
# Functions on the sphere
# ---------------------------------------------------------------------------


@dataclass
class SphereFun:
    """A smooth function with tangential gradient and spherical Laplacian."""

    val: callable
    grad: callable
    lap: callable

    def __add__(self, other):
        return SphereFun(lambda x: self.val(x) + other.val(x),
                         lambda x: self.grad(x) + other.grad(x),
                         lambda x: self.lap(x) + other.lap(x))

    def __rmul__(self, scalar):
        return SphereFun(lambda x: scalar * self.val(x),
                         lambda x: scalar * self.grad(x),
                         lambda x: scalar * self.lap(x))


def sphere_poly(c0: float = 0.0, lin=(0.0, 0.0, 0.0), quad=None) -> SphereFun:
    """Restriction of c0 + a.x + x^T Q x to the sphere.

    Uses the harmonic decomposition: linear parts are l=1 eigenfunctions
    (Delta = -2), the traceless quadratic part is l=2 (Delta = -6).
    """
    a = np.asarray(lin, dtype=float)
    q = np.zeros((3, 3)) if quad is None else 0.5 * (np.asarray(quad, float)
                                                     + np.asarray(quad, float).T)

    def val(x):
        return c0 + x @ a + np.einsum("...i,ij,...j->...", x, q, x)

    def grad(x):
        g = a + 2.0 * np.einsum("ij,...j->...i", q, x)
        return g - x * np.sum(g * x, axis=-1)[..., None]

    def lap(x):
        return -2.0 * (x @ a) - 6.0 * (np.einsum("...i,ij,...j->...", x, q, x)
                                       - np.trace(q) / 3.0)

    return SphereFun(val, grad, lap)


ZERO_FUN = sphere_poly()


def _dist_to(pole):
    # chordal form 2 arcsin(|x - p|/2): keeps full relative accuracy near the
    # pole, where arccos(x . p) collapses to zero below u ~ 1e-8
    def dist(x):
        chord = np.linalg.norm(x - pole, axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    return dist


def _grad_dist(pole):
    dist = _dist_to(pole)

    def grad(x):
        d = dist(x)
        num = x * np.cos(d)[..., None] - pole
        norm = np.linalg.norm(num, axis=-1)
        return num / np.maximum(norm, 1e-300)[..., None]
    return grad


# ---------------------------------------------------------------------------
# Conical surfaces
# ---------------------------------------------------------------------------


@dataclass
class ConePoint:
    point: np.ndarray
    gamma: float
    phi0: float  # regular potential value at the cone point


@dataclass
class ConicalSurface:
    """Conformal factor sigma for g~ = e^{2 sigma} g against the round sphere.

    ``ktilde`` is the Gauss curvature of g~ away from the divisor, so that
    -Delta_g sigma + K_g = e^{2 sigma} ktilde without numerical
    differentiation. Cone points must be at the poles.
    """

    cones: list
    sigma: callable
    sigma_grad: callable
    ktilde: callable

    def __post_init__(self):
        for cp in self.cones:
            if cp.gamma <= -1:
                raise ValueError("cone exponents must exceed -1")
            if abs(abs(cp.point[2]) - 1.0) > 1e-12:
                raise ValueError("cone points must sit at the poles "
                                 "(rotate the divisor; pairs must be antipodal)")
        if len(self.cones) > 2:
            raise ValueError("at most two (antipodal) cone points are supported")

    def counterterm_coefficient(self) -> float:
        return sum(cp.gamma**2 / (1.0 + cp.gamma) for cp in self.cones)

    def regular_potential(self, cone_idx: int, x):
        """sigma minus the log-singular part at the given cone point."""
        cp = self.cones[cone_idx]
        d = _dist_to(cp.point)(x)
        return self.sigma(x) - cp.gamma * np.log(d)


def spindle_surface(gamma: float) -> ConicalSurface:
    """sigma = gamma log(2 sin(d/2)) from the north pole: a single cone point
    with constant-curvature complement; Delta_g sigma = -gamma/2 exactly."""
    dist = _dist_to(NORTH)
    gdist = _grad_dist(NORTH)

    def sigma(x):
        return gamma * np.log(np.maximum(2.0 * np.sin(0.5 * dist(x)), 1e-300))

    def sigma_grad(x):
        d = dist(x)
        return (0.5 * gamma / np.tan(0.5 * d))[..., None] * gdist(x)

    def ktilde(x):
        return (0.5 * gamma + 1.0) * np.exp(-2.0 * sigma(x))

    return ConicalSurface([ConePoint(NORTH, gamma, 0.0)], sigma, sigma_grad, ktilde)


def pullback_surface(d: int) -> ConicalSurface:
    """Pullback of the round metric under z -> z^d: cones of exponent d-1
    at both poles, with K~ = 1 away from them."""
    if d < 2:
        raise ValueError("need a ramified cover, d >= 2")
    dist = _dist_to(NORTH)
    gdist = _grad_dist(NORTH)
    gamma = float(d - 1)

    t_max = 10.0 ** (280.0 / (2 * d))  # keep t^{2d} finite near the south pole

    def sigma(x):
        u = dist(x)
        t = np.clip(np.tan(0.5 * u), 1e-280, t_max)
        return (gamma * np.log(t) + math.log(d)
                + np.log1p(t**2) - np.log1p(t ** (2 * d)))

    def sigma_grad(x):
        u = dist(x)
        t = np.clip(np.tan(0.5 * u), 1e-280, t_max)
        ds = (gamma / t + 2.0 * t / (1.0 + t**2)
              - 2.0 * d * t ** (2 * d - 1) / (1.0 + t ** (2 * d))) * 0.5 * (1.0 + t**2)
        return ds[..., None] * gdist(x)

    def ktilde(x):
        return np.ones(np.asarray(x).shape[:-1])

    phi0 = gamma * math.log(0.5) + math.log(d)
    cones = [ConePoint(NORTH, gamma, phi0), ConePoint(SOUTH, gamma, phi0)]
    return ConicalSurface(cones, sigma, sigma_grad, ktilde)


def shift_surface(surface: ConicalSurface, h: SphereFun) -> ConicalSurface:
    """The surface of e^{2h} g~: conformal factor sigma + h, same divisor."""
    cones = [ConePoint(cp.point, cp.gamma, cp.phi0 + float(h.val(cp.point)))
             for cp in surface.cones]

    def ktilde(x):
        return np.exp(-2.0 * h.val(x)) * (surface.ktilde(x)
                                          - np.exp(-2.0 * surface.sigma(x)) * h.lap(x))

    return ConicalSurface(cones,
                          lambda x: surface.sigma(x) + h.val(x),
                          lambda x: surface.sigma_grad(x) + h.grad(x),
                          ktilde)


# ---------------------------------------------------------------------------
# Quadrature on the sphere
# ---------------------------------------------------------------------------


def _frame(n_v: int):
    v = 2.0 * math.pi * np.arange(n_v) / n_v
    return v, 2.0 * math.pi / n_v


def _points(u, v):
    # u: (...,) polar angle from north pole, v: (...,) azimuth
    su = np.sin(u)
    return np.stack([su * np.cos(v), su * np.sin(v), np.cos(u)], axis=-1)


def sphere_integral_smooth(f, n_u: int = 120, n_v: int = 64) -> float:
    """Integral of a smooth integrand: Gauss-Legendre in cos(u) x trapezoid."""
    rule = gauss_legendre(n_u, -1.0, 1.0)
    u = np.arccos(rule.nodes)
    v, wv = _frame(n_v)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    vals = f(_points(uu, vv))
    return float(np.sum(rule.weights[:, None] * vals) * wv)


def _log_panels(u_lo, u_hi, per_panel: int = 12, ratio: float = 3.0):
    """Gauss-Legendre nodes on geometric panels of [u_lo, u_hi] (scalar ends)."""
    edges = [u_hi]
    while edges[-1] > u_lo * ratio:
        edges.append(edges[-1] / ratio)
    edges.append(u_lo)
    gl = gauss_legendre(per_panel, -1.0, 1.0)
    nodes, weights = [], []
    for a, b in zip(edges[1:], edges[:-1]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * gl.nodes)
        weights.append(half * gl.weights)
    return np.concatenate(nodes), np.concatenate(weights)


def polar_cap_integral(f, u_inner, u_outer, n_v: int = 64, per_panel: int = 12,
                       from_south: bool = False) -> float:
    """Integral over the annulus u in [u_inner, u_outer] around a pole.

    ``u`` is the polar distance from the chosen pole; ``u_inner`` may be a
    scalar or an array of per-azimuth inner radii (used when the excised
    metric disk is not a round cap). Geometric panels resolve the
    log-singular integrand toward the pole.
    """
    v, wv = _frame(n_v)
    u_inner = np.broadcast_to(np.asarray(u_inner, dtype=float), (n_v,))
    total = 0.0
    for i in range(n_v):
        u, wu = _log_panels(float(u_inner[i]), u_outer, per_panel)
        polar = math.pi - u if from_south else u
        x = _points(polar, np.full_like(u, v[i]))
        total += float(np.sum(wu * np.sin(u) * f(x))) * wv
    return total


def band_integral(f, u_lo: float, u_hi: float, n_u: int = 96, n_v: int = 64) -> float:
    """Integral over the band u in [u_lo, u_hi] (smooth integrand)."""
    rule = gauss_legendre(n_u, u_lo, u_hi)
    v, wv = _frame(n_v)
    uu, vv = np.meshgrid(rule.nodes, v, indexing="ij")
    vals = f(_points(uu, vv))
    su = np.sin(rule.nodes)
    return float(np.sum((rule.weights * su)[:, None] * vals) * wv)


def sphere_integral_conical(f, surface: ConicalSurface, n_u: int = 96, n_v: int = 64,
                            u_floor: float = 1e-10, u_cap: float = math.pi / 3.0) -> float:
    """Integral of an integrand with (integrable) singularities at the cones."""
    has_south = len(surface.cones) == 2
    hi = math.pi - u_cap if has_south else math.pi - 1e-9
    total = band_integral(f, u_cap, hi, n_u, n_v)
    total += polar_cap_integral(f, u_floor, u_cap, n_v)
    if has_south:
        total += polar_cap_integral(f, u_floor, u_cap, n_v, from_south=True)
    return total


# ---------------------------------------------------------------------------
# Radial distances in the singular metric
# ---------------------------------------------------------------------------


def _radial_phi(surface: ConicalSurface, cone_idx: int):
    """phi(u, v) = sigma - gamma log(u) along rays from the cone point."""
    cp = surface.cones[cone_idx]
    from_south = cp.point[2] < 0

    def phi(u, v):
        polar = math.pi - u if from_south else u
        x = _points(polar, v)
        return surface.sigma(x) - cp.gamma * np.log(u)

    return phi


def cone_radial_distance(surface: ConicalSurface, cone_idx: int, radii, v: float = 0.0,
                         n_quad: int = 48):
    """Distance under g~ from the cone point along the radial ray at azimuth v.

    Computed as int_0^delta u^gamma e^{phi(u)} du after the substitution
    u = w^{1/(gamma+1)} that removes the power singularity. Returns the
    distances together with the leading-coefficient fit, which must match
    e^{phi(z0)}/(gamma+1).
    """
    cp = surface.cones[cone_idx]
    gamma = cp.gamma
    phi = _radial_phi(surface, cone_idx)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0) or np.any(radii > 2.0):
        raise ValueError("radii must lie inside the cone chart")
    gl = gauss_legendre(n_quad, 0.0, 1.0)
    out = np.empty_like(radii)
    for i, delta in enumerate(radii):
        w = gl.nodes * delta ** (gamma + 1.0)
        u = w ** (1.0 / (gamma + 1.0))
        vals = np.exp(phi(u, np.full_like(u, v)))
        out[i] = delta ** (gamma + 1.0) / (gamma + 1.0) * float(np.dot(gl.weights, vals))
    lead = out / radii ** (gamma + 1.0) * (gamma + 1.0)
    # extrapolate the leading coefficient to r -> 0; the relative remainder is
    # O(r^2) in a generic chart and O(r^{2 gamma + 2}) in Troyanov coordinates
    orders = sorted({2.0, 2.0 * gamma + 2.0})[:2]
    basis = [lambda x, p=p: x ** (-p) for p in orders]
    fit = extrapolate_basis(1.0 / radii, lead, basis) if len(radii) >= len(basis) + 2 else None
    coeff = fit.value if fit is not None else float(lead[-1])
    return {"distances": out, "leading_coefficient": coeff,
            "expected_coefficient": math.exp(cp.phi0), "per_radius_coefficient": lead}


def _inner_radius(surface: ConicalSurface, cone_idx: int, eps: float, v: float,
                  newton_steps: int = 4) -> float:
    """Invert the radial g~-distance: the round-metric radius of the eps-disk."""
    cp = surface.cones[cone_idx]
    gamma = cp.gamma
    phi = _radial_phi(surface, cone_idx)
    delta = ((gamma + 1.0) * eps * math.exp(-cp.phi0)) ** (1.0 / (gamma + 1.0))
    for _ in range(newton_steps):
        r_val = float(cone_radial_distance(surface, cone_idx, [delta], v)["distances"][0])
        slope = delta**gamma * math.exp(float(phi(np.array([delta]), np.array([v]))[0]))
        delta = min(max(delta - (r_val - eps) / slope, 0.25 * delta), 4.0 * delta)
    return delta


# ---------------------------------------------------------------------------
# Anomaly functionals
# ---------------------------------------------------------------------------


def _anomaly_integrand(sigma_val, sigma_grad, ref_h: SphereFun | None):
    """(|grad_g1 s|^2 + 2 K_g1 s) dV_g1 written against the round metric,
    for s the factor of the target against g1 = e^{2h} g."""
    h = ref_h or ZERO_FUN

    def f(x):
        g = sigma_grad(x) - h.grad(x)
        s = sigma_val(x) - h.val(x)
        return np.sum(g * g, axis=-1) + 2.0 * s * (1.0 - h.lap(x))

    return f


def anomaly_smooth(sigma: SphereFun, ref_h: SphereFun | None = None,
                   n_u: int = 120, n_v: int = 64) -> AnomalyValue:
    """Polyakov anomaly (1/24 pi) int (|grad s|^2 + 2 K s) dV for smooth data.

    ``sigma`` is the factor of the target metric against the round sphere;
    ``ref_h`` rewrites the anomaly against the reference e^{2h} g instead.
    """
    f = _anomaly_integrand(sigma.val, sigma.grad, ref_h)
    coarse = sphere_integral_smooth(f, n_u // 2, n_v // 2)
    fine = sphere_integral_smooth(f, n_u, n_v)
    return AnomalyValue(fine / (24.0 * math.pi), abs(fine - coarse) / (24.0 * math.pi))


def anomaly_renormalized(surface: ConicalSurface, ref_h: SphereFun | None = None,
                         eps_list=None, n_u: int = 96, n_v: int = 64,
                         per_panel: int = 12, include_counterterm: bool = True,
                         u_cap: float = math.pi / 3.0) -> AnomalyValue:
    """Renormalized Polyakov anomaly of a conical metric against e^{2h} g.

    For each eps the anomaly integrand is integrated over the complement of
    the g~-metric disks of radius eps (radii measured in the singular metric
    along each ray), the counterterm 2 pi sum_j gamma_j^2/(1+gamma_j) log(eps)
    is added, and the ladder is extrapolated to eps -> 0.
    """
    if eps_list is None:
        # the slope diagnostic needs a deeper ladder to shed the O(eps^a log eps)
        # transient; the extrapolated limit is happier on a wider one
        eps_list = np.geomspace(1e-3, 1e-5, 6) if not include_counterterm \
            else np.geomspace(3e-2, 1e-3, 6)
    eps_list = np.sort(np.asarray(eps_list, dtype=float))[::-1]
    if len(eps_list) < 3:
        raise ValueError("need at least 3 epsilon values for extrapolation")
    f = _anomaly_integrand(surface.sigma, surface.sigma_grad, ref_h)
    has_south = len(surface.cones) == 2
    hi = math.pi - u_cap if has_south else math.pi - 1e-9
    far = band_integral(f, u_cap, hi, n_u, n_v)
    v_nodes, _ = _frame(n_v)

    gammas = [cp.gamma for cp in surface.cones]
    counter = 2.0 * math.pi * surface.counterterm_coefficient() if include_counterterm else 0.0
    values = np.empty(len(eps_list))
    for k, eps in enumerate(eps_list):
        total = far
        for j, cp in enumerate(surface.cones):
            inner = np.array([_inner_radius(surface, j, eps, v) for v in v_nodes])
            if np.max(inner) >= 0.9 * u_cap:
                raise ValueError(
                    f"eps={eps:g} gives an excised disk of radius {np.max(inner):.3f}, "
                    f"too large for the cone chart (cap {u_cap:.3f})")
            total += polar_cap_integral(f, inner, u_cap, n_v, per_panel,
                                        from_south=cp.point[2] < 0)
        values[k] = total + counter * math.log(eps)

    if not include_counterterm:
        # divergent by design; report the last value and the log-slope data
        slope = np.polyfit(np.log(eps_list), values, 1)[0]
        result = ExtrapolationResult(float(values[-1]), float("inf"), converged=False)
        return AnomalyValue(float(values[-1]) / (24.0 * math.pi), math.inf, result,
                            log_slope=slope / (24.0 * math.pi))

    # remainder model O(eps^{2/(gamma+1)} (1 + log eps)) per cone exponent
    rates = sorted({2.0 / (g + 1.0) for g in gammas})
    basis = []
    for r in rates[:2]:
        basis.append(lambda x, r=r: x ** (-r))
        basis.append(lambda x, r=r: x ** (-r) * np.log(x))
    fit = extrapolate_basis(1.0 / eps_list, values, basis)
    fit.value /= 24.0 * math.pi
    fit.error_estimate /= 24.0 * math.pi
    if not fit.converged:
        raise ArithmeticError(
            f"epsilon extrapolation did not converge (error {fit.error_estimate:.2e})")
    return AnomalyValue(fit.value, fit.error_estimate, fit)


def anomaly_regular_conical(h: SphereFun, surface: ConicalSurface,
                            n_u: int = 96, n_v: int = 64) -> AnomalyValue:
    """Regular Polyakov anomaly of e^{2h} g~ against g~.

    Computed through the smooth-reference rewrite: the integrand is
    |grad_g h|^2 + 2 h (-Delta_g sigma + K_g) with the curvature factor
    supplied analytically as e^{2 sigma} ktilde.
    """

    def f(x):
        g = h.grad(x)
        curv = np.exp(2.0 * surface.sigma(x)) * surface.ktilde(x)
        return np.sum(g * g, axis=-1) + 2.0 * h.val(x) * curv

    coarse = sphere_integral_conical(f, surface, n_u // 2, n_v // 2)
    fine = sphere_integral_conical(f, surface, n_u, n_v)
    return AnomalyValue(fine / (24.0 * math.pi), abs(fine - coarse) / (24.0 * math.pi))


def conical_scaling_check(surface: ConicalSurface, h: SphereFun,
                          eps_list=None, **quad_opts) -> dict:
    """Residual of the conical scaling identity

    RA(e^{2h} g~, g) - RA(g~, g) = RA(e^{2h} g~, g~)
                                   - (1/12) sum_j gamma_j (gamma_j+2)/(gamma_j+1) h(z_j).
    """
    shifted = shift_surface(surface, h)
    ra_shifted = anomaly_renormalized(shifted, eps_list=eps_list, **quad_opts)
    ra_base = anomaly_renormalized(surface, eps_list=eps_list, **quad_opts)
    ra_regular = anomaly_regular_conical(h, surface)
    weight_term = sum(cp.gamma * (cp.gamma + 2.0) / (cp.gamma + 1.0) * float(h.val(cp.point))
                      for cp in surface.cones) / 12.0
    residual = ra_shifted.value - ra_base.value - ra_regular.value + weight_term
    return {
        "residual": float(residual),
        "ra_shifted": ra_shifted,
        "ra_base": ra_base,
        "ra_regular": ra_regular,
        "weight_term": weight_term,
    }


# ---------------------------------------------------------------------------
# Log-divergent integral checks
# ---------------------------------------------------------------------------


def log_integral_asymptotics(surface: ConicalSurface, kind: str, *,
                             h: SphereFun | None = None, q_ratio: float = 2.0,
                             delta_list=None, n_v: int = 64) -> dict:
    """Quadrature checks of the divergent-integral expansions at a cone point.

    kind = "basic":   int_{S \\ B_delta} |grad s|^2 dV + 2 pi g^2 log(delta)
                      + 2 pi g phi(z0) + int_{S \\ B_delta} s Delta s dV -> 0
    kind = "annulus": int over B_{Q delta} \\ B_delta of |grad s|^2 -> 2 pi g^2 log Q
    kind = "green":   int_{S \\ B_delta} (<grad h, grad s> + h Delta s) -> -2 pi g h(z0)

    Disks here are round-metric disks of radius delta. Requires a surface
    whose Laplacian of sigma is available analytically through ktilde.
    """
    cp = surface.cones[0]
    gamma = cp.gamma
    if delta_list is None:
        delta_list = np.geomspace(0.2, 0.003, 6)
    delta_list = np.sort(np.asarray(delta_list, float))[::-1]

    def lap_sigma(x):
        # -Delta sigma + 1 = e^{2 sigma} ktilde
        return 1.0 - np.exp(2.0 * surface.sigma(x)) * surface.ktilde(x)

    def grad_sq(x):
        g = surface.sigma_grad(x)
        return np.sum(g * g, axis=-1)

    if len(surface.cones) != 1:
        raise ValueError("asymptotics checks run on single-cone surfaces")
    cap = math.pi / 3.0

    def split_integral(f, delta):
        return (polar_cap_integral(f, delta, cap, n_v)
                + band_integral(f, cap, math.pi - 1e-9, 96, n_v))

    out_vals = []
    for delta in delta_list:
        if kind == "basic":
            def f1(x):
                return grad_sq(x) + surface.sigma(x) * lap_sigma(x)
            val = split_integral(f1, delta) \
                + 2.0 * math.pi * gamma**2 * math.log(delta) \
                + 2.0 * math.pi * gamma * cp.phi0
        elif kind == "annulus":
            val = polar_cap_integral(grad_sq, delta, min(q_ratio * delta, 3.0), n_v)
        elif kind == "green":
            if h is None:
                raise ValueError("green kind needs a smooth h")

            def f3(x):
                return np.sum(h.grad(x) * surface.sigma_grad(x), axis=-1) \
                    + h.val(x) * lap_sigma(x)
            val = split_integral(f3, delta)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        out_vals.append(val)

    out_vals = np.asarray(out_vals)
    if kind == "basic":
        target = 0.0
    elif kind == "annulus":
        target = 2.0 * math.pi * gamma**2 * math.log(q_ratio)
    else:
        target = -2.0 * math.pi * gamma * float(h.val(cp.point))
    resid = out_vals - target
    # slope of log|resid| vs log delta certifies the stated vanishing rate
    mask = np.abs(resid) > 1e-13
    rate = float(np.polyfit(np.log(delta_list[mask]), np.log(np.abs(resid[mask])), 1)[0]) \
        if np.sum(mask) >= 3 else math.inf
    return {"deltas": delta_list, "values": out_vals, "target": target,
            "residuals": resid, "rate": rate}


# ---------------------------------------------------------------------------
# Branched covers, two-point form, Renyi entropy
# ---------------------------------------------------------------------------


def branched_weights(fibers, c: float, degree: int):
    """Conformal weights (c/12) sum_z (ord - 1/ord) per critical value.

    ``fibers`` lists, for each critical value, the ramification orders of
    its ramified preimages; unramified preimages (order 1) contribute 0 and
    fill the fiber up to the covering degree.
    """
    weights = []
    for orders in fibers:
        orders = list(orders)
        if any(o < 1 or int(o) != o for o in orders):
            raise ValueError("ramification orders must be positive integers")
        pad = degree - sum(orders)
        if pad < 0:
            raise ValueError(f"fiber degree sum {sum(orders)} exceeds the covering degree")
        weights.append(c / 12.0 * sum(o - 1.0 / o for o in orders))
    return weights


def two_point_function(angle: float, delta: float, c_const: float) -> float:
    """CFT two-point form C sin(d/2)^{-2 Delta} on the round sphere."""
    if not 0.0 < angle < math.pi:
        raise ValueError("two-point distance must be in (0, pi)")
    return c_const * math.sin(0.5 * angle) ** (-2.0 * delta)


def renyi_entropy(L: float, ell: float, d: int, c: float, c_const: float) -> dict:
    """tr(rho_A^d) = C (L/pi sin(pi ell/L))^{-(c/6)(d - 1/d)} and the Renyi entropy.

    The exponent is cross-checked against -2 Delta_d from the branched-cover
    weights of the degree-d replica map.
    """
    if not 0.0 < ell < L:
        raise ValueError("interval length must satisfy 0 < ell < L")
    if d < 2 or int(d) != d:
        raise ValueError("Renyi order must be an integer >= 2")
    if c_const <= 0:
        raise ValueError("normalization constant must be positive")
    exponent = -(c / 6.0) * (d - 1.0 / d)
    delta_d = branched_weights([[d]], c, d)[0]
    assert abs(exponent + 2.0 * delta_d) < 1e-15
    trace = c_const * (L / math.pi * math.sin(math.pi * ell / L)) ** exponent
    entropy = math.log(trace) / (1.0 - d)
    return {"trace": trace, "entropy": entropy, "exponent": exponent,
            "weight": delta_d}

