"""Calibrated samplers for the invariant plane measure and the Liouville current,
with Monte Carlo estimators for the kinematic (Crofton/Santalo) identities.

Planes meeting the window B_R(o) are parametrized by the signed distance t
from o and the unit direction u of the closest point; the invariant density
is cosh^2(t) dt dOmega(u) up to the constant c0. Geodesics meeting B_R(o) are
unordered boundary pairs with density c1 dOmega dOmega / |xi - eta|^4.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CalibrationError, WindowError
from .lorentz import ORIGIN, as_boundary, dist, mdot
from .rng import Estimate, sharded_moments
from .shapes import GeodesicDisk

CAL_REL_SE = 5e-3


def _unit_vectors(rng, n):
    z = rng.standard_normal((n, 3))
    return z / np.linalg.norm(z, axis=1)[:, None]


def _cosh2_cdf(t):
    return t + 0.5 * np.sinh(2 * t)


def _inverse_cosh2_cdf(y):
    """Solve t + sinh(2t)/2 = y for t >= 0 (vectorized Newton from the right)."""
    t = 0.5 * np.arcsinh(2.0 * y)
    for _ in range(60):
        step = (_cosh2_cdf(t) - y) / (2.0 * np.cosh(t) ** 2)
        t = t - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, t)):
            break
    return t


def check_window(center, radius, window, margin=0.0, what="object"):
    reach = float(dist(ORIGIN, center)) + float(radius)
    if reach > window - margin + 1e-12:
        raise WindowError(f"{what} reaches distance {reach:.4f} > window {window} - margin {margin}")


# -- samplers -----------------------------------------------------------------


@dataclass(frozen=True)
class PlaneSampler:
    """Planes meeting B_R(o) under the invariant measure scaled by c0."""

    radius: float
    c0: float = 1.0
    seed: int = 0

    @property
    def mass(self):
        return self.c0 * 4 * np.pi * _cosh2_cdf(self.radius)

    def sample(self, rng, n):
        f = _cosh2_cdf(self.radius)
        y = (2.0 * rng.random(n) - 1.0) * f
        t = np.sign(y) * _inverse_cosh2_cdf(np.abs(y))
        u = _unit_vectors(rng, n)
        return np.column_stack([np.sinh(t), np.cosh(t)[:, None] * u])


@dataclass(frozen=True)
class GeodesicSampler:
    """Unordered geodesics meeting B_R(o) under the Liouville kernel scaled by c1.

    A geodesic meets B_R(o) iff its endpoint chord exceeds 2 / cosh R, so the
    window restriction is exact: xi is uniform and the chord length c has
    density proportional to c^-3 on [2 / cosh R, 2].
    """

    radius: float
    c1: float = 1.0
    seed: int = 0

    @property
    def mass(self):
        return self.c1 * np.pi**2 * np.sinh(self.radius) ** 2

    def sample(self, rng, n):
        xi = _unit_vectors(rng, n)
        cmin2 = (2.0 / np.cosh(self.radius)) ** -2
        u = rng.random(n)
        c = 1.0 / np.sqrt(cmin2 - u * (cmin2 - 0.25))
        cos_t = 1.0 - 0.5 * c**2
        sin_t = np.sqrt(np.maximum(1.0 - cos_t**2, 0.0))
        a = np.where(np.abs(xi[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
        e1 = a - np.sum(a * xi, axis=1)[:, None] * xi
        e1 /= np.linalg.norm(e1, axis=1)[:, None]
        e2 = np.cross(xi, e1)
        ph = 2 * np.pi * rng.random(n)
        eta = cos_t[:, None] * xi + sin_t[:, None] * (np.cos(ph)[:, None] * e1 + np.sin(ph)[:, None] * e2)
        return as_boundary(xi), as_boundary(eta)


def _seed(sampler, seed):
    return sampler.seed if seed is None else seed


# -- plane-measure estimators ----------------------------------------------------


def crofton_count(curve, sampler, n, seed=None, shards=1, stream="crofton"):
    """Estimate of the nu-integral of #(D(sigma) ∩ c) for a polyline c (H^3 points)."""
    curve = np.ascontiguousarray(np.asarray(curve, dtype=float).reshape(-1, 4))
    if len(curve) < 2:
        return Estimate(0.0, 0.0, int(n))
    ctr = ORIGIN
    check_window(ctr, float(np.max(dist(ctr, curve))), sampler.radius, 0.1, "curve")

    def fn(rng, k):
        v = sampler.sample(rng, k)
        return kernels.polyline_crossings(np.ascontiguousarray(v), curve)

    return sharded_moments(fn, n, _seed(sampler, seed), stream, shards).estimate(scale=sampler.mass)


def crofton_length(curve, sampler, n, seed=None, shards=1):
    """Length of a polyline estimated as (1/pi) * integral of crossing counts over nu."""
    return crofton_count(curve, sampler, n, seed, shards, "crofton_length").scaled(1.0 / np.pi)


def geodesic_segment(a, b, k=2):
    """Polyline of k points along the geodesic segment from a to b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(dist(a, b))
    if d == 0:
        return np.array([a])
    w = (b - np.cosh(d) * a) / np.sinh(d)
    s = np.linspace(0.0, d, k)[:, None]
    return np.cosh(s) * a + np.sinh(s) * w


def unit_segment(length=1.0, center=ORIGIN, direction=(0.0, 0.0, 1.0)):
    """Geodesic segment of given length centered at o (then moved by an isometry if wanted)."""
    from .lorentz import Isometry

    u = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    h = 0.5 * length
    a = np.concatenate([[np.cosh(h)], -np.sinh(h) * u])
    b = np.concatenate([[np.cosh(h)], np.sinh(h) * u])
    seg = geodesic_segment(a, b)
    if center is not ORIGIN:
        T = Isometry.translation_to(center)
        seg = T.apply_point(seg)
    return seg


def circle_polyline(radius, k=4096, normal=(0.0, 0.0, 1.0)):
    """Hyperbolic circle of given radius about o in the plane orthogonal to `normal`."""
    n = np.asarray(normal, dtype=float) / np.linalg.norm(normal)
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - np.dot(a, n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    th = 2 * np.pi * np.arange(k + 1) / k
    dirs = np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2
    return np.column_stack([np.full(k + 1, np.cosh(radius)), np.sinh(radius) * dirs])


@dataclass(frozen=True)
class Calibration:
    c0: float = float("nan")
    c1: float = float("nan")
    se_c0: float = float("nan")
    se_c1: float = float("nan")
    seed: int = 0
    n: int = 0


def calibrate_nu(seed, n, shards=1, length=1.0, center=ORIGIN):
    """c0 such that the nu-integral of crossings with a geodesic segment is pi * length.

    Returns (c0, standard error).
    """
    if n < 10**5:
        raise ValueError("calibration needs n >= 1e5")
    seg = unit_segment(length, center)
    R = float(np.max(dist(ORIGIN, seg))) + 0.1
    raw = crofton_count(seg, PlaneSampler(R, 1.0, seed), n, seed, shards, "calibrate_nu")
    if raw.value <= 0 or raw.stderr / raw.value > CAL_REL_SE:
        raise CalibrationError(f"relative standard error {raw.stderr / max(raw.value, 1e-300):.3%} too large")
    c0 = np.pi * length / raw.value
    return float(c0), float(c0 * raw.stderr / raw.value)


def _disk_frames(v, center):
    """Foot point f of `center` on each plane v, tangent frame (e1, e2) at f, and cosh d."""
    a = mdot(center, v)
    chd = np.sqrt(1.0 + a**2)
    f = (center[None, :] - a[:, None] * v) / chd[:, None]
    basis = np.eye(4)[1:]
    cands = []
    for e in basis:
        u = e[None, :] + mdot(e, f)[:, None] * f - mdot(e, v)[:, None] * v
        cands.append(u)
    cands = np.stack(cands, axis=1)
    norms = mdot(cands, cands)
    i1 = np.argmax(norms, axis=1)
    e1 = np.take_along_axis(cands, i1[:, None, None], axis=1)[:, 0]
    e1 /= np.sqrt(mdot(e1, e1))[:, None]
    rest = cands - mdot(cands, e1[:, None, :])[..., None] * e1[:, None, :]
    nr = mdot(rest, rest)
    nr[np.arange(len(v)), i1] = -1.0
    i2 = np.argmax(nr, axis=1)
    e2 = np.take_along_axis(rest, i2[:, None, None], axis=1)[:, 0]
    e2 /= np.sqrt(mdot(e2, e2))[:, None]
    return f, e1, e2, chd


def _rmax(chd, radius):
    ratio = np.cosh(radius) / chd
    return np.where(ratio > 1.0, np.arccosh(np.maximum(ratio, 1.0)), 0.0)


def disk_areas(v, region, m):
    """area(D(sigma) ∩ region) for each plane by polar quadrature about the foot point."""
    f, e1, e2, chd = _disk_frames(v, region.bounding_center)
    rmax = np.ascontiguousarray(_rmax(chd, region.bounding_radius))
    if hasattr(region, "balls"):
        cs, cr = region.balls()
        if len(cs) == 0:
            return np.zeros(len(v))
        return kernels.disk_union_area(
            np.ascontiguousarray(f), np.ascontiguousarray(e1), np.ascontiguousarray(e2), rmax, cs, cr, m
        )
    return disk_integrals(lambda x, nv: region.contains(x).astype(float), v, f, e1, e2, rmax, m)


def disk_integrals(psi, v, f, e1, e2, rmax, m):
    """Polar midpoint quadrature of psi(x, v) over disks; psi takes (points, normals)."""
    j = (np.arange(m) + 0.5) / m
    th = 2 * np.pi * j
    out = np.zeros(len(v))
    for i in np.flatnonzero(rmax > 0):
        r = j * rmax[i]
        ch, sh = np.cosh(r), np.sinh(r)
        d = np.cos(th)[:, None] * e1[i] + np.sin(th)[:, None] * e2[i]
        x = ch[:, None, None] * f[i] + sh[:, None, None] * d[None, :, :]
        vals = psi(x.reshape(-1, 4), np.broadcast_to(v[i], (m * m, 4))).reshape(m, m)
        out[i] = (rmax[i] / m) * (2 * np.pi / m) * np.sum(sh[:, None] * vals)
    return out


def santalo_volume(region, sampler, n, m=48, seed=None, shards=1):
    """vol(region) estimated as (1 / 2pi) * integral of area(D(sigma) ∩ region) over nu."""
    if region.bounding_radius == 0.0:
        return Estimate(0.0, 0.0, int(n))
    check_window(region.bounding_center, region.bounding_radius, sampler.radius, 0.0, "region")

    def fn(rng, k):
        return disk_areas(sampler.sample(rng, k), region, m)

    est = sharded_moments(fn, n, _seed(sampler, seed), "santalo_volume", shards)
    return est.estimate(scale=sampler.mass / (2 * np.pi))


def santalo_area(patch, sampler, n, seed=None, shards=1):
    """area(patch) estimated as (2 / pi^2) * integral of length(D(sigma) ∩ patch) over nu."""
    if patch.bounding_radius == 0.0:
        return Estimate(0.0, 0.0, int(n))
    check_window(patch.bounding_center, patch.bounding_radius, sampler.radius, 0.0, "patch")

    def fn(rng, k):
        return patch.plane_lengths(sampler.sample(rng, k))

    est = sharded_moments(fn, n, _seed(sampler, seed), "santalo_area", shards)
    return est.estimate(scale=sampler.mass * 2.0 / np.pi**2)


def plane_mass(ball, sampler, n, seed=None, shards=1, stream="plane_mass"):
    """nu-mass of the planes meeting a ball (center, radius)."""
    center, radius = ball
    check_window(center, radius, sampler.radius, 0.0, "ball")

    def fn(rng, k):
        v = sampler.sample(rng, k)
        return (np.abs(mdot(center, v)) < np.sinh(radius)).astype(float)

    return sharded_moments(fn, n, _seed(sampler, seed), stream, shards).estimate(scale=sampler.mass)


# -- volume sampling ------------------------------------------------------------


def _inverse_sinh2_cdf(y, rmax):
    """Solve (sinh(2r)/2 - r)/2 = y for r in [0, rmax] by safeguarded Newton."""
    r = np.full_like(y, 0.5 * rmax)
    lo = np.zeros_like(y)
    hi = np.full_like(y, rmax)
    for _ in range(80):
        g = 0.5 * (0.5 * np.sinh(2 * r) - r) - y
        lo = np.where(g < 0, r, lo)
        hi = np.where(g >= 0, r, hi)
        step = g / np.maximum(np.sinh(r) ** 2, 1e-300)
        r_new = r - step
        bad = (r_new <= lo) | (r_new >= hi)
        r_new = np.where(bad, 0.5 * (lo + hi), r_new)
        if np.all(np.abs(r_new - r) <= 1e-15 * np.maximum(r, 1.0)):
            r = r_new
            break
        r = r_new
    return r


def sample_ball_volume(rng, n, radius, center=None):
    """Points uniform in hyperbolic volume on B_radius(o) (or moved to center)."""
    ymax = 0.5 * (0.5 * np.sinh(2 * radius) - radius)
    r = _inverse_sinh2_cdf(rng.random(n) * ymax, radius)
    u = _unit_vectors(rng, n)
    x = np.column_stack([np.cosh(r), np.sinh(r)[:, None] * u])
    if center is not None:
        from .lorentz import Isometry

        x = Isometry.translation_to(center).apply_point(x)
    return x


def random_tangent_units(rng, x):
    """Uniform unit tangent vectors at the points x."""
    z = np.column_stack([np.zeros(len(x)), rng.standard_normal((len(x), 3))])
    # move from T_o to T_x by the transvection o -> x
    s = x[:, 1:]
    x0 = x[:, :1]
    zs = z[:, 1:]
    dot = np.sum(s * zs, axis=1)[:, None]
    w = np.column_stack([dot[:, 0], zs + s * dot / (1.0 + x0)])
    return w / np.sqrt(mdot(w, w))[:, None]


def coarea_check(psi, sampler, n, m=24, support_radius=1.0, seed=None, shards=1):
    """Both sides of the coarea identity for psi(points, unit plane normals).

    psi must vanish for points outside B_support_radius(o). LHS integrates over
    points and planes through them (the Grassmannian fibre has mass 2pi); RHS
    integrates over planes and points on them.
    """
    check_window(ORIGIN, support_radius, sampler.radius, 0.0, "support")
    vol = np.pi * (np.sinh(2 * support_radius) - 2 * support_radius)
    s = _seed(sampler, seed)

    def lhs_fn(rng, k):
        x = sample_ball_volume(rng, k, support_radius)
        return psi(x, random_tangent_units(rng, x))

    def rhs_fn(rng, k):
        v = sampler.sample(rng, k)
        f, e1, e2, chd = _disk_frames(v, ORIGIN)
        return disk_integrals(psi, v, f, e1, e2, _rmax(chd, support_radius), m)

    lhs = sharded_moments(lhs_fn, n, s, "coarea_lhs", shards).estimate(scale=2 * np.pi * vol)
    rhs = sharded_moments(rhs_fn, n, s, "coarea_rhs", shards).estimate(scale=sampler.mass)
    return lhs, rhs


# -- Liouville current ----------------------------------------------------------------


def liouville_crossings(patch, sampler, n, seed=None, shards=1, stream="liouville"):
    """Estimate of the lambda-integral of #(gamma ∩ patch)."""
    if patch.bounding_radius == 0.0:
        return Estimate(0.0, 0.0, int(n))
    check_window(patch.bounding_center, patch.bounding_radius, sampler.radius, 0.0, "patch")

    def fn(rng, k):
        xi, eta = sampler.sample(rng, k)
        return patch.geodesic_crossings(xi, eta)

    return sharded_moments(fn, n, _seed(sampler, seed), stream, shards).estimate(scale=sampler.mass)


def calibrate_liouville(seed, n, shards=1, radius=1.0, center=ORIGIN, normal=(0.0, 0.0, 0.0, 1.0)):
    """c1 such that the lambda-integral of crossings with a geodesic disk is pi * area.

    Returns (c1, standard error).
    """
    if n < 10**5:
        raise ValueError("calibration needs n >= 1e5")
    disk = GeodesicDisk(center, normal, radius)
    R = float(dist(ORIGIN, disk.center)) + radius + 0.05
    raw = liouville_crossings(disk, GeodesicSampler(R, 1.0, seed), n, seed, shards, "calibrate_liouville")
    if raw.value <= 0 or raw.stderr / raw.value > CAL_REL_SE:
        raise CalibrationError(f"relative standard error {raw.stderr / max(raw.value, 1e-300):.3%} too large")
    c1 = np.pi * disk.area() / raw.value
    return float(c1), float(c1 * raw.stderr / raw.value)


def endpoints_from_tangent(x, v):
    """Boundary points reached from x along -v and +v."""
    return as_boundary(x - v), as_boundary(x + v)


def fiber_crofton_check(patch, F, sampler, n, seed=None, shards=1):
    """Both sides of the fibrewise Crofton identity for F on unordered geodesics.

    LHS = integral of #(gamma ∩ patch) F over lambda; RHS = (1/2) integral over
    the patch and unit directions of F(endpoints) |<v, N>|.
    """
    if patch.bounding_radius == 0.0:
        z = Estimate(0.0, 0.0, int(n))
        return z, z
    check_window(patch.bounding_center, patch.bounding_radius, sampler.radius, 0.0, "patch")
    s = _seed(sampler, seed)

    def lhs_fn(rng, k):
        xi, eta = sampler.sample(rng, k)
        c = patch.geodesic_crossings(xi, eta)
        out = np.zeros(k)
        hit = c > 0
        if np.any(hit):
            out[hit] = c[hit] * F(xi[hit], eta[hit])
        return out

    def rhs_fn(rng, k):
        x, nrm = patch.sample(rng, k)
        v = random_tangent_units(rng, x)
        xi, eta = endpoints_from_tangent(x, v)
        return F(xi, eta) * np.abs(mdot(v, nrm))

    lhs = sharded_moments(lhs_fn, n, s, "fiber_lhs", shards).estimate(scale=sampler.mass)
    rhs = sharded_moments(rhs_fn, n, s, "fiber_rhs", shards).estimate(scale=0.5 * patch.area() * 4 * np.pi)
    return lhs, rhs


def geodesic_mass(ball, sampler, n, seed=None, shards=1, stream="geodesic_mass"):
    """lambda-mass of the geodesics meeting a ball (center, radius)."""
    from .lorentz import dist_point_geodesic

    center, radius = ball
    check_window(center, radius, sampler.radius, 0.0, "ball")

    def fn(rng, k):
        xi, eta = sampler.sample(rng, k)
        return (dist_point_geodesic(center, xi, eta) < radius).astype(float)

    return sharded_moments(fn, n, _seed(sampler, seed), stream, shards).estimate(scale=sampler.mass)
