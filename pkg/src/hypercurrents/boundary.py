"""Round circles on the sphere at infinity, linking with geodesics, incidence.

A round circle is stored as the unit spacelike normal v of the totally
geodesic plane D = {x : <x, v> = 0} that it bounds. A geodesic with endpoints
xi, eta links the circle iff <xi, v> and <eta, v> have opposite signs.
"""

import numpy as np

from .errors import DegenerateError, TangencyError
from .lorentz import as_boundary, as_normal, as_point, mdot

TAU_DEG = 1e-9


class RoundCircle:
    """A round circle on S^2, equivalently the plane with normal v (sign-free)."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = as_normal(v)

    def __repr__(self):
        return f"RoundCircle({self.v.tolist()})"

    def __eq__(self, other):
        return isinstance(other, RoundCircle) and np.max(np.abs(self.v - other.v)) <= 1e-10

    def __hash__(self):
        return hash(tuple(np.round(self.v, 8)))

    @classmethod
    def at(cls, t, u):
        """Plane at signed distance t from o whose closest point lies in direction u."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        return cls(np.concatenate([[np.sinh(t)], np.cosh(t) * u]))

    @classmethod
    def through(cls, x, n):
        """Plane through the point x with unit tangent normal n."""
        return cls(n)

    def transformed(self, A):
        return RoundCircle(A.apply_normal(self.v))

    def contains_points(self, x, tol=1e-10):
        return np.abs(mdot(x, self.v)) <= tol

    def spherical(self):
        """(center direction c, angular radius theta) of the circle on S^2."""
        s = self.v[1:]
        r = np.linalg.norm(s)
        return s / r, float(np.arccos(np.clip(self.v[0] / r, -1.0, 1.0)))

    def sample(self, n):
        """n equally spaced points of the circle, as unit 3-vectors."""
        c, th = self.spherical()
        e1, e2 = _orthonormal_pair(c)
        phi = 2 * np.pi * np.arange(n) / n
        ring = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
        return np.cos(th) * c + np.sin(th) * ring


BoundaryPair = tuple


def _orthonormal_pair(c):
    a = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - np.dot(a, c) * c
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(c, e1)


def circle_through(x1, x2, x3):
    """The round circle through three boundary points."""
    rows = as_boundary(np.array([x1, x2, x3], dtype=float))
    m = rows * np.array([-1.0, 1.0, 1.0, 1.0])
    _, s, vt = np.linalg.svd(m)
    if s[2] <= 1e-10 * s[0]:
        raise DegenerateError("boundary points are not in general position")
    return RoundCircle(vt[3])


def linking(v, xi, eta):
    """Linking numbers and degeneracy flags; broadcasts over leading axes."""
    v = np.asarray(v.v if isinstance(v, RoundCircle) else v, dtype=float)
    s1 = mdot(xi, v)
    s2 = mdot(eta, v)
    degenerate = (np.abs(s1) <= TAU_DEG) | (np.abs(s2) <= TAU_DEG)
    lk = ((s1 * s2) < 0) & ~degenerate
    return lk.astype(np.int64), degenerate


def intersection_points(v, xi, eta):
    """Intersection points of geodesics (xi, eta) with planes v where linked.

    Returns (points, linked); points are NaN where not linked.
    """
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    s1 = mdot(xi, v)
    s2 = mdot(eta, v)
    lk, _ = linking(v, xi, eta)
    linked = lk.astype(bool)
    c = mdot(xi, eta)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.sqrt(1.0 / (2.0 * c * s1 * s2))
        k = np.where(s2 - s1 > 0, k, -k)
        x = (k * s2)[..., None] * xi - (k * s1)[..., None] * eta
    return np.where(linked[..., None], x, np.nan), linked


def geodesic_plane_intersection(gamma, sigma):
    """The point where the geodesic crosses the plane of sigma, or None."""
    v = sigma.v if isinstance(sigma, RoundCircle) else as_normal(sigma)
    s1 = mdot(gamma.xi, v)
    s2 = mdot(gamma.eta, v)
    if abs(s1) <= TAU_DEG and abs(s2) <= TAU_DEG:
        raise TangencyError("geodesic lies in the plane")
    x, linked = intersection_points(v, gamma.xi, gamma.eta)
    if not linked:
        return None
    return as_point(x)


def dist_point_plane(x, sigma):
    v = sigma.v if isinstance(sigma, RoundCircle) else np.asarray(sigma, dtype=float)
    return np.arcsinh(np.abs(mdot(x, v)))


def _sphere_dist(a, b):
    # great-circle distance via atan2 for accuracy at small angles
    cr = np.linalg.norm(np.cross(a[:, None, :], b[None, :, :]), axis=-1)
    dt = a @ b.T
    return np.arctan2(cr, dt)


def hausdorff_distance(s1, s2, n=256):
    """Sampled two-sided Hausdorff distance between boundary circles (round metric)."""
    if n < 16:
        raise ValueError("n must be at least 16")
    a, b = sorted([s1, s2], key=lambda s: tuple(s.v))
    d = _sphere_dist(a.sample(n), b.sample(n))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
