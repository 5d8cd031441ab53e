"""Regions and surface patches used by the integral-geometry estimators.

A region exposes a bounding ball, a point-membership test and (when it is a
union of balls) the ball list for the compiled quadrature. A patch exposes
its exact area, per-plane intersection lengths, per-geodesic and
per-segment crossing counts, and area-uniform point sampling.
"""

import numpy as np

from . import boundary
from .errors import DegenerateError
from .lorentz import ORIGIN, Isometry, as_point, dist, mdot

# -- regions ------------------------------------------------------------------


class BallRegion:
    """Closed hyperbolic ball."""

    def __init__(self, center=ORIGIN, radius=1.0):
        self.center = as_point(center)
        self.radius = float(radius)

    @property
    def bounding_center(self):
        return self.center

    @property
    def bounding_radius(self):
        return self.radius

    def balls(self):
        return self.center[None, :], np.array([np.cosh(self.radius)])

    def contains(self, x):
        return -mdot(x, self.center) <= np.cosh(self.radius)

    def volume(self):
        return np.pi * (np.sinh(2 * self.radius) - 2 * self.radius)

    def transformed(self, A):
        return BallRegion(A.apply_point(self.center), self.radius)


class BallUnion:
    """Union of pairwise disjoint balls."""

    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise ValueError("use EmptyRegion for an empty union")
        cs = np.array([p.center for p in self.parts])
        # bounding ball about the first center
        self._c = self.parts[0].center
        self._r = float(max(dist(self._c, p.center) + p.radius for p in self.parts))
        self._cs = cs

    @property
    def bounding_center(self):
        return self._c

    @property
    def bounding_radius(self):
        return self._r

    def balls(self):
        return self._cs, np.array([np.cosh(p.radius) for p in self.parts])

    def contains(self, x):
        return np.any([p.contains(x) for p in self.parts], axis=0)

    def volume(self):
        return float(sum(p.volume() for p in self.parts))


class EmptyRegion:
    bounding_center = ORIGIN
    bounding_radius = 0.0

    def balls(self):
        return np.zeros((0, 4)), np.zeros(0)

    def contains(self, x):
        return np.zeros(np.shape(x)[:-1], dtype=bool)

    def volume(self):
        return 0.0


# -- helpers ------------------------------------------------------------------


def plane_normal_through(p, q, r):
    """Unit normal of the plane spanned by three points (sign not canonicalized)."""
    m = np.array([p, q, r]) * np.array([-1.0, 1.0, 1.0, 1.0])
    _, s, vt = np.linalg.svd(m)
    if s[2] <= 1e-12 * s[0]:
        raise DegenerateError("collinear points")
    v = vt[3]
    return v / np.sqrt(mdot(v, v))


def _segment_plane_points(a, b, v):
    """Points where segments [a, b] cross the plane v, with a crossing mask."""
    sa = mdot(a, v)
    sb = mdot(b, v)
    cross = (sa < 0) != (sb < 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        x = (sb[..., None] * a - sa[..., None] * b) / (sb - sa)[..., None]
        x = x / np.sqrt(-mdot(x, x))[..., None]
        x = np.where((x[..., 0] < 0)[..., None], -x, x)
    return x, cross


def to_equator(v):
    """Isometry taking the plane with normal v to the plane x3 = 0."""
    a = mdot(ORIGIN, v)
    f = as_point(ORIGIN - a * v)
    T = Isometry.translation_to(f).inverse()
    w = T.apply_tangent(v)
    n = w[1:] / np.linalg.norm(w[1:])
    e = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = e - np.dot(e, n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    R = np.eye(4)
    R[1:, 1:] = np.array([e1, e2, n])
    return Isometry(R, check=False) @ T


def _klein_triangle_sample(rng, k, n):
    """Area-uniform points in an H^2 triangle with Klein-model vertices k (3, 2)."""
    lam = 1.0 - np.max(np.sum(k**2, axis=1))
    peak = lam ** -1.5
    out = np.empty((0, 2))
    while len(out) < n:
        m = max(2 * (n - len(out)), 16)
        a, b = rng.random(m), rng.random(m)
        flip = a + b > 1
        a, b = np.where(flip, 1 - a, a), np.where(flip, 1 - b, b)
        p = k[0] + a[:, None] * (k[1] - k[0]) + b[:, None] * (k[2] - k[0])
        dens = (1.0 - np.sum(p**2, axis=1)) ** -1.5
        out = np.vstack([out, p[rng.random(m) * peak < dens]])
    return out[:n]


# -- patches ------------------------------------------------------------------


class GeodesicDisk:
    """Totally geodesic disk: center c, plane normal w (tangent at c), radius rho."""

    def __init__(self, center=ORIGIN, normal=(0.0, 0.0, 0.0, 1.0), radius=1.0):
        self.center = as_point(center)
        w = np.asarray(normal, dtype=float)
        w = w + mdot(self.center, w) * self.center
        self.normal = w / np.sqrt(mdot(w, w))
        self.radius = float(radius)

    @property
    def bounding_center(self):
        return self.center

    @property
    def bounding_radius(self):
        return self.radius

    def area(self):
        return 2 * np.pi * (np.cosh(self.radius) - 1.0)

    def transformed(self, A):
        return GeodesicDisk(A.apply_point(self.center), A.apply_tangent(self.normal), self.radius)

    def _inside(self, x):
        return -mdot(x, self.center) < np.cosh(self.radius)

    def plane_lengths(self, v):
        vw = mdot(v, self.normal)
        cv = mdot(self.center, v)
        with np.errstate(invalid="ignore", divide="ignore"):
            chd = np.sqrt(1.0 + cv**2 / (1.0 - vw**2))
            ratio = np.cosh(self.radius) / chd
            out = 2.0 * np.arccosh(np.maximum(ratio, 1.0))
        return np.where((np.abs(vw) < 1.0) & (ratio > 1.0), out, 0.0)

    def geodesic_crossings(self, xi, eta):
        x, linked = boundary.intersection_points(self.normal, xi, eta)
        return (linked & self._inside(np.nan_to_num(x, nan=1e300))).astype(np.int64)

    def segment_crossings(self, a, b):
        x, cross = _segment_plane_points(a, b, self.normal)
        return (cross & self._inside(np.nan_to_num(x, nan=1e300))).astype(np.int64)

    def sample(self, rng, n):
        """Area-uniform points and the unit normal at each."""
        u = rng.random(n)
        r = np.arccosh(1.0 + u * (np.cosh(self.radius) - 1.0))
        th = 2 * np.pi * rng.random(n)
        A = to_equator(self.normal)
        B = A.inverse()
        c0 = A.apply_point(self.center)
        # disk in the equatorial plane about c0: move o to c0 within that plane
        T = Isometry.translation_to(c0)
        local = np.stack(
            [np.cosh(r), np.sinh(r) * np.cos(th), np.sinh(r) * np.sin(th), np.zeros(n)], axis=1
        )
        pts = B.apply_point(T.apply_point(local))
        # a plane's unit normal is the same 4-vector at every one of its points
        return pts, np.broadcast_to(self.normal, pts.shape).copy()


class TriangulatedPatch:
    """Union of geodesic triangles given by hyperboloid vertices and index triples."""

    def __init__(self, vertices, triangles):
        self.vertices = as_point(np.asarray(vertices, dtype=float))
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        tri = self.vertices[self.triangles]
        self._tri = tri
        self.normals = np.array([plane_normal_through(*t) for t in tri])
        # coordinates of x in span(P, Q, R) via least squares
        self._pinv = np.array([np.linalg.pinv(t.T) for t in tri])
        self._areas = np.array([_triangle_area(*t) for t in tri])
        c = self.vertices.mean(axis=0)
        self._c = as_point(c)
        self._r = float(np.max(dist(self._c, self.vertices)))

    @classmethod
    def disk(cls, center=ORIGIN, normal=(0.0, 0.0, 0.0, 1.0), radius=1.0, k=64):
        """Regular geodesic k-gon inscribed in the disk, as a triangle fan."""
        d = GeodesicDisk(center, normal, radius)
        B = to_equator(d.normal).inverse()
        c0 = to_equator(d.normal).apply_point(d.center)
        T = Isometry.translation_to(c0)
        th = 2 * np.pi * np.arange(k) / k
        ring = np.stack(
            [np.full(k, np.cosh(radius)), np.sinh(radius) * np.cos(th),
             np.sinh(radius) * np.sin(th), np.zeros(k)], axis=1)
        verts = B.apply_point(T.apply_point(np.vstack([[1.0, 0, 0, 0], ring])))
        tris = [(0, 1 + i, 1 + (i + 1) % k) for i in range(k)]
        return cls(verts, tris)

    @property
    def bounding_center(self):
        return self._c

    @property
    def bounding_radius(self):
        return self._r

    def area(self):
        return float(self._areas.sum())

    def transformed(self, A):
        return TriangulatedPatch(A.apply_point(self.vertices), self.triangles)

    def _in_triangle(self, j, x):
        coef = x @ self._pinv[j].T
        return np.all(coef >= 0, axis=-1)

    def plane_lengths(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros(len(v))
        for t in self._tri:
            pts, crosses = [], []
            for a, b in ((0, 1), (1, 2), (2, 0)):
                x, c = _segment_plane_points(t[a], t[b], v)
                pts.append(x)
                crosses.append(c)
            pts = np.stack(pts, axis=1)
            crosses = np.stack(crosses, axis=1)
            two = crosses.sum(axis=1) == 2
            if not np.any(two):
                continue
            idx = np.argsort(~crosses[two], axis=1, kind="stable")[:, :2]
            sel = pts[two]
            p1 = np.take_along_axis(sel, idx[:, :1, None], axis=1)[:, 0]
            p2 = np.take_along_axis(sel, idx[:, 1:2, None], axis=1)[:, 0]
            out[two] += dist(p1, p2)
        return out

    def geodesic_crossings(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-1], dtype=np.int64)
        for j, w in enumerate(self.normals):
            x, linked = boundary.intersection_points(w, xi, eta)
            hit = linked & self._in_triangle(j, np.nan_to_num(x))
            out += hit
        return out

    def segment_crossings(self, a, b):
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape[:-1], dtype=np.int64)
        for j, w in enumerate(self.normals):
            x, cross = _segment_plane_points(a, b, w)
            out += cross & self._in_triangle(j, np.nan_to_num(x))
        return out

    def sample(self, rng, n):
        p = self._areas / self._areas.sum()
        which = rng.choice(len(p), size=n, p=p)
        pts = np.empty((n, 4))
        nrm = np.empty((n, 4))
        for j in range(len(p)):
            sel = np.flatnonzero(which == j)
            if not sel.size:
                continue
            A = to_equator(self.normals[j])
            loc = A.apply_point(self._tri[j])
            k = loc[:, 1:3] / loc[:, :1]
            q = _klein_triangle_sample(rng, k, sel.size)
            x0 = 1.0 / np.sqrt(1.0 - np.sum(q**2, axis=1))
            local = np.column_stack([x0, q * x0[:, None], np.zeros(sel.size)])
            B = A.inverse()
            pts[sel] = B.apply_point(local)
            nrm[sel] = self.normals[j]
        return pts, nrm


class PatchUnion:
    """Disjoint union of patches; all quantities add."""

    def __init__(self, parts):
        self.parts = list(parts)
        self._c = self.parts[0].bounding_center
        self._r = float(max(dist(self._c, p.bounding_center) + p.bounding_radius for p in self.parts))

    @property
    def bounding_center(self):
        return self._c

    @property
    def bounding_radius(self):
        return self._r

    def area(self):
        return float(sum(p.area() for p in self.parts))

    def plane_lengths(self, v):
        return sum(p.plane_lengths(v) for p in self.parts)

    def geodesic_crossings(self, xi, eta):
        return sum(p.geodesic_crossings(xi, eta) for p in self.parts)

    def segment_crossings(self, a, b):
        return sum(p.segment_crossings(a, b) for p in self.parts)

    def sample(self, rng, n):
        w = np.array([p.area() for p in self.parts])
        which = rng.choice(len(w), size=n, p=w / w.sum())
        pts, nrm = np.empty((n, 4)), np.empty((n, 4))
        for j, p in enumerate(self.parts):
            sel = np.flatnonzero(which == j)
            if sel.size:
                pts[sel], nrm[sel] = p.sample(rng, sel.size)
        return pts, nrm


class EmptyPatch:
    bounding_center = ORIGIN
    bounding_radius = 0.0

    def area(self):
        return 0.0

    def plane_lengths(self, v):
        return np.zeros(len(v))

    def geodesic_crossings(self, xi, eta):
        return np.zeros(np.shape(xi)[:-1], dtype=np.int64)

    def segment_crossings(self, a, b):
        return np.zeros(np.shape(a)[:-1], dtype=np.int64)

    def sample(self, rng, n):
        return np.zeros((0, 4)), np.zeros((0, 4))


def _triangle_area(p, q, r):
    def angle(a, b, c):
        u = b + mdot(a, b) * a
        w = c + mdot(a, c) * a
        cosang = mdot(u, w) / np.sqrt(mdot(u, u) * mdot(w, w))
        return np.arccos(np.clip(cosang, -1.0, 1.0))

    return float(np.pi - angle(p, q, r) - angle(q, r, p) - angle(r, p, q))


def regular_quadrilateral_angle(area):
    """Interior angle of the regular geodesic quadrilateral of given area."""
    return (2 * np.pi - area) / 4.0


def bent_patch(area, fold=np.pi / 2):
    """Regular geodesic quadrilateral of the given area folded along a diagonal.

    The two triangles keep their shape, so the area is preserved; with a
    fold angle near pi/2 many geodesics cross both wings.
    """
    alpha = regular_quadrilateral_angle(area)
    rc = np.arccosh(1.0 / np.tan(alpha / 2.0))
    th = np.pi / 2 * np.arange(4)
    verts = np.stack(
        [np.full(4, np.cosh(rc)), np.sinh(rc) * np.cos(th), np.sinh(rc) * np.sin(th), np.zeros(4)],
        axis=1,
    )
    R = Isometry.rotation([1.0, 0.0, 0.0], fold)
    verts[1] = R.apply_point(verts[1])
    return TriangulatedPatch(verts, [(0, 1, 2), (0, 2, 3)])
