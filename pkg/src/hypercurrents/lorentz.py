"""Hyperboloid model of H^3: points, boundary points, plane normals, isometries.

Vectors are plain float arrays of shape (..., 4) in signature (-, +, +, +).
Points of H^3 satisfy <x, x> = -1 with x0 > 0, boundary points are stored as
(1, u) with |u| = 1, and plane normals are unit spacelike with a canonical
sign. Most functions broadcast over leading axes.
"""

import numpy as np

from .errors import DegenerateError, DomainError

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0, 0.0])

RENORM_TOL = 1e-12
CHORD_MIN = 1e-10


def mdot(x, y):
    """Minkowski form, broadcast over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.einsum("...i,...i->...", x[..., 1:], y[..., 1:])


def mnorm2(x):
    return mdot(x, x)


# -- normalization ----------------------------------------------------------


def as_point(x):
    """Project a timelike vector onto the upper sheet of the hyperboloid."""
    x = np.asarray(x, dtype=float)
    q = -mnorm2(x)
    if np.any(q <= 0):
        raise DomainError("vector is not timelike")
    x = x / np.sqrt(q)[..., None]
    return np.where((x[..., 0] < 0)[..., None], -x, x)


def as_boundary(x):
    """Normalize a boundary point given as a null 4-vector or a nonzero 3-vector."""
    x = np.asarray(x, dtype=float)
    u = x[..., 1:] if x.shape[-1] == 4 else x
    r = np.linalg.norm(u, axis=-1)
    if np.any(r == 0):
        raise DomainError("zero direction")
    if x.shape[-1] == 4:
        # null up to sign of x0; a negative x0 flips the direction
        u = u * np.sign(np.where(x[..., 0] == 0, 1.0, x[..., 0]))[..., None]
    u = u / r[..., None]
    return np.concatenate([np.ones(u.shape[:-1] + (1,)), u], axis=-1)


def canonical_sign(v):
    """Flip v so its first coordinate with |v_i| > 1e-15 is positive."""
    v = np.asarray(v, dtype=float)
    nz = np.abs(v) > 1e-15
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(v, first[..., None], axis=-1)[..., 0]
    return np.where((lead < 0)[..., None], -v, v)


def as_normal(v):
    """Unit spacelike normal with canonical sign."""
    v = np.asarray(v, dtype=float)
    q = mnorm2(v)
    if np.any(q <= 0):
        raise DomainError("vector is not spacelike")
    return canonical_sign(v / np.sqrt(q)[..., None])


def is_point(x, tol=RENORM_TOL):
    x = np.asarray(x, dtype=float)
    return (np.abs(mnorm2(x) + 1.0) <= tol * np.maximum(1.0, x[..., 0] ** 2)) & (x[..., 0] > 0)


# -- distances and charts -----------------------------------------------------


def dist(p, q):
    """Hyperbolic distance arccosh(-<p,q>), evaluated in a cancellation-free form."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    c = -mdot(p, q)
    if np.any(c < 1.0 - 1e-9):
        raise DomainError("-<p,q> < 1: inputs are not points of H^3")
    d = p - q
    s = np.sqrt(np.maximum(mnorm2(d), 0.0))
    return 2.0 * np.arcsinh(0.5 * s)


def ball_to_hyperboloid(b):
    b = np.asarray(b, dtype=float)
    r2 = np.einsum("...i,...i->...", b, b)
    if np.any(r2 >= 1.0):
        raise DomainError("ball point with |p| >= 1")
    den = 1.0 - r2
    x0 = (1.0 + r2) / den
    return np.concatenate([x0[..., None], 2.0 * b / den[..., None]], axis=-1)


def hyperboloid_to_ball(x):
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / (1.0 + x[..., 0])[..., None]


def ball_dist(a, b):
    """Distance between ball-chart points, stable near the diagonal."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ra = 1.0 - np.einsum("...i,...i->...", a, a)
    rb = 1.0 - np.einsum("...i,...i->...", b, b)
    if np.any(ra <= 0) or np.any(rb <= 0):
        raise DomainError("ball point with |p| >= 1")
    e = np.linalg.norm(a - b, axis=-1)
    return 2.0 * np.arcsinh(e / np.sqrt(ra * rb))


# -- tangent geometry ---------------------------------------------------------


def exp_map(x, w):
    """Point reached from x along tangent vector w (<x,w> = 0)."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    n = np.sqrt(np.maximum(mnorm2(w), 0.0))[..., None]
    safe = np.where(n > 0, n, 1.0)
    return np.cosh(n) * x + np.where(n > 0, np.sinh(n) / safe, 1.0) * w


def transport(w, q, p):
    """Parallel transport of tangent vector w from q to p along the geodesic."""
    w = np.asarray(w, dtype=float)
    c = 1.0 - mdot(p, q)
    return w + (mdot(p, w) / c)[..., None] * (np.asarray(p) + np.asarray(q))


def tangent_project(x, w):
    """Orthogonal projection of w onto the tangent space at x."""
    return w + mdot(x, w)[..., None] * x


# -- isometries ---------------------------------------------------------------


def _random_rotation3(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class Isometry:
    """Orientation-preserving isometry of H^3 as a 4x4 Lorentz matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, check=True):
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise DomainError("isometry must be a 4x4 matrix")
        if check:
            err = np.max(np.abs(m.T @ ETA @ m - ETA))
            if err > 1e-10 * max(1.0, np.max(np.abs(m)) ** 2):
                raise DomainError(f"matrix does not preserve the form (err {err:.2e})")
            if m[0, 0] <= 0 or np.linalg.det(m) <= 0:
                raise DomainError("matrix is not orientation and time preserving")
        m.setflags(write=False)
        self.matrix = m

    def __repr__(self):
        return f"Isometry({self.matrix.tolist()!r})"

    @classmethod
    def identity(cls):
        return cls(np.eye(4), check=False)

    @classmethod
    def boost(cls, axis, t):
        """Translation by distance t along the geodesic through o in direction axis."""
        u = np.asarray(axis, dtype=float)
        u = u / np.linalg.norm(u)
        m = np.eye(4)
        m[0, 0] = np.cosh(t)
        m[0, 1:] = np.sinh(t) * u
        m[1:, 0] = np.sinh(t) * u
        m[1:, 1:] += (np.cosh(t) - 1.0) * np.outer(u, u)
        return cls(m, check=False)

    @classmethod
    def rotation(cls, axis, angle):
        """Rotation about the geodesic through o in direction axis."""
        u = np.asarray(axis, dtype=float)
        u = u / np.linalg.norm(u)
        k = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
        r = np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)
        m = np.eye(4)
        m[1:, 1:] = r
        return cls(m, check=False)

    @classmethod
    def from_rotation3(cls, r):
        m = np.eye(4)
        m[1:, 1:] = r
        return cls(m)

    @classmethod
    def translation_to(cls, x):
        """The transvection along the geodesic from o to x, sending o to x."""
        x = as_point(x)
        s = x[1:]
        m = np.empty((4, 4))
        m[0, 0] = x[0]
        m[0, 1:] = s
        m[1:, 0] = s
        m[1:, 1:] = np.eye(3) + np.outer(s, s) / (1.0 + x[0])
        return cls(m, check=False)

    @classmethod
    def random(cls, rng, scale=1.0):
        """Random isometry moving o by at most `scale` (uniform direction)."""
        rot = _random_rotation3(rng)
        u = rng.standard_normal(3)
        t = scale * rng.random()
        return cls.boost(u, t) @ cls.from_rotation3(rot)

    @classmethod
    def loxodromic(cls, length, twist=0.0):
        """Translation by `length` along the axis with endpoints (1,0,0,-1) -> (1,0,0,1),
        composed with a rotation by `twist` about that axis."""
        return cls.boost([0, 0, 1], length) @ cls.rotation([0, 0, 1], twist)

    def __matmul__(self, other):
        return Isometry(self.matrix @ other.matrix, check=False)

    def inverse(self):
        return Isometry(ETA @ self.matrix.T @ ETA, check=False)

    def conjugate(self, by):
        """by ∘ self ∘ by^{-1}."""
        return by @ self @ by.inverse()

    def form_error(self):
        return float(np.max(np.abs(self.matrix.T @ ETA @ self.matrix - ETA)))

    def distance(self, other):
        return float(np.max(np.abs(self.matrix - other.matrix)))

    def translation_length(self):
        """Translation length ln max|lambda| over the eigenvalues."""
        ev = np.linalg.eigvals(self.matrix)
        return float(np.log(np.max(np.abs(ev))))

    def apply_point(self, x):
        return as_point(np.asarray(x, dtype=float) @ self.matrix.T)

    def apply_boundary(self, x):
        return as_boundary(np.asarray(x, dtype=float) @ self.matrix.T)

    def apply_normal(self, v):
        return as_normal(np.asarray(v, dtype=float) @ self.matrix.T)

    def apply_tangent(self, w):
        return np.asarray(w, dtype=float) @ self.matrix.T

    def __call__(self, x):
        return apply(self, x)


def apply(A, x):
    """Apply A to a LorentzVec, renormalizing within its class (point, boundary, normal)."""
    x = np.asarray(x, dtype=float)
    q = np.atleast_1d(mnorm2(x))
    if np.all(q < -0.5):
        return A.apply_point(x)
    if np.all(np.abs(q) <= 1e-6):
        return A.apply_boundary(x)
    if np.all(q > 0.5):
        return A.apply_normal(x)
    raise DomainError("mixed or unrecognized vector classes")


# -- geodesics ----------------------------------------------------------------


def chordal(a, b):
    """Chordal distance between boundary points."""
    return np.linalg.norm(np.asarray(a)[..., 1:] - np.asarray(b)[..., 1:], axis=-1)


def canonical_pair(xi, eta):
    """Unordered pair in lexicographic order."""
    a = tuple(np.asarray(xi, dtype=float).tolist())
    b = tuple(np.asarray(eta, dtype=float).tolist())
    return (a, b) if a <= b else (b, a)


def geodesic_frame(xi, eta):
    """(p, w) with gamma(t) = cosh t p + sinh t w running from xi to eta.

    Broadcasts over leading axes of the boundary points.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    c = -mdot(xi, eta)
    a = 1.0 / np.sqrt(2.0 * c)
    p = a[..., None] * (xi + eta)
    w = a[..., None] * (eta - xi)
    return p, w


class GeodesicLine:
    """Complete geodesic with endpoints xi (t -> -inf) and eta (t -> +inf)."""

    __slots__ = ("xi", "eta", "p", "w")

    def __init__(self, xi, eta):
        xi = as_boundary(xi)
        eta = as_boundary(eta)
        if chordal(xi, eta) <= CHORD_MIN:
            raise DegenerateError("geodesic endpoints coincide")
        self.xi = xi
        self.eta = eta
        self.p, self.w = geodesic_frame(xi, eta)

    def __repr__(self):
        return f"GeodesicLine({self.xi.tolist()}, {self.eta.tolist()})"

    @property
    def pair(self):
        return canonical_pair(self.xi, self.eta)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return np.cosh(t) * self.p + np.sinh(t) * self.w

    def tangent(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return np.sinh(t) * self.p + np.cosh(t) * self.w

    def foot_parameter(self, x):
        """Parameter of the point of the geodesic closest to x."""
        a = -mdot(x, self.xi)
        b = -mdot(x, self.eta)
        return 0.5 * np.log(a / b)

    def distance_to(self, x):
        return dist_point_geodesic(x, self.xi, self.eta)

    def transformed(self, A):
        return GeodesicLine(A.apply_boundary(self.xi), A.apply_boundary(self.eta))


def geodesic_from_endpoints(xi, eta):
    return GeodesicLine(xi, eta)


def dist_point_geodesic(x, xi, eta):
    """Distance from points x to the geodesic(s) with endpoints xi, eta."""
    a = -mdot(x, xi)
    b = -mdot(x, eta)
    c = -mdot(xi, eta)
    ch = np.sqrt(np.maximum(a * b / c * 2.0, 1.0))
    return np.arccosh(ch)


def busemann(xi, x, y):
    """B_xi(x, y) = ln(<x,n>/<y,n>): grows by t when y moves t units toward xi."""
    n = as_boundary(xi)
    return np.log(mdot(x, n) / mdot(y, n))
