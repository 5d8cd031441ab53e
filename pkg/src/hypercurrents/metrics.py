"""Conformal metrics g = e^{2 phi} gbar and their geodesic flow.

phi is a constant phi0 plus compactly supported radial bumps
amp * (1 - u/u_rho)^6 with u = cosh d(x, c) - 1 and u_rho = cosh(rho) - 1.
In the ball chart g = e^{2 psi} |dx|^2 with psi = phi + ln(2 / (1 - |x|^2)).

Two integrators are provided. `flow` is plain fixed-step RK4 in the chart.
`advance` is exact outside the bump supports: there a g-geodesic is a
gbar-geodesic traversed at gbar-speed e^{-phi0}, so it is written in closed
form on the hyperboloid, and RK4 is used only while a support can still be
reached. This removes the chart-radius limit on long horizons.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ChartExitError, DomainError, ShootingError, StepRejectionError
from .lorentz import (
    ORIGIN,
    as_boundary,
    ball_to_hyperboloid,
    dist,
    hyperboloid_to_ball,
    mdot,
)
from .rng import Estimate, sharded_moments

CHART_R = 0.999
DRIFT_TOL = 1e-6
AMP_CAP = 0.1
GRAD_CAP = 0.5
RADIUS_MIN = 1.0
POWER = 6


@dataclass(frozen=True)
class Bump:
    """Radial bump: chart center, hyperbolic radius, amplitude (phi at the center)."""

    center: tuple
    radius: float
    amplitude: float

    @property
    def point(self):
        return ball_to_hyperboloid(np.asarray(self.center, dtype=float))

    def max_gradient(self):
        """Largest gbar-norm of the gradient of this bump (radial profile maximum)."""
        d = np.linspace(0.0, self.radius, 4001)
        urho = math.cosh(self.radius) - 1.0
        q = 1.0 - (np.cosh(d) - 1.0) / urho
        return float(np.max(np.abs(POWER * self.amplitude * q ** (POWER - 1) * np.sinh(d) / urho)))


class ConformalMetric:
    """g = e^{2 phi} gbar with phi = phi0 + sum of bumps."""

    def __init__(self, bumps=(), constant=0.0, check_caps=True):
        self.bumps = tuple(b if isinstance(b, Bump) else Bump(*b) for b in bumps)
        self.constant = float(constant)
        for b in self.bumps:
            if np.linalg.norm(b.center) >= CHART_R:
                raise DomainError("bump center outside the chart")
            if check_caps:
                if abs(b.amplitude) > AMP_CAP:
                    raise DomainError(f"bump amplitude {b.amplitude} exceeds cap {AMP_CAP}")
                if b.radius < RADIUS_MIN:
                    raise DomainError(f"bump radius {b.radius} below {RADIUS_MIN}")
                if b.max_gradient() > GRAD_CAP:
                    raise DomainError("bump gradient exceeds cap")
        self.table = self._table(self.bumps)

    def __repr__(self):
        return f"ConformalMetric(bumps={self.bumps!r}, constant={self.constant})"

    @staticmethod
    def _table(bumps, regions=()):
        rows = []
        for b in bumps:
            c = np.asarray(b.center, dtype=float)
            rows.append([*c, 2.0 / (1.0 - c @ c), math.cosh(b.radius) - 1.0, b.amplitude])
        for c, r in regions:
            c = np.asarray(c, dtype=float)
            rows.append([*c, 2.0 / (1.0 - c @ c), math.cosh(r) - 1.0, 0.0])
        return np.ascontiguousarray(np.array(rows, dtype=float).reshape(-1, 6))

    @classmethod
    def flat(cls):
        return cls()

    @classmethod
    def scaled(cls, c):
        """The constant multiple c^2 gbar."""
        return cls((), math.log(c))

    @property
    def is_flat(self):
        return not self.bumps and self.constant == 0.0

    def with_regions(self, regions):
        """Bump table extended by zero-amplitude rows (hyperboloid center, radius)."""
        reg = [(hyperboloid_to_ball(c), r) for c, r in regions]
        return self._table(self.bumps, reg)

    def support_balls(self):
        """(hyperboloid centers, radii) of the bump supports."""
        if not self.bumps:
            return np.zeros((0, 4)), np.zeros(0)
        return np.array([b.point for b in self.bumps]), np.array([b.radius for b in self.bumps])

    def reach(self):
        """Distance from o beyond which phi is constant."""
        if not self.bumps:
            return 0.0
        return float(max(dist(ORIGIN, b.point) + b.radius for b in self.bumps))

    # chart-side evaluation

    def phi(self, x):
        """phi at chart points x (..., 3)."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[:-1], self.constant)
        den = 1.0 - np.sum(x * x, axis=-1)
        for row in self.table:
            c, k, urho, amp = row[:3], row[3], row[4], row[5]
            u = k * np.sum((x - c) ** 2, axis=-1) / den
            q = np.clip(1.0 - u / urho, 0.0, None)
            out = out + amp * q**POWER
        return out

    def grad_phi(self, x):
        """Euclidean chart gradient of phi at x (..., 3)."""
        x = np.asarray(x, dtype=float)
        psi_g = self.grad_psi(x)
        den = 1.0 - np.sum(x * x, axis=-1)
        return psi_g - 2.0 * x / den[..., None]

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return self.phi(x) + math.log(2.0) - np.log(1.0 - np.sum(x * x, axis=-1))

    def grad_psi(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        _, g = kernels.python_backend._psi_grad(flat, self.table, self.constant)
        return g.reshape(x.shape)

    def phi_at(self, X):
        """phi at hyperboloid points."""
        return self.phi(hyperboloid_to_ball(X))

    def conformal_factor(self, X):
        return np.exp(2.0 * self.phi_at(X))

    def sectional_curvature(self, x, e1, e2, h=1e-5):
        """Sectional curvature of the plane span(e1, e2) (Euclidean-orthonormal) at chart x."""
        x = np.asarray(x, dtype=float)
        e1 = np.asarray(e1, dtype=float)
        e2 = np.asarray(e2, dtype=float)

        def hess(e):
            return (self.grad_psi(x + h * e) - self.grad_psi(x - h * e)) @ e / (2 * h)

        g = self.grad_psi(x)
        k = -hess(e1) - hess(e2) + (g @ e1) ** 2 + (g @ e2) ** 2 - g @ g
        return float(np.exp(-2.0 * self.psi(x)) * k)


# -- states and conversions -------------------------------------------------------


@dataclass
class FlowState:
    """Chart position and velocity; g-unit means e^{psi} |velocity| = 1."""

    position: np.ndarray
    velocity: np.ndarray
    t: float = 0.0
    metric: str = "g"
    info: dict = field(default_factory=dict)


def chart_to_hyperboloid(x, v):
    """Chart state -> (X, Xdot) where Xdot is the hyperboloid velocity."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    den = 1.0 - r2
    xv = np.sum(x * v, axis=-1)
    X = ball_to_hyperboloid(x)
    d0 = 4.0 * xv / den**2
    ds = 2.0 * v / den[..., None] + (4.0 * xv / den**2)[..., None] * x
    return X, np.concatenate([d0[..., None], ds], axis=-1)


def hyperboloid_to_chart(X, Xdot):
    X = np.asarray(X, dtype=float)
    Xdot = np.asarray(Xdot, dtype=float)
    x = hyperboloid_to_ball(X)
    a = (1.0 + X[..., 0])[..., None]
    v = (Xdot[..., 1:] * a - X[..., 1:] * Xdot[..., :1]) / a**2
    return x, v


def unit_tangent(Xdot):
    return Xdot / np.sqrt(mdot(Xdot, Xdot))[..., None]


def state_to_hyperboloid(s):
    """FlowState -> (X, W) with W the gbar-unit tangent."""
    X, Xd = chart_to_hyperboloid(s.position, s.velocity)
    return X, unit_tangent(Xd)


def hyperboloid_to_state(g, X, W, t=0.0, metric="g"):
    """(X, W) -> FlowState with velocity g-unit (metric='g') or gbar-unit."""
    x, v = hyperboloid_to_chart(X, W)
    if metric == "g":
        v = v * np.exp(-g.phi(x))[..., None]
    return FlowState(x, v, t, metric)


def g_unit_chart(g, x, direction):
    """Chart velocity of g-speed 1 in the given Euclidean direction."""
    d = np.asarray(direction, dtype=float)
    return d / np.linalg.norm(d, axis=-1, keepdims=True) * np.exp(-g.psi(x))[..., None]


# -- fixed-step RK4 flow ------------------------------------------------------------------


def flow_path(g, s, t, dt):
    """RK4 trajectory of the g-geodesic from s over time t; returns (xs, vs, max_drift)."""
    if dt > 1e-2 + 1e-15:
        raise ValueError("dt must be <= 1e-2")
    n = max(1, int(math.ceil(abs(t) / dt - 1e-9)))
    h = t / n
    xs, vs, done, status, drift = kernels.rk4_path(
        np.asarray(s.position, dtype=float), np.asarray(s.velocity, dtype=float), n, h,
        g.table, g.constant, False, CHART_R**2, DRIFT_TOL)
    _raise_status(status)
    return xs, vs, drift


def flow(g, s, t, dt=1e-3):
    """Flow the g-unit chart state s by g-time t (negative t flows backward)."""
    xs, vs, drift = flow_path(g, s, t, dt)
    return FlowState(xs[-1].copy(), vs[-1].copy(), s.t + t, s.metric, {"max_drift": drift})


def _raise_status(status):
    if status == kernels.CHART_EXIT:
        raise ChartExitError("trajectory left the chart radius")
    if status == kernels.REJECTED:
        raise StepRejectionError("local error proxy above tolerance")


# -- exact-outside-support integrator ------------------------------------------------------


def _entry_parameter(X, W, C, cr):
    """gbar arclength s > 0 at which X(s) = cosh s X + sinh s W first enters the ball
    {-<., C> < cr}; inf if it never does. Broadcast over rows of X, W."""
    a = -mdot(X, C)
    b = -mdot(W, C)
    A, B = a + b, a - b
    disc = cr**2 - A * B
    with np.errstate(invalid="ignore", divide="ignore"):
        y = (cr - np.sqrt(np.maximum(disc, 0.0))) / A
        s = np.log(y)
    inside = a < cr
    ok = (disc > 0) & (A > 0) & (y > 0) & np.isfinite(s)
    s = np.where(ok & (s > 0), s, np.inf)
    # inside already: entry time 0; outside but exiting branch only: never
    return np.where(inside, 0.0, s)


def next_entry(table, X, W):
    """Smallest entry parameter over all rows of a bump table (rows in chart form)."""
    out = np.full(len(X), np.inf)
    for row in table:
        c = ball_to_hyperboloid(row[:3])
        cr = 1.0 + row[4]
        out = np.minimum(out, _entry_parameter(X, W, c, cr))
    return out


def _to_chart(g, X, W):
    x, v = hyperboloid_to_chart(X, W)
    v = v * np.exp(-g.phi(x))[..., None]
    return np.ascontiguousarray(x), np.ascontiguousarray(v)


def _from_chart(x, v):
    X, Xd = chart_to_hyperboloid(x, v)
    return X, unit_tangent(Xd)


def advance(g, X, W, T, dt=1e-2, table=None):
    """Advance gbar-unit states (X, W) along g-geodesics by g-time T (>= 0).

    Returns new (X, W). Closed form wherever no support lies ahead.
    """
    X = np.array(X, dtype=float, ndmin=2)
    W = np.array(W, dtype=float, ndmin=2)
    left = np.broadcast_to(np.asarray(T, dtype=float), (len(X),)).copy()
    table = g.table if table is None else table
    speed = math.exp(-g.constant)
    for _ in range(10000):
        ent = next_entry(table, X, W) if len(table) else np.full(len(X), np.inf)
        reach = left * speed
        free = ent >= reach
        # closed-form part: either all remaining time, or up to the entry point
        s = np.where(free, reach, ent)
        ch, sh = np.cosh(s)[:, None], np.sinh(s)[:, None]
        X, W = ch * X + sh * W, sh * X + ch * W
        left = np.where(free, 0.0, left - s / speed)
        act = np.flatnonzero(left > 1e-14)
        if not act.size:
            break
        x, v = _to_chart(g, X[act], W[act])
        t_done, status, _ = kernels.rk4_batch(
            x, v, np.ascontiguousarray(left[act]), dt, table, g.constant, True, CHART_R**2, DRIFT_TOL)
        if np.any(status == kernels.CHART_EXIT):
            raise ChartExitError("trajectory left the chart inside a support region")
        if np.any(status == kernels.REJECTED):
            raise StepRejectionError("local error proxy above tolerance")
        Xa, Wa = _from_chart(x, v)
        X[act], W[act] = Xa, Wa
        left[act] -= t_done
        left = np.maximum(left, 0.0)
        # RK4 stopped outside and receding: the next pass finishes in closed form
    return X, W


def forward_endpoint(g, X, W, dt=1e-2, table=None):
    """Boundary point reached by the g-geodesic from (X, W)."""
    X = np.array(X, dtype=float, ndmin=2)
    W = np.array(W, dtype=float, ndmin=2)
    table = g.table if table is None else table
    for _ in range(10000):
        ent = next_entry(table, X, W) if len(table) else np.full(len(X), np.inf)
        fin = np.isinf(ent)
        if np.all(fin):
            break
        act = np.flatnonzero(~fin)
        s = ent[act]
        ch, sh = np.cosh(s)[:, None], np.sinh(s)[:, None]
        Xa, Wa = ch * X[act] + sh * W[act], sh * X[act] + ch * W[act]
        x, v = _to_chart(g, Xa, Wa)
        budget = np.full(len(act), 1e6)
        _, status, _ = kernels.rk4_batch(x, v, budget, dt, table, g.constant, True, CHART_R**2, DRIFT_TOL)
        if np.any(status == kernels.CHART_EXIT):
            raise ChartExitError("trajectory left the chart inside a support region")
        if np.any(status == kernels.REJECTED):
            raise StepRejectionError("local error proxy above tolerance")
        X[act], W[act] = _from_chart(x, v)
    return as_boundary(X + W)


def endpoints(g, X, W, dt=1e-2):
    """(backward, forward) boundary endpoints of g-geodesics through (X, W)."""
    return forward_endpoint(g, X, -np.asarray(W), dt), forward_endpoint(g, X, W, dt)


def dense_track(g, X, W, n_steps, dt):
    """Positions and g-time velocities on the grid u_i = i*dt (dt may be negative).

    Returns (Xs, Xdots) of shape (n_steps + 1, 4); Xdot has gbar-speed e^{-phi}.
    """
    sgn = 1.0 if dt >= 0 else -1.0
    h = abs(dt)
    X = np.array(X, dtype=float).reshape(4)
    W = sgn * np.array(W, dtype=float).reshape(4)
    Xs = np.empty((n_steps + 1, 4))
    Ws = np.empty((n_steps + 1, 4))
    Xs[0], Ws[0] = X, W
    i = 0
    speed = math.exp(-g.constant)
    table = g.table
    while i < n_steps:
        ent = float(next_entry(table, X[None], W[None])[0]) if len(table) else math.inf
        k = n_steps - i if math.isinf(ent) else min(n_steps - i, int(ent / (speed * h)))
        if k > 0:
            s = speed * h * np.arange(1, k + 1)[:, None]
            Xs[i + 1:i + k + 1] = np.cosh(s) * X + np.sinh(s) * W
            Ws[i + 1:i + k + 1] = np.sinh(s) * X + np.cosh(s) * W
            i += k
            X, W = Xs[i].copy(), Ws[i].copy()
            continue
        x, v = _to_chart(g, X[None], W[None])
        xs, vs, done, status, _ = kernels.rk4_path(
            x[0], v[0], n_steps - i, h, table, g.constant, True, CHART_R**2, DRIFT_TOL)
        _raise_status(status)
        if done == 0:
            # receding at the start but an entry was predicted: take one closed-form node
            s = speed * h
            X, W = math.cosh(s) * X + math.sinh(s) * W, math.sinh(s) * X + math.cosh(s) * W
            i += 1
            Xs[i], Ws[i] = X, W
            continue
        Xn, Wn = _from_chart(xs[1:done + 1], vs[1:done + 1])
        Xs[i + 1:i + done + 1], Ws[i + 1:i + done + 1] = Xn, Wn
        i += done
        X, W = Xs[i].copy(), Ws[i].copy()
    fac = np.exp(-g.phi_at(Xs))[:, None]
    return Xs, sgn * Ws * fac


# -- geodesic stretch ---------------------------------------------------------------------


def sample_volume_g(g, rng, n, radius):
    """Points in B_radius(o) with density proportional to vol_g, and uniform unit directions."""
    from .kinematic import random_tangent_units, sample_ball_volume

    amax = max([g.constant] + [g.constant + b.amplitude for b in g.bumps if b.amplitude > 0])
    out = np.empty((0, 4))
    while len(out) < n:
        m = 2 * (n - len(out)) + 16
        x = sample_ball_volume(rng, m, radius)
        w = np.exp(3.0 * (g.phi_at(x) - amax))
        out = np.vstack([out, x[rng.random(m) < w]])
    X = out[:n]
    return X, random_tangent_units(rng, X)


def geodesic_stretch(g, window, T, n, seed, dt=1e-2, shards=1):
    """Window surrogate of the geodesic stretch: mean of d_gbar(start, end) / T."""
    diam = 2.0 * max([b.radius for b in g.bumps], default=0.0)
    if diam and T < 10 * diam:
        warnings.warn(f"horizon {T} shorter than 10x bump diameter {diam}", RuntimeWarning, stacklevel=2)

    def fn(rng, k):
        X, W = sample_volume_g(g, rng, k, window)
        Y, _ = advance(g, X, W, T, dt)
        return dist(X, Y) / T

    return sharded_moments(fn, n, seed, "stretch", shards).estimate()


# -- pointwise area ratio -------------------------------------------------------------------


def disk_quadrature(g, x, normal, radius, m=32):
    """(g-area, gbar-area) of the gbar-geodesic disk about x orthogonal to `normal`,
    by Gauss-Legendre in r and the trapezoid rule in angle."""
    x = np.asarray(x, dtype=float)
    n = np.asarray(normal, dtype=float)
    n = n + mdot(x, n) * x
    n = n / np.sqrt(mdot(n, n))
    # orthonormal tangent pair spanning the plane
    cands = np.eye(4)[1:]
    frame = []
    for e in cands:
        u = e + mdot(e, x) * x - mdot(e, n) * n
        for f in frame:
            u = u - mdot(u, f) * f
        q = mdot(u, u)
        if q > 1e-8:
            frame.append(u / np.sqrt(q))
        if len(frame) == 2:
            break
    e1, e2 = frame
    gl_x, gl_w = np.polynomial.legendre.leggauss(m)
    r = 0.5 * radius * (gl_x + 1.0)
    wr = 0.5 * radius * gl_w * np.sinh(r)
    th = 2 * np.pi * np.arange(2 * m) / (2 * m)
    d = np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2
    pts = np.cosh(r)[:, None, None] * x + np.sinh(r)[:, None, None] * d[None]
    f = g.conformal_factor(pts.reshape(-1, 4)).reshape(m, 2 * m)
    ga = np.sum(wr[:, None] * f) * (2 * np.pi / (2 * m))
    ba = np.sum(wr) * 2 * np.pi
    return float(ga), float(ba)


def area_ratio_pointwise(g, x, normal, delta, m=32):
    """g-area / gbar-area of the gbar-geodesic disk of gbar-area delta tangent to the plane
    orthogonal to `normal` at the hyperboloid point x."""
    if not 1e-6 <= delta <= 1e-2:
        raise ValueError("delta must lie in [1e-6, 1e-2]")
    radius = math.acosh(1.0 + delta / (2 * math.pi))
    ga, ba = disk_quadrature(g, x, normal, radius, m)
    return ga / ba


def area_g(g, patch, m=64, n_mc=400000, seed=0):
    """g-area of a patch: quadrature for geodesic disks, Monte Carlo otherwise."""
    from .rng import generator
    from .shapes import EmptyPatch, GeodesicDisk

    if isinstance(patch, EmptyPatch):
        return 0.0
    if isinstance(patch, GeodesicDisk):
        return disk_quadrature(g, patch.center, patch.normal, patch.radius, m)[0]
    rng = generator(seed, "area_g")
    pts, _ = patch.sample(rng, n_mc)
    return float(patch.area() * np.mean(g.conformal_factor(pts)))


# -- boundary-value g-geodesics and the Crofton check -------------------------------------------


def _tangent_basis(u):
    """Orthonormal pairs orthogonal to unit 3-vectors u (rows)."""
    a = np.where(np.abs(u[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    e1 = a - np.sum(a * u, axis=1)[:, None] * u
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    return e1, np.cross(u, e1)


def _start_state(xi, zeta, table):
    """Point of the gbar-geodesic xi -> zeta just before it first meets any table ball,
    and the gbar-unit tangent there. Rows where it meets none get NaN."""
    c = -mdot(xi, zeta)
    a = 1.0 / np.sqrt(2.0 * c)
    s = np.full(len(xi), np.inf)
    for row in table:
        C = ball_to_hyperboloid(row[:3])
        cr = 1.0 + row[4]
        A = -mdot(C, xi)
        B = -mdot(C, zeta)
        # a (A y^-1 + B y) = cr, y = e^t: first (smaller) root
        disc = cr**2 - 4 * a * a * A * B
        with np.errstate(invalid="ignore"):
            y = (cr - np.sqrt(disc)) / (2 * a * B)
            t = np.log(y)
        s = np.where(disc > 0, np.minimum(s, t), s)
    t = s - 1e-6
    et = np.exp(np.where(np.isfinite(t), t, 0.0))[:, None]
    X = a[:, None] * (xi / et + zeta * et)
    W = a[:, None] * (-xi / et + zeta * et)
    bad = ~np.isfinite(s)
    X[bad] = np.nan
    W[bad] = np.nan
    return X, W


def shoot(g, xi, eta, dt=1e-2, tol=1e-10, max_iter=20, fd=1e-6, table=None):
    """Find zeta so the g-geodesic leaving along gbar-geodesic (xi, zeta) ends at eta.

    Returns (zeta, start X, start W, converged mask).
    """
    table = g.table if table is None else table
    n = len(xi)
    u = eta[:, 1:].copy()
    target_e1, target_e2 = _tangent_basis(eta[:, 1:])
    conv = np.zeros(n, dtype=bool)

    def out_of(uu, idx):
        z = as_boundary(uu)
        X, W = _start_state(xi[idx], z, table)
        tgt, f1, f2 = eta[idx, 1:], target_e1[idx], target_e2[idx]
        miss = np.isnan(X[:, 0])
        end = z[:, 1:].copy()
        if np.any(~miss):
            end[~miss] = forward_endpoint(g, X[~miss], W[~miss], dt, table)[:, 1:]
        d = end - tgt
        return np.column_stack([np.sum(d * f1, 1), np.sum(d * f2, 1)])

    act = np.arange(n)
    for _ in range(max_iter):
        if not act.size:
            break
        ua = u[act]
        b1, b2 = _tangent_basis(ua / np.linalg.norm(ua, axis=1)[:, None])
        stack = np.vstack([ua, ua + fd * b1, ua + fd * b2])
        r = out_of(stack, np.concatenate([act, act, act]))
        k = len(act)
        r0, r1, r2 = r[:k], r[k:2 * k], r[2 * k:]
        done = np.linalg.norm(r0, axis=1) <= tol
        conv[act[done]] = True
        keep = ~done
        if not np.any(keep):
            act = act[keep]
            break
        J = np.stack([(r1 - r0) / fd, (r2 - r0) / fd], axis=2)[keep]
        ok = np.abs(np.linalg.det(J)) > 1e-14
        step = np.zeros((len(J), 2))
        step[ok] = np.linalg.solve(J[ok], -r0[keep][ok][:, :, None])[:, :, 0]
        nrm = np.linalg.norm(step, axis=1)
        step *= np.minimum(1.0, 0.2 / np.maximum(nrm, 1e-300))[:, None]
        ak = act[keep]
        un = ua[keep] + step[:, :1] * b1[keep] + step[:, 1:] * b2[keep]
        u[ak] = un / np.linalg.norm(un, axis=1)[:, None]
        act = ak[ok]
    zeta = as_boundary(u)
    X, W = _start_state(xi, zeta, table)
    return zeta, X, W, conv


@dataclass
class CroftonResult:
    lhs: Estimate
    rhs: float
    area_g: float
    n_traced: int
    n_excluded: int


def _ray_crossings(g, X, W, patch, table, dt):
    """Crossings of the patch by the forward g-ray from (X, W), for rays that start
    outside every table ball. Straight (closed-form) wherever no ball lies ahead."""
    bumps = table[table[:, 5] != 0.0]
    if not len(bumps) or math.isinf(float(next_entry(bumps, X[None], W[None])[0])):
        return int(patch.geodesic_crossings(as_boundary(X - W), as_boundary(X + W)))
    s = float(next_entry(table, X[None], W[None])[0])
    if math.isinf(s):
        return int(patch.geodesic_crossings(as_boundary(X - W), as_boundary(X + W)))
    X, W = math.cosh(s) * X + math.sinh(s) * W, math.sinh(s) * X + math.cosh(s) * W
    x, v = _to_chart(g, X[None], W[None])
    total = 0
    while True:
        xs, vs, done, status, _ = kernels.rk4_path(x[0], v[0], 4000, dt, table, g.constant, True,
                                                   CHART_R**2, DRIFT_TOL)
        _raise_status(status)
        if done:
            P = ball_to_hyperboloid(xs[:done + 1])
            total += int(np.sum(patch.segment_crossings(P[:-1], P[1:])))
        if status == kernels.RECEDING:
            return total
        x, v = xs[done:done + 1], vs[done:done + 1]


def sample_sphere_influx(rng, n, radius):
    """States on the sphere S_radius(o) pointing inward, with density |<v, N>|.

    Every geodesic meeting the ball enters through the sphere exactly once, so
    this is the Liouville flux through a transversal.
    """
    from .kinematic import _unit_vectors

    u = _unit_vectors(rng, n)
    X = np.column_stack([np.full(n, math.cosh(radius)), math.sinh(radius) * u])
    N = -np.column_stack([np.full(n, math.sinh(radius)), math.cosh(radius) * u])
    e1, e2 = _tangent_basis(u)
    ct = np.sqrt(1.0 - rng.random(n))
    st = np.sqrt(1.0 - ct**2)
    ph = 2 * np.pi * rng.random(n)
    side = np.cos(ph)[:, None] * e1 + np.sin(ph)[:, None] * e2
    W = ct[:, None] * N + st[:, None] * np.column_stack([np.zeros(n), side])
    return X, W


def g_crofton_check(g, patch, n, seed=0, c1=2.0, window=None, dt=1e-2, shards=1, method="liouville",
                    max_excluded=1e-3):
    """lambda_g-integral of crossings of g-geodesics with the patch, against pi * area_g.

    method='liouville' realizes lambda_g as the inward Liouville flux through a
    sphere S_R(o) enclosing the bump supports, where g is a constant multiple of
    gbar; each state is traced along its g-geodesic. The mass is
    (c1 / 2) * 2 pi^2 sinh^2 R * e^{2 phi0}, which is the gbar kernel mass when g = gbar.

    method='gbar' draws geodesics from the gbar kernel instead, realizes each
    as the g-geodesic with the same endpoints by shooting, and counts with weight 1.
    """
    from .kinematic import GeodesicSampler, check_window
    from .lorentz import dist_point_geodesic
    from .shapes import EmptyPatch

    if isinstance(patch, EmptyPatch):
        return CroftonResult(Estimate(0.0, 0.0, int(n)), 0.0, 0.0, 0, 0)
    ag = area_g(g, patch)
    reach = float(dist(ORIGIN, patch.bounding_center)) + patch.bounding_radius
    R = max(reach, g.reach()) + 0.1 if window is None else float(window)
    check_window(patch.bounding_center, patch.bounding_radius, R, 0.0, "patch")
    if g.reach() > R:
        raise DomainError("bump support extends beyond the window")
    table = g.with_regions([(patch.bounding_center, patch.bounding_radius + 0.05)])
    stats = {"traced": 0, "excluded": 0}

    if method == "liouville":
        mass = 0.5 * c1 * 2 * np.pi**2 * math.sinh(R) ** 2 * math.exp(2 * g.constant)

        def fn(rng, k):
            X, W = sample_sphere_influx(rng, k, R)
            out = np.asarray(patch.geodesic_crossings(as_boundary(X - W), as_boundary(X + W)), dtype=float)
            if len(g.table):
                idx = np.flatnonzero(np.isfinite(next_entry(g.table, X, W)))
                stats["traced"] += idx.size
                for i in idx:
                    out[i] = _ray_crossings(g, X[i], W[i], patch, table, dt)
            return out

    elif method == "gbar":
        sampler = GeodesicSampler(R, c1, seed)
        mass = sampler.mass
        cs, rs = g.support_balls()

        def fn(rng, k):
            xi, eta = sampler.sample(rng, k)
            hits = np.zeros(k, dtype=bool)
            for c, r in zip(cs, rs):
                hits |= dist_point_geodesic(c, xi, eta) < r
            out = np.asarray(patch.geodesic_crossings(xi, eta), dtype=float)
            idx = np.flatnonzero(hits)
            if idx.size:
                zeta, X, W, conv = shoot(g, xi[idx], eta[idx], dt)
                stats["traced"] += idx.size
                stats["excluded"] += int(np.count_nonzero(~conv))
                out[idx] = 0.0
                for j, i in enumerate(idx):
                    if conv[j]:
                        Xs, Ws = _start_state(xi[i:i + 1], zeta[j:j + 1], table)
                        out[i] = _ray_crossings(g, Xs[0], Ws[0], patch, table, dt)
            return out

    else:
        raise ValueError(f"unknown method {method!r}")

    est = sharded_moments(fn, n, seed, f"g_crofton_{method}", shards).estimate(scale=mass)
    if stats["excluded"] > max_excluded * n:
        raise ShootingError(f"{stats['excluded']} of {n} samples failed to converge")
    return CroftonResult(est, math.pi * ag, ag, stats["traced"], stats["excluded"])
