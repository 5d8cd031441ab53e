"""Busemann conjugacy between the g and gbar geodesic flows.

For a g-geodesic through v with forward endpoint xi+, s(t, v) is the Busemann
displacement toward xi+ after g-time t, r(v) is its average over [0, tau], and
T(t, v) = r(g^t v) + s(t, v) - r(v). The map chi sends v to the gbar-geodesic
with the same endpoints, placed on the horosphere of pi(v) about xi+ and then
flowed by r(v).

Every quantity is read off one dense trajectory. Along a single g-geodesic the
forward endpoint is fixed, so s(u, g^t v) = S(t + u) - S(t) with S(u) = s(u, v),
which gives T(t) = (I(t, t + tau) - I(0, tau)) / tau with I the integral of S.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import EndpointResolutionError
from .lorentz import dist, mdot, transport
from .metrics import (
    ConformalMetric,
    FlowState,
    advance,
    dense_track,
    forward_endpoint,
    hyperboloid_to_state,
    state_to_hyperboloid,
)
from .rng import generator

TRACK_DT = 5e-3
ENDPOINT_DT = 1e-2
PSI_STEP = 0.1


def _as_pair(v):
    if isinstance(v, FlowState):
        X, W = state_to_hyperboloid(v)
        return X, W
    X, W = v
    return np.asarray(X, dtype=float).reshape(4), np.asarray(W, dtype=float).reshape(4)


def geodesic_endpoints(g, X, W, dt=ENDPOINT_DT):
    """(backward, forward) endpoints of the g-geodesic through (X, W)."""
    plus = forward_endpoint(g, X, W, dt)[0]
    minus = forward_endpoint(g, X, -W, dt)[0]
    if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
        raise EndpointResolutionError("endpoint is not finite")
    if -mdot(plus, minus) < 1e-12:
        raise EndpointResolutionError("endpoints coincide")
    return minus, plus


def bar_state(X, minus, plus, extra=0.0):
    """gbar-unit state on the geodesic (minus, plus) at the Busemann zero of X about plus,
    flowed by `extra`."""
    c = -mdot(minus, plus)
    a = 1.0 / math.sqrt(2.0 * c)
    t = math.log(a * c / -mdot(X, plus)) + extra
    e = math.exp(t)
    return a * (minus / e + plus * e), a * (-minus / e + plus * e)


@dataclass
class Track:
    """Dense g-trajectory with Busemann values toward its forward endpoint."""

    u: np.ndarray
    X: np.ndarray
    Xdot: np.ndarray
    minus: np.ndarray
    plus: np.ndarray
    S: CubicHermiteSpline

    @classmethod
    def build(cls, g, v, t_lo, t_hi, dt=TRACK_DT, endpoint_dt=ENDPOINT_DT):
        X0, W0 = _as_pair(v)
        minus, plus = geodesic_endpoints(g, X0, W0, endpoint_dt)
        parts_u, parts_X, parts_V = [], [], []
        if t_lo < 0:
            k = max(1, math.ceil(-t_lo / dt - 1e-9))
            Xb, Vb = dense_track(g, X0, W0, k, t_lo / k)
            parts_u.append(np.linspace(t_lo, 0.0, k + 1)[:-1])
            parts_X.append(Xb[::-1][:-1])
            parts_V.append(Vb[::-1][:-1])
        k = max(1, math.ceil(t_hi / dt - 1e-9))
        Xf, Vf = dense_track(g, X0, W0, k, t_hi / k)
        parts_u.append(np.linspace(0.0, t_hi, k + 1))
        parts_X.append(Xf)
        parts_V.append(Vf)
        u = np.concatenate(parts_u)
        X = np.vstack(parts_X)
        V = np.vstack(parts_V)
        p = mdot(X, plus)
        S = np.log(mdot(X0, plus) / p)
        dS = -mdot(V, plus) / p
        return cls(u, X, V, minus, plus, CubicHermiteSpline(u, S, dS))

    def s(self, t):
        return self.S(t)

    def integral(self, a, b):
        return float(self.S.integrate(a, b))


class TimeChange:
    """Tabulation of s, r, T and Psi for one g-unit vector v."""

    def __init__(self, g, v, tau=1.0, t_max=3.0, dt=TRACK_DT, endpoint_dt=ENDPOINT_DT):
        if tau <= 0:
            raise ValueError("tau must be positive")
        self.g = g
        self.tau = float(tau)
        self.t_max = float(t_max)
        self.track = Track.build(g, v, -2 * PSI_STEP, t_max + tau, dt, endpoint_dt)
        self._i0 = self.track.integral(0.0, self.tau)

    @property
    def endpoints(self):
        return self.track.minus, self.track.plus

    def s(self, t):
        return self.track.s(t)

    @property
    def r0(self):
        """r(v)."""
        return self._i0 / self.tau

    def r(self, t):
        """r(g^t v)."""
        return self.track.integral(t, t + self.tau) / self.tau - float(self.s(t))

    def T(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([self.track.integral(x, x + self.tau) for x in t]) - self._i0
        return out / self.tau

    def psi_at(self, t=0.0):
        """Psi(g^t v) = (S(t + tau) - S(t)) / tau."""
        return (self.s(t + self.tau) - self.s(t)) / self.tau

    def psi(self, h=PSI_STEP):
        """Psi(v) by centered differences of T at 0 with one Richardson step."""
        d1 = (self.T(h)[0] - self.T(-h)[0]) / (2 * h)
        d2 = (self.T(h / 2)[0] - self.T(-h / 2)[0]) / h
        return (4 * d2 - d1) / 3

    def chi(self):
        """gbar-unit (X, W) of chi(v)."""
        return bar_state(self.track.X[self._zero], self.track.minus, self.track.plus, self.r0)

    @property
    def _zero(self):
        return int(np.argmin(np.abs(self.track.u)))


def time_change(g, v, t_grid, tau=1.0, dt=TRACK_DT):
    """TimeChange for v with values tabulated on t_grid (attributes s_grid, T_grid)."""
    t_grid = np.asarray(t_grid, dtype=float)
    tc = TimeChange(g, v, tau, max(float(np.max(t_grid)), 0.0), dt)
    tc.t_grid = t_grid
    tc.s_grid = tc.s(t_grid)
    tc.T_grid = tc.T(t_grid)
    return tc


def chi(g, v, tau=1.0, dt=TRACK_DT):
    """chi(v) as a gbar-unit FlowState (chart coordinates)."""
    Y, U = TimeChange(g, v, tau, 0.0, dt).chi()
    s = hyperboloid_to_state(ConformalMetric(), Y, U, metric="gbar")
    s.info.update(X=Y, W=U)
    return s


def chi_pair(g, v, tau=1.0, dt=TRACK_DT):
    """chi(v) as a hyperboloid pair (X, W)."""
    return TimeChange(g, v, tau, 0.0, dt).chi()


def phase_distance(a, b):
    """Position distance plus tangent angle after parallel transport."""
    (X1, W1), (X2, W2) = a, b
    d = float(dist(X1, X2))
    Wt = transport(W1, X1, X2)
    e = Wt / math.sqrt(mdot(Wt, Wt)) - W2 / math.sqrt(mdot(W2, W2))
    chord = math.sqrt(max(float(mdot(e, e)), 0.0))
    return d + 2.0 * math.asin(min(1.0, 0.5 * chord))


def bar_flow(X, W, t):
    return math.cosh(t) * X + math.sinh(t) * W, math.sinh(t) * X + math.cosh(t) * W


def conjugacy_residual(g, v, t, tau=1.0, dt=TRACK_DT, flow_dt=1e-2):
    """Residual between gbar^{T(t,v)}(chi(v)) and chi(g^t v).

    g^t v is produced by a separate integration and chi is recomputed there from
    scratch, endpoints included.
    """
    X, W = _as_pair(v)
    tc = TimeChange(g, (X, W), tau, t, dt)
    lhs = bar_flow(*tc.chi(), float(tc.T(t)[0]))
    X2, W2 = advance(g, X, W, t, flow_dt)
    rhs = chi_pair(g, (X2[0], W2[0]), tau, dt)
    return phase_distance(lhs, rhs)


def cocycle_residual(g, v, ts, ss, tau=1.0, dt=TRACK_DT, flow_dt=1e-2):
    """max |T(t+s, v) - T(t, g^s v) - T(s, v)| over the grid ts x ss."""
    X, W = _as_pair(v)
    ts = np.asarray(ts, dtype=float)
    ss = np.asarray(ss, dtype=float)
    base = TimeChange(g, (X, W), tau, float(ts.max() + ss.max()), dt)
    worst = 0.0
    for s in ss:
        Xs, Ws = advance(g, X, W, s, flow_dt)
        shifted = TimeChange(g, (Xs[0], Ws[0]), tau, float(ts.max()), dt)
        res = base.T(ts + s) - shifted.T(ts) - base.T(s)[0]
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def sample_states(rng, n, radius):
    """Points uniform in gbar volume on B_radius(o) with uniform gbar-unit directions."""
    from .kinematic import random_tangent_units, sample_ball_volume

    X = sample_ball_volume(rng, n, radius)
    return X, random_tangent_units(rng, X)


def bounded_distance_check(g, n, radius, tau=1.0, seed=0, dt=TRACK_DT):
    """max over n sampled v in B_radius(o) of d(pi(chi(v)), pi(v))."""
    X, W = sample_states(generator(seed, "bounded_distance"), n, radius)
    worst = 0.0
    for x, w in zip(X, W):
        Y, _ = chi_pair(g, (x, w), tau, dt)
        worst = max(worst, float(dist(Y, x)))
    return worst


def psi_length_identity(g, v, t, tau=1.0, dt=TRACK_DT, m=64):
    """(integral over [0, t] of Psi(g^s v) ds, s(t, v)) and the bound 2 sup|r| on their gap."""
    tc = TimeChange(g, v, tau, t, dt)
    x, w = np.polynomial.legendre.leggauss(m)
    nodes = 0.5 * t * (x + 1.0)
    lhs = 0.5 * t * float(np.sum(w * tc.psi_at(nodes)))
    rs = [tc.r(u) for u in np.linspace(0.0, t, 33)]
    return lhs, float(tc.s(t)), 2.0 * max(abs(r) for r in rs)


def holder_probe(g, n, radius, scales=(1e-1, 3e-2, 1e-2, 3e-3), tau=1.0, seed=0, dt=TRACK_DT):
    """Log-log fit |Psi(v) - Psi(w)| ~ L d(v, w)^alpha over perturbed pairs.

    Returns (L, alpha, distances, differences). Reported only.
    """
    rng = generator(seed, "holder")
    X, W = sample_states(rng, n, radius)
    ds, dp = [], []
    for x, w in zip(X, W):
        p0 = TimeChange(g, (x, w), tau, 0.0, dt).psi_at(0.0)
        for eps in scales:
            z = rng.standard_normal(4)
            z = z + mdot(x, z) * x
            z = z - mdot(w, z) * w
            z = z / math.sqrt(mdot(z, z))
            w2 = math.cos(eps) * w + math.sin(eps) * z
            p1 = TimeChange(g, (x, w2), tau, 0.0, dt).psi_at(0.0)
            ds.append(eps)
            dp.append(abs(float(p1 - p0)))
    ds, dp = np.array(ds), np.array(dp)
    keep = dp > 0
    if keep.sum() < 2:
        return 0.0, 1.0, ds, dp
    alpha, logl = np.polyfit(np.log(ds[keep]), np.log(dp[keep]), 1)
    return float(math.exp(logl)), float(alpha), ds, dp
