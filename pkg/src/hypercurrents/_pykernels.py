"""Pure numpy implementations of the hot kernels (fallback backend).

Signatures and results match the compiled ``_kernels`` module. Bump rows are
(cx, cy, cz, k, u_rho, amp) with k = 2 / (1 - |c|^2); a point x is inside
the bump when u = k |x - c|^2 / (1 - |x|^2) < u_rho, i.e. cosh d(x, c) - 1 < u_rho,
and there phi = amp * (1 - u / u_rho)^6. Rows with amp = 0 only mark regions
for the stopping rule.
"""

import numpy as np

OK, RECEDING, CHART_EXIT, REJECTED = 0, 1, 2, 3


def _psi_grad(x, bumps, phi0):
    """psi and grad psi for the chart metric e^{2 psi} |dx|^2, rows of x."""
    r2 = np.einsum("ij,ij->i", x, x)
    den = 1.0 - r2
    psi = phi0 + np.log(2.0) - np.log(den)
    grad = 2.0 * x / den[:, None]
    for cx, cy, cz, k, urho, amp in bumps:
        if amp == 0.0:
            continue
        dx = x - np.array([cx, cy, cz])
        d2 = np.einsum("ij,ij->i", dx, dx)
        u = k * d2 / den
        inside = u < urho
        if not np.any(inside):
            continue
        q = np.where(inside, 1.0 - u / urho, 0.0)
        gu = k * (2.0 * dx / den[:, None] + (2.0 * d2 / den**2)[:, None] * x)
        psi = psi + amp * q**6
        grad = grad - (6.0 * amp / urho * q**5)[:, None] * gu
    return psi, grad


def _accel(x, v, bumps, phi0):
    _, g = _psi_grad(x, bumps, phi0)
    gv = np.einsum("ij,ij->i", g, v)
    vv = np.einsum("ij,ij->i", v, v)
    return -2.0 * gv[:, None] * v + vv[:, None] * g


def _receding(x, v, bumps):
    """True where x is outside every bump support and moving away from each."""
    if len(bumps) == 0:
        return np.zeros(len(x), dtype=bool)
    r2 = np.einsum("ij,ij->i", x, x)
    den = 1.0 - r2
    out = np.ones(len(x), dtype=bool)
    for cx, cy, cz, k, urho, _ in bumps:
        dx = x - np.array([cx, cy, cz])
        d2 = np.einsum("ij,ij->i", dx, dx)
        u = k * d2 / den
        gu = 2.0 * dx / den[:, None] + (2.0 * d2 / den**2)[:, None] * x
        du = np.einsum("ij,ij->i", gu, v)
        out &= (u >= urho) & (du >= 0.0)
    return out


def _step(x, v, h, bumps, phi0):
    k1x, k1v = v, _accel(x, v, bumps, phi0)
    x2, v2 = x + 0.5 * h[:, None] * k1x, v + 0.5 * h[:, None] * k1v
    k2x, k2v = v2, _accel(x2, v2, bumps, phi0)
    x3, v3 = x + 0.5 * h[:, None] * k2x, v + 0.5 * h[:, None] * k2v
    k3x, k3v = v3, _accel(x3, v3, bumps, phi0)
    x4, v4 = x + h[:, None] * k3x, v + h[:, None] * k3v
    k4x, k4v = v4, _accel(x4, v4, bumps, phi0)
    hx = (h / 6.0)[:, None]
    return x + hx * (k1x + 2 * k2x + 2 * k3x + k4x), v + hx * (k1v + 2 * k2v + 2 * k3v + k4v)


def _renorm(x, v, bumps, phi0):
    psi, _ = _psi_grad(x, bumps, phi0)
    speed = np.exp(psi) * np.linalg.norm(v, axis=1)
    return v / speed[:, None], np.abs(speed - 1.0)


def rk4_batch(x, v, budget, dt, bumps, phi0, stop_receding, chart_r2, drift_tol):
    """Advance many trajectories in place; returns (t_done, status, max_drift)."""
    n = len(x)
    bumps = np.asarray(bumps, dtype=float).reshape(-1, 6)
    t = np.zeros(n)
    status = np.full(n, -1, dtype=np.int32)
    drift = np.zeros(n)
    active = np.arange(n)
    while active.size:
        xa, va = x[active], v[active]
        if stop_receding:
            rec = _receding(xa, va, bumps)
            status[active[rec]] = RECEDING
        else:
            rec = np.zeros(active.size, dtype=bool)
        left = budget[active] - t[active]
        done = left <= 1e-14
        status[active[done & ~rec]] = OK
        keep = ~(rec | done)
        active = active[keep]
        if not active.size:
            break
        xa, va = xa[keep], va[keep]
        h = np.minimum(dt, left[keep])
        xn, vn = _step(xa, va, h, bumps, phi0)
        exited = np.einsum("ij,ij->i", xn, xn) >= chart_r2
        vn, dr = _renorm(np.where(exited[:, None], xa, xn), vn, bumps, phi0)
        drift[active] = np.maximum(drift[active], np.where(exited, 0.0, dr))
        bad = dr > drift_tol
        status[active[exited]] = CHART_EXIT
        status[active[~exited & bad]] = REJECTED
        ok = ~exited & ~bad
        x[active[ok]] = xn[ok]
        v[active[ok]] = vn[ok]
        t[active[ok]] += h[ok]
        active = active[ok]
    return t, status, drift


def rk4_path(x0, v0, n_steps, dt, bumps, phi0, stop_receding, chart_r2, drift_tol):
    """Fixed-step trajectory; returns (xs, vs, n_done, status, max_drift)."""
    bumps = np.asarray(bumps, dtype=float).reshape(-1, 6)
    xs = np.zeros((n_steps + 1, 3))
    vs = np.zeros((n_steps + 1, 3))
    x = np.array(x0, dtype=float).reshape(1, 3)
    v = np.array(v0, dtype=float).reshape(1, 3)
    xs[0], vs[0] = x[0], v[0]
    h = np.array([dt])
    drift = 0.0
    for i in range(n_steps):
        if stop_receding and _receding(x, v, bumps)[0]:
            return xs, vs, i, RECEDING, drift
        xn, vn = _step(x, v, h, bumps, phi0)
        if float(xn[0] @ xn[0]) >= chart_r2:
            return xs, vs, i, CHART_EXIT, drift
        vn, dr = _renorm(xn, vn, bumps, phi0)
        drift = max(drift, float(dr[0]))
        if dr[0] > drift_tol:
            return xs, vs, i, REJECTED, drift
        x, v = xn, vn
        xs[i + 1], vs[i + 1] = x[0], v[0]
    return xs, vs, n_steps, OK, drift


def polyline_crossings(normals, verts):
    """Sign changes of <vertex, v> along a polyline, for each plane normal v."""
    normals = np.asarray(normals, dtype=float)
    verts = np.asarray(verts, dtype=float)
    if len(verts) < 2:
        return np.zeros(len(normals), dtype=np.int64)
    s = -np.outer(normals[:, 0], verts[:, 0]) + normals[:, 1:] @ verts[:, 1:].T
    neg = s < 0
    return np.count_nonzero(neg[:, 1:] != neg[:, :-1], axis=1).astype(np.int64)


def disk_union_area(f, e1, e2, rmax, centers, cosh_radii, m):
    """Polar midpoint quadrature of area(disk ∩ union of balls) for each plane.

    The disk of plane i is centered at f[i] with radius rmax[i] and spanned by
    the orthonormal tangent pair (e1[i], e2[i]).
    """
    n = len(f)
    out = np.zeros(n)
    centers = np.asarray(centers, dtype=float).reshape(-1, 4)
    cr = np.asarray(cosh_radii, dtype=float)
    j = (np.arange(m) + 0.5) / m
    th = 2 * np.pi * j
    cth, sth = np.cos(th), np.sin(th)
    for i in range(n):
        if rmax[i] <= 0:
            continue
        dr = rmax[i] / m
        r = j * rmax[i]
        ch, sh = np.cosh(r), np.sinh(r)
        # cosh-distance from each node to each center: -<x, c>
        af = -(-centers[:, 0] * f[i, 0] + centers[:, 1:] @ f[i, 1:])
        a1 = -(-centers[:, 0] * e1[i, 0] + centers[:, 1:] @ e1[i, 1:])
        a2 = -(-centers[:, 0] * e2[i, 0] + centers[:, 1:] @ e2[i, 1:])
        ang = cth[:, None] * a1[None, :] + sth[:, None] * a2[None, :]
        c = ch[:, None, None] * af[None, None, :] + sh[:, None, None] * ang[None, :, :]
        inside = np.any(c < cr[None, None, :], axis=2)
        out[i] = dr * (2 * np.pi / m) * np.sum(sh[:, None] * inside)
    return out
