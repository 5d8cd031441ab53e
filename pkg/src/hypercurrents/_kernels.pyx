# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contract as the numpy fallback in _pykernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, cosh, sinh, cos, sin, fabs, M_PI

cnp.import_array()

DEF LN2 = 0.6931471805599453


cdef inline void psi_grad(const double* x, const double[:, ::1] b, double phi0,
                          double* psi, double* g) noexcept nogil:
    cdef double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    cdef double den = 1.0 - r2
    cdef double dx0, dx1, dx2, d2, u, q, q5, c, k
    cdef Py_ssize_t j
    psi[0] = phi0 + LN2 - log(den)
    g[0] = 2.0 * x[0] / den
    g[1] = 2.0 * x[1] / den
    g[2] = 2.0 * x[2] / den
    for j in range(b.shape[0]):
        if b[j, 5] == 0.0:
            continue
        dx0 = x[0] - b[j, 0]
        dx1 = x[1] - b[j, 1]
        dx2 = x[2] - b[j, 2]
        d2 = dx0 * dx0 + dx1 * dx1 + dx2 * dx2
        k = b[j, 3]
        u = k * d2 / den
        if u >= b[j, 4]:
            continue
        q = 1.0 - u / b[j, 4]
        q5 = q * q * q * q * q
        psi[0] += b[j, 5] * q5 * q
        c = -6.0 * b[j, 5] / b[j, 4] * q5 * k
        g[0] += c * (2.0 * dx0 / den + 2.0 * d2 / (den * den) * x[0])
        g[1] += c * (2.0 * dx1 / den + 2.0 * d2 / (den * den) * x[1])
        g[2] += c * (2.0 * dx2 / den + 2.0 * d2 / (den * den) * x[2])


cdef inline void accel(const double* x, const double* v, const double[:, ::1] b,
                       double phi0, double* a) noexcept nogil:
    cdef double psi
    cdef double g[3]
    psi_grad(x, b, phi0, &psi, g)
    cdef double gv = g[0] * v[0] + g[1] * v[1] + g[2] * v[2]
    cdef double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    cdef int i
    for i in range(3):
        a[i] = -2.0 * gv * v[i] + vv * g[i]


cdef inline bint receding(const double* x, const double* v, const double[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t j
    cdef double den, dx0, dx1, dx2, d2, u, du
    if b.shape[0] == 0:
        return False
    den = 1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    for j in range(b.shape[0]):
        dx0 = x[0] - b[j, 0]
        dx1 = x[1] - b[j, 1]
        dx2 = x[2] - b[j, 2]
        d2 = dx0 * dx0 + dx1 * dx1 + dx2 * dx2
        u = b[j, 3] * d2 / den
        if u < b[j, 4]:
            return False
        du = ((2.0 * dx0 / den + 2.0 * d2 / (den * den) * x[0]) * v[0]
              + (2.0 * dx1 / den + 2.0 * d2 / (den * den) * x[1]) * v[1]
              + (2.0 * dx2 / den + 2.0 * d2 / (den * den) * x[2]) * v[2])
        if du < 0.0:
            return False
    return True


cdef inline void rk4_step(double* x, double* v, double h, const double[:, ::1] b,
                          double phi0, double* xn, double* vn) noexcept nogil:
    cdef double k1x[3]
    cdef double k1v[3]
    cdef double k2v[3]
    cdef double k3v[3]
    cdef double k4v[3]
    cdef double x2[3]
    cdef double v2[3]
    cdef double x3[3]
    cdef double v3[3]
    cdef double x4[3]
    cdef double v4[3]
    cdef int i
    accel(x, v, b, phi0, k1v)
    for i in range(3):
        x2[i] = x[i] + 0.5 * h * v[i]
        v2[i] = v[i] + 0.5 * h * k1v[i]
    accel(x2, v2, b, phi0, k2v)
    for i in range(3):
        x3[i] = x[i] + 0.5 * h * v2[i]
        v3[i] = v[i] + 0.5 * h * k2v[i]
    accel(x3, v3, b, phi0, k3v)
    for i in range(3):
        x4[i] = x[i] + h * v3[i]
        v4[i] = v[i] + h * k3v[i]
    accel(x4, v4, b, phi0, k4v)
    for i in range(3):
        xn[i] = x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])
        vn[i] = v[i] + h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])


cdef inline double renorm(const double* x, double* v, const double[:, ::1] b,
                          double phi0) noexcept nogil:
    cdef double psi
    cdef double g[3]
    psi_grad(x, b, phi0, &psi, g)
    cdef double s = exp(psi) * sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    v[0] /= s
    v[1] /= s
    v[2] /= s
    return fabs(s - 1.0)


def rk4_batch(double[:, ::1] x, double[:, ::1] v, const double[::1] budget, double dt,
              bumps, double phi0, bint stop_receding, double chart_r2, double drift_tol):
    cdef const double[:, ::1] b = np.ascontiguousarray(np.asarray(bumps, dtype=float).reshape(-1, 6))
    cdef Py_ssize_t n = x.shape[0]
    t_np = np.zeros(n)
    st_np = np.zeros(n, dtype=np.int32)
    dr_np = np.zeros(n)
    cdef double[::1] t = t_np
    cdef int[::1] status = st_np
    cdef double[::1] drift = dr_np
    cdef Py_ssize_t i
    cdef int k
    cdef double h, d, left
    cdef double xn[3]
    cdef double vn[3]
    with nogil:
        for i in range(n):
            while True:
                if stop_receding and receding(&x[i, 0], &v[i, 0], b):
                    status[i] = 1
                    break
                left = budget[i] - t[i]
                if left <= 1e-14:
                    status[i] = 0
                    break
                h = dt if dt < left else left
                rk4_step(&x[i, 0], &v[i, 0], h, b, phi0, xn, vn)
                if xn[0] * xn[0] + xn[1] * xn[1] + xn[2] * xn[2] >= chart_r2:
                    status[i] = 2
                    break
                d = renorm(xn, vn, b, phi0)
                if d > drift[i]:
                    drift[i] = d
                if d > drift_tol:
                    status[i] = 3
                    break
                for k in range(3):
                    x[i, k] = xn[k]
                    v[i, k] = vn[k]
                t[i] += h
    return t_np, st_np, dr_np


def rk4_path(x0, v0, Py_ssize_t n_steps, double dt, bumps, double phi0,
             bint stop_receding, double chart_r2, double drift_tol):
    cdef const double[:, ::1] b = np.ascontiguousarray(np.asarray(bumps, dtype=float).reshape(-1, 6))
    xs_np = np.zeros((n_steps + 1, 3))
    vs_np = np.zeros((n_steps + 1, 3))
    cdef double[:, ::1] xs = xs_np
    cdef double[:, ::1] vs = vs_np
    cdef double x[3]
    cdef double v[3]
    cdef double xn[3]
    cdef double vn[3]
    cdef Py_ssize_t i
    cdef int k
    cdef int status = 0
    cdef double d, drift = 0.0
    for k in range(3):
        x[k] = float(x0[k])
        v[k] = float(v0[k])
        xs[0, k] = x[k]
        vs[0, k] = v[k]
    i = 0
    with nogil:
        while i < n_steps:
            if stop_receding and receding(x, v, b):
                status = 1
                break
            rk4_step(x, v, dt, b, phi0, xn, vn)
            if xn[0] * xn[0] + xn[1] * xn[1] + xn[2] * xn[2] >= chart_r2:
                status = 2
                break
            d = renorm(xn, vn, b, phi0)
            if d > drift:
                drift = d
            if d > drift_tol:
                status = 3
                break
            for k in range(3):
                x[k] = xn[k]
                v[k] = vn[k]
                xs[i + 1, k] = x[k]
                vs[i + 1, k] = v[k]
            i += 1
    return xs_np, vs_np, i, status, drift


def polyline_crossings(const double[:, ::1] normals, const double[:, ::1] verts):
    cdef Py_ssize_t n = normals.shape[0], m = verts.shape[0]
    out_np = np.zeros(n, dtype=np.int64)
    cdef long long[::1] out = out_np
    cdef Py_ssize_t i, j
    cdef double s
    cdef bint prev, cur
    cdef long long c
    if m < 2:
        return out_np
    with nogil:
        for i in range(n):
            c = 0
            for j in range(m):
                s = (-normals[i, 0] * verts[j, 0] + normals[i, 1] * verts[j, 1]
                     + normals[i, 2] * verts[j, 2] + normals[i, 3] * verts[j, 3])
                cur = s < 0
                if j > 0 and cur != prev:
                    c += 1
                prev = cur
            out[i] = c
    return out_np


def disk_union_area(const double[:, ::1] f, const double[:, ::1] e1, const double[:, ::1] e2,
                    const double[::1] rmax, centers, cosh_radii, int m):
    cdef const double[:, ::1] c = np.ascontiguousarray(np.asarray(centers, dtype=float).reshape(-1, 4))
    cdef const double[::1] cr = np.ascontiguousarray(np.asarray(cosh_radii, dtype=float))
    cdef Py_ssize_t n = f.shape[0], nc = c.shape[0]
    out_np = np.zeros(n)
    cdef double[::1] out = out_np
    cth_np = np.cos(2 * np.pi * (np.arange(m) + 0.5) / m)
    sth_np = np.sin(2 * np.pi * (np.arange(m) + 0.5) / m)
    cdef const double[::1] cth = cth_np
    cdef const double[::1] sth = sth_np
    af_np = np.zeros(nc)
    a1_np = np.zeros(nc)
    a2_np = np.zeros(nc)
    cdef double[::1] af = af_np
    cdef double[::1] a1 = a1_np
    cdef double[::1] a2 = a2_np
    cdef Py_ssize_t i, ir, it, k
    cdef double dr, r, ch, sh, acc, val
    cdef bint inside
    with nogil:
        for i in range(n):
            if rmax[i] <= 0:
                continue
            for k in range(nc):
                af[k] = c[k, 0] * f[i, 0] - c[k, 1] * f[i, 1] - c[k, 2] * f[i, 2] - c[k, 3] * f[i, 3]
                a1[k] = c[k, 0] * e1[i, 0] - c[k, 1] * e1[i, 1] - c[k, 2] * e1[i, 2] - c[k, 3] * e1[i, 3]
                a2[k] = c[k, 0] * e2[i, 0] - c[k, 1] * e2[i, 1] - c[k, 2] * e2[i, 2] - c[k, 3] * e2[i, 3]
            dr = rmax[i] / m
            acc = 0.0
            for ir in range(m):
                r = (ir + 0.5) * dr
                ch = cosh(r)
                sh = sinh(r)
                for it in range(m):
                    inside = False
                    for k in range(nc):
                        val = ch * af[k] + sh * (cth[it] * a1[k] + sth[it] * a2[k])
                        if val < cr[k]:
                            inside = True
                            break
                    if inside:
                        acc += sh
            out[i] = acc * dr * (2.0 * M_PI / m)
    return out_np
