# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: exponential sums, triple geometry, disk evaluation.

Mirrors trilab._ref; streaming loops instead of numpy temporaries.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, sin, sqrt, j0, j1, M_PI

BACKEND = "compiled"

cdef double TWO_PI = 2.0 * M_PI


def expsum(double[:, ::1] points, double[::1] weights, double[:, ::1] freqs):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1], m = freqs.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ph, re, im
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    for j in range(m):
        re = 0.0
        im = 0.0
        for i in range(n):
            ph = 0.0
            for k in range(d):
                ph += points[i, k] * freqs[j, k]
            ph *= TWO_PI
            re += weights[i] * cos(ph)
            im += weights[i] * sin(ph)
        ov[j] = re - 1j * im
    return out


def triangle_geom(double[:, ::1] x, double[:, ::1] y, double[:, ::1] z):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, k
    cdef double uu, vv, t, r, am, bm, alpha, uk, vk, ak, bk
    t_out = np.empty(n)
    r_out = np.empty(n)
    a_out = np.empty(n)
    deg = np.zeros(n, dtype=np.uint8)
    cdef double[::1] tv = t_out, rv = r_out, av = a_out
    cdef cnp.uint8_t[::1] dv = deg
    for i in range(n):
        uu = 0.0
        vv = 0.0
        for k in range(d):
            uk = x[i, k] - z[i, k]
            vk = y[i, k] - z[i, k]
            uu += uk * uk
            vv += vk * vk
        t = sqrt(uu)
        r = sqrt(vv)
        am = 0.0
        bm = 0.0
        for k in range(d):
            uk = x[i, k] - z[i, k]
            vk = y[i, k] - z[i, k]
            ak = r * uk - t * vk
            bk = r * uk + t * vk
            am += ak * ak
            bm += bk * bk
        alpha = 2.0 * atan2(sqrt(am), sqrt(bm))
        tv[i] = t
        rv[i] = r
        av[i] = alpha
        if t == 0.0 or r == 0.0 or alpha < 1e-12 or alpha > M_PI - 1e-12:
            dv[i] = 1
    return t_out, r_out, a_out, deg


def pairwise_geom(double[:, ::1] p1, double[:, ::1] p2, double[::1] z):
    cdef Py_ssize_t n1 = p1.shape[0], n2 = p2.shape[0], d = p1.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double uu, vv, am, bm, ak, bk, alpha, ti, rj
    t_out = np.empty(n1)
    r_out = np.empty(n2)
    u = np.empty((n1, d))
    v = np.empty((n2, d))
    a_out = np.empty((n1, n2))
    deg = np.zeros((n1, n2), dtype=np.uint8)
    cdef double[::1] tv = t_out, rv = r_out
    cdef double[:, ::1] uv = u, vvw = v, av = a_out
    cdef cnp.uint8_t[:, ::1] dv = deg
    for i in range(n1):
        uu = 0.0
        for k in range(d):
            uv[i, k] = p1[i, k] - z[k]
            uu += uv[i, k] * uv[i, k]
        tv[i] = sqrt(uu)
    for j in range(n2):
        vv = 0.0
        for k in range(d):
            vvw[j, k] = p2[j, k] - z[k]
            vv += vvw[j, k] * vvw[j, k]
        rv[j] = sqrt(vv)
    for i in range(n1):
        ti = tv[i]
        for j in range(n2):
            rj = rv[j]
            am = 0.0
            bm = 0.0
            for k in range(d):
                ak = rj * uv[i, k] - ti * vvw[j, k]
                bk = rj * uv[i, k] + ti * vvw[j, k]
                am += ak * ak
                bm += bk * bk
            alpha = 2.0 * atan2(sqrt(am), sqrt(bm))
            av[i, j] = alpha
            if ti == 0.0 or rj == 0.0 or alpha < 1e-12 or alpha > M_PI - 1e-12:
                dv[i, j] = 1
    return t_out, r_out, a_out, deg


def sigma_pair_phase(double[:, ::1] x, double[:, ::1] y,
                     double[:, ::1] xis, double[:, ::1] etas):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], m = xis.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ph, c, s
    sc = np.zeros(m)
    ss = np.zeros(m)
    sc2 = np.zeros(m)
    ss2 = np.zeros(m)
    cdef double[::1] scv = sc, ssv = ss, sc2v = sc2, ss2v = ss2
    for j in range(m):
        for i in range(n):
            ph = 0.0
            for k in range(d):
                ph += x[i, k] * xis[j, k] + y[i, k] * etas[j, k]
            ph *= TWO_PI
            c = cos(ph)
            s = sin(ph)
            scv[j] += c
            ssv[j] += s
            sc2v[j] += c * c
            ss2v[j] += s * s
    return sc, ss, sc2, ss2


cdef inline double _envelope(double rho, int d) nogil:
    cdef double zz = TWO_PI * rho
    if d == 2:
        return cos(zz)
    if d == 3:
        return j0(zz)
    if d == 4:
        if zz < 1e-12:
            return 1.0
        return sin(zz) / zz
    # d == 5
    if zz < 1e-12:
        return 1.0
    return 2.0 * j1(zz) / zz


def disk_strat_eval(double[:, ::1] pts, double[::1] etap, double[::1] kap,
                    double eta_sq, double sin_alpha, int d):
    if d > 5:
        raise NotImplementedError("compiled envelope supports d <= 5")
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t i
    cdef double s, rho, h, acc = 0.0, acc2 = 0.0, arg
    for i in range(n):
        s = pts[i, 0] * etap[0] + pts[i, 1] * etap[1]
        arg = eta_sq - s * s
        if arg < 0.0:
            arg = 0.0
        rho = sin_alpha * sqrt(arg)
        h = _envelope(rho, d) * cos(TWO_PI * (pts[i, 0] * kap[0] + pts[i, 1] * kap[1]))
        acc += h
        acc2 += h * h
    return acc, acc2
