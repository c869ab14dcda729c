# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled eigensolver kernels.

Same Householder + implicit-shift QL algorithm as the pure lane, with
inner loops arranged so every hot pass streams rows of the matrix in
memory order:

  * the symmetric product p = A u is a single sweep over the lower
    triangle that accumulates the row dot product and scatters the
    column contribution into p at once;
  * Q accumulation applies each reflector with two row-streaming passes
    over the growing block instead of column dots;
  * QL rotations are recorded per sweep and replayed row by row, so the
    eigenvector table is traversed once per sweep rather than once per
    rotation.

Input matrices are full symmetric C-contiguous float64; only the lower
triangle is referenced.
"""
import numpy as np

cimport cython
from libc.math cimport fabs, hypot, sqrt

cdef int MAX_QL_SWEEPS = 50

EPS = np.finfo(np.float64).eps
cdef double C_EPS = EPS


def tred2(double[:, ::1] a):
    """Reduce symmetric a to tridiagonal form; returns (d, e, hh).

    On exit row i of a holds the scaled Householder vector of step i and
    hh[i] its squared norm (0 for skipped steps); d and e carry the
    tridiagonal matrix with e[0] unused.
    """
    cdef Py_ssize_t n = a.shape[0]
    d_arr = np.zeros(n)
    e_arr = np.zeros(n)
    hh_arr = np.zeros(n)
    p_arr = np.zeros(n)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[::1] hh = hh_arr
    cdef double[::1] p = p_arr
    cdef Py_ssize_t i, j, k, l
    cdef double scale, h, f, g, kk, s, uj, qj
    for i in range(n - 1, 0, -1):
        l = i
        scale = 0.0
        for k in range(l):
            scale += fabs(a[i, k])
        if scale == 0.0 or l == 1:
            e[i] = a[i, l - 1]
            continue
        h = 0.0
        for k in range(l):
            a[i, k] /= scale
            h += a[i, k] * a[i, k]
        f = a[i, l - 1]
        g = -sqrt(h) if f >= 0.0 else sqrt(h)
        e[i] = scale * g
        h -= f * g
        a[i, l - 1] = f - g
        # p = (lower-triangle symmetric A) u in one row-ordered sweep
        for j in range(l):
            p[j] = 0.0
        for j in range(l):
            uj = a[i, j]
            s = 0.0
            for k in range(j):
                s += a[j, k] * a[i, k]
                p[k] += a[j, k] * uj
            p[j] += s + a[j, j] * uj
        kk = 0.0
        for j in range(l):
            p[j] /= h
            kk += p[j] * a[i, j]
        kk /= 2.0 * h
        for j in range(l):
            p[j] -= kk * a[i, j]
        # rank-2 update of the lower triangle, rows in order
        for j in range(l):
            uj = a[i, j]
            qj = p[j]
            for k in range(j + 1):
                a[j, k] -= uj * p[k] + qj * a[i, k]
        hh[i] = h
    for i in range(n):
        d[i] = a[i, i]
    return d_arr, e_arr, hh_arr


def accumulate_q(double[:, ::1] a, double[::1] hh):
    """Rebuild the accumulated orthogonal Q from stored reflectors."""
    cdef Py_ssize_t n = a.shape[0]
    z_arr = np.zeros((n, n))
    g_arr = np.zeros(n)
    cdef double[:, ::1] z = z_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t i, j, k
    cdef double uk, w
    z[0, 0] = 1.0
    for i in range(1, n):
        if hh[i] != 0.0:
            for j in range(i):
                g[j] = 0.0
            for k in range(i):
                uk = a[i, k]
                if uk != 0.0:
                    for j in range(i):
                        g[j] += uk * z[k, j]
            for k in range(i):
                w = a[i, k] / hh[i]
                if w != 0.0:
                    for j in range(i):
                        z[k, j] -= w * g[j]
        z[i, i] = 1.0
    return z_arr


def tql2(double[::1] d, double[::1] e, double[:, ::1] z):
    """Implicit-shift QL with deferred, row-replayed rotations."""
    cdef Py_ssize_t n = d.shape[0]
    if n == 1:
        return
    cdef Py_ssize_t i, j, k, l, m, base, cnt, sweeps
    cdef double dd, g, r, s, c, p, f, b, zi, zi1
    cdef bint underflow
    cs_arr = np.zeros(n)
    sn_arr = np.zeros(n)
    cdef double[::1] cs = cs_arr
    cdef double[::1] sn = sn_arr
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for j in range(l, n - 1):
                dd = fabs(d[j]) + fabs(d[j + 1])
                if fabs(e[j]) <= C_EPS * dd:
                    m = j
                    break
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_QL_SWEEPS:
                raise RuntimeError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            base = l
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    base = i + 1
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                cs[i] = c
                sn[i] = s
            cnt = m - base
            if cnt > 0:
                for k in range(n):
                    for i in range(m - 1, base - 1, -1):
                        zi = z[k, i]
                        zi1 = z[k, i + 1]
                        z[k, i + 1] = sn[i] * zi + cs[i] * zi1
                        z[k, i] = cs[i] * zi - sn[i] * zi1
            if underflow:
                if base - 1 >= l:
                    continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
