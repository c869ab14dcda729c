"""Pure NumPy eigensolver kernels.

Householder tridiagonalization with accumulated transforms, followed by
implicit-shift QL on the tridiagonal form. Same algorithm as the
compiled core; inner loops are expressed as whole-row NumPy operations
instead of C loops, so this lane stays usable (if slower) when the
extension is not built.

Conventions shared with the compiled core:
  tred2(a) consumes a full symmetric matrix in place. It returns
  (d, e, hh) where d is the tridiagonal diagonal, e the subdiagonal
  stored in e[1:], and on exit row i of `a` holds the i-th scaled
  Householder vector with squared norm hh[i] (hh[i] = 0 marks a skipped
  reflection).
  accumulate_q(a, hh) rebuilds the orthogonal Q from those vectors.
  tql2(d, e, z) diagonalizes (d, e) in place, rotating the columns of z;
  eigenvalues come out unordered.
"""
import numpy as np

EPS = np.finfo(np.float64).eps
MAX_QL_SWEEPS = 50


def tred2(a):
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    hh = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i
        scale = float(np.sum(np.abs(a[i, :l])))
        if scale == 0.0 or l == 1:
            e[i] = a[i, l - 1]
            continue
        u = a[i, :l] / scale
        h = float(u @ u)
        f = u[l - 1]
        g = -np.sqrt(h) if f >= 0 else np.sqrt(h)
        e[i] = scale * g
        h -= f * g
        u[l - 1] = f - g
        p = (a[:l, :l] @ u) / h
        k = float(p @ u) / (2.0 * h)
        q = p - k * u
        a[:l, :l] -= np.multiply.outer(q, u) + np.multiply.outer(u, q)
        a[i, :l] = u
        hh[i] = h
    d[:] = np.diag(a)
    return d, e, hh


def accumulate_q(a, hh):
    n = a.shape[0]
    z = np.zeros((n, n))
    z[0, 0] = 1.0
    for i in range(1, n):
        if hh[i] != 0.0:
            u = a[i, :i]
            g = u @ z[:i, :i]
            z[:i, :i] -= np.multiply.outer(u, g / hh[i])
        z[i, i] = 1.0
    return z


def _apply_rotations(z, rot, l):
    # Column pairs rotate in recorded order; (c, s) acts on (i, i+1).
    # Both new columns must come from the old ones, so stage one of them.
    for j, (c, s) in enumerate(rot):
        i = l + len(rot) - 1 - j
        staged = s * z[:, i] + c * z[:, i + 1]
        z[:, i] = c * z[:, i] - s * z[:, i + 1]
        z[:, i + 1] = staged


def tql2(d, e, z):
    n = len(d)
    if n == 1:
        return
    e[:-1] = e[1:]
    e[-1] = 0.0
    for l in range(n):
        sweeps = 0
        while True:
            for m in range(l, n - 1):
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
            else:
                m = n - 1
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_QL_SWEEPS:
                raise RuntimeError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = c = 1.0
            p = 0.0
            rot = []
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                rot.append((c, s))
            _apply_rotations(z, rot, (i + 1) if underflow else l)
            if underflow and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
