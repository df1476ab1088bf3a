# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the numeric hot loops.

Mirrors ``_numpy`` exactly; see that module for the conventions and the
meaning of the ``ok`` flags.  Scalar loops instead of vector ops, which
wins once faces stop fitting in cache and for the many small batches the
continuation solver issues.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, sqrt, isfinite, NAN

cnp.import_array()

BACKEND = "compiled"

REFINE_REL = 1e-8
cdef double _REFINE = 1e-8


cdef inline double _angle_opp(double a, double b, double c) nogil:
    cdef double sa = 0.5 * (b + c - a)
    cdef double sb = 0.5 * (c + a - b)
    cdef double sc = 0.5 * (a + b - c)
    cdef double s = 0.5 * (a + b + c)
    if sa <= 0.0 or sb <= 0.0 or sc <= 0.0:
        return NAN
    return 2.0 * atan2(sqrt(sb * sc), sqrt(s * sa))


cdef inline double _dihedral(double* p, double* q, double* w1, double* w2) nogil:
    """Angle between w1, w2 after removing their components along q - p."""
    cdef double ex = q[0] - p[0]
    cdef double ey = q[1] - p[1]
    cdef double ez = q[2] - p[2]
    cdef double en = sqrt(ex * ex + ey * ey + ez * ez)
    cdef double ax, ay, az, bx, by, bz, d, cx, cy, cz, dot
    ex /= en; ey /= en; ez /= en
    ax = w1[0] - p[0]; ay = w1[1] - p[1]; az = w1[2] - p[2]
    d = ax * ex + ay * ey + az * ez
    ax -= d * ex; ay -= d * ey; az -= d * ez
    bx = w2[0] - p[0]; by = w2[1] - p[1]; bz = w2[2] - p[2]
    d = bx * ex + by * ey + bz * ez
    bx -= d * ex; by -= d * ey; bz -= d * ez
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    dot = ax * bx + ay * by + az * bz
    return atan2(sqrt(cx * cx + cy * cy + cz * cz), dot)


def tri_angles(ell):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e = np.ascontiguousarray(ell, dtype=np.float64)
    cdef Py_ssize_t nf = e.shape[0], f
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nf, 3))
    for f in range(nf):
        out[f, 0] = _angle_opp(e[f, 0], e[f, 1], e[f, 2])
        out[f, 1] = _angle_opp(e[f, 1], e[f, 2], e[f, 0])
        out[f, 2] = _angle_opp(e[f, 2], e[f, 0], e[f, 1])
    return out


def face_pyramids(ell, rad):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e = np.ascontiguousarray(ell, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r = np.ascontiguousarray(rad, dtype=np.float64)
    cdef Py_ssize_t nf = e.shape[0], f, s, t, h, c, u, v
    cdef cnp.ndarray[cnp.int8_t, ndim=1] ok = np.ones(nf, dtype=np.int8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alt2 = np.empty(nf)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gamma = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rho_t = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rho_h = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] phi = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] omega = np.empty((nf, 3))

    cdef double l0, l1, l2, q0, q1, q2, scale, x2, y2sq, y2, xa, ya, a2
    cdef double pts[4][3]
    cdef bint thin
    for f in range(nf):
        l0 = e[f, 0]; l1 = e[f, 1]; l2 = e[f, 2]
        q0 = r[f, 0] * r[f, 0]; q1 = r[f, 1] * r[f, 1]; q2 = r[f, 2] * r[f, 2]
        scale = l0 * l0
        if l1 * l1 > scale: scale = l1 * l1
        if l2 * l2 > scale: scale = l2 * l2
        if q0 > scale: scale = q0
        if q1 > scale: scale = q1
        if q2 > scale: scale = q2

        x2 = (l1 * l1 + l2 * l2 - l0 * l0) / (2.0 * l2)
        y2sq = l1 * l1 - x2 * x2
        thin = y2sq <= _REFINE * scale
        y2 = sqrt(y2sq) if y2sq > 0.0 else 0.0

        xa = (q0 - q1 + l2 * l2) / (2.0 * l2)
        ya = (q0 - q2 + l1 * l1 - 2.0 * xa * x2) / (2.0 * y2) if y2 > 0.0 else NAN
        a2 = q0 - xa * xa - ya * ya
        alt2[f] = a2

        if not isfinite(a2) or thin or a2 <= _REFINE * scale:
            if a2 <= -_REFINE * scale and not thin:
                ok[f] = -1
            else:
                ok[f] = 0

        gamma[f, 0] = _angle_opp(l0, l1, l2)
        gamma[f, 1] = _angle_opp(l1, l2, l0)
        gamma[f, 2] = _angle_opp(l2, l0, l1)
        for s in range(3):
            t = (s + 1) % 3
            h = (s + 2) % 3
            rho_t[f, s] = _angle_opp(r[f, h], r[f, t], e[f, s])
            rho_h[f, s] = _angle_opp(r[f, t], r[f, h], e[f, s])
            phi[f, s] = _angle_opp(e[f, s], r[f, t], r[f, h])

        pts[0][0] = 0.0; pts[0][1] = 0.0; pts[0][2] = 0.0
        pts[1][0] = l2;  pts[1][1] = 0.0; pts[1][2] = 0.0
        pts[2][0] = x2;  pts[2][1] = y2;  pts[2][2] = 0.0
        pts[3][0] = xa;  pts[3][1] = ya
        pts[3][2] = sqrt(a2) if a2 > 0.0 else 0.0

        for s in range(3):
            t = (s + 1) % 3
            h = (s + 2) % 3
            alpha[f, s] = _dihedral(pts[t], pts[h], pts[s], pts[3])
        for c in range(3):
            u = (c + 1) % 3
            v = (c + 2) % 3
            omega[f, c] = _dihedral(pts[3], pts[c], pts[u], pts[v])

    return {
        "ok": ok,
        "alt2": alt2,
        "gamma": gamma,
        "rho_t": rho_t,
        "rho_h": rho_h,
        "phi": phi,
        "alpha": alpha,
        "omega": omega,
    }


def edge_badness(l_ij, l_ik, l_jk, l_il, l_jl, q_i, q_j, q_k, q_l):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a1 = np.ascontiguousarray(l_ij, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a2 = np.ascontiguousarray(l_ik, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a3 = np.ascontiguousarray(l_jk, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a4 = np.ascontiguousarray(l_il, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a5 = np.ascontiguousarray(l_jl, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w1 = np.ascontiguousarray(q_i, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w2 = np.ascontiguousarray(q_j, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w3 = np.ascontiguousarray(q_k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w4 = np.ascontiguousarray(q_l, dtype=np.float64)
    cdef Py_ssize_t n = a1.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double lij, xk, yk2, yk, xl, yl2, yl, ax, ay, ext, val
    for i in range(n):
        lij = a1[i]
        xk = (a2[i] * a2[i] + lij * lij - a3[i] * a3[i]) / (2.0 * lij)
        yk2 = a2[i] * a2[i] - xk * xk
        xl = (a4[i] * a4[i] + lij * lij - a5[i] * a5[i]) / (2.0 * lij)
        yl2 = a4[i] * a4[i] - xl * xl
        if yk2 <= 0.0 or yl2 <= 0.0:
            out[i] = NAN
            continue
        yk = sqrt(yk2)
        yl = -sqrt(yl2)
        ax = (lij * lij - w2[i] + w1[i]) / (2.0 * lij)
        ay = (a2[i] * a2[i] - w3[i] + w1[i] - 2.0 * xk * ax) / (2.0 * yk)
        ext = w1[i] + a4[i] * a4[i] - 2.0 * (xl * ax + yl * ay)
        val = w4[i] - ext
        out[i] = val if isfinite(val) else NAN
    return out


def scatter_add(n, rows, cols, vals):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rr = np.ascontiguousarray(rows, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cc = np.ascontiguousarray(cols, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t m = rr.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((int(n), int(n)))
    for i in range(m):
        out[rr[i], cc[i]] += vv[i]
    return out
