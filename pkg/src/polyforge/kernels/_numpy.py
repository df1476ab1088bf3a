"""Vectorized NumPy backend for the numeric hot loops.

The compiled backend in ``_core.pyx`` implements the same three entry
points with identical semantics; this module is the reference.  All
functions are pure and operate on plain ndarrays so the two backends can
be diffed directly.

Conventions (shared with the rest of the package):

* ``ell[f, s]`` is the length of the side of face ``f`` opposite corner
  ``s``; side ``s`` joins corners ``(s+1)%3`` (tail) and ``(s+2)%3``
  (head).
* ``rad[f, c]`` is the distance from the apex to corner ``c``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

# Faces whose squared altitude (or base height) falls below this fraction
# of the squared data scale are flagged for high-precision recomputation.
REFINE_REL = 1e-8


def _angle_opp(a, b, c):
    """Euclidean angle opposite side ``a`` in triangles (a, b, c), batched.

    Half-angle atan2 form; inputs may be any broadcastable arrays.
    Degenerate inputs produce NaN rather than raising.
    """
    sa = 0.5 * (b + c - a)
    sb = 0.5 * (c + a - b)
    sc = 0.5 * (a + b - c)
    s = 0.5 * (a + b + c)
    with np.errstate(invalid="ignore"):
        num = np.sqrt(np.maximum(sb * sc, 0.0))
        den = np.sqrt(np.maximum(s * sa, 0.0))
        bad = (sa <= 0.0) | (sb <= 0.0) | (sc <= 0.0)
        ang = 2.0 * np.arctan2(num, den)
    return np.where(bad, np.nan, ang)


def tri_angles(ell):
    """Corner angles of each face: out[f, c] is the angle at corner c."""
    ell = np.asarray(ell, dtype=np.float64)
    a = ell[:, 0]
    b = ell[:, 1]
    c = ell[:, 2]
    out = np.empty_like(ell)
    out[:, 0] = _angle_opp(a, b, c)
    out[:, 1] = _angle_opp(b, c, a)
    out[:, 2] = _angle_opp(c, a, b)
    return out


def face_pyramids(ell, rad):
    """Solve every apex pyramid over the given faces.

    Parameters
    ----------
    ell : (F, 3) float array of base side lengths (side s opposite corner s).
    rad : (F, 3) float array of apex distances per corner.

    Returns
    -------
    dict of arrays:
      ok      (F,) int8: 1 solved, 0 needs high-precision refinement,
              -1 no such pyramid (negative squared altitude or bad base).
      alt2    (F,) squared apex altitude over the base plane.
      gamma   (F, 3) base angles per corner.
      rho_t   (F, 3) base-edge/apex angle at the tail corner of side s.
      rho_h   (F, 3) same at the head corner.
      phi     (F, 3) apex angle subtended by side s.
      alpha   (F, 3) dihedral angle along base side s.
      omega   (F, 3) dihedral angle along the apex edge to corner c.

    A face flagged 0 has all of its angle entries unreliable; callers
    recompute those rows at extended precision.  A face flagged -1 is a
    certificate that the pyramid does not exist in exact arithmetic *if*
    the failure margin is resolvable in doubles; margins inside the
    refinement band are flagged 0 instead.
    """
    ell = np.asarray(ell, dtype=np.float64)
    rad = np.asarray(rad, dtype=np.float64)
    nf = ell.shape[0]

    l0, l1, l2 = ell[:, 0], ell[:, 1], ell[:, 2]
    q0, q1, q2 = rad[:, 0] ** 2, rad[:, 1] ** 2, rad[:, 2] ** 2
    scale = np.max(np.concatenate([ell * ell, rad * rad], axis=1), axis=1)

    # Base triangle in the plane: corners P0=(0,0), P1=(l2,0), P2=(x2,y2).
    with np.errstate(invalid="ignore", divide="ignore"):
        x2 = (l1 * l1 + l2 * l2 - l0 * l0) / (2.0 * l2)
        y2sq = l1 * l1 - x2 * x2
        y2 = np.sqrt(np.maximum(y2sq, 0.0))

        # Apex from the three squared distances.
        xa = (q0 - q1 + l2 * l2) / (2.0 * l2)
        ya = (q0 - q2 + l1 * l1 - 2.0 * xa * x2) / (2.0 * y2)
        alt2 = q0 - xa * xa - ya * ya

    ok = np.ones(nf, dtype=np.int8)
    thin_base = y2sq <= REFINE_REL * scale
    low_apex = alt2 <= REFINE_REL * scale
    ok[np.isnan(alt2) | thin_base | low_apex] = 0
    # Clearly impossible in doubles (and the base is healthy enough that
    # the computed altitude is trustworthy): squared altitude far below 0.
    ok[(alt2 <= -REFINE_REL * scale) & ~thin_base] = -1

    alt = np.sqrt(np.maximum(alt2, 0.0))

    gamma = tri_angles(ell)

    # Intrinsic slant angles per side, from the side's flat triangle
    # (r_tail, r_head, ell).  Computing them from lengths keeps the two
    # faces sharing an edge bit-for-bit consistent.
    idx_t = np.array([1, 2, 0])
    idx_h = np.array([2, 0, 1])
    r_t = rad[:, idx_t]
    r_h = rad[:, idx_h]
    rho_t = _angle_opp(r_h, r_t, ell)
    rho_h = _angle_opp(r_t, r_h, ell)
    phi = _angle_opp(ell, r_t, r_h)

    # Dihedral angles need the spatial frame.
    base = np.zeros((nf, 3, 3))
    base[:, 1, 0] = l2
    base[:, 2, 0] = x2
    base[:, 2, 1] = y2
    apex = np.stack([xa, ya, alt], axis=1)

    alpha = np.empty((nf, 3))
    omega = np.empty((nf, 3))
    with np.errstate(invalid="ignore", divide="ignore"):
        for s in range(3):
            t = (s + 1) % 3
            h = (s + 2) % 3
            pt = base[:, t]
            edge = base[:, h] - pt
            edge /= np.linalg.norm(edge, axis=1, keepdims=True)
            wing_b = base[:, s] - pt
            wing_a = apex - pt
            wing_b -= np.sum(wing_b * edge, axis=1, keepdims=True) * edge
            wing_a -= np.sum(wing_a * edge, axis=1, keepdims=True) * edge
            cross = np.cross(wing_a, wing_b)
            alpha[:, s] = np.arctan2(
                np.linalg.norm(cross, axis=1), np.sum(wing_a * wing_b, axis=1)
            )
        for c in range(3):
            u = (c + 1) % 3
            v = (c + 2) % 3
            edge = base[:, c] - apex
            edge /= np.linalg.norm(edge, axis=1, keepdims=True)
            wing_u = base[:, u] - apex
            wing_v = base[:, v] - apex
            wing_u -= np.sum(wing_u * edge, axis=1, keepdims=True) * edge
            wing_v -= np.sum(wing_v * edge, axis=1, keepdims=True) * edge
            cross = np.cross(wing_u, wing_v)
            omega[:, c] = np.arctan2(
                np.linalg.norm(cross, axis=1), np.sum(wing_u * wing_v, axis=1)
            )

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
    """Weighted-Delaunay margin per edge, batched.

    The quadrilateral around each edge is laid out with the shared
    diagonal i->j on the x-axis, k above and l below.  The returned value
    is ``q_l - ext(l)`` where ext is the quadratic that takes the values
    q at i, j, k; positive means the edge is bad.  NaN marks edges the
    fast path could not resolve (caller redoes them scalar-wise).
    """
    l_ij = np.asarray(l_ij, dtype=np.float64)
    args = [
        np.asarray(x, dtype=np.float64) for x in (l_ik, l_jk, l_il, l_jl, q_i, q_j, q_k, q_l)
    ]
    l_ik, l_jk, l_il, l_jl, q_i, q_j, q_k, q_l = args

    with np.errstate(invalid="ignore", divide="ignore"):
        xk = (l_ik * l_ik + l_ij * l_ij - l_jk * l_jk) / (2.0 * l_ij)
        yk2 = l_ik * l_ik - xk * xk
        yk = np.sqrt(np.maximum(yk2, 0.0))
        xl = (l_il * l_il + l_ij * l_ij - l_jl * l_jl) / (2.0 * l_ij)
        yl2 = l_il * l_il - xl * xl
        yl = -np.sqrt(np.maximum(yl2, 0.0))

        ax = (l_ij * l_ij - q_j + q_i) / (2.0 * l_ij)
        ay = (l_ik * l_ik - q_k + q_i - 2.0 * xk * ax) / (2.0 * yk)
        ext = q_i + l_il * l_il - 2.0 * (xl * ax + yl * ay)
        out = q_l - ext

    bad_rows = (yk2 <= 0.0) | (yl2 <= 0.0) | ~np.isfinite(out)
    return np.where(bad_rows, np.nan, out)


def scatter_add(n, rows, cols, vals):
    """Dense (n, n) matrix accumulated from duplicate-index triplets."""
    out = np.zeros((n, n))
    np.add.at(out, (np.asarray(rows), np.asarray(cols)), np.asarray(vals))
    return out
