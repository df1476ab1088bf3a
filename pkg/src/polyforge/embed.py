"""Reconstruction in R^3: develop the final triangulation face by face,
folding along each edge by its dihedral angle.

The seed face sits in the z = 0 plane, counterclockwise from +z, with
the body's interior below; breadth-first traversal then places every
other face by unfolding across shared edges.  Per-vertex positions are
the means of their per-face placements (the spread is the closure
residual), tightened by a few Gauss-Newton sweeps on the edge lengths.
Once the curvatures are only kappa_stop away from zero this reproduces
the convex polytope to machine-level accuracy; the apex is recovered
separately as the weighted Fermat point of the vertices.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmbedError
from .triangulation import merge_regions

CLOSURE_TOL = 1e-6  # * diameter
CONVEXITY_TOL = 1e-7  # * diameter
DEGENERATE_VOL_TOL = 1e-8  # * diameter^3
MERGE_TOL = 1e-6  # |pi - theta| below this merges the faces
APEX_TOL = 1e-9  # * total weight
APEX_MAX_ITER = 10000


@dataclass
class EmbeddedPolytope:
    vertices: np.ndarray  # (n, 3) averaged and polished positions
    faces: tuple  # triangles, outward counterclockwise
    closure_residual: float
    diameter: float
    volume: float  # signed; positive for outward orientation
    degenerate: bool
    convexity_violation: float
    seed_face: int
    merged_faces: tuple | None = None  # polygons after coplanar merging
    apex: np.ndarray | None = None  # set once solve_apex has run

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    def as_json(self, indent=None):
        import json

        doc = {
            "vertices": [[float(x) for x in row] for row in self.vertices],
            "faces": [list(face) for face in self.faces],
            "merged_faces": None
            if self.merged_faces is None
            else [list(face) for face in self.merged_faces],
            "apex": None if self.apex is None else [float(x) for x in self.apex],
            "volume": float(self.volume),
            "degenerate": bool(self.degenerate),
            "closure_residual": float(self.closure_residual),
        }
        return json.dumps(doc, sort_keys=True, indent=indent)


def _unit(v):
    return v / np.linalg.norm(v)


def place_faces(P, seed_face=0, merge_coplanar=False, polish_iters=3):
    """Develop the polytope's boundary into R^3.

    ``P`` is a solved generalized polytope whose curvatures are already
    negligible.  Raises EmbedError when the development fails to close
    up to CLOSURE_TOL, or when the final mesh still carries a loop.
    """
    mesh = P.mesh
    rep = P.curvature_report()
    for f, s in rep.edges:
        i, j = mesh.edge_endpoints(f, s)
        if i == j:
            raise EmbedError(
                f"final mesh has a geodesic loop at vertex {i}; "
                "curvature is not small enough"
            )

    theta = {}
    for (f, s), th in zip(rep.edges, rep.theta):
        theta[(f, s)] = th
        theta[mesh.neighbor(f, s)] = th

    nf = mesh.n_faces
    # Per-face corner positions and outward normal.
    pos = np.full((nf, 3, 3), np.nan)
    normal = np.full((nf, 3), np.nan)
    placed = np.zeros(nf, dtype=bool)

    ell = mesh.ell
    f0 = int(seed_face)
    l0, l1, l2 = ell[f0]
    x2 = (l1 * l1 + l2 * l2 - l0 * l0) / (2.0 * l2)
    y2 = math.sqrt(max(l1 * l1 - x2 * x2, 0.0))
    pos[f0, 0] = (0.0, 0.0, 0.0)
    pos[f0, 1] = (l2, 0.0, 0.0)
    pos[f0, 2] = (x2, y2, 0.0)
    normal[f0] = (0.0, 0.0, 1.0)
    placed[f0] = True

    queue = deque([f0])
    while queue:
        f = queue.popleft()
        for s in range(3):
            g, s2 = mesh.neighbor(f, s)
            if placed[g]:
                continue
            a = pos[f, (s + 1) % 3]  # tail of the shared edge in f
            b = pos[f, (s + 2) % 3]
            d = pos[f, s]
            u = _unit(b - a)
            w_in = d - a
            w_in = _unit(w_in - (w_in @ u) * u)  # into f, perpendicular to the edge
            n_f = normal[f]
            psi = math.pi - theta[(f, s)]
            w_out = -w_in * math.cos(psi) - n_f * math.sin(psi)
            n_g = n_f * math.cos(psi) - w_in * math.sin(psi)

            # g sees the edge reversed: its tail corner lies at b.
            l_edge = ell[g, s2]
            l_tail = ell[g, (s2 + 2) % 3]  # from g's tail corner to the new point
            l_head = ell[g, (s2 + 1) % 3]
            ap = (l_tail * l_tail + l_edge * l_edge - l_head * l_head) / (2.0 * l_edge)
            bp = math.sqrt(max(l_tail * l_tail - ap * ap, 0.0))
            pos[g, (s2 + 1) % 3] = b
            pos[g, (s2 + 2) % 3] = a
            pos[g, s2] = b + ap * (-u) + bp * w_out
            normal[g] = n_g
            placed[g] = True
            queue.append(g)

    if not placed.all():
        raise EmbedError("triangulation is not edge-connected")  # unreachable

    n = mesh.n_vertices
    sums = np.zeros((n, 3))
    counts = np.zeros(n)
    np.add.at(sums, mesh.vert.ravel(), pos.reshape(-1, 3))
    np.add.at(counts, mesh.vert.ravel(), 1.0)
    verts = sums / counts[:, None]

    spread = 0.0
    for v in range(n):
        placements = pos.reshape(-1, 3)[mesh.vert.ravel() == v]
        for i in range(len(placements)):
            diffs = placements[i + 1 :] - placements[i]
            if len(diffs):
                spread = max(spread, float(np.sqrt((diffs**2).sum(axis=1)).max()))

    diam = _diameter(verts)
    if spread > CLOSURE_TOL * diam:
        raise EmbedError(
            f"development does not close: spread {spread!r} vs diameter {diam!r}"
        )

    verts = _polish(mesh, verts, diam, polish_iters)

    faces = tuple(tuple(int(v) for v in mesh.vert[f]) for f in range(nf))
    volume = _signed_volume(verts, faces)
    degenerate = abs(volume) <= DEGENERATE_VOL_TOL * diam**3
    violation = _convexity_violation(verts, faces, degenerate)

    merged = None
    if merge_coplanar:
        flat = [
            (f, s)
            for (f, s), th in zip(rep.edges, rep.theta)
            if abs(math.pi - th) <= MERGE_TOL
        ]
        merged = []
        for region in merge_regions(mesh, flat):
            if len(region.cycles) != 1:
                raise EmbedError("merged face is not a disk")
            cycle = region.cycles[0]
            merged.append(
                tuple(int(mesh.vert[f, (s + 1) % 3]) for f, s in cycle)
            )
        merged = tuple(merged)

    return EmbeddedPolytope(
        vertices=verts,
        faces=faces,
        closure_residual=spread,
        diameter=diam,
        volume=volume,
        degenerate=degenerate,
        convexity_violation=violation,
        seed_face=f0,
        merged_faces=merged,
    )


def _diameter(verts):
    best = 0.0
    for i in range(len(verts)):
        d = np.sqrt(((verts[i + 1 :] - verts[i]) ** 2).sum(axis=1))
        if len(d):
            best = max(best, float(d.max()))
    return best


def _polish(mesh, verts, diam, iters):
    """Gauss-Newton sweeps on the squared edge-length residuals."""
    edges = []
    for f, s in _canonical_edges(mesh):
        i, j = mesh.edge_endpoints(f, s)
        edges.append((i, j, float(mesh.ell[f, s])))
    n = len(verts)
    v = verts.copy()
    for _ in range(iters):
        res = np.empty(len(edges))
        jac = np.zeros((len(edges), 3 * n))
        for row, (i, j, length) in enumerate(edges):
            d = v[i] - v[j]
            dist = float(np.linalg.norm(d))
            res[row] = dist - length
            u = d / dist
            jac[row, 3 * i : 3 * i + 3] = u
            jac[row, 3 * j : 3 * j + 3] = -u
        if float(np.abs(res).max()) < 1e-12 * diam:
            break
        delta, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        v += delta.reshape(n, 3)
    return v


def _canonical_edges(mesh):
    for f in range(mesh.n_faces):
        for s in range(3):
            if (f, s) <= mesh.neighbor(f, s):
                yield (f, s)


def _signed_volume(verts, faces):
    c = verts.mean(axis=0)
    total = 0.0
    for i, j, k in faces:
        total += float(np.linalg.det(np.stack([verts[i] - c, verts[j] - c, verts[k] - c])))
    return total / 6.0


def _convexity_violation(verts, faces, degenerate):
    """Worst signed distance of any vertex above any face plane."""
    worst = -np.inf
    for i, j, k in faces:
        nvec = np.cross(verts[j] - verts[i], verts[k] - verts[i])
        norm = float(np.linalg.norm(nvec))
        if norm == 0.0:
            continue
        nvec = nvec / norm
        d = (verts - verts[i]) @ nvec
        worst = max(worst, float(d.max()))
    if degenerate:
        # Flat bodies have every vertex on every plane; the sign test is
        # meaningless, closure already vouches for them.
        return 0.0
    return worst


@dataclass
class ApexSolve:
    point: np.ndarray
    residual: float  # |sum of weighted unit directions| / sum of weights
    iterations: int


def solve_apex(points, weights, tol=APEX_TOL, max_iter=APEX_MAX_ITER) -> ApexSolve:
    """Weighted Fermat point: minimize sum_i w_i |p_i - a|.

    Damped Weiszfeld iteration with a Newton finish.  The residual is the
    norm of the weighted unit-vector sum, relative to the total weight.
    """
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("weights must be positive")
    wsum = float(w.sum())
    a = (w[:, None] * pts).sum(axis=0) / wsum
    eps = 1e-14 * (1.0 + float(np.abs(pts).max()))

    def residual_at(x):
        d = np.sqrt(((pts - x) ** 2).sum(axis=1))
        d = np.maximum(d, eps)
        u = (pts - x) / d[:, None]
        return float(np.linalg.norm((w[:, None] * u).sum(axis=0))) / wsum, d, u

    it = 0
    res, d, u = residual_at(a)
    while res > tol and it < max_iter:
        it += 1
        coef = w / d
        a_new = (coef[:, None] * pts).sum(axis=0) / coef.sum()
        # Damp: never move further than the nearest data point distance.
        step = a_new - a
        limit = float(d.min())
        norm = float(np.linalg.norm(step))
        if norm > limit:
            step *= limit / norm
        a = a + step
        res, d, u = residual_at(a)
        if it >= 20 and it % 5 == 0:
            # Newton acceleration once Weiszfeld settles.
            h = np.zeros((3, 3))
            for k in range(len(pts)):
                uk = u[k][:, None]
                h += w[k] * (np.eye(3) - uk @ uk.T) / d[k]
            try:
                a = a - np.linalg.solve(h, -(w[:, None] * u).sum(axis=0))
            except np.linalg.LinAlgError:
                pass
            res, d, u = residual_at(a)
    return ApexSolve(point=a, residual=res, iterations=it)


def congruence_check(verts_a, verts_b, allow_reflection=True):
    """RMS deviation after the best rigid alignment of matching vertices.

    Accepts EmbeddedPolytope instances or raw (n, 3) arrays with the same
    vertex labelling.  Returns (rms, reflected).
    """
    A = np.asarray(getattr(verts_a, "vertices", verts_a), dtype=float)
    B = np.asarray(getattr(verts_b, "vertices", verts_b), dtype=float)
    if A.shape != B.shape:
        raise ValueError("vertex sets differ in shape")
    Ac = A - A.mean(axis=0)
    Bc = B - B.mean(axis=0)

    def rms_for(flip):
        Bx = Bc * np.array([1.0, 1.0, -1.0]) if flip else Bc
        h = Ac.T @ Bx
        u, _, vt = np.linalg.svd(h)
        d = np.sign(np.linalg.det(u @ vt))
        rot = u @ np.diag([1.0, 1.0, d]) @ vt
        return float(np.sqrt(((Ac - Bx @ rot.T) ** 2).sum() / len(A)))

    best = rms_for(False)
    reflected = False
    if allow_reflection:
        alt = rms_for(True)
        if alt < best:
            best, reflected = alt, True
    return best, reflected


def apex_inside(embedded: EmbeddedPolytope, apex, tol=None):
    """Is the apex interior?  For full-dimensional bodies: strictly below
    every face plane.  For degenerate (flat) ones: in the relative
    interior of the supporting polygon."""
    verts = embedded.vertices
    a = np.asarray(apex, dtype=float)
    if tol is None:
        tol = 1e-9 * max(embedded.diameter, 1.0)
    if not embedded.degenerate:
        sign = 1.0 if embedded.volume > 0 else -1.0
        for i, j, k in embedded.faces:
            nvec = np.cross(verts[j] - verts[i], verts[k] - verts[i])
            norm = float(np.linalg.norm(nvec))
            if norm == 0.0:
                continue
            if sign * float((a - verts[i]) @ nvec) / norm > -tol:
                return False
        return True
    # Flat body: project onto its plane and test the polygon hull.
    centered = verts - verts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    plane = vt[:2]
    p2 = centered @ plane.T
    a2 = (a - verts.mean(axis=0)) @ plane.T
    hull = _planar_hull(p2)
    for idx in range(len(hull)):
        p, q = p2[hull[idx]], p2[hull[(idx + 1) % len(hull)]]
        e = q - p
        if e[0] * (a2[1] - p[1]) - e[1] * (a2[0] - p[0]) <= tol:
            return False
    return True


def apex_boundary_distance(embedded: EmbeddedPolytope, apex):
    """Distance from the apex to the boundary of the body.

    For full-dimensional bodies: the least distance to a face plane.  For
    flat ones: the in-plane distance to the polygon's boundary.
    """
    verts = embedded.vertices
    a = np.asarray(apex, dtype=float)
    if not embedded.degenerate:
        best = np.inf
        for i, j, k in embedded.faces:
            nvec = np.cross(verts[j] - verts[i], verts[k] - verts[i])
            norm = float(np.linalg.norm(nvec))
            if norm == 0.0:
                continue
            best = min(best, abs(float((a - verts[i]) @ nvec)) / norm)
        return best
    centered = verts - verts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    plane = vt[:2]
    p2 = centered @ plane.T
    a2 = (a - verts.mean(axis=0)) @ plane.T
    hull = _planar_hull(p2)
    best = np.inf
    for idx in range(len(hull)):
        p, q = p2[hull[idx]], p2[hull[(idx + 1) % len(hull)]]
        e = q - p
        t = float(np.clip((a2 - p) @ e / (e @ e), 0.0, 1.0))
        best = min(best, float(np.linalg.norm(a2 - (p + t * e))))
    return best


def _planar_hull(p2):
    """Indices of the convex hull, counterclockwise (monotone chain)."""
    order = sorted(range(len(p2)), key=lambda i: (p2[i, 0], p2[i, 1]))

    def build(seq):
        out = []
        for i in seq:
            while len(out) >= 2:
                o, b = p2[out[-2]], p2[out[-1]]
                if (b[0] - o[0]) * (p2[i, 1] - o[1]) - (b[1] - o[1]) * (
                    p2[i, 0] - o[0]
                ) <= 0:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = build(order)
    upper = build(reversed(order))
    return lower[:-1] + upper[:-1]


def as_obj(embedded: EmbeddedPolytope, merged=False):
    """Wavefront OBJ text; faces counterclockwise seen from outside."""
    faces = embedded.merged_faces if merged and embedded.merged_faces else embedded.faces
    flip = embedded.volume < 0 and not embedded.degenerate
    lines = ["# polyforge output", f"# faces: {len(faces)}"]
    for x, y, z in embedded.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for face in faces:
        cycle = tuple(reversed(face)) if flip else face
        lines.append("f " + " ".join(str(v + 1) for v in cycle))
    return "\n".join(lines) + "\n"
