"""Geodesic triangulations of a cone surface, with diagonal flips.

The mesh is a corner table.  Face ``f`` has corners 0, 1, 2; side ``s``
is opposite corner ``s`` and is traversed from corner ``(s+1)%3`` (tail)
to corner ``(s+2)%3`` (head).  ``adj`` maps each side to the side it is
glued to, with reversed traversal, making the whole thing an oriented
closed surface.  Vertices may repeat around a face: loops and multiple
edges are ordinary citizens here, they show up as soon as flips start
rearranging a development.

Badness of an edge is measured by developing its two adjacent faces into
the plane (two copies, if they are the same face) and comparing the
fourth corner's weight against the quadratic extension of the weights on
the first three; the flip algorithm greedily removes bad edges and
terminates because each flip strictly raises the piecewise extension.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import FlipError, InadmissibleWeightsError, TriangleError
from .surface import Development, PolyhedralMetric, build_metric

# An edge is bad when its badness exceeds BAD_TOL * max(1, |q|_inf);
# equality within FLAT_TOL * the same scale marks it inessential.
BAD_TOL = 1e-10
FLAT_TOL = 1e-9

# Interior angles of the developed quadrilateral must clear pi by this
# much before a flip is executed.
CONVEXITY_TOL = 1e-10

LENGTH_AGREE_REL = 1e-12


@dataclass
class QuadLayout:
    """The two faces adjacent to an edge, developed into the plane.

    The shared edge i->j lies on the x axis, k (the far corner on the
    edge's own face) above it, l (the far corner across) below.
    """

    labels: tuple  # (i, j, k, l) vertex labels
    pi: np.ndarray
    pj: np.ndarray
    pk: np.ndarray
    pl: np.ndarray
    slots: tuple  # ((f, s), (g, s2))

    @property
    def diagonal(self):
        return float(np.linalg.norm(self.pk - self.pl))


class CornerMesh:
    """Mutable triangulation with per-corner vertex labels and lengths."""

    def __init__(self, vert, ell, adj_face, adj_side):
        self.vert = np.asarray(vert, dtype=np.int64)
        self.ell = np.asarray(ell, dtype=np.float64)
        self.adj_face = np.asarray(adj_face, dtype=np.int64)
        self.adj_side = np.asarray(adj_side, dtype=np.int64)

    # -- construction -------------------------------------------------

    @classmethod
    def from_metric(cls, metric: PolyhedralMetric) -> "CornerMesh":
        dev = metric.development
        nf = dev.n_faces
        adj_face = np.full((nf, 3), -1, dtype=np.int64)
        adj_side = np.full((nf, 3), -1, dtype=np.int64)
        for (t, s), (t2, s2) in dev.gluings:
            adj_face[t, s], adj_side[t, s] = t2, s2
            adj_face[t2, s2], adj_side[t2, s2] = t, s
        return cls(metric.corner_vertex.copy(), dev.sides.copy(), adj_face, adj_side)

    @classmethod
    def from_development(cls, dev: Development) -> "CornerMesh":
        return cls.from_metric(build_metric(dev))

    def copy(self) -> "CornerMesh":
        return CornerMesh(
            self.vert.copy(), self.ell.copy(), self.adj_face.copy(), self.adj_side.copy()
        )

    # -- basic queries ------------------------------------------------

    @property
    def n_faces(self):
        return self.vert.shape[0]

    @property
    def n_vertices(self):
        return int(self.vert.max()) + 1

    @property
    def n_edges(self):
        return (3 * self.n_faces) // 2

    def neighbor(self, f, s):
        return int(self.adj_face[f, s]), int(self.adj_side[f, s])

    def edges(self):
        """Canonical (f, s) handle per undirected edge."""
        out = []
        for f in range(self.n_faces):
            for s in range(3):
                if (f, s) <= self.neighbor(f, s):
                    out.append((f, s))
        return out

    def edge_endpoints(self, f, s):
        return int(self.vert[f, (s + 1) % 3]), int(self.vert[f, (s + 2) % 3])

    def cone_angles(self):
        """Total corner angle accumulated at each vertex."""
        ang = kernels.tri_angles(self.ell)
        out = np.zeros(self.n_vertices)
        np.add.at(out, self.vert.ravel(), ang.ravel())
        return out

    # -- integrity ----------------------------------------------------

    def validate(self):
        """Check the corner-table invariants; raises AssertionError."""
        nf = self.n_faces
        assert self.vert.shape == (nf, 3)
        seen = np.zeros(self.n_vertices, dtype=bool)
        seen[self.vert.ravel()] = True
        assert seen.all(), "vertex labels are not contiguous"
        for f in range(nf):
            for s in range(3):
                g, s2 = self.neighbor(f, s)
                assert 0 <= g < nf and 0 <= s2 < 3, "dangling adjacency"
                assert self.neighbor(g, s2) == (f, s), "adjacency not an involution"
                assert (g, s2) != (f, s), "side glued to itself"
                la, lb = self.ell[f, s], self.ell[g, s2]
                assert abs(la - lb) <= LENGTH_AGREE_REL * max(la, lb), (
                    f"edge length mismatch at ({f}, {s})"
                )
                ta, ha = self.edge_endpoints(f, s)
                tb, hb = self.edge_endpoints(g, s2)
                assert (ta, ha) == (hb, tb), "edge direction not reversed across gluing"
        euler = self.n_vertices - self.n_edges + nf
        assert euler == 2, f"not a sphere: V-E+F = {euler}"
        ang = kernels.tri_angles(self.ell)
        assert np.isfinite(ang).all(), "degenerate face"

    # -- serialization (debugging aid) ----------------------------------

    def to_json(self, indent=None):
        return json.dumps(
            {
                "vert": self.vert.tolist(),
                "ell": self.ell.tolist(),
                "adj_face": self.adj_face.tolist(),
                "adj_side": self.adj_side.tolist(),
            },
            indent=indent,
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(doc["vert"], doc["ell"], doc["adj_face"], doc["adj_side"])

    # -- geometry -----------------------------------------------------

    def develop_quad(self, f, s) -> QuadLayout:
        """Lay out the two faces adjacent to side (f, s) in the plane.

        Works when both sides belong to the same face (the face is
        developed twice) and when some of the four corner labels agree.
        """
        f = int(f)
        s = int(s)
        g, s2 = self.neighbor(f, s)
        i = int(self.vert[f, (s + 1) % 3])
        j = int(self.vert[f, (s + 2) % 3])
        k = int(self.vert[f, s])
        l = int(self.vert[g, s2])

        lij = float(self.ell[f, s])
        lik = float(self.ell[f, (s + 2) % 3])
        ljk = float(self.ell[f, (s + 1) % 3])
        lil = float(self.ell[g, (s2 + 1) % 3])
        ljl = float(self.ell[g, (s2 + 2) % 3])

        def third_point(da, db, sign):
            x = (da * da + lij * lij - db * db) / (2.0 * lij)
            y2 = da * da - x * x
            if y2 <= 0.0:
                raise TriangleError(
                    f"cannot develop quad at edge ({f}, {s}): flat triangle"
                )
            return np.array([x, sign * math.sqrt(y2)])

        return QuadLayout(
            labels=(i, j, k, l),
            pi=np.zeros(2),
            pj=np.array([lij, 0.0]),
            pk=third_point(lik, ljk, +1.0),
            pl=third_point(lil, ljl, -1.0),
            slots=((f, s), (g, s2)),
        )

    def flip(self, f, s):
        """Replace the diagonal of the quad around side (f, s).

        Preconditions: the two adjacent face slots belong to distinct
        faces and the developed quadrilateral is strictly convex (every
        interior angle below pi - CONVEXITY_TOL).  Returns the new
        diagonal's length.
        """
        f = int(f)
        s = int(s)
        g, s2 = self.neighbor(f, s)
        if g == f:
            raise FlipError(f"edge ({f}, {s}) has the same face on both sides")

        quad = self.develop_quad(f, s)
        if not quad_is_strictly_convex(quad):
            raise FlipError(f"quad around edge ({f}, {s}) is not strictly convex")

        new_len = quad.diagonal
        i, j, k, l = quad.labels
        l_jk = float(self.ell[f, (s + 1) % 3])
        l_ki = float(self.ell[f, (s + 2) % 3])
        l_il = float(self.ell[g, (s2 + 1) % 3])
        l_lj = float(self.ell[g, (s2 + 2) % 3])
        n_jk = self.neighbor(f, (s + 1) % 3)
        n_ki = self.neighbor(f, (s + 2) % 3)
        n_il = self.neighbor(g, (s2 + 1) % 3)
        n_lj = self.neighbor(g, (s2 + 2) % 3)

        # The quad's outer sides may be glued to each other (or to the
        # faces being rewritten); route those references to their new
        # homes.
        relocate = {
            (f, (s + 1) % 3): (g, 2),
            (f, (s + 2) % 3): (f, 1),
            (g, (s2 + 1) % 3): (f, 2),
            (g, (s2 + 2) % 3): (g, 1),
        }

        def place(face, side, target, length):
            self.ell[face, side] = length
            t = relocate.get(target, target)
            self.adj_face[face, side], self.adj_side[face, side] = t
            self.adj_face[t[0], t[1]] = face
            self.adj_side[t[0], t[1]] = side

        # New faces: f := (i, l, k), g := (j, k, l); side 0 of each is the
        # fresh diagonal l->k / k->l.  Wire the diagonal directly: the slot
        # name (g, 0) may coincide with an *old* outer-side name and must
        # not pass through the relocation table.
        self.vert[f] = (i, l, k)
        self.vert[g] = (j, k, l)
        self.ell[f, 0] = new_len
        self.ell[g, 0] = new_len
        self.adj_face[f, 0], self.adj_side[f, 0] = g, 0
        self.adj_face[g, 0], self.adj_side[g, 0] = f, 0
        place(f, 1, n_ki, l_ki)
        place(f, 2, n_il, l_il)
        place(g, 1, n_lj, l_lj)
        place(g, 2, n_jk, l_jk)
        return new_len


def quad_is_strictly_convex(quad: QuadLayout) -> bool:
    """Every interior angle of the developed quad clears pi by
    CONVEXITY_TOL."""
    ring = [quad.pi, quad.pl, quad.pj, quad.pk]
    for idx in range(4):
        e_in = ring[idx] - ring[idx - 1]
        e_out = ring[(idx + 1) % 4] - ring[idx]
        turn = math.atan2(
            e_in[0] * e_out[1] - e_in[1] * e_out[0], float(np.dot(e_in, e_out))
        )
        if turn <= CONVEXITY_TOL:
            return False
    return True


# -- power-style badness -----------------------------------------------


def ext_value(p1, p2, p3, q1, q2, q3, target):
    """Value at ``target`` of the quadratic x -> |x - a|^2 + b that takes
    the values q1, q2, q3 at the non-collinear points p1, p2, p3."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    target = np.asarray(target, dtype=float)
    m = 2.0 * np.stack([p2 - p1, p3 - p1])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = max(float(np.abs(m).max()) ** 2, 1e-300)
    if abs(det) <= 1e-12 * scale:
        raise TriangleError("interpolation points are (nearly) collinear")
    rhs = np.array(
        [
            p2 @ p2 - p1 @ p1 - (q2 - q1),
            p3 @ p3 - p1 @ p1 - (q3 - q1),
        ]
    )
    a = np.linalg.solve(m, rhs)
    b = q1 - float((p1 - a) @ (p1 - a))
    return float((target - a) @ (target - a)) + b


def edge_badness_one(mesh, q, f, s):
    """Badness of a single edge: q_l minus the extension through i, j, k."""
    quad = mesh.develop_quad(f, s)
    i, j, k, l = quad.labels
    ext = ext_value(quad.pi, quad.pj, quad.pk, q[i], q[j], q[k], quad.pl)
    return float(q[l]) - ext


def edge_is_bad(mesh, q, f, s, scale=None):
    if scale is None:
        scale = max(1.0, float(np.abs(q).max()))
    return edge_badness_one(mesh, q, f, s) > BAD_TOL * scale


def badness_scan(mesh, q):
    """Badness for every canonical edge, batched.

    Returns (edges, values); entries the fast kernel could not resolve
    are recomputed through the scalar path.
    """
    edges = mesh.edges()
    idx = np.array(edges, dtype=np.int64)
    f, s = idx[:, 0], idx[:, 1]
    g = mesh.adj_face[f, s]
    s2 = mesh.adj_side[f, s]
    q = np.asarray(q, dtype=float)

    vals = kernels.edge_badness(
        mesh.ell[f, s],
        mesh.ell[f, (s + 2) % 3],
        mesh.ell[f, (s + 1) % 3],
        mesh.ell[g, (s2 + 1) % 3],
        mesh.ell[g, (s2 + 2) % 3],
        q[mesh.vert[f, (s + 1) % 3]],
        q[mesh.vert[f, (s + 2) % 3]],
        q[mesh.vert[f, s]],
        q[mesh.vert[g, s2]],
    )
    for e in np.flatnonzero(~np.isfinite(vals)):
        vals[e] = edge_badness_one(mesh, q, *edges[e])
    return edges, vals


# -- the flip algorithm --------------------------------------------------


def weighted_delaunay(mesh, q, max_flips=None, debug=False, on_flip=None):
    """Flip bad edges (FIFO) until none are left; returns the flip count.

    ``on_flip(mesh, f, s)`` is invoked just before each flip.  Raises
    InadmissibleWeightsError when a bad edge cannot be flipped and no
    other flip unblocks it, or when ``max_flips`` is exhausted — both
    certify that the weights are not reachable by this triangulation
    family.
    """
    q = np.asarray(q, dtype=float)
    if max_flips is None:
        max_flips = 100 * mesh.n_edges**2
    scale = max(1.0, float(np.abs(q).max()))
    tol = BAD_TOL * scale

    edges, vals = badness_scan(mesh, q)
    if np.all(vals <= tol):
        return 0

    queue = deque(edges)
    flips = 0
    stalled = 0
    while queue:
        f, s = queue.popleft()
        g, s2 = mesh.neighbor(f, s)
        if edge_badness_one(mesh, q, f, s) <= tol:
            continue
        blocked = g == f or not quad_is_strictly_convex(mesh.develop_quad(f, s))
        if blocked:
            # Cannot flip now; some other flip may reshape this quad.
            queue.append((f, s))
            stalled += 1
            if stalled > len(queue) + 1:
                raise InadmissibleWeightsError(
                    f"bad edge ({f}, {s}) cannot be flipped and no flip unblocks it"
                )
            continue

        if debug:
            before = _quad_extension_probe(mesh, q, f, s)
        if on_flip is not None:
            # The flip is now guaranteed to execute; hooks see the mesh
            # in its pre-flip state.
            on_flip(mesh, f, s)
        mesh.flip(f, s)
        flips += 1
        stalled = 0
        if flips > max_flips:
            raise InadmissibleWeightsError(f"flip budget {max_flips} exhausted")
        if debug:
            after = _quad_extension_probe(mesh, q, f, 0)
            assert after >= before - 1e-12 * scale, (
                "flip decreased the piecewise quadratic extension"
            )
        # The new diagonal is side 0 of both rewritten faces; its four
        # neighbors are the quad's outer sides.
        for cand in ((f, 1), (f, 2), (g, 1), (g, 2)):
            queue.append(cand)
    return flips


def _quad_extension_probe(mesh, q, f, s):
    """Extension value at the centroid of the quad around side (f, s)."""
    quad = mesh.develop_quad(f, s)
    i, j, k, l = quad.labels
    c = 0.25 * (quad.pi + quad.pj + quad.pk + quad.pl)
    # The centroid lies on the k side or the l side of the diagonal;
    # evaluate the extension of the triangle that contains it.
    if c[1] >= 0.0:
        return ext_value(quad.pi, quad.pj, quad.pk, q[i], q[j], q[k], c)
    return ext_value(quad.pi, quad.pj, quad.pl, q[i], q[j], q[l], c)


def on_flip_theta(callback):
    """Adapt a callback expecting (mesh, f, s, theta=None) — placeholder
    kept for API symmetry; the solver wires its own closure."""
    return callback


# -- tesselation extraction ----------------------------------------------


@dataclass(frozen=True)
class Region:
    faces: tuple  # sorted face indices
    cycles: tuple  # boundary cycles, each a tuple of directed slots (f, s)


def merge_regions(mesh, flat_slots):
    """Union faces across the given edge slots and walk region boundaries.

    ``flat_slots`` may contain either or both slots of an edge.  Returns
    a list of Region in deterministic order.  Boundary cycles keep the
    region on their left.
    """
    flat = np.zeros((mesh.n_faces, 3), dtype=bool)
    for f, s in flat_slots:
        flat[f, s] = True
        g, s2 = mesh.neighbor(f, s)
        flat[g, s2] = True

    parent = list(range(mesh.n_faces))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for f in range(mesh.n_faces):
        for s in range(3):
            if flat[f, s]:
                a, b = find(f), find(int(mesh.adj_face[f, s]))
                if a != b:
                    parent[max(a, b)] = min(a, b)

    members = {}
    for f in range(mesh.n_faces):
        members.setdefault(find(f), []).append(f)

    visited = np.zeros((mesh.n_faces, 3), dtype=bool)
    cycles_of = {root: [] for root in members}
    for f0 in range(mesh.n_faces):
        for s0 in range(3):
            if flat[f0, s0] or visited[f0, s0]:
                continue
            cycle = []
            f, s = f0, s0
            while not visited[f, s]:
                visited[f, s] = True
                cycle.append((f, s))
                # Rotate around the head vertex until the next
                # non-merged side going out of it.
                t = (s + 1) % 3
                while flat[f, t]:
                    g, u = mesh.neighbor(f, t)
                    f, t = g, (u + 1) % 3
                f, s = f, t
            cycles_of[find(f0)].append(tuple(cycle))

    out = []
    for root in sorted(members):
        out.append(
            Region(faces=tuple(sorted(members[root])), cycles=tuple(cycles_of[root]))
        )
    return out


@dataclass(frozen=True)
class Tesselation:
    """Canonical form of the essential-edge decomposition."""

    regions: tuple  # per region: tuple of cycles; cycle = ((vertex, nm_length), ...)
    inessential: tuple  # canonical slots of the merged edges
    digest: str

    @property
    def n_regions(self):
        return len(self.regions)


def canonical_tesselation(mesh, q):
    """Merge faces across edges where the Delaunay inequality is tight.

    All edges must already be good.  Boundary words pair the tail vertex
    label with the edge length rounded to 1e-9, and every cycle is
    rotated to its lexicographic minimum so that any triangulation of
    the same tesselation hashes identically.
    """
    q = np.asarray(q, dtype=float)
    scale = max(1.0, float(np.abs(q).max()))
    edges, vals = badness_scan(mesh, q)
    assert np.all(vals <= BAD_TOL * scale), "mesh is not weighted-Delaunay"

    flat_slots = [e for e, v in zip(edges, vals) if abs(v) <= FLAT_TOL * scale]
    regions = merge_regions(mesh, flat_slots)

    def canonical_cycle(cycle):
        word = []
        for f, s in cycle:
            tail = int(mesh.vert[f, (s + 1) % 3])
            word.append((tail, int(round(mesh.ell[f, s] * 1e9))))
        rotations = [tuple(word[r:] + word[:r]) for r in range(len(word))]
        return min(rotations)

    canon = tuple(
        sorted(tuple(sorted(canonical_cycle(c) for c in reg.cycles)) for reg in regions)
    )
    digest = hashlib.sha256(repr(canon).encode()).hexdigest()
    return Tesselation(regions=canon, inessential=tuple(flat_slots), digest=digest)
