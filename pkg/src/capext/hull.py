"""Convex polyhedra: hull construction, face merging, subset views.

The hull itself is delegated to Qhull (scipy.spatial.ConvexHull); this
module owns everything Qhull does not promise: merging coplanar facets
back into maximal faces, consistent outward orientation, a canonical
vertex/face order so equal inputs serialize identically, and the closed
2-manifold validation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    DegenerateHull,
    InvariantViolation,
    LemmaViolation,
    NoBoundary,
    VerticalPlane,
)
from .geometry import Plane, Tolerances, Vec3, as_array, newell_normal, plane_through

# Faces with |normal.z| at or below this band count as vertical and are
# excluded from both the upward and the downward selection.
Z_STRICT_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Face:
    """Planar convex face: vertex indices counterclockwise from outside."""

    vertex_ids: tuple[int, ...]
    normal: Vec3


class Polyhedron:
    """Closed convex polyhedron with merged, canonically ordered faces.

    Vertices are sorted lexicographically by coordinate; each face cycle
    starts at its lowest vertex index and the face list is sorted, so two
    equal polyhedra are structurally identical.
    """

    def __init__(self, vertices, face_cycles, tol: Tolerances | None = None, validate: bool = True):
        verts = [v if isinstance(v, Vec3) else Vec3(*v) for v in vertices]
        cycles = [tuple(int(i) for i in cyc) for cyc in face_cycles]
        for cyc in cycles:
            if len(cyc) < 3:
                raise InvariantViolation(f"face with {len(cyc)} vertices")
            if len(set(cyc)) != len(cyc):
                raise InvariantViolation("face repeats a vertex")
            if any(i < 0 or i >= len(verts) for i in cyc):
                raise InvariantViolation("face index out of range")

        order = sorted(range(len(verts)), key=lambda i: verts[i].as_tuple())
        remap = {old: new for new, old in enumerate(order)}
        self.vertices: tuple[Vec3, ...] = tuple(verts[i] for i in order)
        cycles = [_rotate_min(tuple(remap[i] for i in cyc)) for cyc in cycles]
        cycles.sort()

        self.points = as_array(self.vertices)
        span = self.points.max(axis=0) - self.points.min(axis=0)
        diameter = float(np.linalg.norm(span))
        self.tol = tol or Tolerances.scaled(diameter)
        self.diameter = diameter

        faces = []
        for cyc in cycles:
            n = newell_normal([self.vertices[i] for i in cyc])
            faces.append(Face(cyc, n.normalized()))
        self.faces: tuple[Face, ...] = tuple(faces)

        self.edge_faces: dict[tuple[int, int], tuple[int, ...]] = {}
        self.vertex_face_ids: dict[int, list[int]] = {i: [] for i in range(len(self.vertices))}
        seen_directed = set()
        for fid, face in enumerate(self.faces):
            cyc = face.vertex_ids
            for k in range(len(cyc)):
                u, v = cyc[k], cyc[(k + 1) % len(cyc)]
                if (u, v) in seen_directed:
                    raise InvariantViolation(f"directed edge {(u, v)} used twice; orientation inconsistent")
                seen_directed.add((u, v))
                key = (u, v) if u < v else (v, u)
                self.edge_faces[key] = self.edge_faces.get(key, ()) + (fid,)
            for i in set(cyc):
                self.vertex_face_ids[i].append(fid)

        self._planes: dict[int, Plane] = {}
        if validate:
            self.validate()

    # --- queries ---------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def edge_count(self) -> int:
        return len(self.edge_faces)

    def face_points(self, fid: int) -> list[Vec3]:
        return [self.vertices[i] for i in self.faces[fid].vertex_ids]

    def face_plane(self, fid: int) -> Plane:
        """Graph-form plane of a face; VerticalPlane for vertical faces."""
        if fid not in self._planes:
            self._planes[fid] = plane_through(self.face_points(fid), self.tol)
        return self._planes[fid]

    def face_angle(self, fid: int, vid: int) -> float:
        """Interior angle of face fid at vertex vid.

        atan2 form: the defect sums cancel to ~1e-12, which an acos of
        a near-unit dot product cannot deliver for flat angles.
        """
        cyc = self.faces[fid].vertex_ids
        k = cyc.index(vid)
        p = self.vertices[vid]
        prev = self.vertices[cyc[k - 1]]
        nxt = self.vertices[cyc[(k + 1) % len(cyc)]]
        u, w = prev - p, nxt - p
        return math.atan2(u.cross(w).norm(), u.dot(w))

    def volume(self) -> float:
        total = 0.0
        for face in self.faces:
            cyc = face.vertex_ids
            p0 = self.vertices[cyc[0]]
            for k in range(1, len(cyc) - 1):
                total += p0.dot(self.vertices[cyc[k]].cross(self.vertices[cyc[k + 1]]))
        return total / 6.0

    def same_structure(self, other: "Polyhedron", eps: float | None = None) -> bool:
        eps = eps if eps is not None else max(self.tol.eps_geom, other.tol.eps_geom)
        if self.vertex_count != other.vertex_count or self.face_count != other.face_count:
            return False
        if not np.allclose(self.points, other.points, atol=eps, rtol=0.0):
            return False
        return all(a.vertex_ids == b.vertex_ids for a, b in zip(self.faces, other.faces))

    # --- validation ------------------------------------------------------

    def validate(self):
        if self.vertex_count < 4:
            raise InvariantViolation("closed polyhedron needs at least 4 vertices")
        for key, fids in self.edge_faces.items():
            if len(fids) != 2:
                raise InvariantViolation(f"edge {key} borders {len(fids)} faces; not a closed 2-manifold")
        if any(not fids for fids in self.vertex_face_ids.values()):
            raise InvariantViolation("unreferenced vertex")
        chi = self.vertex_count - self.edge_count + self.face_count
        if chi != 2:
            raise InvariantViolation(f"Euler characteristic {chi}, expected 2")

        normals = np.array([f.normal.as_tuple() for f in self.faces])
        offsets = np.array([float(np.dot(normals[fid], self.points[f.vertex_ids[0]])) for fid, f in enumerate(self.faces)])
        for fid, face in enumerate(self.faces):
            pts = self.points[list(face.vertex_ids)]
            residual = np.abs(pts @ normals[fid] - offsets[fid]).max()
            if residual > self.tol.eps_geom:
                raise InvariantViolation(f"face {fid} deviates from planarity by {residual:g}")
        heights = self.points @ normals.T - offsets
        worst = float(heights.max())
        if worst > self.tol.eps_geom:
            raise InvariantViolation(f"vertex lies {worst:g} outside a face plane; not convex")
        for key, (f, g) in self.edge_faces.items():
            cr = self.faces[f].normal.cross(self.faces[g].normal).norm()
            if cr <= self.tol.eps_angle and self.faces[f].normal.dot(self.faces[g].normal) > 0:
                raise InvariantViolation(f"adjacent faces {f} and {g} are coplanar; should be merged")
        if self.volume() <= 0.0:
            raise InvariantViolation("non-positive volume; faces are not oriented outward")


class SurfacePatch:
    """View of a face subset of a polyhedron (a cap, or a bounded skin)."""

    def __init__(self, poly: Polyhedron, face_ids):
        self.poly = poly
        self.face_ids = tuple(sorted(set(int(f) for f in face_ids)))
        self.edge_faces: dict[tuple[int, int], tuple[int, ...]] = {}
        for fid in self.face_ids:
            cyc = poly.faces[fid].vertex_ids
            for k in range(len(cyc)):
                u, v = cyc[k], cyc[(k + 1) % len(cyc)]
                key = (u, v) if u < v else (v, u)
                self.edge_faces[key] = self.edge_faces.get(key, ()) + (fid,)

    def used_vertex_ids(self) -> list[int]:
        used = set()
        for fid in self.face_ids:
            used.update(self.poly.faces[fid].vertex_ids)
        return sorted(used)

    def vertex_face_ids(self, vid: int) -> list[int]:
        mine = set(self.face_ids)
        return [f for f in self.poly.vertex_face_ids[vid] if f in mine]

    def boundary_edge_keys(self) -> list[tuple[int, int]]:
        return [k for k, fids in self.edge_faces.items() if len(fids) == 1]

    def is_edge_connected(self) -> bool:
        if not self.face_ids:
            return True
        ids = set(self.face_ids)
        start = self.face_ids[0]
        seen = {start}
        stack = [start]
        while stack:
            fid = stack.pop()
            cyc = self.poly.faces[fid].vertex_ids
            for k in range(len(cyc)):
                u, v = cyc[k], cyc[(k + 1) % len(cyc)]
                key = (u, v) if u < v else (v, u)
                for nb in self.edge_faces[key]:
                    if nb in ids and nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        return len(seen) == len(ids)

    def euler_characteristic(self) -> int:
        return len(self.used_vertex_ids()) - len(self.edge_faces) + len(self.face_ids)

    def boundary_cycle(self) -> list[int]:
        """Boundary vertices in cyclic order, counterclockwise from +z.

        Raises NoBoundary when the patch is closed and LemmaViolation
        when the boundary is not one simple cycle.
        """
        boundary = self.boundary_edge_keys()
        if not boundary:
            raise NoBoundary(
                "face subset covers a closed surface" if self.face_ids else "face subset is empty"
            )
        # Direct each boundary edge the way its unique face traverses it.
        succ: dict[int, int] = {}
        for key in boundary:
            fid = self.edge_faces[key][0]
            cyc = self.poly.faces[fid].vertex_ids
            for k in range(len(cyc)):
                u, v = cyc[k], cyc[(k + 1) % len(cyc)]
                if (min(u, v), max(u, v)) == key:
                    if u in succ:
                        raise LemmaViolation(f"boundary branches at vertex {u}")
                    succ[u] = v
                    break
        start = min(succ)
        cycle = [start]
        cur = succ[start]
        while cur != start:
            cycle.append(cur)
            if cur not in succ:
                raise LemmaViolation(f"boundary is not closed at vertex {cur}")
            cur = succ[cur]
            if len(cycle) > len(boundary):
                raise LemmaViolation("boundary walk does not terminate")
        if len(cycle) != len(boundary):
            raise LemmaViolation("boundary has more than one cycle")
        # Counterclockwise seen from +z, first vertex lowest.
        area2 = 0.0
        for k in range(len(cycle)):
            p, q = self.poly.vertices[cycle[k]], self.poly.vertices[cycle[(k + 1) % len(cycle)]]
            area2 += p.x * q.y - q.x * p.y
        if area2 < 0.0:
            cycle.reverse()
        lo = cycle.index(min(cycle))
        return cycle[lo:] + cycle[:lo]


# --- hull construction ----------------------------------------------------


def convex_hull(points, tol: Tolerances | None = None) -> Polyhedron:
    """Convex hull of at least 4 non-coplanar points.

    Input points that are interior, or that duplicate hull vertices, are
    discarded.  Coplanar adjacent facets are merged into maximal faces.
    """
    pts = [p if isinstance(p, Vec3) else Vec3(*p) for p in points]
    if len(pts) < 4:
        raise DegenerateHull(f"need at least 4 points, got {len(pts)}")
    arr = as_array(pts)
    try:
        qh = ConvexHull(arr)
    except QhullError as exc:
        raise DegenerateHull(f"hull input is degenerate: {str(exc).splitlines()[0]}") from exc

    span = arr[qh.vertices].max(axis=0) - arr[qh.vertices].min(axis=0)
    tol = tol or Tolerances.scaled(float(np.linalg.norm(span)))

    tris = [tuple(int(i) for i in s) for s in qh.simplices]
    eq_normals = qh.equations[:, :3]
    eq_offsets = -qh.equations[:, 3]
    for t, (a, b, c) in enumerate(tris):
        n = np.cross(arr[b] - arr[a], arr[c] - arr[a])
        if float(np.dot(n, eq_normals[t])) < 0.0:
            tris[t] = (a, c, b)

    parent = list(range(len(tris)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    t_idx = np.repeat(np.arange(len(tris)), qh.neighbors.shape[1])
    n_idx = qh.neighbors.ravel().astype(int)
    a, b = eq_normals[t_idx], eq_normals[n_idx]
    coplanar = (
        (np.linalg.norm(np.cross(a, b), axis=1) <= tol.eps_angle)
        & (np.einsum("ij,ij->i", a, b) > 0.0)
        & (np.abs(eq_offsets[t_idx] - eq_offsets[n_idx]) <= tol.eps_geom)
    )
    for t, nb in zip(t_idx[coplanar], n_idx[coplanar]):
        ra, rb = find(int(t)), find(int(nb))
        if ra != rb:
            parent[ra] = rb

    groups: dict[int, list[int]] = {}
    for t in range(len(tris)):
        groups.setdefault(find(t), []).append(t)

    cycles = []
    for members in groups.values():
        cycles.append(_merged_boundary([tris[t] for t in members]))

    used = sorted({i for cyc in cycles for i in cyc})
    remap = {old: new for new, old in enumerate(used)}
    vertices = [Vec3(*arr[i]) for i in used]
    cycles = [tuple(remap[i] for i in cyc) for cyc in cycles]
    return Polyhedron(vertices, cycles, tol=tol)


def _merged_boundary(cycles: list[tuple[int, ...]]) -> tuple[int, ...]:
    """Boundary cycle of a consistently oriented, edge-connected face group."""
    count: Counter = Counter()
    for cyc in cycles:
        for k in range(len(cyc)):
            count[(cyc[k], cyc[(k + 1) % len(cyc)])] += 1
    succ = {}
    for (u, v), m in count.items():
        back = count.get((v, u), 0)
        if m == 1 and back == 0:
            if u in succ:
                raise InvariantViolation("merged facet boundary branches")
            succ[u] = v
        elif not (m == 1 and back == 1):
            raise InvariantViolation("merged facet has a non-manifold edge")
    if len(succ) < 3:
        raise InvariantViolation("merged facet boundary too short")
    start = min(succ)
    cyc = [start]
    cur = succ[start]
    while cur != start:
        cyc.append(cur)
        cur = succ[cur]
        if len(cyc) > len(succ):
            raise InvariantViolation("merged facet boundary does not close")
    if len(cyc) != len(succ):
        raise InvariantViolation("merged facet boundary splits into several cycles")
    return tuple(cyc)


def _rotate_min(cyc: tuple[int, ...]) -> tuple[int, ...]:
    lo = cyc.index(min(cyc))
    return cyc[lo:] + cyc[:lo]


def upward_faces(p: Polyhedron) -> list[int]:
    """Faces whose outward normal has strictly positive z-component.

    On the hull of dualized planes these are exactly the faces that make
    up the lower envelope of the original planes.
    """
    return [fid for fid, f in enumerate(p.faces) if f.normal.z > Z_STRICT_EPS]


def downward_faces(p: Polyhedron) -> list[int]:
    """Faces whose outward normal has strictly negative z-component."""
    return [fid for fid, f in enumerate(p.faces) if f.normal.z < -Z_STRICT_EPS]
