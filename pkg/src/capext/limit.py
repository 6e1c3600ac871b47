"""Limit angle of an unbounded polyhedron and curvature bookkeeping.

Shrinking the extension toward a point turns it into a cone: an apex
with the ray directions in cyclic order.  Curvature at a vertex is the
angle defect 2*pi minus the incident face angles.  Because the stored
hull truncates the solid with a floor strictly below every finite
vertex, each finite vertex carries its complete fan (faces reaching
infinity included), so the defect needs no special casing; floor
vertices are truncation artifacts and are skipped.  The defect summed
over the finite vertices equals the apex curvature of the limit cone,
and both stay strictly under 2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cap import Cap
from .errors import BoundaryVertex, DegenerateLimitAngle, InvariantViolation
from .extension import UnboundedPolyhedron
from .geometry import Vec3, angle_between, spherical_polygon_area
from .hull import Polyhedron, SurfacePatch

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class LimitAngle:
    """Cone at an apex spanned by unit ray directions in cyclic order."""

    apex: Vec3
    directions: tuple[Vec3, ...]

    def __post_init__(self):
        if len(self.directions) < 3:
            raise DegenerateLimitAngle(f"{len(self.directions)} directions span no solid cone")


@dataclass(frozen=True)
class CurvatureReport:
    """Per-vertex angle defects and the identity/bound checks."""

    per_vertex: dict[int, float]
    total_cap: float
    total_extension: float
    limit_apex: float
    identity_gap: float
    bound_margin: float
    tolerance: float

    @property
    def identity_pass(self) -> bool:
        return self.identity_gap < self.tolerance

    @property
    def bound_pass(self) -> bool:
        return self.bound_margin > 0.0


def build_limit_angle(u: UnboundedPolyhedron, apex: Vec3 = Vec3(0.0, 0.0, 0.0)) -> LimitAngle:
    """Translate the extension's rays to a common apex."""
    dirs = tuple(r.direction for r in u.rays)
    la = LimitAngle(apex, dirs)
    for i, d in enumerate(dirs):
        nxt = dirs[(i + 1) % len(dirs)]
        if angle_between(d, nxt) <= 1e-12:
            raise DegenerateLimitAngle(f"consecutive ray directions {i} and {i + 1} coincide")
    return la


def limit_apex_curvature(la: LimitAngle) -> float:
    """Apex angle defect: 2*pi minus the cone's surface angles."""
    total = 0.0
    k = len(la.directions)
    for i in range(k):
        total += angle_between(la.directions[i], la.directions[(i + 1) % k])
    return TWO_PI - total


def _incident_faces(surface: Polyhedron | SurfacePatch, vid: int) -> tuple[Polyhedron, list[int]]:
    if isinstance(surface, SurfacePatch):
        return surface.poly, surface.vertex_face_ids(vid)
    return surface, list(surface.vertex_face_ids.get(vid, []))


def _fan_edges(poly: Polyhedron, fids: list[int], vid: int) -> dict[int, list[int]]:
    """Map neighbor vertex -> faces among fids using edge (vid, neighbor)."""
    spokes: dict[int, list[int]] = {}
    for fid in fids:
        cyc = poly.faces[fid].vertex_ids
        k = cyc.index(vid)
        for nb in (cyc[k - 1], cyc[(k + 1) % len(cyc)]):
            spokes.setdefault(nb, []).append(fid)
    return spokes


def vertex_curvature(surface: Polyhedron | SurfacePatch, vid: int) -> float:
    """Angle defect 2*pi - sum of incident face angles.

    The vertex must carry a complete fan within the surface; a vertex on
    an open rim raises BoundaryVertex.
    """
    poly, fids = _incident_faces(surface, vid)
    if not fids:
        raise BoundaryVertex(f"vertex {vid} has no incident face")
    spokes = _fan_edges(poly, fids, vid)
    for nb, around in spokes.items():
        if len(around) != 2:
            raise BoundaryVertex(f"vertex {vid} fan is open along edge to {nb}")
    return TWO_PI - sum(poly.face_angle(fid, vid) for fid in fids)


def spherical_image_curvature(surface: Polyhedron | SurfacePatch, vid: int) -> float:
    """Area of the polygon the incident face normals cut on the sphere.

    Zero for a flat vertex (all normals coincide).  The vertex must
    carry a complete fan; equals the angle defect at convex vertices.
    """
    poly, fids = _incident_faces(surface, vid)
    if not fids:
        raise BoundaryVertex(f"vertex {vid} has no incident face")
    spokes = _fan_edges(poly, fids, vid)
    for nb, around in spokes.items():
        if len(around) != 2:
            raise BoundaryVertex(f"vertex {vid} fan is open along edge to {nb}")
    if len(fids) == 2:
        # The vertex sits on a straight edge between two faces (a merge
        # leftover); its normal cone is an arc with no area.
        return 0.0
    normals = [poly.faces[fid].normal for fid in fids]
    flat = max(
        normals[i].cross(normals[j]).norm()
        for i in range(len(normals))
        for j in range(i + 1, len(normals))
    )
    if flat <= poly.tol.eps_angle:
        return 0.0
    ordered = _ordered_fan(poly, fids, vid, spokes)
    return spherical_polygon_area([poly.faces[fid].normal for fid in ordered], poly.tol)


def strictly_convex_vertex(
    surface: Polyhedron | SurfacePatch, vid: int, eps_angle: float = 1e-6
) -> bool:
    """Whether the vertex has a full-dimensional normal cone.

    Requires a complete fan of at least three faces with every pair of
    incident normals separated by more than eps_angle.  A pair closer
    than that puts the vertex on the coplanar borderline, where the
    spherical image degenerates and its area is no longer a trustworthy
    reading of the defect.
    """
    poly, fids = _incident_faces(surface, vid)
    if len(fids) < 3:
        return False
    spokes = _fan_edges(poly, fids, vid)
    if any(len(around) != 2 for around in spokes.values()):
        return False
    normals = [poly.faces[fid].normal for fid in fids]
    return all(
        normals[i].cross(normals[j]).norm() > eps_angle
        for i in range(len(normals))
        for j in range(i + 1, len(normals))
    )


def _ordered_fan(poly: Polyhedron, fids: list[int], vid: int, spokes: dict[int, list[int]]) -> list[int]:
    edge_of: dict[int, list[int]] = {fid: [] for fid in fids}
    for nb, around in spokes.items():
        for fid in around:
            edge_of[fid].append(nb)
    start = fids[0]
    ordered = [start]
    prev_edge = edge_of[start][0]
    while len(ordered) < len(fids):
        cur = ordered[-1]
        nxt_edge = edge_of[cur][0] if edge_of[cur][1] == prev_edge else edge_of[cur][1]
        a, b = spokes[nxt_edge]
        nxt = b if a == cur else a
        if nxt in ordered:
            raise InvariantViolation(f"face fan at vertex {vid} is not a single cycle")
        ordered.append(nxt)
        prev_edge = nxt_edge
    return ordered


def verify_curvature_identity(u: UnboundedPolyhedron, la: LimitAngle | None = None, identity_tol: float = 1e-9) -> CurvatureReport:
    """Angle defect of every finite vertex of the extension vs the cone.

    Keys of per_vertex are vertex ids of the truncated hull; floor
    vertices are omitted.  Vertices of the original cap that end up flat
    on the extended surface are absorbed by the hull and carry no entry
    (their defect is zero).
    """
    la = la or build_limit_angle(u)
    floor = set(u.floor_vertex_ids)
    per_vertex = {
        vid: vertex_curvature(u.hull, vid)
        for vid in range(u.hull.vertex_count)
        if vid not in floor
    }
    total_extension = sum(per_vertex.values())
    total_cap = cap_interior_curvature(u.cap)
    limit_apex = limit_apex_curvature(la)
    return CurvatureReport(
        per_vertex=per_vertex,
        total_cap=total_cap,
        total_extension=total_extension,
        limit_apex=limit_apex,
        identity_gap=abs(total_extension - limit_apex),
        bound_margin=TWO_PI - total_extension,
        tolerance=identity_tol,
    )


def cap_interior_curvature(c: Cap) -> float:
    """Summed angle defect over the cap's interior vertices."""
    return sum(vertex_curvature(c.patch, vid) for vid in c.interior_vertex_ids())
