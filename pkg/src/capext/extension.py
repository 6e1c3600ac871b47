"""Extension of a cap to an unbounded convex polyhedron.

The cap's face planes bound half-spaces z <= a*x + b*y + c whose
intersection continues the cap downward without end.  The finite
vertices of that intersection are found by duality: each plane maps to
the point (a, b, -c), the lower envelope of the planes corresponds to
the upward faces of the dual hull, and those faces map back to points.
Only the planes along the cap boundary can stay active beyond the cap
(walking outward on a convex surface the directional slopes decrease,
so an interior plane is already descending slower than some boundary
plane before the rim and never catches up), which keeps the dual step
small.

The faces that survive at infinity are the ones whose tilted normals
are extreme: projecting plane normals to the horizontal gives a 2D
point per plane, and the convex hull of those points lists the active
planes in cyclic order.  Consecutive active planes meet in a ray.  To
recover the finite face complex exactly, the solid is truncated by a
horizontal floor strictly below every finite vertex; the hull of cap
vertices, envelope vertices, and ray-floor intersections then shows
each unbounded face as a long face reaching the floor, and each ray as
an edge ending in a floor vertex.  Floor vertices are bookkeeping
artifacts, never part of the reported geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cap import Cap
from .errors import DegenerateExtension, DegenerateHull, InvariantViolation
from .geometry import Plane, Tolerances, Vec3
from .hull import Polyhedron, SurfacePatch, convex_hull, upward_faces

import numpy as np
from scipy.spatial import ConvexHull as _QhullRaw
from scipy.spatial import QhullError

# A computed ray direction with |z| at or below this is horizontal: the
# half-space intersection is a ruled wedge with no proper cone.
RAY_Z_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Ray:
    """Unbounded edge: origin vertex plus unit direction going down."""

    origin: Vec3
    direction: Vec3
    origin_vid: int

    def __post_init__(self):
        if abs(self.direction.norm() - 1.0) > 1e-9:
            raise InvariantViolation("ray direction must be a unit vector")
        if self.direction.z >= 0.0:
            raise InvariantViolation("ray direction must point downward")

    def point_at(self, t: float) -> Vec3:
        return self.origin + self.direction * t


@dataclass(frozen=True, slots=True)
class UnboundedFace:
    """Face of the extension reaching infinity between two rays.

    chain lists the rim vertices the face owns, in rim order; start_ray
    and end_ray index the rays leaving chain[0] and chain[-1].
    """

    plane: Plane
    chain: tuple[int, ...]
    start_ray: int
    end_ray: int


@dataclass(frozen=True)
class UnboundedPolyhedron:
    """Finite face complex plus the rays and faces escaping to infinity.

    hull is the floor-truncated solid; bounded restricts it to the faces
    that are genuinely finite (cap faces and closed-up boundary-plane
    faces).  Vertices listed in floor_vertex_ids sit on the truncation
    floor and exist only to pin down the rays.
    """

    hull: Polyhedron
    bounded: SurfacePatch
    rim: tuple[int, ...]
    new_vertex_ids: tuple[int, ...]
    rays: tuple[Ray, ...]
    unbounded_faces: tuple[UnboundedFace, ...]
    cap: Cap
    floor_z: float
    floor_vertex_ids: tuple[int, ...]

    @property
    def new_vertices(self) -> list[Vec3]:
        return [self.hull.vertices[i] for i in self.new_vertex_ids]


def dualize_plane(plane: Plane) -> Vec3:
    """Plane z = ax + by + c maps to the point (a, b, -c)."""
    return Vec3(plane.a, plane.b, -plane.c)


def dualize_point(q: Vec3) -> Plane:
    """Point (u, v, w) maps to the plane z = ux + vy - w."""
    return Plane(q.x, q.y, -q.z)


def boundary_face_planes(c: Cap) -> list[Plane]:
    """Planes of the faces that share an edge with the cap boundary.

    Deduplicated; faces touching the boundary only at a vertex are not
    boundary faces and contribute nothing.
    """
    planes = [c.poly.face_plane(fid) for fid in c.boundary_face_ids]
    scale = max(1.0, max(max(abs(p.a), abs(p.b), abs(p.c)) for p in planes))
    kept: list[Plane] = []
    for p in planes:
        dup = any(
            abs(p.a - q.a) <= 1e-12 * scale
            and abs(p.b - q.b) <= 1e-12 * scale
            and abs(p.c - q.c) <= 1e-12 * scale
            for q in kept
        )
        if not dup:
            kept.append(p)
    return kept


def _satisfies(q: Vec3, plane: Plane, eps: float) -> bool:
    h = plane.height_at(q.x, q.y)
    # Scale with the evaluated terms: steep planes cancel large a*x and
    # b*y contributions, so the comparison loses that many digits.
    scale = 1.0 + abs(plane.a * q.x) + abs(plane.b * q.y) + abs(plane.c) + abs(q.z)
    return q.z <= h + eps * scale


def lower_envelope_vertices(planes: list[Plane], tol: Tolerances | None = None) -> list[Vec3]:
    """Vertices of the intersection of half-spaces z <= a*x + b*y + c.

    Fewer than three planes bound a slab or wedge with no vertex.  Three
    or more concurrent planes (coplanar dual points) meet in a single
    point; if the dual points lie in a vertical plane the envelope is
    ruled and again has no vertex.
    """
    tol = tol or Tolerances()
    if not planes:
        raise ValueError("need at least one plane")
    if len(planes) < 3:
        return []
    duals = [dualize_plane(p) for p in planes]
    arr = np.array([d.as_tuple() for d in duals])
    centered = arr - arr.mean(axis=0)
    _, sigma, vt = np.linalg.svd(centered)

    def from_coplanar() -> list[Vec3]:
        n = vt[-1]
        if abs(n[2]) <= 1e-9 * float(np.linalg.norm(n)):
            return []
        centroid = arr.mean(axis=0)
        alpha = -n[0] / n[2]
        beta = -n[1] / n[2]
        gamma = float(centroid[2] - alpha * centroid[0] - beta * centroid[1])
        return [Vec3(alpha, beta, -gamma)]

    if sigma[-1] <= 1e-12 * max(sigma[0], 1.0):
        out = from_coplanar()
    else:
        try:
            dual_hull = convex_hull(duals)
        except DegenerateHull:
            out = from_coplanar()
        else:
            out = []
            for fid in upward_faces(dual_hull):
                face_plane = dual_hull.face_plane(fid)
                out.append(dualize_plane(face_plane))
            out.sort(key=lambda q: q.as_tuple())
    check_eps = max(tol.eps_geom, 1e-7)
    for q in out:
        for p in planes:
            if not _satisfies(q, p, check_eps):
                h = p.height_at(q.x, q.y)
                raise InvariantViolation(
                    f"envelope vertex {q.as_tuple()} violates z <= {p.a}x + {p.b}y + {p.c} by {q.z - h:g}"
                )
    return out


def recession_fan(planes: list[Plane]) -> tuple[list[Plane], list[Vec3], list[Vec3]]:
    """Active planes at infinity, cyclic; ray directions; ray line points.

    A direction (x, y, -1) recedes inside every half-space z <= ax+by+c
    exactly when ax + by >= -1 for all planes, so the planes active at
    infinity are the vertices of the 2D hull of the points (-a, -b), in
    counterclockwise order.  Ray i runs along the intersection line of
    active planes i and i+1.

    Raises DegenerateExtension when the horizontal normal footprint is
    degenerate (fewer than three extreme planes) or does not enclose the
    origin, i.e. the intersection recedes sideways instead of downward.
    """
    footprint = np.array([[-p.a, -p.b] for p in planes])
    try:
        qh = _QhullRaw(footprint)
    except QhullError as exc:
        raise DegenerateExtension(f"boundary-plane normals are degenerate: {exc}") from exc
    order_idx = [int(i) for i in qh.vertices]  # counterclockwise in 2D
    if len(order_idx) < 3:
        raise DegenerateExtension(
            f"only {len(order_idx)} extreme boundary planes; the intersection is a wedge"
        )
    if np.any(qh.equations[:, 2] >= -1e-12):
        raise DegenerateExtension("boundary planes do not close around the downward direction")

    # Parallel boundary planes share a footprint point; the lowest one
    # (smallest offset c) is the binding constraint.
    active: list[Plane] = []
    for idx in order_idx:
        u = footprint[idx]
        group = [
            p
            for k, p in enumerate(planes)
            if abs(footprint[k][0] - u[0]) <= 1e-12 and abs(footprint[k][1] - u[1]) <= 1e-12
        ]
        active.append(min(group, key=lambda p: p.c))
    shift = min(range(len(active)), key=lambda i: (active[i].a, active[i].b, active[i].c))
    active = active[shift:] + active[:shift]

    dirs: list[Vec3] = []
    line_pts: list[Vec3] = []
    k = len(active)
    for i in range(k):
        p, q = active[i], active[(i + 1) % k]
        d = q.normal().cross(p.normal())
        if d.norm() <= RAY_Z_EPS or abs(d.z) <= RAY_Z_EPS * d.norm():
            raise DegenerateExtension("adjacent active planes meet in a horizontal line")
        d = d.normalized()
        if d.z > 0.0:
            raise InvariantViolation("ray direction came out upward; active planes out of order")
        a = np.array([[p.a, p.b, -1.0], [q.a, q.b, -1.0]])
        b = np.array([-p.c, -q.c])
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        dirs.append(d)
        line_pts.append(Vec3(float(sol[0]), float(sol[1]), float(sol[2])))
    return active, dirs, line_pts


def build_extension(c: Cap) -> UnboundedPolyhedron:
    """Extend the cap across its boundary planes to an unbounded solid.

    Raises DegenerateExtension when fewer than three distinct boundary
    planes exist or the planes cannot bound a downward cone.
    """
    poly = c.poly
    planes = boundary_face_planes(c)
    if len(planes) < 3:
        raise DegenerateExtension(
            f"{len(planes)} distinct boundary plane(s); the half-space intersection is not a cone"
        )
    fan, ray_dirs, line_pts = recession_fan(planes)
    envelope = lower_envelope_vertices(planes, tol=poly.tol)

    # Keep only envelope vertices on or under every cap face plane: the
    # others are cut away by the cap itself and never reach the surface.
    cap_planes = [poly.face_plane(fid) for fid in c.face_ids]
    eps = poly.tol.eps_geom
    kept = [q for q in envelope if all(_satisfies(q, pl, eps) for pl in cap_planes)]

    cap_vertices = [poly.vertices[i] for i in c.vertex_ids()]
    fresh = [q for q in kept if all((q - v).norm() > eps for v in cap_vertices)]

    finite = cap_vertices + fresh
    zmin = min(p.z for p in finite)
    span = max(poly.diameter, max(p.norm() for p in finite), 1.0)
    floor_z = zmin - span
    floor_pts = []
    for d, p0 in zip(ray_dirs, line_pts):
        t = (floor_z - p0.z) / d.z
        floor_pts.append(Vec3(p0.x + t * d.x, p0.y + t * d.y, floor_z))

    joined_pts = finite + floor_pts
    arr = np.array([[q.x, q.y, q.z] for q in joined_pts])
    joined_span = max(float(np.linalg.norm(arr.max(axis=0) - arr.min(axis=0))), 1.0)
    # The floor sits a full span below the cap, so facet normals on the
    # joined hull carry far more rounding than the cap's own; merge and
    # validate under a proportionally coarser tolerance.
    joined_tol = Tolerances(
        eps_geom=1e-7 * joined_span, eps_angle=1e-7, eps_area=(1e-7 * joined_span) ** 2
    )
    joined = convex_hull(joined_pts, tol=joined_tol)
    floor_eps = 1e-9 * joined_span
    floor_vids = _locate(joined, floor_pts, floor_eps)
    floor_set = set(floor_vids)
    if len(floor_set) != len(floor_pts):
        raise DegenerateExtension("ray floor points collide; the cone is too thin to resolve")

    up = upward_faces(joined)
    strip_fids = [fid for fid in up if any(v in floor_set for v in joined.faces[fid].vertex_ids)]
    strip_of = _match_strips(joined, strip_fids, fan)

    rays: list[Ray] = []
    k = len(fan)
    for i in range(k):
        fvid = floor_vids[i]
        cyc = joined.faces[strip_of[i]].vertex_ids
        pos = cyc.index(fvid)
        neighbors = [cyc[pos - 1], cyc[(pos + 1) % len(cyc)]]
        origin_ids = [v for v in neighbors if v not in floor_set]
        if len(origin_ids) != 1:
            raise InvariantViolation(f"ray edge at floor vertex {fvid} is not unique")
        origin_vid = origin_ids[0]
        origin = joined.vertices[origin_vid]
        seg = joined.vertices[fvid] - origin
        if seg.cross(ray_dirs[i]).norm() > 1e-7 * seg.norm():
            raise InvariantViolation("hull ray edge deviates from the active-plane line")
        rays.append(Ray(origin, ray_dirs[i], origin_vid))

    ufaces: list[UnboundedFace] = []
    for i in range(k):
        fid = strip_of[i]
        cyc = list(joined.faces[fid].vertex_ids)
        m = len(cyc)
        start = next(
            (
                (j + 1) % m
                for j in range(m)
                if cyc[j] in floor_set and cyc[(j + 1) % m] not in floor_set
            ),
            None,
        )
        if start is None:
            raise InvariantViolation(f"unbounded face {i} has no finite vertex")
        chain = tuple(reversed([cyc[(start + t) % m] for t in range(m - 2)]))
        start_ray, end_ray = (i - 1) % k, i
        if chain[0] != rays[start_ray].origin_vid or chain[-1] != rays[end_ray].origin_vid:
            raise InvariantViolation(f"unbounded face {i} chain does not span its rays")
        ufaces.append(UnboundedFace(joined.face_plane(fid), chain, start_ray, end_ray))

    # Rim: finite boundary walk, concatenating the chains in cyclic order.
    # Adjacent chains share their ray-origin endpoint; when every face of
    # the solid reaches infinity the rim can shrink to a single vertex.
    rim_seq: list[int] = []
    for uf in ufaces:
        for vid in uf.chain:
            if not rim_seq or vid != rim_seq[-1]:
                rim_seq.append(vid)
    if len(rim_seq) > 1 and rim_seq[0] == rim_seq[-1]:
        rim_seq.pop()
    lo = rim_seq.index(min(rim_seq))
    rim = tuple(rim_seq[lo:] + rim_seq[:lo])

    bounded = SurfacePatch(joined, [fid for fid in up if fid not in set(strip_fids)])
    # The finite skin must be glued to the unbounded faces along its whole
    # boundary.  Checked edge by edge rather than as one walk: the skin may
    # pinch at a rim vertex whose surrounding faces alternate between
    # finite and unbounded, which is legal but not a simple cycle.
    strip_edges = set()
    for fid in strip_fids:
        cyc = joined.faces[fid].vertex_ids
        for t in range(len(cyc)):
            u, v = cyc[t], cyc[(t + 1) % len(cyc)]
            strip_edges.add((u, v) if u < v else (v, u))
    rim_set = set(rim)
    for key in bounded.boundary_edge_keys():
        if key not in strip_edges or key[0] not in rim_set or key[1] not in rim_set:
            raise InvariantViolation(
                "finite-face boundary does not line up with the unbounded-face chains"
            )
    new_ids = tuple(
        vid
        for vid in range(joined.vertex_count)
        if vid not in floor_set and all((joined.vertices[vid] - v).norm() > eps for v in cap_vertices)
    )
    ext = UnboundedPolyhedron(
        joined, bounded, rim, new_ids, tuple(rays), tuple(ufaces), c, floor_z, tuple(floor_vids)
    )
    _validate_extension(c, planes, ext)
    return ext


def _locate(poly: Polyhedron, points: list[Vec3], eps: float) -> list[int]:
    ids = []
    for q in points:
        best = min(range(poly.vertex_count), key=lambda vid: (poly.vertices[vid] - q).norm())
        if (poly.vertices[best] - q).norm() > eps * max(1.0, q.norm()):
            raise InvariantViolation(f"expected hull vertex near {q.as_tuple()}")
        ids.append(best)
    return ids


def _match_strips(poly: Polyhedron, strip_fids: list[int], fan: list[Plane]) -> dict[int, int]:
    strip_of: dict[int, int] = {}
    for fid in strip_fids:
        pl = poly.face_plane(fid)
        scale = max(1.0, abs(pl.a), abs(pl.b), abs(pl.c))
        matches = [
            i
            for i, fp in enumerate(fan)
            if abs(pl.a - fp.a) <= 1e-7 * scale
            and abs(pl.b - fp.b) <= 1e-7 * scale
            and abs(pl.c - fp.c) <= 1e-7 * scale
        ]
        if len(matches) != 1 or matches[0] in strip_of:
            raise InvariantViolation("unbounded faces do not match the active planes one-to-one")
        strip_of[matches[0]] = fid
    if len(strip_of) != len(fan):
        raise InvariantViolation(
            f"{len(strip_of)} unbounded faces for {len(fan)} active planes"
        )
    return strip_of


def _validate_extension(c: Cap, planes: list[Plane], ext: UnboundedPolyhedron):
    poly = c.poly
    eps = poly.tol.eps_geom
    for vid in c.vertex_ids():
        v = poly.vertices[vid]
        for p in planes:
            if not _satisfies(v, p, eps):
                raise InvariantViolation(
                    f"cap vertex {vid} lies above boundary plane z = {p.a}x + {p.b}y + {p.c}"
                )
    for fid in c.face_ids:
        cap_plane = poly.face_plane(fid)
        target = _matching_face(ext, cap_plane, eps)
        if target is None:
            raise InvariantViolation(f"cap face {fid} has no coplanar face in the extension")
        for vid in poly.faces[fid].vertex_ids:
            if not _inside_face(ext.hull, target, poly.vertices[vid], eps):
                raise InvariantViolation(f"cap face {fid} is not contained in its extended face")
    rim_from_chains = {vid for uf in ext.unbounded_faces for vid in uf.chain}
    if rim_from_chains != set(ext.rim):
        raise InvariantViolation("rim vertices and unbounded-face chains disagree")
    for uf in ext.unbounded_faces:
        for ridx in (uf.start_ray, uf.end_ray):
            r = ext.rays[ridx]
            n = uf.plane.normal()
            if abs(n.dot(r.direction)) > 1e-9:
                raise InvariantViolation("ray is not parallel to its unbounded face")
    if len(ext.rays) != len(ext.unbounded_faces) or len(ext.rays) < 3:
        raise InvariantViolation("ray and unbounded-face counts disagree")


def _matching_face(ext: UnboundedPolyhedron, plane: Plane, eps: float) -> int | None:
    scale = max(1.0, abs(plane.a), abs(plane.b), abs(plane.c))
    for fid in range(len(ext.hull.faces)):
        q = ext.hull.face_plane(fid)
        if abs(q.a - plane.a) <= 1e-7 * scale and abs(q.b - plane.b) <= 1e-7 * scale and abs(q.c - plane.c) <= 1e-7 * scale:
            return fid
    return None


def _inside_face(poly: Polyhedron, fid: int, point: Vec3, eps: float) -> bool:
    cyc = poly.faces[fid].vertex_ids
    n = poly.faces[fid].normal
    slack = eps * max(1.0, poly.diameter)
    for k in range(len(cyc)):
        p = poly.vertices[cyc[k]]
        q = poly.vertices[cyc[(k + 1) % len(cyc)]]
        if (q - p).cross(point - p).dot(n) < -slack:
            return False
    return True
