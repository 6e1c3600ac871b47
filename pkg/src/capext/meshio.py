"""Mesh and scene serialization: OFF, OBJ, and a JSON scene document.

OFF is the interchange format for closed solids; parsing validates the
mesh as a closed convex polyhedron and rejects anything else with a
line-numbered error.  OBJ is export-only: open surfaces (caps, the
finite skin of an extension) and rays truncated to finite segments have
no closed-solid representation, so round-tripping OBJ is not a goal.
The JSON scene document serializes every pipeline artifact losslessly;
floats are written with repr so parsing returns the identical values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cap import Cap, CapSpec
from .errors import (
    DegenerateGeometry,
    DegenerateHull,
    InvariantViolation,
    OffParseError,
    SceneParseError,
    VerticalPlane,
)
from .extension import Ray, UnboundedFace, UnboundedPolyhedron
from .geometry import Plane, Tolerances, Vec3, newell_normal
from .hull import Polyhedron, SurfacePatch, _merged_boundary
from .limit import LimitAngle

SCENE_SCHEMA = 1


# --- OFF ------------------------------------------------------------------


def _significant_rows(text: str) -> list[tuple[int, str]]:
    rows = []
    for idx, raw in enumerate(text.splitlines(), start=1):
        bare = raw.split("#", 1)[0].strip()
        if bare:
            rows.append((idx, bare))
    return rows


def parse_off(text: str, tol: Tolerances | None = None) -> Polyhedron:
    """Parse OFF text into a validated closed convex polyhedron.

    Layout: an "OFF" header, a "V F E" counts line, V coordinate lines,
    then F face lines "k i1 ... ik".  Blank lines and '#' comments are
    skipped.  Syntax problems raise OffParseError with the offending
    line number; coplanar vertex sets raise DegenerateHull; meshes that
    are not closed convex surfaces (non-manifold edges, inward
    orientation, a vertex outside a face plane) raise OffParseError.
    Adjacent coplanar faces are merged, so a triangulated convex solid
    parses to the same polyhedron as its merged form.
    """
    rows = _significant_rows(text)
    if not rows:
        raise OffParseError("empty input")
    ln, header = rows[0]
    if header != "OFF":
        raise OffParseError(f"expected 'OFF' header, got {header!r}", line=ln)
    if len(rows) < 2:
        raise OffParseError("missing counts line", line=ln)
    ln, counts_line = rows[1]
    parts = counts_line.split()
    try:
        nv, nf, _ne = (int(p) for p in parts)
    except ValueError:
        raise OffParseError("counts line must hold three integers", line=ln) from None
    if len(parts) != 3:
        raise OffParseError("counts line must hold three integers", line=ln)
    if nv < 0 or nf < 0:
        raise OffParseError("negative count", line=ln)

    expected = 2 + nv + nf
    if len(rows) < expected:
        raise OffParseError(
            f"expected {nv} vertex and {nf} face lines, found only {len(rows) - 2}",
            line=rows[-1][0],
        )
    if len(rows) > expected:
        raise OffParseError("unexpected trailing content", line=rows[expected][0])

    verts: list[Vec3] = []
    for ln, s in rows[2 : 2 + nv]:
        bits = s.split()
        if len(bits) != 3:
            raise OffParseError("vertex line must hold three coordinates", line=ln)
        try:
            x, y, z = (float(b) for b in bits)
        except ValueError:
            raise OffParseError("vertex coordinate is not a number", line=ln) from None
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise OffParseError("vertex coordinate is not finite", line=ln)
        verts.append(Vec3(x, y, z))

    cycles: list[tuple[int, ...]] = []
    seen_directed: dict[tuple[int, int], int] = {}
    for ln, s in rows[2 + nv : expected]:
        bits = s.split()
        try:
            nums = [int(b) for b in bits]
        except ValueError:
            raise OffParseError("face line must hold integers", line=ln) from None
        if not nums or nums[0] != len(nums) - 1:
            raise OffParseError("face vertex count does not match its indices", line=ln)
        cyc = tuple(nums[1:])
        if len(cyc) < 3:
            raise OffParseError("face needs at least three vertices", line=ln)
        if len(set(cyc)) != len(cyc):
            raise OffParseError("face repeats a vertex", line=ln)
        if any(i < 0 or i >= nv for i in cyc):
            raise OffParseError("face index out of range", line=ln)
        for k in range(len(cyc)):
            e = (cyc[k], cyc[(k + 1) % len(cyc)])
            if e in seen_directed:
                raise OffParseError(
                    f"directed edge {e} also used on line {seen_directed[e]}; "
                    "faces overlap or are inconsistently oriented",
                    line=ln,
                )
            seen_directed[e] = ln
        cycles.append(cyc)

    if nv < 4:
        raise DegenerateHull(f"{nv} vertices cannot bound a solid")
    arr = np.array([v.as_tuple() for v in verts])
    centered = arr - arr.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise DegenerateHull("vertices are coplanar")

    cycles = _merge_coplanar_cycles(verts, cycles, tol)
    try:
        return Polyhedron(verts, cycles, tol=tol)
    except (InvariantViolation, VerticalPlane, DegenerateGeometry) as exc:
        raise OffParseError(f"mesh is not a closed convex polyhedron: {exc}") from exc


def _merge_coplanar_cycles(
    verts: list[Vec3], cycles: list[tuple[int, ...]], tol: Tolerances | None
) -> list[tuple[int, ...]]:
    """Union adjacent faces whose planes coincide within tolerance."""
    if len(cycles) < 2:
        return cycles
    if tol is None:
        arr = np.array([v.as_tuple() for v in verts])
        tol = Tolerances.scaled(float(np.linalg.norm(arr.max(axis=0) - arr.min(axis=0))))

    normals = []
    offsets = []
    for cyc in cycles:
        n = newell_normal([verts[i] for i in cyc])
        nlen = n.norm()
        if nlen <= tol.eps_area:
            raise OffParseError("face has no area")
        n = Vec3(n.x / nlen, n.y / nlen, n.z / nlen)
        normals.append(n)
        offsets.append(n.dot(verts[cyc[0]]))

    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fid, cyc in enumerate(cycles):
        for k in range(len(cyc)):
            u, v = cyc[k], cyc[(k + 1) % len(cyc)]
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append(fid)

    parent = list(range(len(cycles)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for fids in edge_faces.values():
        if len(fids) != 2:
            continue
        f, g = fids
        same = (
            normals[f].cross(normals[g]).norm() <= tol.eps_angle
            and normals[f].dot(normals[g]) > 0.0
            and abs(offsets[f] - offsets[g]) <= tol.eps_geom
        )
        if same:
            ra, rb = find(f), find(g)
            if ra != rb:
                parent[ra] = rb

    groups: dict[int, list[int]] = {}
    for fid in range(len(cycles)):
        groups.setdefault(find(fid), []).append(fid)
    if len(groups) == len(cycles):
        return cycles
    merged = []
    for members in groups.values():
        if len(members) == 1:
            merged.append(cycles[members[0]])
        else:
            try:
                merged.append(_merged_boundary([cycles[fid] for fid in members]))
            except InvariantViolation as exc:
                raise OffParseError(f"coplanar face group does not merge cleanly: {exc}") from exc
    return merged


def emit_off(p: Polyhedron) -> str:
    """Canonical OFF text; identical polyhedra serialize byte-identically."""
    lines = ["OFF", f"{p.vertex_count} {p.face_count} {p.edge_count}"]
    for v in p.vertices:
        lines.append(f"{v.x!r} {v.y!r} {v.z!r}")
    for f in p.faces:
        lines.append(" ".join([str(len(f.vertex_ids)), *map(str, f.vertex_ids)]))
    return "\n".join(lines) + "\n"


# --- OBJ ------------------------------------------------------------------


def emit_obj(
    subject: Polyhedron | Cap | UnboundedPolyhedron,
    ray_length: float | None = None,
    include_cone: bool = False,
) -> str:
    """Wavefront OBJ export.

    A polyhedron exports all faces, a cap only its selected faces (no
    ray segments), and an extension its finite faces plus one polyline
    per ray, truncated at ray_length (default twice the diameter of the
    finite part).  With include_cone the limit cone is appended as a
    separate object: the apex at the rim centroid and one triangle per
    consecutive ray pair.
    """
    if isinstance(subject, UnboundedPolyhedron):
        return _obj_extension(subject, ray_length, include_cone)
    if isinstance(subject, Cap):
        poly, fids, name = subject.poly, list(subject.face_ids), "cap"
    elif isinstance(subject, Polyhedron):
        poly, fids, name = subject, list(range(subject.face_count)), "polyhedron"
    else:
        raise TypeError(f"cannot export {type(subject).__name__} as OBJ")
    lines: list[str] = [f"o {name}"]
    _obj_faces(lines, poly, fids, offset=0)
    return "\n".join(lines) + "\n"


def _obj_vertex(v: Vec3) -> str:
    return f"v {v.x!r} {v.y!r} {v.z!r}"


def _obj_faces(lines: list[str], poly: Polyhedron, fids: list[int], offset: int) -> int:
    """Append v/f lines for the given faces; returns the new index offset."""
    used = sorted({vid for fid in fids for vid in poly.faces[fid].vertex_ids})
    remap = {vid: offset + k + 1 for k, vid in enumerate(used)}
    for vid in used:
        lines.append(_obj_vertex(poly.vertices[vid]))
    for fid in fids:
        lines.append("f " + " ".join(str(remap[vid]) for vid in poly.faces[fid].vertex_ids))
    return offset + len(used)


def _obj_extension(u: UnboundedPolyhedron, ray_length: float | None, include_cone: bool) -> str:
    if ray_length is None:
        ray_length = 2.0 * _finite_diameter(u)
    if not (ray_length > 0.0):
        raise ValueError("ray_length must be positive")
    lines: list[str] = ["o bounded"]
    offset = _obj_faces(lines, u.hull, list(u.bounded.face_ids), offset=0)
    lines.append("o rays")
    for r in u.rays:
        lines.append(_obj_vertex(r.origin))
        lines.append(_obj_vertex(r.point_at(ray_length)))
        lines.append(f"l {offset + 1} {offset + 2}")
        offset += 2
    if include_cone:
        rim_pts = [u.hull.vertices[vid] for vid in u.rim]
        apex = Vec3(
            sum(p.x for p in rim_pts) / len(rim_pts),
            sum(p.y for p in rim_pts) / len(rim_pts),
            sum(p.z for p in rim_pts) / len(rim_pts),
        )
        lines.append("o limit_cone")
        lines.append(_obj_vertex(apex))
        apex_idx = offset + 1
        k = len(u.rays)
        for r in u.rays:
            lines.append(_obj_vertex(apex + r.direction * ray_length))
        for i in range(k):
            a = apex_idx + 1 + i
            b = apex_idx + 1 + (i + 1) % k
            lines.append(f"f {apex_idx} {a} {b}")
        offset += 1 + k
    return "\n".join(lines) + "\n"


def _finite_diameter(u: UnboundedPolyhedron) -> float:
    floor = set(u.floor_vertex_ids)
    pts = [v.as_tuple() for vid, v in enumerate(u.hull.vertices) if vid not in floor]
    # the finite part can shrink to a point (a lone regrown apex), so the
    # original body always contributes to the picture's scale
    pts += [v.as_tuple() for v in u.cap.poly.vertices]
    arr = np.array(pts)
    return max(float(np.linalg.norm(arr.max(axis=0) - arr.min(axis=0))), 1e-12)


# --- JSON scene document ---------------------------------------------------


@dataclass
class SceneDocument:
    """Bundle of pipeline artifacts plus free-form metadata."""

    polyhedron: Polyhedron | None = None
    cap: Cap | None = None
    extension: UnboundedPolyhedron | None = None
    limit: LimitAngle | None = None
    metadata: dict[str, Any] = field(default_factory=dict)


def _poly_to_json(p: Polyhedron) -> dict[str, Any]:
    return {
        "vertices": [[v.x, v.y, v.z] for v in p.vertices],
        "faces": [list(f.vertex_ids) for f in p.faces],
        "tol": {
            "eps_geom": p.tol.eps_geom,
            "eps_angle": p.tol.eps_angle,
            "eps_area": p.tol.eps_area,
        },
    }


def _poly_from_json(data: dict[str, Any]) -> Polyhedron:
    tol = Tolerances(**data["tol"])
    return Polyhedron([Vec3(*v) for v in data["vertices"]], data["faces"], tol=tol)


def serialize_scene(doc: SceneDocument) -> str:
    """Canonical JSON for a scene; floats keep full precision via repr."""
    body: dict[str, Any] = {"schema": SCENE_SCHEMA, "metadata": doc.metadata}
    if doc.polyhedron is not None:
        body["polyhedron"] = _poly_to_json(doc.polyhedron)
    if doc.cap is not None:
        if doc.polyhedron is None or doc.cap.poly is not doc.polyhedron:
            raise ValueError("scene cap must belong to the scene polyhedron")
        body["cap"] = {
            "phi": doc.cap.spec.phi,
            "face_ids": list(doc.cap.face_ids),
            "boundary": list(doc.cap.boundary),
            "boundary_face_ids": list(doc.cap.boundary_face_ids),
        }
    if doc.extension is not None:
        if doc.cap is None or doc.extension.cap is not doc.cap:
            raise ValueError("scene extension must belong to the scene cap")
        u = doc.extension
        body["extension"] = {
            "hull": _poly_to_json(u.hull),
            "bounded_face_ids": list(u.bounded.face_ids),
            "rim": list(u.rim),
            "new_vertex_ids": list(u.new_vertex_ids),
            "rays": [
                {"origin_vid": r.origin_vid, "direction": [r.direction.x, r.direction.y, r.direction.z]}
                for r in u.rays
            ],
            "unbounded_faces": [
                {
                    "plane": [uf.plane.a, uf.plane.b, uf.plane.c],
                    "chain": list(uf.chain),
                    "start_ray": uf.start_ray,
                    "end_ray": uf.end_ray,
                }
                for uf in u.unbounded_faces
            ],
            "floor_z": u.floor_z,
            "floor_vertex_ids": list(u.floor_vertex_ids),
        }
    if doc.limit is not None:
        body["limit"] = {
            "apex": [doc.limit.apex.x, doc.limit.apex.y, doc.limit.apex.z],
            "directions": [[d.x, d.y, d.z] for d in doc.limit.directions],
        }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def parse_scene(text: str) -> SceneDocument:
    """Inverse of serialize_scene; rebuilt artifacts equal the originals."""
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"scene document is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise SceneParseError("scene document must be a JSON object")
    if body.get("schema") != SCENE_SCHEMA:
        raise SceneParseError(f"unsupported scene schema {body.get('schema')!r}")
    try:
        doc = SceneDocument(metadata=body.get("metadata", {}))
        if "polyhedron" in body:
            doc.polyhedron = _poly_from_json(body["polyhedron"])
        if "cap" in body:
            if doc.polyhedron is None:
                raise SceneParseError("cap section present without a polyhedron section")
            c = body["cap"]
            patch = SurfacePatch(doc.polyhedron, c["face_ids"])
            doc.cap = Cap(
                patch,
                CapSpec(c["phi"]),
                tuple(c["boundary"]),
                tuple(c["boundary_face_ids"]),
            )
        if "extension" in body:
            if doc.cap is None:
                raise SceneParseError("extension section present without a cap section")
            e = body["extension"]
            hull = _poly_from_json(e["hull"])
            rays = tuple(
                Ray(hull.vertices[r["origin_vid"]], Vec3(*r["direction"]), r["origin_vid"])
                for r in e["rays"]
            )
            faces = tuple(
                UnboundedFace(Plane(*f["plane"]), tuple(f["chain"]), f["start_ray"], f["end_ray"])
                for f in e["unbounded_faces"]
            )
            doc.extension = UnboundedPolyhedron(
                hull=hull,
                bounded=SurfacePatch(hull, e["bounded_face_ids"]),
                rim=tuple(e["rim"]),
                new_vertex_ids=tuple(e["new_vertex_ids"]),
                rays=rays,
                unbounded_faces=faces,
                cap=doc.cap,
                floor_z=e["floor_z"],
                floor_vertex_ids=tuple(e["floor_vertex_ids"]),
            )
        if "limit" in body:
            lm = body["limit"]
            doc.limit = LimitAngle(Vec3(*lm["apex"]), tuple(Vec3(*d) for d in lm["directions"]))
        return doc
    except SceneParseError:
        raise
    except (KeyError, TypeError, IndexError) as exc:
        raise SceneParseError(f"scene document is missing or mistypes a field: {exc}") from exc
