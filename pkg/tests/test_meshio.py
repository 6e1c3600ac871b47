"""OFF and OBJ interchange plus the JSON scene document."""

import math

import numpy as np
import pytest

from capext.cap import CapSpec, extract_cap
from capext.errors import DegenerateHull, OffParseError, SceneParseError
from capext.extension import build_extension
from capext.hull import convex_hull
from capext.limit import build_limit_angle
from capext.meshio import (
    SceneDocument,
    emit_obj,
    emit_off,
    parse_off,
    parse_scene,
    serialize_scene,
)

from conftest import random_hull_points


# --- OFF -------------------------------------------------------------------


def test_off_round_trip_fixtures(pyramid, cube, frustum, shaved_tent):
    for poly in (pyramid, cube, frustum, shaved_tent):
        again = parse_off(emit_off(poly))
        assert again.same_structure(poly, eps=0.0)


def test_off_round_trip_random_hulls():
    rng = np.random.default_rng(31)
    for _ in range(5):
        poly = convex_hull(random_hull_points(rng, 50))
        text = emit_off(poly)
        again = parse_off(text)
        assert again.same_structure(poly, eps=0.0)
        # emission is canonical: re-emitting reproduces the bytes
        assert emit_off(again) == text


def test_off_header_counts(cube):
    lines = emit_off(cube).splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == "8 6 12"


def test_off_accepts_comments_and_blank_lines(cube):
    body = emit_off(cube).splitlines()
    noisy = ["# a comment", body[0], "", body[1], "  # indented comment"] + body[2:]
    assert parse_off("\n".join(noisy)).same_structure(cube, eps=0.0)


def test_off_merges_triangulated_faces(cube):
    """A cube stored as 12 triangles parses back into 6 quads."""
    verts = [v.as_tuple() for v in cube.vertices]
    tris = []
    for face in cube.faces:
        a, b, c, d = face.vertex_ids
        tris.append((a, b, c))
        tris.append((a, c, d))
    text = "OFF\n%d %d 0\n" % (len(verts), len(tris))
    text += "".join("%r %r %r\n" % v for v in verts)
    text += "".join("3 %d %d %d\n" % t for t in tris)
    poly = parse_off(text)
    assert poly.face_count == 6
    assert all(len(f.vertex_ids) == 4 for f in poly.faces)
    assert poly.same_structure(cube, eps=0.0)


def test_off_rejects_coplanar_vertices():
    text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 3 2\n"
    with pytest.raises(DegenerateHull, match="coplanar"):
        parse_off(text)


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("", "empty input"),
        ("PLY\n4 4 0\n", "expected 'OFF' header"),
        ("OFF\n", "missing counts"),
        ("OFF\nfour 4 0\n", "line 2.*three integers"),
        ("OFF\n4 4\n", "line 2.*three integers"),
        ("OFF\n-1 0 0\n", "line 2.*negative"),
        ("OFF\n4 1 0\n0 0 0\n", "found only 1"),
        ("OFF\n1 0 0\n0 0 zero\n", "line 3.*not a number"),
        ("OFF\n1 0 0\n0 0\n", "line 3.*three coordinates"),
        ("OFF\n1 0 0\n0 0 inf\n", "line 3.*not finite"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2\n", "line 6.*does not match"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n", "line 6.*at least three"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n", "line 6.*repeats"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n", "line 6.*out of range"),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\nextra\n", "line 7.*trailing"),
    ],
)
def test_off_parse_errors_carry_line_numbers(text, pattern):
    with pytest.raises(OffParseError, match=pattern):
        parse_off(text)


def test_off_rejects_duplicate_directed_edge(pyramid):
    """Flipping one face's orientation reuses a directed edge."""
    lines = emit_off(pyramid).splitlines()
    counts = lines[1].split()
    first_face = 2 + int(counts[0])
    parts = lines[first_face].split()
    flipped = [parts[0]] + parts[:0:-1]
    lines[first_face] = " ".join(flipped)
    with pytest.raises(OffParseError, match="directed edge"):
        parse_off("\n".join(lines) + "\n")


def test_off_rejects_open_mesh(cube):
    """Dropping one face leaves unmatched edges."""
    lines = emit_off(cube).splitlines()
    nv, nf, ne = (int(s) for s in lines[1].split())
    lines[1] = f"{nv} {nf - 1} {ne}"
    del lines[-1]
    with pytest.raises(OffParseError, match="not a closed convex polyhedron"):
        parse_off("\n".join(lines) + "\n")


def test_off_rejects_nonconvex_mesh():
    """A valid closed mesh with a dent must not parse."""
    pts = [
        (0.0, 0.0, 0.0),
        (2.0, 0.0, 0.0),
        (0.0, 2.0, 0.0),
        (0.0, 0.0, 2.0),
    ]
    base = convex_hull(pts)
    verts = [v.as_tuple() for v in base.vertices]
    # push a new vertex slightly inside the floor face and re-triangulate
    # that face through it: the mesh stays closed but dents inward
    fid = next(i for i, f in enumerate(base.faces) if f.normal.z < -0.99)
    a, b, c = base.faces[fid].vertex_ids
    centroid = (
        (verts[a][0] + verts[b][0] + verts[c][0]) / 3.0,
        (verts[a][1] + verts[b][1] + verts[c][1]) / 3.0,
        (verts[a][2] + verts[b][2] + verts[c][2]) / 3.0 + 0.2,
    )
    verts.append(centroid)
    m = len(verts) - 1
    cycles = [f.vertex_ids for i, f in enumerate(base.faces) if i != fid]
    cycles += [(a, b, m), (b, c, m), (c, a, m)]
    text = "OFF\n%d %d 0\n" % (len(verts), len(cycles))
    text += "".join("%r %r %r\n" % v for v in verts)
    text += "".join("%d %s\n" % (len(cyc), " ".join(map(str, cyc))) for cyc in cycles)
    with pytest.raises(OffParseError, match="not a closed convex polyhedron"):
        parse_off(text)


# --- OBJ -------------------------------------------------------------------


def _obj_vertices_and_segments(text: str):
    verts, segs = [], []
    for line in text.splitlines():
        if line.startswith("v "):
            verts.append(tuple(float(t) for t in line.split()[1:]))
        elif line.startswith("l "):
            i, j = (int(t) for t in line.split()[1:])
            segs.append((verts[i - 1], verts[j - 1]))
    return verts, segs


def test_obj_extension_rays_have_requested_length(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    ext = build_extension(cap)
    text = emit_obj(ext, ray_length=2.0)
    assert "o rays" in text
    _, segs = _obj_vertices_and_segments(text)
    assert len(segs) == 4
    for p, q in segs:
        d = math.dist(p, q)
        assert abs(d - 2.0) < 1e-12


def test_obj_default_ray_length_scales_with_body(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    ext = build_extension(cap)
    _, segs = _obj_vertices_and_segments(emit_obj(ext))
    assert segs
    lengths = {round(math.dist(p, q), 9) for p, q in segs}
    assert len(lengths) == 1
    assert lengths.pop() > 0.0


def test_obj_cone_group_is_optional(frustum):
    cap = extract_cap(frustum, CapSpec.from_degrees(90.0))
    ext = build_extension(cap)
    assert "o limit_cone" not in emit_obj(ext)
    assert "o limit_cone" in emit_obj(ext, include_cone=True)


def test_obj_cap_has_faces_but_no_segments(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    text = emit_obj(cap)
    assert "o cap" in text
    assert any(line.startswith("f ") for line in text.splitlines())
    assert not any(line.startswith("l ") for line in text.splitlines())


def test_obj_polyhedron_face_count(cube):
    text = emit_obj(cube)
    assert sum(1 for line in text.splitlines() if line.startswith("f ")) == 6


def test_obj_rejects_nonpositive_ray_length(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    ext = build_extension(cap)
    with pytest.raises(ValueError, match="positive"):
        emit_obj(ext, ray_length=0.0)


# --- JSON scene ------------------------------------------------------------


def _full_scene(poly):
    cap = extract_cap(poly, CapSpec.from_degrees(90.0))
    ext = build_extension(cap)
    la = build_limit_angle(ext)
    return SceneDocument(
        polyhedron=poly, cap=cap, extension=ext, limit=la, metadata={"note": "t"}
    )


def test_scene_round_trip(pyramid):
    doc = _full_scene(pyramid)
    text = serialize_scene(doc)
    again = parse_scene(text)
    assert again.polyhedron.same_structure(pyramid, eps=0.0)
    assert again.cap.face_ids == doc.cap.face_ids
    assert again.cap.spec.phi == doc.cap.spec.phi
    assert again.extension.hull.same_structure(doc.extension.hull, eps=0.0)
    assert again.extension.rim == doc.extension.rim
    assert len(again.extension.rays) == len(doc.extension.rays)
    for ra, rb in zip(again.extension.rays, doc.extension.rays):
        assert (ra.direction - rb.direction).norm() == 0.0
    assert again.limit.directions == doc.limit.directions
    assert again.metadata == {"note": "t"}
    # canonical form: serialize(parse(s)) == s
    assert serialize_scene(again) == text


def test_scene_partial_documents(cube):
    text = serialize_scene(SceneDocument(polyhedron=cube))
    again = parse_scene(text)
    assert again.polyhedron.same_structure(cube, eps=0.0)
    assert again.cap is None and again.extension is None and again.limit is None


def test_scene_preserves_custom_tolerances():
    rng = np.random.default_rng(8)
    poly = convex_hull(random_hull_points(rng, 25))
    cap = extract_cap(poly, CapSpec.from_degrees(70.0))
    ext = build_extension(cap)
    doc = parse_scene(serialize_scene(SceneDocument(polyhedron=poly, cap=cap, extension=ext)))
    assert doc.extension.hull.tol.eps_geom == ext.hull.tol.eps_geom


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("{", "not valid JSON"),
        ("[1, 2]", "must be a JSON object"),
        ('{"schema": 99}', "unsupported scene schema"),
        ('{"schema": 1, "cap": {}}', "without a polyhedron"),
        ('{"schema": 1, "extension": {}}', "without a cap"),
    ],
)
def test_scene_parse_errors(text, pattern):
    with pytest.raises(SceneParseError, match=pattern):
        parse_scene(text)


def test_scene_rejects_mismatched_sections(pyramid, cube):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    with pytest.raises(ValueError, match="belong"):
        serialize_scene(SceneDocument(polyhedron=cube, cap=cap))
