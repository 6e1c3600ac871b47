"""Cap extraction: strict angle filter, disk topology, pinch behavior."""

import math

import numpy as np
import pytest

from capext.cap import Cap, CapSpec, check_disk_topology, extract_cap
from capext.errors import EmptyCap, LemmaViolation, NoBoundary
from capext.geometry import normal_angle_to_z
from capext.hull import convex_hull, upward_faces

from conftest import PINCH_PHI_DEGREES, random_hull_points


def test_capspec_validates_range():
    CapSpec.from_degrees(90.0)
    CapSpec.from_degrees(0.001)
    with pytest.raises(ValueError):
        CapSpec.from_degrees(0.0)
    with pytest.raises(ValueError):
        CapSpec.from_degrees(90.1)
    with pytest.raises(ValueError):
        CapSpec(-0.3)


def test_pyramid_cap_at_90(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    assert len(cap.face_ids) == 4
    assert len(cap.boundary) == 4
    assert sorted(cap.vertex_ids()) == list(range(5))
    assert len(cap.interior_vertex_ids()) == 1
    apex = cap.interior_vertex_ids()[0]
    assert pyramid.vertices[apex].z == 1.0


def test_pyramid_cap_below_45_is_empty(pyramid):
    # all side faces tilt exactly 45 degrees; strictness excludes them
    with pytest.raises(EmptyCap):
        extract_cap(pyramid, CapSpec.from_degrees(45.0))
    cap = extract_cap(pyramid, CapSpec.from_degrees(46.0))
    assert len(cap.face_ids) == 4


def test_cube_cap_is_top_face(cube):
    cap = extract_cap(cube, CapSpec.from_degrees(90.0))
    assert len(cap.face_ids) == 1
    assert len(cap.boundary) == 4
    assert cap.interior_vertex_ids() == []


def test_selection_is_strictly_below_phi():
    rng = np.random.default_rng(14)
    hull = convex_hull(random_hull_points(rng, 40))
    phi = math.radians(55.0)
    cap = extract_cap(hull, CapSpec(phi))
    selected = set(cap.face_ids)
    for fid, face in enumerate(hull.faces):
        tilt = normal_angle_to_z(face.normal)
        if fid in selected:
            assert tilt < phi
        else:
            assert tilt >= phi - hull.tol.eps_angle


def test_closed_patch_reports_no_boundary(cube):
    from capext.hull import SurfacePatch

    patch = SurfacePatch(cube, range(cube.face_count))
    with pytest.raises(NoBoundary):
        patch.boundary_cycle()


def test_tiny_phi_still_catches_flat_top(cube):
    # the top face has tilt exactly zero, inside every positive threshold
    cap = extract_cap(cube, CapSpec.from_degrees(0.0001))
    assert len(cap.face_ids) == 1
    assert len(cap.boundary) == 4


def test_boundary_face_ids_share_rim_edges(pyramid):
    cap = extract_cap(pyramid, CapSpec.from_degrees(90.0))
    rim_edges = {tuple(sorted((cap.boundary[i], cap.boundary[(i + 1) % len(cap.boundary)])))
                 for i in range(len(cap.boundary))}
    for fid in cap.boundary_face_ids:
        cyc = pyramid.faces[fid].vertex_ids
        face_edges = {tuple(sorted((cyc[k], cyc[(k + 1) % len(cyc)]))) for k in range(len(cyc))}
        assert face_edges & rim_edges
    assert set(cap.boundary_face_ids) <= set(cap.face_ids)


def test_projection_area_gap_small_on_valid_caps():
    rng = np.random.default_rng(31)
    for _ in range(10):
        hull = convex_hull(random_hull_points(rng, 30))
        cap = extract_cap(hull, CapSpec.from_degrees(80.0))
        assert cap.projection_area_gap() < 1e-9


def test_disk_check_passes_on_fixtures(pyramid, cube):
    for poly in (pyramid, cube):
        cap = extract_cap(poly, CapSpec.from_degrees(90.0))
        disk = check_disk_topology(cap)
        assert disk.passed
        assert disk.chi == 1
        assert disk.single_cycle
        assert disk.connected


def test_cap_pinches_at_degree_six_apex(pinch_hull):
    """Opposite face pairs meeting only at a vertex break the single cycle.

    Below the threshold circle of 90 degrees the tilt filter can select
    an alternating fan around one vertex; the boundary then visits that
    vertex twice and extraction must refuse rather than return a
    pinched complex.
    """
    with pytest.raises(LemmaViolation, match="branches"):
        extract_cap(pinch_hull, CapSpec.from_degrees(PINCH_PHI_DEGREES))


def test_pinch_hull_is_fine_at_other_angles(pinch_hull):
    # at 55 degrees the alternating fan closes and the cap is a disk
    cap = extract_cap(pinch_hull, CapSpec.from_degrees(55.0))
    assert check_disk_topology(cap).passed
    with pytest.raises(EmptyCap):
        extract_cap(pinch_hull, CapSpec.from_degrees(45.0))


def test_no_pinch_ever_at_90_degrees():
    """At 90 degrees the selected set is every upward face.

    The threshold circle is then a great circle of the normal sphere,
    and the normal fan of a convex vertex crosses a great circle at
    most twice, so no alternating selection pattern can exist.
    """
    rng = np.random.default_rng(90)
    spec = CapSpec.from_degrees(90.0)
    for trial in range(60):
        n = int(rng.integers(8, 60))
        if trial % 3 == 0:
            pts = random_hull_points(rng, max(n, 4))
        elif trial % 3 == 1:
            m = rng.normal(size=(max(n, 4), 3))
            pts = m / np.linalg.norm(m, axis=1, keepdims=True)
        else:
            xy = rng.uniform(-1, 1, size=(max(n, 4), 2))
            pts = np.column_stack([xy, 1.0 - (xy ** 2).sum(axis=1)])
        try:
            hull = convex_hull(pts)
        except Exception:
            continue
        cap = extract_cap(hull, spec)  # must not raise LemmaViolation
        assert check_disk_topology(cap).passed
        assert set(cap.face_ids) == set(upward_faces(hull))


def test_interior_vertices_have_closed_fans():
    rng = np.random.default_rng(55)
    hull = convex_hull(random_hull_points(rng, 60))
    cap = extract_cap(hull, CapSpec.from_degrees(70.0))
    cap_fids = set(cap.face_ids)
    for vid in cap.interior_vertex_ids():
        assert set(hull.vertex_face_ids[vid]) <= cap_fids
