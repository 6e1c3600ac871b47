"""Cap extraction: the faces tilted strictly less than a threshold angle.

A cap collects every face whose outward normal makes an angle smaller
than phi with +z.  For phi up to 90 degrees the cap projects one-to-one
onto the xy-plane and its boundary is a single simple cycle; the checks
here verify that instead of assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyCap, LemmaViolation, NoBoundary
from .geometry import normal_angle_to_z
from .hull import Polyhedron, SurfacePatch

PHI_SLACK = 1e-12


@dataclass(frozen=True, slots=True)
class CapSpec:
    """Selection threshold phi in radians, 0 < phi <= pi/2."""

    phi: float

    def __post_init__(self):
        if not (0.0 < self.phi <= math.pi / 2 + PHI_SLACK):
            raise ValueError(f"phi must be in (0, pi/2], got {self.phi}")

    @classmethod
    def from_degrees(cls, degrees: float) -> "CapSpec":
        return cls(math.radians(degrees))


@dataclass(frozen=True)
class Cap:
    """Face subset of a convex polyhedron with its rim data."""

    patch: SurfacePatch
    spec: CapSpec
    boundary: tuple[int, ...]
    boundary_face_ids: tuple[int, ...]

    @property
    def poly(self) -> Polyhedron:
        return self.patch.poly

    @property
    def face_ids(self) -> tuple[int, ...]:
        return self.patch.face_ids

    def vertex_ids(self) -> list[int]:
        return self.patch.used_vertex_ids()

    def interior_vertex_ids(self) -> list[int]:
        rim = set(self.boundary)
        return [v for v in self.patch.used_vertex_ids() if v not in rim]

    def projection_area_gap(self) -> float:
        """Relative gap between summed face shadows and the rim shadow.

        Near zero exactly when the cap projects one-to-one to the
        xy-plane (no face shadow overlaps another).
        """
        total = 0.0
        for fid in self.face_ids:
            total += _shoelace(self.poly, self.poly.faces[fid].vertex_ids)
        rim_area = _shoelace(self.poly, self.boundary)
        return abs(total - rim_area) / max(abs(rim_area), 1e-300)


def _shoelace(poly: Polyhedron, cycle) -> float:
    area2 = 0.0
    for k in range(len(cycle)):
        p = poly.vertices[cycle[k]]
        q = poly.vertices[cycle[(k + 1) % len(cycle)]]
        area2 += p.x * q.y - q.x * p.y
    return 0.5 * area2


def extract_cap(p: Polyhedron, spec: CapSpec | float) -> Cap:
    """Faces of p with normal angle to +z strictly below phi.

    Strictness is enforced with the angular tolerance: a face at exactly
    phi is excluded.  Raises EmptyCap when nothing qualifies, NoBoundary
    when everything does, and LemmaViolation when the boundary is not a
    single simple cycle.
    """
    if not isinstance(spec, CapSpec):
        spec = CapSpec(float(spec))
    threshold = spec.phi - p.tol.eps_angle
    selected = [
        fid for fid, face in enumerate(p.faces) if normal_angle_to_z(face.normal) < threshold
    ]
    if not selected:
        raise EmptyCap(f"no face normal lies within {spec.phi} rad of +z")
    if len(selected) == len(p.faces):
        raise NoBoundary("every face selected; cap has no rim")
    patch = SurfacePatch(p, selected)
    try:
        boundary = patch.boundary_cycle()
    except NoBoundary as exc:  # pragma: no cover - guarded above
        raise LemmaViolation(str(exc)) from exc
    rim_edges = set(patch.boundary_edge_keys())
    boundary_face_ids = sorted(
        {patch.edge_faces[key][0] for key in rim_edges}
    )
    return Cap(patch, spec, tuple(boundary), tuple(boundary_face_ids))


@dataclass(frozen=True, slots=True)
class DiskCheck:
    """Outcome of the disk-topology test on a cap."""

    passed: bool
    chi: int
    single_cycle: bool
    connected: bool
    detail: str = ""


def check_disk_topology(c: Cap) -> DiskCheck:
    """Verify the cap is a topological disk; reports instead of raising."""
    chi = c.patch.euler_characteristic()
    connected = c.patch.is_edge_connected()
    try:
        c.patch.boundary_cycle()
        single = True
        detail = ""
    except (LemmaViolation, NoBoundary) as exc:
        single = False
        detail = str(exc)
    passed = single and connected and chi == 1
    if not passed and not detail:
        detail = f"chi={chi}, connected={connected}"
    return DiskCheck(passed, chi, single, connected, detail)
