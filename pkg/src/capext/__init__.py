"""Convex cap extraction, unbounded extension, and limit-angle curvature."""

from .cap import Cap, CapSpec, DiskCheck, check_disk_topology, extract_cap
from .errors import (
    BoundaryVertex,
    DegenerateExtension,
    DegenerateGeometry,
    DegenerateHull,
    DegenerateLimitAngle,
    EmptyCap,
    GeometryError,
    InvariantViolation,
    LemmaViolation,
    NoBoundary,
    OffParseError,
    SceneParseError,
    VerticalPlane,
)
from .extension import (
    Ray,
    UnboundedFace,
    UnboundedPolyhedron,
    boundary_face_planes,
    build_extension,
    dualize_plane,
    dualize_point,
    lower_envelope_vertices,
    recession_fan,
)
from .generate import (
    DISTRIBUTIONS,
    FuzzInstance,
    GeneratorConfig,
    fuzz_instance,
    generate,
)
from .geometry import (
    Plane,
    Point3,
    Tolerances,
    Vec3,
    angle_between,
    normal_angle_to_z,
    orient3d,
    plane_through,
    spherical_polygon_area,
)
from .hull import Face, Polyhedron, SurfacePatch, convex_hull, downward_faces, upward_faces
from .limit import (
    CurvatureReport,
    LimitAngle,
    build_limit_angle,
    cap_interior_curvature,
    limit_apex_curvature,
    spherical_image_curvature,
    strictly_convex_vertex,
    verify_curvature_identity,
    vertex_curvature,
)
from .meshio import (
    SceneDocument,
    emit_obj,
    emit_off,
    parse_off,
    parse_scene,
    serialize_scene,
)
from .pipeline import PipelineResult, run_fuzz, run_stage

__version__ = "0.1.0"
