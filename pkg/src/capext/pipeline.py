"""Staged pipeline runs with uniform JSON reports and exit codes.

Both the command line and the web service call into this module so the
two frontends cannot drift apart.  A run parses or receives a convex
polyhedron, then advances through the stages cap -> extend -> limit ->
check, stopping at the requested one.  Every run produces the same
report shape with nulls for stages not reached; serialization is
canonical (sorted keys, repr floats) so identical inputs give
byte-identical reports.

Exit codes: 0 success, 1 degenerate input (no cap, too few boundary
planes, unbounded directions that do not close), 2 invariant violation
(pinched boundary, failed curvature identity, failed 2*pi bound, or an
internal containment error).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cap import Cap, CapSpec, check_disk_topology, extract_cap
from .errors import (
    BoundaryVertex,
    DegenerateExtension,
    DegenerateGeometry,
    DegenerateHull,
    DegenerateLimitAngle,
    EmptyCap,
    InvariantViolation,
    LemmaViolation,
    NoBoundary,
    VerticalPlane,
)
from .extension import UnboundedPolyhedron, build_extension
from .generate import fuzz_instance
from .hull import Polyhedron
from .limit import CurvatureReport, LimitAngle, build_limit_angle, verify_curvature_identity

EXIT_OK = 0
EXIT_DEGENERATE = 1
EXIT_VIOLATION = 2

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate"
STATUS_VIOLATION = "violation"

STAGES = ("cap", "extend", "limit", "check")

DEGENERATE_ERRORS = (
    DegenerateHull,
    EmptyCap,
    NoBoundary,
    DegenerateExtension,
    DegenerateLimitAngle,
    VerticalPlane,
    DegenerateGeometry,
)
VIOLATION_ERRORS = (LemmaViolation, InvariantViolation, BoundaryVertex)


@dataclass
class PipelineResult:
    """Report plus the artifacts the reached stages produced."""

    report: dict
    exit_code: int
    poly: Polyhedron | None = None
    cap: Cap | None = None
    extension: UnboundedPolyhedron | None = None
    limit: LimitAngle | None = None
    curvature: CurvatureReport | None = None
    metadata: dict = field(default_factory=dict)


def blank_report(phi_degrees: float | None = None) -> dict:
    return {
        "schema": 1,
        "status": STATUS_OK,
        "detail": "",
        "phi_degrees": phi_degrees,
        "cap_vertex_count": None,
        "boundary_length": None,
        "new_vertex_count": None,
        "ray_count": None,
        "unbounded_face_count": None,
        "total_curvature": None,
        "limit_apex_curvature": None,
        "identity_gap": None,
        "bound_margin": None,
        "disk_check": None,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fail(result: PipelineResult, status: str, exc: Exception) -> PipelineResult:
    result.report["status"] = status
    result.report["detail"] = f"{type(exc).__name__}: {exc}"
    result.exit_code = EXIT_DEGENERATE if status == STATUS_DEGENERATE else EXIT_VIOLATION
    return result


def run_stage(
    poly: Polyhedron,
    phi_degrees: float,
    stage: str = "check",
    identity_tol: float = 1e-9,
) -> PipelineResult:
    """Advance the pipeline on poly up to the named stage.

    The report always carries every field; stages not reached stay
    null.  The check stage additionally enforces the invariants and
    downgrades the exit code to 2 when any fails.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    result = PipelineResult(report=blank_report(phi_degrees), exit_code=EXIT_OK, poly=poly)
    rep = result.report

    try:
        cap = extract_cap(poly, CapSpec.from_degrees(phi_degrees))
    except VIOLATION_ERRORS as exc:
        return _fail(result, STATUS_VIOLATION, exc)
    except DEGENERATE_ERRORS as exc:
        return _fail(result, STATUS_DEGENERATE, exc)
    result.cap = cap
    disk = check_disk_topology(cap)
    rep["cap_vertex_count"] = len(cap.vertex_ids())
    rep["boundary_length"] = len(cap.boundary)
    rep["disk_check"] = {"pass": disk.passed, "chi": disk.chi}
    if stage == "cap":
        if not disk.passed:
            rep["status"] = STATUS_VIOLATION
            rep["detail"] = disk.detail
            result.exit_code = EXIT_VIOLATION
        return result

    try:
        ext = build_extension(cap)
    except VIOLATION_ERRORS as exc:
        return _fail(result, STATUS_VIOLATION, exc)
    except DEGENERATE_ERRORS as exc:
        return _fail(result, STATUS_DEGENERATE, exc)
    result.extension = ext
    rep["new_vertex_count"] = len(ext.new_vertex_ids)
    rep["ray_count"] = len(ext.rays)
    rep["unbounded_face_count"] = len(ext.unbounded_faces)
    if stage == "extend":
        return result

    try:
        la = build_limit_angle(ext)
        cr = verify_curvature_identity(ext, la, identity_tol)
    except VIOLATION_ERRORS as exc:
        return _fail(result, STATUS_VIOLATION, exc)
    except DEGENERATE_ERRORS as exc:
        return _fail(result, STATUS_DEGENERATE, exc)
    result.limit = la
    result.curvature = cr
    rep["total_curvature"] = cr.total_extension
    rep["limit_apex_curvature"] = cr.limit_apex
    rep["identity_gap"] = cr.identity_gap
    rep["bound_margin"] = cr.bound_margin
    if stage == "limit":
        return result

    failures = []
    if not disk.passed:
        failures.append(f"cap is not a disk ({disk.detail or f'chi={disk.chi}'})")
    if not cr.identity_pass:
        failures.append(f"curvature identity gap {cr.identity_gap:.3e} exceeds {identity_tol:.1e}")
    if not cr.bound_pass:
        failures.append(f"total curvature exceeds 2*pi by {-cr.bound_margin:.3e}")
    if len(ext.unbounded_faces) > len(cap.boundary_face_ids):
        failures.append(
            f"{len(ext.unbounded_faces)} unbounded faces exceed "
            f"{len(cap.boundary_face_ids)} boundary faces"
        )
    if failures:
        rep["status"] = STATUS_VIOLATION
        rep["detail"] = "; ".join(failures)
        result.exit_code = EXIT_VIOLATION
    return result


def run_fuzz(count: int, seed_start: int = 1, identity_tol: float = 1e-9) -> tuple[dict, int]:
    """Run the full pipeline on count seeded random instances.

    Returns an aggregate report and the exit code: 2 when any instance
    violates an invariant, 1 when any instance is degenerate, else 0.
    """
    if count < 1:
        raise ValueError("count must be positive")
    report = {
        "schema": 1,
        "status": STATUS_OK,
        "detail": "",
        "instances": count,
        "seed_start": seed_start,
        "violations": 0,
        "degenerate": 0,
        "lemma_failures": 0,
        "identity_failures": 0,
        "bound_failures": 0,
        "disk_failures": 0,
        "worst_identity_gap": 0.0,
        "min_bound_margin": None,
        "redraws": 0,
    }
    problems: list[str] = []
    for seed in range(seed_start, seed_start + count):
        try:
            inst = fuzz_instance(seed)
        except DEGENERATE_ERRORS as exc:
            report["degenerate"] += 1
            problems.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        except LemmaViolation as exc:
            report["violations"] += 1
            report["lemma_failures"] += 1
            problems.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        report["redraws"] += inst.redraws
        result = run_stage(inst.hull, inst.phi_degrees, "check", identity_tol)
        rep = result.report
        if rep["status"] == STATUS_DEGENERATE:
            report["degenerate"] += 1
            problems.append(f"seed {seed}: {rep['detail']}")
            continue
        if rep["status"] == STATUS_VIOLATION:
            report["violations"] += 1
            detail = rep["detail"]
            if "identity" in detail:
                report["identity_failures"] += 1
            if "2*pi" in detail:
                report["bound_failures"] += 1
            if "disk" in detail or "boundary" in detail.lower():
                report["disk_failures"] += 1
            problems.append(f"seed {seed}: {detail}")
        if rep["identity_gap"] is not None:
            report["worst_identity_gap"] = max(report["worst_identity_gap"], rep["identity_gap"])
        if rep["bound_margin"] is not None:
            margin = rep["bound_margin"]
            if report["min_bound_margin"] is None or margin < report["min_bound_margin"]:
                report["min_bound_margin"] = margin
    if report["violations"]:
        report["status"] = STATUS_VIOLATION
        exit_code = EXIT_VIOLATION
    elif report["degenerate"]:
        report["status"] = STATUS_DEGENERATE
        exit_code = EXIT_DEGENERATE
    else:
        exit_code = EXIT_OK
    report["detail"] = "; ".join(problems[:20])
    return report, exit_code
