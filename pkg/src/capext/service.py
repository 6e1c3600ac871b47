"""Web service wrapping the pipeline; the CLI and this API share reports.

Every analysis endpoint accepts an OFF mesh in the request body and
returns the same report document the command line prints.  Malformed
OFF input maps to 400; geometry too degenerate for the requested
artifact maps to 422; check endpoints always answer 200 and carry the
verdict in the report's status field.  Internal invariant failures are
genuine bugs and surface as 500.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .errors import GeometryError, InvariantViolation, LemmaViolation, OffParseError
from .generate import DISTRIBUTIONS, GeneratorConfig, generate
from .meshio import SceneDocument, emit_obj, emit_off, parse_off, serialize_scene
from .pipeline import PipelineResult, run_fuzz, run_stage

MAX_FUZZ_INSTANCES = 2000


class GenerateRequest(BaseModel):
    n: int = Field(50, ge=4, le=100000)
    seed: int = 0
    distribution: str = Field("sphere-cap", pattern="^(sphere-cap|paraboloid|ball)$")
    phi_degrees: float = Field(90.0, gt=0.0, le=90.0)


class GenerateResponse(BaseModel):
    off: str
    vertex_count: int
    face_count: int
    edge_count: int


class AnalyzeRequest(BaseModel):
    off: str
    phi_degrees: float = Field(..., gt=0.0, le=90.0)
    tol: float = Field(1e-9, gt=0.0)


class FuzzRequest(BaseModel):
    count: int = Field(..., ge=1, le=MAX_FUZZ_INSTANCES)
    seed: int = 1
    tol: float = Field(1e-9, gt=0.0)


class ExportRequest(BaseModel):
    off: str
    format: str = Field("obj", pattern="^(off|obj|json)$")
    phi_degrees: float | None = Field(None, gt=0.0, le=90.0)
    ray_length: float | None = Field(None, gt=0.0)
    include_cone: bool = True


class ExportResponse(BaseModel):
    format: str
    content: str


class DiskCheckModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    passed: bool = Field(alias="pass")
    chi: int


class ReportModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(alias="schema")
    status: str
    detail: str
    phi_degrees: float | None
    cap_vertex_count: int | None
    boundary_length: int | None
    new_vertex_count: int | None
    ray_count: int | None
    unbounded_face_count: int | None
    total_curvature: float | None
    limit_apex_curvature: float | None
    identity_gap: float | None
    bound_margin: float | None
    disk_check: DiskCheckModel | None


class FuzzReportModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(alias="schema")
    status: str
    detail: str
    instances: int
    seed_start: int
    violations: int
    degenerate: int
    lemma_failures: int
    identity_failures: int
    bound_failures: int
    disk_failures: int
    worst_identity_gap: float
    min_bound_margin: float | None
    redraws: int


app = FastAPI(title="capext", version=__version__)


def _parse(off_text: str):
    try:
        return parse_off(off_text)
    except OffParseError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except GeometryError as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}") from exc


def _run(req: AnalyzeRequest, stage: str, strict: bool) -> PipelineResult:
    poly = _parse(req.off)
    try:
        result = run_stage(poly, req.phi_degrees, stage, identity_tol=req.tol)
    except InvariantViolation as exc:
        raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}") from exc
    if strict and result.report["status"] == "degenerate":
        raise HTTPException(status_code=422, detail=result.report["detail"])
    if strict and result.report["status"] == "violation":
        raise HTTPException(status_code=422, detail=result.report["detail"])
    return result


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/generate", response_model=GenerateResponse)
def generate_endpoint(req: GenerateRequest) -> GenerateResponse:
    cfg = GeneratorConfig(
        n=req.n, seed=req.seed, distribution=req.distribution, phi_degrees=req.phi_degrees
    )
    poly = generate(cfg)
    return GenerateResponse(
        off=emit_off(poly),
        vertex_count=poly.vertex_count,
        face_count=poly.face_count,
        edge_count=poly.edge_count,
    )


@app.post("/cap", response_model=ReportModel)
def cap_endpoint(req: AnalyzeRequest) -> ReportModel:
    result = _run(req, "cap", strict=True)
    return ReportModel.model_validate(result.report)


@app.post("/extend", response_model=ReportModel)
def extend_endpoint(req: AnalyzeRequest) -> ReportModel:
    result = _run(req, "extend", strict=True)
    return ReportModel.model_validate(result.report)


@app.post("/limit", response_model=ReportModel)
def limit_endpoint(req: AnalyzeRequest) -> ReportModel:
    result = _run(req, "limit", strict=True)
    return ReportModel.model_validate(result.report)


@app.post("/check", response_model=ReportModel)
def check_endpoint(req: AnalyzeRequest) -> ReportModel:
    result = _run(req, "check", strict=False)
    return ReportModel.model_validate(result.report)


@app.post("/fuzz", response_model=FuzzReportModel)
def fuzz_endpoint(req: FuzzRequest) -> FuzzReportModel:
    report, _code = run_fuzz(req.count, req.seed, identity_tol=req.tol)
    return FuzzReportModel.model_validate(report)


@app.post("/export", response_model=ExportResponse)
def export_endpoint(req: ExportRequest) -> ExportResponse:
    poly = _parse(req.off)
    if req.phi_degrees is None:
        if req.format == "off":
            content = emit_off(poly)
        elif req.format == "obj":
            content = emit_obj(poly)
        else:
            content = serialize_scene(SceneDocument(polyhedron=poly))
        return ExportResponse(format=req.format, content=content)
    try:
        result = run_stage(poly, req.phi_degrees, "limit")
    except InvariantViolation as exc:
        raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}") from exc
    if result.report["status"] != "ok":
        raise HTTPException(status_code=422, detail=result.report["detail"])
    result.metadata = {"phi_degrees": req.phi_degrees}
    if req.format == "off":
        content = emit_off(result.extension.hull)
    elif req.format == "obj":
        content = emit_obj(result.extension, req.ray_length, req.include_cone)
    else:
        content = serialize_scene(
            SceneDocument(
                polyhedron=result.poly,
                cap=result.cap,
                extension=result.extension,
                limit=result.limit,
                metadata=result.metadata,
            )
        )
    return ExportResponse(format=req.format, content=content)
