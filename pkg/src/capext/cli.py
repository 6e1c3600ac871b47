"""Command-line driver.

Subcommands mirror the pipeline stages: gen emits a random convex
polyhedron, cap/extend/limit/check analyze an OFF mesh at a threshold
angle, and export writes a mesh artifact in OFF, OBJ, or JSON.  Reports
go to standard output as canonical JSON; all diagnostics go to standard
error.  Exit codes: 0 success, 1 degenerate input or unusable flags,
2 invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import GeometryError, InvariantViolation, LemmaViolation, OffParseError
from .generate import DISTRIBUTIONS, GeneratorConfig, generate
from .meshio import SceneDocument, emit_obj, emit_off, parse_off, serialize_scene
from .pipeline import (
    EXIT_DEGENERATE,
    EXIT_OK,
    EXIT_VIOLATION,
    PipelineResult,
    report_to_json,
    run_fuzz,
    run_stage,
)

FORMATS = ("off", "obj", "json")


class _Parser(argparse.ArgumentParser):
    """Argument parser that reserves exit code 2 for invariant failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DEGENERATE, f"{self.prog}: error: {message}\n")


def _add_common(sub: argparse.ArgumentParser, need_phi: bool):
    sub.add_argument(
        "--phi",
        type=float,
        required=need_phi,
        metavar="DEG",
        help="threshold angle in degrees, 0 < phi <= 90",
    )
    sub.add_argument("--tol", type=float, default=1e-9, metavar="EPS", help="identity check tolerance (default 1e-9)")
    sub.add_argument("--out", metavar="PATH", help="write the artifact to this file")
    sub.add_argument("--format", choices=FORMATS, default=None, help="artifact format")
    sub.add_argument(
        "--ray-length",
        type=float,
        default=None,
        metavar="LEN",
        help="truncation length for exported rays (default: twice the finite diameter)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="capext", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"capext {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a random convex polyhedron")
    gen.add_argument("--n", type=int, default=50, help="number of sample points (default 50)")
    gen.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    gen.add_argument(
        "--distribution",
        choices=DISTRIBUTIONS,
        default="sphere-cap",
        help="sampling distribution (default sphere-cap)",
    )
    _add_common(gen, need_phi=False)
    gen.set_defaults(handler=_cmd_gen)

    for name, help_text in (
        ("cap", "extract the cap and check disk topology"),
        ("extend", "extend the cap to an unbounded polyhedron"),
        ("limit", "construct the limit angle and report curvatures"),
        ("check", "run the full pipeline and enforce the invariants"),
    ):
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument(
            "input",
            nargs="?" if name == "check" else None,
            metavar="MESH.off",
            help="input mesh ('-' reads standard input)",
        )
        _add_common(sub, need_phi=(name != "check"))
        if name == "check":
            sub.add_argument("--fuzz", type=int, default=None, metavar="N", help="check N random instances instead of a mesh")
            sub.add_argument("--seed", type=int, default=1, help="first fuzz seed (default 1)")
        sub.set_defaults(handler=_cmd_stage, stage=name)

    exp = subs.add_parser("export", help="export the mesh, or its extension when --phi is given")
    exp.add_argument("input", metavar="MESH.off", help="input mesh ('-' reads standard input)")
    _add_common(exp, need_phi=False)
    exp.set_defaults(handler=_cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except OffParseError as exc:
        print(f"capext: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (LemmaViolation, InvariantViolation) as exc:
        print(f"capext: invariant violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except GeometryError as exc:
        print(f"capext: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, ValueError) as exc:
        print(f"capext: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_artifact(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _check_ray_length(args):
    if args.ray_length is not None and not (args.ray_length > 0.0):
        raise ValueError("--ray-length must be positive")


def _cmd_gen(args) -> int:
    _check_ray_length(args)
    phi = args.phi if args.phi is not None else 90.0
    cfg = GeneratorConfig(n=args.n, seed=args.seed, distribution=args.distribution, phi_degrees=phi)
    poly = generate(cfg)
    fmt = args.format or "off"
    if fmt == "off":
        text = emit_off(poly)
    elif fmt == "obj":
        text = emit_obj(poly)
    else:
        doc = SceneDocument(
            polyhedron=poly,
            metadata={"n": cfg.n, "seed": cfg.seed, "distribution": cfg.distribution, "phi_degrees": cfg.phi_degrees},
        )
        text = serialize_scene(doc)
    _write_artifact(text, args.out)
    print(
        f"generated {poly.vertex_count} vertices, {poly.face_count} faces "
        f"(n={cfg.n}, seed={cfg.seed}, {cfg.distribution})",
        file=sys.stderr,
    )
    return EXIT_OK


def _artifact_for(result: PipelineResult, fmt: str, args) -> str:
    """Serialize the deepest artifact the run produced in the given format."""
    include_cone = result.limit is not None
    if fmt == "off":
        if result.extension is not None:
            return emit_off(result.extension.hull)
        raise ValueError("OFF needs a closed solid; the cap alone is open, export obj or json")
    if fmt == "obj":
        if result.extension is not None:
            return emit_obj(result.extension, args.ray_length, include_cone)
        if result.cap is not None:
            return emit_obj(result.cap)
        return emit_obj(result.poly)
    doc = SceneDocument(
        polyhedron=result.poly,
        cap=result.cap,
        extension=result.extension,
        limit=result.limit,
        metadata=result.metadata,
    )
    return serialize_scene(doc)


def _cmd_stage(args) -> int:
    _check_ray_length(args)
    if args.stage == "check" and args.fuzz is not None:
        if args.fuzz < 1:
            raise ValueError("--fuzz must be positive")
        report, code = run_fuzz(args.fuzz, args.seed, identity_tol=args.tol)
        text = report_to_json(report)
        sys.stdout.write(text)
        if args.out:
            _write_artifact(text, args.out)
        if report["status"] != "ok":
            print(f"capext: {report['detail']}", file=sys.stderr)
        return code
    if args.input is None:
        raise ValueError("check needs a mesh path or --fuzz N")
    if args.stage == "check" and args.phi is None:
        raise ValueError("check on a mesh needs --phi")
    if not (args.tol > 0.0):
        raise ValueError("--tol must be positive")
    poly = parse_off(_read_input(args.input))
    result = run_stage(poly, args.phi, args.stage, identity_tol=args.tol)
    result.metadata = {"phi_degrees": args.phi, "source": args.input, "stage": args.stage}
    sys.stdout.write(report_to_json(result.report))
    if result.report["status"] != "ok":
        print(f"capext: {result.report['detail']}", file=sys.stderr)
    if args.out:
        fmt = args.format or "json"
        try:
            _write_artifact(_artifact_for(result, fmt, args), args.out)
        except ValueError as exc:
            print(f"capext: error: {exc}", file=sys.stderr)
            return max(result.exit_code, EXIT_DEGENERATE)
    return result.exit_code


def _cmd_export(args) -> int:
    _check_ray_length(args)
    fmt = args.format or "off"
    poly = parse_off(_read_input(args.input))
    if args.phi is None:
        if fmt == "off":
            text = emit_off(poly)
        elif fmt == "obj":
            text = emit_obj(poly)
        else:
            text = serialize_scene(SceneDocument(polyhedron=poly, metadata={"source": args.input}))
        _write_artifact(text, args.out)
        return EXIT_OK
    result = run_stage(poly, args.phi, "limit", identity_tol=args.tol)
    result.metadata = {"phi_degrees": args.phi, "source": args.input}
    if result.report["status"] != "ok":
        print(f"capext: {result.report['detail']}", file=sys.stderr)
        return result.exit_code
    _write_artifact(_artifact_for(result, fmt, args), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
