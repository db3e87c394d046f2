"""Command-line front end.

    pentapod-asd dist design.json [--rescale] [--cases 0,3b,9] [--planar auto|on|off] [--seed N] [--out json|csv]
    pentapod-asd sweep design.json [--tmin T] [--tmax T] [--n N] [--out csv|json]
    pentapod-asd index design.json

Exit codes: 0 success, 2 invalid input, 3 a requested case has no finite minimizer.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import pipeline
from .cases import CaseId
from .geometry import DEFAULT_B, GeometryError, PentapodDesign, conic_index
from .solvers import SolveConfig

EXIT_OK, EXIT_INPUT, EXIT_NO_MINIMIZER = 0, 2, 3


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class DesignFile:
    design: PentapodDesign
    b_point: np.ndarray | None = None


def _finite_vector(value, length: int, what: str) -> list:
    if not isinstance(value, list) or len(value) != length:
        raise InputError(f"{what} must be a list of {length} numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InputError(f"{what} must contain finite numbers, got {v!r}")
        out.append(float(v))
    return out


def parse_design(text: str) -> DesignFile:
    """Validate a design document; raises InputError with a readable message."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError("design file must hold a JSON object")
    unknown = set(doc) - {"base", "platform", "B"}
    if unknown:
        raise InputError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("base", "platform"):
        if key not in doc:
            raise InputError(f"missing key {key!r}")
    base = doc["base"]
    if not isinstance(base, list) or len(base) != 5:
        raise InputError("base must list exactly 5 points")
    rows = [_finite_vector(p, 3, f"base point {i + 1}") for i, p in enumerate(base)]
    platform = _finite_vector(doc["platform"], 5, "platform")
    b = None
    if "B" in doc:
        b = np.array(_finite_vector(doc["B"], 3, "B"))
    return DesignFile(PentapodDesign(rows, platform), b)


def design_to_json(design: PentapodDesign, b_point=None) -> str:
    doc = design.to_dict()
    if b_point is not None:
        doc["B"] = [float(v) for v in b_point]
    return json.dumps(doc, indent=2) + "\n"


def _read(path: str) -> DesignFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_design(text)


def _parse_cases(text: str | None) -> tuple:
    if not text:
        return pipeline.ALL_CASES
    try:
        picked = {CaseId.parse(part.strip()) for part in text.split(",") if part.strip()}
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if not picked:
        raise InputError("--cases is empty")
    return tuple(c for c in pipeline.ALL_CASES if c in picked)


def _planar_flag(value: str):
    return {"auto": None, "on": True, "off": False}[value]


def _emit(data: bytes, path: str | None) -> None:
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_dist(args) -> int:
    spec = _read(args.design)
    config = pipeline.PipelineConfig(
        solve=SolveConfig(seed=args.seed),
        cases=_parse_cases(args.cases),
        planar=_planar_flag(args.planar),
        rescale=args.rescale,
    )
    if config.planar and not spec.design.is_planar():
        raise InputError("--planar on needs a base with all z coordinates equal to 0")
    b = spec.b_point if spec.b_point is not None and spec.design.is_planar() else None
    result = pipeline.architecture_distance(spec.design, config, b)
    _emit(pipeline.export_results(result, args.out), args.output)
    missing = [c.value for c, flag in result.flags.items() if flag == pipeline.NO_MINIMIZER]
    if missing:
        print(f"no finite minimizer found for case(s) {', '.join(missing)}", file=sys.stderr)
        return EXIT_NO_MINIMIZER
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _read(args.design)
    if args.n < 2:
        raise InputError("--n must be at least 2")
    if not args.tmin < args.tmax:
        raise InputError("--tmin must be smaller than --tmax")
    b = spec.b_point if spec.b_point is not None else np.array(DEFAULT_B)
    solve = replace(pipeline.SWEEP_SOLVE, seed=args.seed)
    config = pipeline.PipelineConfig(solve=solve, cases=_parse_cases(args.cases))
    rows = pipeline.sweep(spec.design, args.tmin, args.tmax, args.n, config, b)
    _emit(pipeline.export_results(rows, args.out), args.output)
    return EXIT_OK


def cmd_index(args) -> int:
    spec = _read(args.design)
    if spec.b_point is None:
        raise InputError("the conic index needs the pencil vertex 'B' in the design file")
    try:
        value = conic_index(spec.design.base, spec.b_point)
    except GeometryError as exc:
        raise InputError(str(exc)) from None
    _emit(f"{pipeline.fmt(value)}\n".encode(), None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pentapod-asd", description="Architecture singularity distance of linear pentapods.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="distance to the closest architecturally singular design")
    p.add_argument("design")
    p.add_argument("--rescale", action="store_true", help="normalize to max(rho1, rho2) = 1 first")
    p.add_argument("--cases", help="comma-separated subset, e.g. 0,3b,9")
    p.add_argument("--planar", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("sweep", help="move M5 along the line through B and tabulate D")
    p.add_argument("design")
    p.add_argument("--tmin", type=float, default=-2.0 * math.sqrt(2.0))
    p.add_argument("--tmax", type=float, default=2.0 * math.sqrt(2.0))
    p.add_argument("--n", type=int, default=45)
    p.add_argument("--cases", help="comma-separated subset, e.g. 0,3b,9")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("index", help="conic index of a planar base with pencil vertex B")
    p.add_argument("design")
    p.set_defaults(func=cmd_index)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
