"""Command-line driver: ``analyze``, ``validate`` and ``bench``.

A robot argument is either a path to a JSON description or the name of a
bundled demo (``puma560``, ``go2``, ``2rru1rrs``, ``2prs1psr``; a trailing
``.json`` is accepted when no such file exists locally).

Exit codes: 0 success or PASS, 1 validation FAIL, 2 usage, load or
sampling errors.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, demos
from .nullspace import drng
from .regressor import NoValidSamples, draw_samples, export_binary, export_csv, stack
from .robot_model import RobotFileError, RobotModel, gravity_vector, load
from .tolerances import DEFAULT_COND_GATE, DEFAULT_RANK_TOL, MEMBERSHIP_TOL
from .validation import cross_validate, numerical_base_analysis


class UsageError(Exception):
    pass


def resolve_robot(arg: str) -> RobotModel:
    path = Path(arg)
    if path.is_file():
        return load(path)
    name = path.name[:-5] if path.name.endswith(".json") else path.name
    if name in demos.DEMO_NAMES and path.parent == Path("."):
        return demos.load_demo(name)
    raise RobotFileError(f"{arg}: no such file and not a bundled demo ({', '.join(demos.DEMO_NAMES)})")


def parse_vector(text: str, size: int, what: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {size} comma-separated numbers, got {text!r}") from None
    if len(values) != size or not np.all(np.isfinite(values)):
        raise UsageError(f"{what}: expected {size} finite comma-separated numbers, got {text!r}")
    return np.array(values)


def parse_q_ranges(text: str | None, model: RobotModel):
    """``lo:hi,lo:hi,...`` with one range per actuated coordinate."""
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != model.n_actuated:
        raise UsageError(f"--q-ranges: expected {model.n_actuated} lo:hi ranges, got {len(parts)}")
    out = []
    for part in parts:
        try:
            lo, hi = (float(v) for v in part.split(":"))
        except ValueError:
            raise UsageError(f"--q-ranges: cannot parse {part!r} as lo:hi") from None
        if not lo <= hi:
            raise UsageError(f"--q-ranges: empty range {part!r}")
        out.append((lo, hi))
    return np.array(out)


def _robot_header(model: RobotModel) -> dict:
    return {
        "robot": model.name,
        "bodies": model.n,
        "loops": model.nl,
        "coordinates": model.nq,
        "actuated": model.n_actuated,
        "inertial_parameters": 10 * model.n,
        "gravity": [float(v) for v in gravity_vector(model)],
        "provenance": model.provenance,
    }


def cmd_analyze(args) -> tuple[dict, int]:
    model = resolve_robot(args.robot)
    if args.gravity is not None:
        model = model.with_gravity(parse_vector(args.gravity, 3, "--gravity"))
    basis = drng(model)
    b = basis.complement()
    report = _robot_header(model)
    report.update({
        "pri": [int(v) for v in model.is_pr],
        "nullspace_dimension": basis.d,
        "base_parameters": int(b.shape[1]),
        "columns_by_principle": basis.counts(),
        "columns": [t.as_dict() for t in basis.tags],
    })
    if args.export_basis:
        _export(args.export_basis, basis.B_null)
    return report, 0


def cmd_validate(args) -> tuple[dict, int]:
    model = resolve_robot(args.robot)
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    if args.gravity is not None:
        model = model.with_gravity(parse_vector(args.gravity, 3, "--gravity"))
    q_ranges = parse_q_ranges(args.q_ranges, model)
    rng = np.random.default_rng(args.seed)
    samples = draw_samples(model, args.samples, rng, q_ranges)
    stacked = stack(model, samples, cond_gate=args.cond_gate)
    basis = drng(model)
    b = basis.complement()
    numeric = numerical_base_analysis(stacked.Y, args.rank_tol)
    check = cross_validate(stacked.Y, basis.B_null, b, args.rank_tol, MEMBERSHIP_TOL)
    expected_rank = 10 * model.n - basis.d
    report = _robot_header(model)
    report.update({
        "seed": args.seed,
        "cond_gate": args.cond_gate,
        "sampling": stacked.summary(),
        "nullspace_dimension": basis.d,
        "base_parameters": int(b.shape[1]),
        "numerical": {
            **numeric.as_dict(),
            "expected_rank": expected_rank,
            "rank_matches_analytical": numeric.rank == expected_rank,
        },
        "cross_validation": check.as_dict(),
        "result": "PASS" if check.passed else "FAIL",
    })
    if args.export_y:
        _export(args.export_y, stacked.Y)
    return report, 0 if check.passed else 1


def cmd_bench(args) -> tuple[dict, int]:
    model = resolve_robot(args.robot)
    if args.repetitions <= 0:
        raise UsageError("--repetitions must be positive")
    times = []
    d = None
    for _ in range(args.repetitions):
        t0 = time.perf_counter()
        d = drng(model).d
        times.append((time.perf_counter() - t0) * 1e3)
    report = _robot_header(model)
    report.pop("provenance")
    report.update({
        "nullspace_dimension": d,
        "repetitions": args.repetitions,
        "median_ms": statistics.median(times),
        "min_ms": min(times),
        "max_ms": max(times),
    })
    return report, 0


def _export(path: str, matrix) -> None:
    if path.endswith(".csv"):
        export_csv(path, matrix)
    else:
        export_binary(path, matrix)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    elif isinstance(obj, list):
        yield prefix, " ".join(_scalar(v) for v in obj)
    else:
        yield prefix, _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    lines = ["key,value"]
    for key, value in _flatten(report):
        if any(c in value for c in ',"\n'):
            value = '"' + value.replace('"', '""') + '"'
        lines.append(f"{key},{value}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgabase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("robot", help="robot JSON file or bundled demo name")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("analyze", help="nullspace dimension and base parameter count")
    common(p)
    p.add_argument("--gravity", help="gravity term x,y,z, i.e. the upward base acceleration that replaces gravity (0,0,9.81 when gravity pulls along -z; default from the file)")
    p.add_argument("--export-basis", metavar="PATH", help="write B_null (.csv or binary)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="cross-check against a sampled regressor")
    common(p)
    p.add_argument("--gravity", help="gravity term x,y,z, i.e. the upward base acceleration that replaces gravity (0,0,9.81 when gravity pulls along -z; default from the file)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond-gate", type=float, default=DEFAULT_COND_GATE)
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--q-ranges", help="lo:hi per actuated coordinate, comma separated (use --q-ranges=... when the first bound is negative)")
    p.add_argument("--export-y", metavar="PATH", help="write the stacked regressor (.csv or binary)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="median wall time of the nullspace construction")
    common(p)
    p.add_argument("--repetitions", type=int, default=50)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except (UsageError, RobotFileError, NoValidSamples, ValueError) as exc:
        print(f"pgabase {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
