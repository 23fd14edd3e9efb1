"""Command-line front end: ``standardness {estimate,simulate,tables,oracle}``.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 a ``--check``
comparison against the shipped reference tables failed.

Every run writes a provenance block (seed, version, hash of the inputs) to
stderr; results go to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .estimator import bias_corrected_estimate
from .experiments import (
    FULL_REPLICATIONS,
    TABLE_INCLUDE_SELF,
    ExperimentSpec,
    compare_to_reference,
    load_reference,
    run_experiment,
    table_spec,
)
from .geometry import UNKNOWN, analytic_upsilon
from .oracle import OracleConfig, min_ball_fraction, omega_curve
from .sampling import DEFAULT_SEED, STREAM_VERSION, distribution_from_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_CHECK_FAILED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for runtime errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(None), help=f"master seed (default {DEFAULT_SEED})")
    parser.add_argument("--threads", type=int, default=default(1), help="worker threads for replications")
    parser.add_argument("--out", default=default(None), help="write the result here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=default("json"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="standardness", description="Estimate and study the standardness constant.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", parents=[common], help="estimate the constant from a CSV point cloud")
    p.add_argument("points", help="CSV file with one point per row ('-' for stdin)")
    p.add_argument("--dim", type=int, help="expected number of columns")
    p.add_argument("--radius", type=float, help="neighbourhood radius (default (log n / n)^(1/(2d)))")
    p.add_argument("--naive", action="store_true", help="use the quadratic pairwise count")
    p.add_argument("--header", action="store_true", help="the CSV starts with a header row")
    p.add_argument("--exclude-self", action="store_true", help="do not count a point in its own ball")

    p = sub.add_parser("simulate", parents=[common], help="run an experiment spec (JSON)")
    p.add_argument("spec", help="experiment spec JSON file")

    p = sub.add_parser("tables", parents=[common], help="rerun one of the published tables")
    p.add_argument("--table", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--reps", type=int, default=FULL_REPLICATIONS, help="replications per cell")
    p.add_argument("--check", action="store_true", help="compare against the shipped reference (exit 3 on drift)")
    p.add_argument(
        "--include-self",
        action="store_true",
        default=TABLE_INCLUDE_SELF,
        help="count each point in its own ball (not the convention that reproduces the tables)",
    )

    p = sub.add_parser("oracle", parents=[common], help="sample-free minimal ball fraction")
    p.add_argument("--dist", required=True, help="distribution JSON, or @path to a JSON file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--r", type=float, help="single radius")
    group.add_argument("--radii", help="comma-separated strictly decreasing radii")
    p.add_argument("--config", help="oracle config JSON, or @path")
    p.add_argument("--upsilon", type=float, help="true constant for omega (default: closed form when known)")
    return parser


# -- helpers ----------------------------------------------------------------


def _load_json_arg(text: str) -> dict:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(text)


def _hash(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part if isinstance(part, bytes) else json.dumps(part, sort_keys=True).encode())
    return h.hexdigest()[:16]


def _provenance(seed: Optional[int], spec_hash: str, **extra) -> dict:
    out = {"seed": seed, "version": __version__, "stream_version": STREAM_VERSION, "spec_hash": spec_hash}
    out.update(extra)
    return out


def _print_provenance(prov: dict) -> None:
    lines = ["provenance:"] + [f"  {k}: {v}" for k, v in prov.items()]
    print("\n".join(lines), file=sys.stderr)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if obj is UNKNOWN:
        return None
    return obj


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_points(path: str, header: bool) -> tuple[np.ndarray, bytes]:
    if path == "-":
        raw = sys.stdin.buffer.read()
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
    text = raw.decode("utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if header:
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: rows have differing numbers of columns {sorted(widths)}")
    try:
        pts = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc}); use --header if the file has one") from None
    return pts, raw


# -- subcommands ------------------------------------------------------------


def _cmd_estimate(args) -> int:
    pts, raw = _read_points(args.points, args.header)
    if args.dim is not None and pts.shape[1] != args.dim:
        raise ValueError(f"expected {args.dim} columns, found {pts.shape[1]}")
    if args.radius is None and len(pts) < 2:
        raise ValueError("the default radius needs at least two points; pass --radius")
    res = bias_corrected_estimate(pts, args.radius, naive=args.naive, include_self=not args.exclude_self)
    params = {"radius": args.radius, "naive": args.naive, "exclude_self": args.exclude_self}
    _print_provenance(_provenance(args.seed, _hash(raw, params)))
    out = res.to_dict()
    if args.format == "csv":
        _emit(args, _rows_to_csv(list(out), [[repr(v) if isinstance(v, float) else v for v in out.values()]]))
    else:
        _emit(args, _dump_json(out))
    return EXIT_OK


def _emit_report(args, report) -> None:
    if args.format == "csv":
        _emit(args, report.to_csv())
    else:
        _emit(args, _dump_json(report.to_json()))


def _progress(cell) -> None:
    status = f"failed: {cell.error}" if cell.failed else f"{cell.wall_time:.1f}s"
    print(f"  {cell.dist_id or '?'} n={cell.n} reps={cell.replications} {status}", file=sys.stderr)


def _cmd_simulate(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        obj = json.load(fh)
    spec = ExperimentSpec.from_json(obj)
    seed = spec.master_seed if args.seed is None else args.seed
    spec = ExperimentSpec(spec.cells, seed, args.threads)
    _print_provenance(_provenance(seed, spec.digest()))
    report = run_experiment(spec, progress=_progress)
    _emit_report(args, report)
    return EXIT_RUNTIME if any(c.failed for c in report.cells) else EXIT_OK


def _cmd_tables(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    spec = table_spec(args.table, args.reps, seed, args.threads, include_self=args.include_self)
    _print_provenance(_provenance(seed, spec.digest(), table=args.table, reps=args.reps))
    report = run_experiment(spec, progress=_progress)
    _emit_report(args, report)
    if any(c.failed for c in report.cells):
        return EXIT_RUNTIME
    if args.check:
        verdicts = compare_to_reference(report, load_reference(args.table))
        for v in verdicts:
            print(v.line(), file=sys.stderr)
        ok = all(v.passed for v in verdicts)
        print(f"check: {'PASS' if ok else 'FAIL'} ({sum(v.passed for v in verdicts)}/{len(verdicts)})", file=sys.stderr)
        if not ok:
            return EXIT_CHECK_FAILED
    return EXIT_OK


def _parse_radii(text: str) -> list[float]:
    try:
        radii = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--radii must be a comma-separated list of numbers, got {text!r}") from None
    if not radii:
        raise UsageError("--radii is empty")
    return radii


def _cmd_oracle(args) -> int:
    dist_obj = _load_json_arg(args.dist)
    dist = distribution_from_json(dist_obj)
    cfg_obj = _load_json_arg(args.config) if args.config else {}
    if args.seed is not None:
        cfg_obj = {**cfg_obj, "seed": args.seed}
    cfg = OracleConfig(**cfg_obj)
    upsilon = args.upsilon if args.upsilon is not None else analytic_upsilon(dist)
    _print_provenance(_provenance(cfg.seed, _hash(dist_obj, cfg_obj, args.r, args.radii)))

    if args.r is not None:
        res = min_ball_fraction(dist, args.r, cfg)
        out = {
            "r": args.r,
            "value": res.value,
            "stderr": res.stderr,
            "argmin": res.argmin,
            "upsilon": upsilon,
            "omega": None if upsilon is UNKNOWN else abs(res.value - float(upsilon)),
            "slope": None,
        }
        rows = [[args.r, res.value, res.stderr, out["omega"], *res.argmin]]
    else:
        radii = _parse_radii(args.radii)
        if upsilon is UNKNOWN:
            raise ValueError("omega needs the true constant; pass --upsilon for this distribution")
        curve = omega_curve(dist, radii, float(upsilon), cfg)
        values = curve.values
        out = {
            "radii": curve.radii,
            "value": values,
            "argmin": curve.argmins,
            "upsilon": upsilon,
            "omega": curve.omega_values,
            "noise_floor": curve.noise_floor,
            "slope": curve.slope,
            "trajectory_checked": curve.trajectory_checked,
        }
        rows = [[r, v, "", w, *a] for r, v, w, a in zip(curve.radii, values, curve.omega_values, curve.argmins)]
    if args.format == "csv":
        dim = len(rows[0]) - 4
        header = ["r", "value", "stderr", "omega"] + [f"argmin_{i}" for i in range(dim)]
        _emit(args, _rows_to_csv(header, [[_jsonable(c) if c is not None else "" for c in row] for row in rows]))
    else:
        _emit(args, _dump_json(out))
    return EXIT_OK


_COMMANDS = {
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "tables": _cmd_tables,
    "oracle": _cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 0:
        parser.print_usage(sys.stderr)
        print("standardness: error: --threads must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"standardness: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError, KeyError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        print(f"standardness: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
