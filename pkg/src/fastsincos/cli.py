"""Command-line front end: eval, accuracy, bench and fit.

Exit codes: 0 success, 2 usage or parse error, 3 accuracy check failed,
4 coefficient fit did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from contextlib import contextmanager

from . import accuracy, bench, fit, kernel
from .kernel import PipelineConfig, Variant

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3
EXIT_NO_CONVERGENCE = 4


class UsageError(Exception):
    pass


def default_seed() -> int:
    value = os.environ.get("SINCOS_SEED")
    if value is None:
        return accuracy.DEFAULT_SEED
    try:
        return int(value, 0)
    except ValueError:
        raise UsageError(f"SINCOS_SEED={value!r} is not an integer")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _json_default(o):
    if isinstance(o, Variant):
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")


@contextmanager
def _destination(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as f:
            yield f


def _emit(args, obj: dict, rows: list, header: list):
    """Write ``rows`` as CSV or ``obj`` as a single JSON object."""
    with _destination(args.output) as out:
        if args.format == "json":
            json.dump(obj, out, default=_json_default)
            out.write("\n")
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(k)) for k in header])
        out.write(buf.getvalue())


def _parse_angle(token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise UsageError(f"cannot parse angle {token!r}")
    if not math.isfinite(value):
        raise UsageError(f"angle {token!r} is not finite")
    return value


def cmd_eval(args) -> int:
    angles = [_parse_angle(tok) for tok in args.angles]
    cfg = PipelineConfig(args.variant)
    rows = []
    for theta in angles:
        p = kernel.sincos(theta, cfg)
        rows.append({"theta": kernel.to_f32(theta), "sin": p.s, "cos": p.c})
    _emit(args, {"variant": cfg.variant.value, "results": rows}, rows, ["theta", "sin", "cos"])
    return EXIT_OK


def cmd_accuracy(args) -> int:
    try:
        spec = accuracy.SweepSpec(
            lo=args.min, hi=args.max, samples=args.samples,
            sampling=args.sampling, seed=args.seed,
        )
    except ValueError as e:
        raise UsageError(str(e))
    cfg = PipelineConfig(args.variant)
    stats = accuracy.sweep(spec, cfg)
    failed = accuracy.exceeded_bounds(stats, cfg.variant) if args.check else []
    obj = {"variant": cfg.variant.value, **stats.as_dict()}
    if args.check:
        obj["check"] = "fail" if failed else "pass"
        obj["bounds"] = accuracy.BOUNDS[cfg.variant]
    _emit(args, obj, [obj], ["variant", "samples", "rms_combined", "max_combined",
                             "max_amplitude", "worst_theta"])
    if failed:
        print(f"accuracy check failed: {', '.join(failed)} above bound", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_bench(args) -> int:
    paths = [p.strip() for p in args.paths.split(",") if p.strip()]
    try:
        spec = bench.BenchSpec(
            batch_size=args.batch, repetitions=args.reps, warmup_repetitions=args.warmup,
            paths=paths, variant=args.variant, seed=args.seed, scalar_pairs=args.scalar_pairs,
        )
        report = bench.run_bench(spec)
    except (ValueError, bench.BenchError) as e:
        raise UsageError(str(e))
    rows = report.rows()
    for row in rows:
        row["machine"] = report.machine
    _emit(args, report.as_dict(), rows,
          ["path", "pairs", "ns_per_pair", "pairs_per_second", "cycles_per_pair", "checksum"])
    if args.format != "json" and report.reciprocal_fix_ratio is not None:
        print(f"reciprocal fix time ratio: {report.reciprocal_fix_ratio:.3f}", file=sys.stderr)
    return EXIT_OK


def _constants_block(coeffs: kernel.CoefficientSet) -> str:
    lines = [f"/* {coeffs.variant.value} quarter-angle coefficients */"]
    lines += [f"#define {name} {value:.10g}" for name, value in coeffs.as_dict().items()]
    return "\n".join(lines) + "\n"


def cmd_fit(args) -> int:
    try:
        spec = fit.FitSpec(
            variant=args.variant, sin_terms=args.degree, cos_terms=args.cos_degree,
            doublings=args.doublings, grid_points=args.grid_points,
            eval_samples=args.samples,
        )
    except ValueError as e:
        raise UsageError(str(e))
    try:
        result = fit.fit(spec)
    except fit.FitConvergenceError as e:
        print(f"fit failed: {e}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except fit.FitError as e:
        raise UsageError(str(e))

    obj = {
        "variant": spec.variant.value,
        "doublings": spec.doublings,
        "coefficients": result.coeffs.as_dict(),
        "residual_rms": result.residual_rms,
        "end_to_end_max_error": result.end_to_end_max_error,
        "end_to_end_rms_error": result.end_to_end.rms_combined,
        "iterations": result.iterations,
    }
    if args.arbitrate_ss2:
        arb = fit.arbitrate_ss2(samples=args.samples)
        obj["ss2_arbitration"] = {
            "candidates": [
                {"ss2": v, "max_combined": arb.max_errors[v], "rms_combined": arb.rms_errors[v]}
                for v in arb.max_errors
            ],
            "chosen": arb.chosen,
            "tie": arb.tie,
        }

    if args.format == "text":
        with _destination(args.output) as out:
            out.write(_constants_block(result.coeffs))
            out.write(f"/* end-to-end max error {result.end_to_end_max_error:.3e} */\n")
            if args.arbitrate_ss2:
                for c in obj["ss2_arbitration"]["candidates"]:
                    out.write(f"/* ss2 {c['ss2']:.10f}: max error {c['max_combined']:.4e} */\n")
                out.write(f"/* ss2 chosen: {arb.chosen:.10f} */\n")
        return EXIT_OK

    rows = [{"name": k, "value": v} for k, v in result.coeffs.as_dict().items()]
    rows.append({"name": "end_to_end_max_error", "value": result.end_to_end_max_error})
    rows.append({"name": "residual_rms", "value": result.residual_rms})
    if args.arbitrate_ss2:
        for c in obj["ss2_arbitration"]["candidates"]:
            rows.append({"name": f"ss2_candidate_max_error[{c['ss2']:.10f}]",
                         "value": c["max_combined"]})
        rows.append({"name": "ss2_chosen", "value": arb.chosen})
    _emit(args, obj, rows, ["name", "value"])
    return EXIT_OK


def _add_output(p, formats=("csv", "json")):
    p.add_argument("--format", choices=formats, default="csv")
    p.add_argument("--output", default=None, help="file to write (default: stdout)")


def _add_variant(p):
    p.add_argument("--variant", choices=[v.value for v in Variant],
                   default=Variant.NORMALIZED.value)


def build_parser(seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastsincos",
        description="Branch-free float32 sine-cosine pairs: evaluation, accuracy, "
                    "benchmarks and coefficient fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate sin/cos pairs for the given angles")
    p.add_argument("angles", nargs="+", help="angles in radians")
    _add_variant(p)
    _add_output(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("accuracy", help="error statistics against double precision")
    _add_variant(p)
    p.add_argument("--min", type=float, default=-math.pi)
    p.add_argument("--max", type=float, default=math.pi)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--sampling", choices=["grid", "random"], default="grid")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=seed)
    p.add_argument("--check", action="store_true",
                   help="exit 3 if a statistic exceeds the variant's bound")
    _add_output(p)
    p.set_defaults(func=cmd_accuracy)

    p = sub.add_parser("bench", help="throughput of each evaluation path")
    _add_variant(p)
    p.add_argument("--batch", type=int, default=65536)
    p.add_argument("--reps", type=int, default=9)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--paths", default=",".join(bench.PATHS))
    p.add_argument("--scalar-pairs", type=int, default=2048,
                   help="prefix of the batch timed on the scalar path")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=seed)
    _add_output(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="regenerate quarter-angle coefficients")
    _add_variant(p)
    p.add_argument("--degree", type=int, default=4, help="number of odd (sine) terms")
    p.add_argument("--cos-degree", type=int, default=4,
                   help="number of even (cosine) terms, constant included")
    p.add_argument("--doublings", type=int, default=2)
    p.add_argument("--grid-points", type=int, default=4097)
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="uniform samples over [-pi, pi) for end-to-end errors")
    p.add_argument("--arbitrate-ss2", action="store_true",
                   help="compare the two published ss2 values of the accurate set")
    _add_output(p, ("csv", "json", "text"))
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(default_seed())
    except UsageError as e:
        print(f"fastsincos: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"fastsincos {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
