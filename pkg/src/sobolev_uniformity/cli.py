"""Command-line front end.

    sobolev-uniformity test DATAFILE [--K 5] [--alpha 0.05] [--no-correction]
                                     [--mc-pvalue B] [--seed S] [--json]
    sobolev-uniformity simulate (--table {1..7} | --plan PLAN.json)
                                [--reps R] [--seed S] [--out DIR] [--fast] [--workers W]

Exit codes: 0 uniformity retained, 3 rejected, 1 usage error, 2 data error.
The default seed may be set with the SOBOLEV_SEED environment variable.
"""

import argparse
import json
import os
from pathlib import Path
import re
import sys
import time

import numpy as np

from .manifolds import ManifoldError, ManifoldSpec, validate
from .montecarlo import SimulationPlan, published_plan, report_json, simulate
from .reference import compare, format_comparison
from .sampling import RngSpec
from .sobolev import DEFAULT_K, TooFewPoints, run_test

EXIT_RETAIN, EXIT_USAGE, EXIT_DATA, EXIT_REJECT = 0, 1, 2, 3
SEED_ENV = "SOBOLEV_SEED"
_HEADER = re.compile(r"^#\s*manifold\s*:\s*(\S+)\s*$", re.IGNORECASE)
_SPLIT = re.compile(r"[,\s]+")


class DataFileError(Exception):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class UsageError(Exception):
    pass


def read_data_file(path):
    """Parse a data file into ``(spec, sample)``.

    The first non-blank line must be ``# manifold: NAME``; later lines
    starting with ``#`` are comments. Each remaining line is one point,
    given as comma- or whitespace-separated reals.
    """
    spec = None
    points = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if spec is None:
                m = _HEADER.match(text)
                if not m:
                    raise DataFileError("expected header '# manifold: <name>'", lineno)
                try:
                    spec = ManifoldSpec.parse(m.group(1))
                except ValueError as exc:
                    raise DataFileError(str(exc), lineno) from None
                continue
            if text.startswith("#"):
                continue
            try:
                values = [float(v) for v in _SPLIT.split(text) if v]
            except ValueError:
                raise DataFileError(f"non-numeric value in {text!r}", lineno) from None
            try:
                points.append(validate(spec, values))
            except ManifoldError as exc:
                raise DataFileError(str(exc), lineno) from None
    if spec is None:
        raise DataFileError("empty file (no manifold header)")
    sample = np.stack(points) if points else np.empty((0,) + spec.point_shape)
    return spec, sample


def write_data_file(path, spec, sample):
    """Write a sample in the data-file format; values round-trip exactly."""
    with open(path, "w") as fh:
        fh.write(f"# manifold: {spec.name}\n")
        for x in np.asarray(sample, dtype=float):
            fh.write(" ".join(repr(float(v)) for v in x.reshape(-1)) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser():
    parser = _Parser(prog="sobolev-uniformity", description="Data-driven Sobolev tests of uniformity.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test a data file for uniformity")
    t.add_argument("input", help="data file with a '# manifold: ...' header")
    t.add_argument("--K", type=int, default=DEFAULT_K, help="largest order considered (default 5)")
    t.add_argument("--alpha", type=float, default=0.05, help="significance level for the decision")
    t.add_argument("--no-correction", action="store_true", help="use S_khat, not the small-sample S*")
    t.add_argument("--mc-pvalue", type=int, default=0, metavar="B", help="Monte Carlo replicates for a simulated p-value")
    t.add_argument("--seed", type=int, default=None, help=f"seed for Monte Carlo (default ${SEED_ENV} or 0)")
    t.add_argument("--json", action="store_true", help="print the report as JSON")

    s = sub.add_parser("simulate", help="run a simulation study")
    which = s.add_mutually_exclusive_group(required=True)
    which.add_argument("--table", type=int, help="published table to reproduce (1-7)")
    which.add_argument("--plan", help="JSON simulation plan")
    s.add_argument("--reps", type=int, default=None, help="replications (default 10000)")
    s.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")
    s.add_argument("--out", default=".", help="output directory")
    s.add_argument("--fast", action="store_true", help="2000 replications; tolerances scale by sqrt(5)")
    s.add_argument("--workers", type=int, default=1, help="worker processes")
    return parser


def _format_report(report, alpha, reject):
    lines = [
        f"manifold        {report.manifold}",
        f"n               {report.n}",
        f"K               {report.K}",
        f"k_hat           {report.k_hat}",
        f"S_khat          {report.S:.6g}",
        f"S*              {report.S_star:.6g}" + ("  (correction beyond its increasing range; S used)" if report.correction_clipped else ""),
        f"df              {report.df}",
        f"correction      {'on' if report.correction else 'off'}",
        f"p (chi-square)  {report.p_asymptotic:.6g}",
    ]
    if report.p_monte_carlo is not None:
        lines.append(f"p (Monte Carlo) {report.p_monte_carlo:.6g}  ({report.mc_replications} replicates)")
    lines.append("")
    lines.append(f"{'k':>3}{'S_k':>14}{'B_S(k)':>14}")
    for k, s_k, b_k in report.trace:
        mark = "  <-" if k == report.k_hat else ""
        lines.append(f"{k:>3}{s_k:>14.6g}{b_k:>14.6g}{mark}")
    lines.append("")
    lines.append(f"decision at alpha={alpha:g}: {'reject' if reject else 'retain'} uniformity")
    return "\n".join(lines)


def cmd_test(args):
    if not 0.0 < args.alpha < 1.0:
        raise UsageError("--alpha must lie in (0, 1)")
    if args.K < 1:
        raise UsageError("--K must be >= 1")
    if args.mc_pvalue < 0:
        raise UsageError("--mc-pvalue must be >= 0")
    try:
        spec, sample = read_data_file(args.input)
    except OSError as exc:
        raise DataFileError(f"cannot read {args.input}: {exc.strerror}") from None
    if sample.shape[0] < 3:
        raise UsageError(f"the test needs at least 3 points, got {sample.shape[0]}")
    seed = args.seed if args.seed is not None else _default_seed()
    correction = False if args.no_correction else None
    report = run_test(spec, sample, K=args.K, correction=correction,
                      mc_replications=args.mc_pvalue, rng=RngSpec(seed))
    p = report.p_monte_carlo if report.p_monte_carlo is not None else report.p_asymptotic
    reject = p <= args.alpha
    if args.json:
        out = {"schema": 1, "input": str(args.input), "alpha": args.alpha,
               "decision": "reject" if reject else "retain", "report": report.to_dict()}
        print(json.dumps(out, indent=2))
    else:
        print(_format_report(report, args.alpha, reject))
    return EXIT_REJECT if reject else EXIT_RETAIN


def _load_plan(path, seed, reps):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load plan {path}: {exc}") from None
    if seed is not None:
        d["master_seed"] = seed
    if reps is not None:
        d["replications"] = reps
    try:
        return SimulationPlan.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid plan: {exc}") from None


def cmd_simulate(args):
    seed = args.seed if args.seed is not None else _default_seed()
    if args.reps is not None and args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if args.plan:
        plan = _load_plan(args.plan, seed, args.reps)
    else:
        if args.table not in range(1, 8):
            raise UsageError(f"--table must be 1..7, got {args.table}")
        plan = published_plan(args.table, replications=args.reps or 10_000, master_seed=seed, fast=args.fast)
    t0 = time.perf_counter()
    table = simulate(plan, workers=args.workers)
    elapsed = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"table{plan.table_id}" if plan.table_id else "simulation"
    (out / f"{stem}.csv").write_text(table.to_csv())
    (out / f"{stem}.json").write_text(report_json(plan, [table], elapsed) + "\n")

    print(table.to_csv(), end="")
    print(f"# wrote {out / (stem + '.csv')} and {out / (stem + '.json')} in {elapsed:.1f}s")
    if not args.plan:
        print()
        print("comparison with the published table:")
        print(format_comparison(compare(table)))
        if plan.fast:
            print(f"(fast preset: {plan.replications} replications, tolerances widened by sqrt(5))")
    return EXIT_RETAIN


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "test":
            return cmd_test(args)
        return cmd_simulate(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFileError, TooFewPoints) as exc:
        code = EXIT_USAGE if isinstance(exc, TooFewPoints) else EXIT_DATA
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
