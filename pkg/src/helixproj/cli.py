"""Command-line front end.

Exit codes: 0 success / classified, 1 input error, 2 property violated.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .classify import Tolerances, admissible_region, classify, classify_covariance
from .correlation import CorrelationMatrix, standardize
from .errors import HelixProjError, InvalidInput, NotEmbeddable, NotTriangleEqual
from .geometry import embed_gram, verify_projection_invariance
from .gplab import (ProcessSpec, check_conditioning_identity, conditioning_multipliers,
                    empirical_covariance, sample, sample_residual, standardized_matrix)
from .metric import FiniteMetricSpace, classify_quadruple, embed_line

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED = 0, 1, 2
DEFAULT_TOL = 1e-8


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_times(text: str, kind: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise InvalidInput("no times given")
    if kind in ("quadruple", "explicit"):
        return items
    try:
        return [float(s) for s in items]
    except ValueError as exc:
        raise InvalidInput(f"times must be numbers for the {kind} process") from exc


def _process(args) -> ProcessSpec:
    if args.process == "quadruple":
        if args.x is None or args.y is None:
            raise InvalidInput("--x and --y are required for the quadruple process")
        return ProcessSpec.quadruple(args.x, args.y)
    if args.process == "explicit":
        if not args.gram:
            raise InvalidInput("--gram FILE is required for the explicit process")
        labels, m = io.read_gram(args.gram)
        corr = standardize(m, labels)[0] if args.standardize else CorrelationMatrix(m, labels)
        return ProcessSpec.explicit(corr)
    return ProcessSpec(args.process)


def cmd_classify(args) -> int:
    labels, m = io.read_gram(args.input)
    tol = Tolerances(metric=args.tol)
    if args.standardize:
        report = classify_covariance(m, labels, tol)
    else:
        report = classify(CorrelationMatrix(m, labels), tol)
    _emit(io.dumps(report.to_dict()), args.out)
    return EXIT_OK if report.classified else EXIT_VIOLATED


def cmd_verify_invariance(args) -> int:
    labels, m = io.read_gram(args.input)
    corr = standardize(m, labels)[0] if args.standardize else CorrelationMatrix(m, labels)
    report = verify_projection_invariance(embed_gram(corr), tol=args.tol)
    _emit(io.dumps(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATED


def cmd_embed(args) -> int:
    labels, d = io.read_metric(args.input)
    space = FiniteMetricSpace(d, labels, tol=args.tol)
    doc = {"version": io.VERSION}
    code = EXIT_OK
    try:
        emb = embed_line(space, args.tol)
        doc.update(status="embedded", coords={u: emb[u] for u in space.labels},
                   max_error=emb.max_error(space))
    except NotTriangleEqual as exc:
        doc.update(status="not_triangle_equal", witness=list(exc.witness))
        code = EXIT_VIOLATED
    except NotEmbeddable as exc:
        code = EXIT_VIOLATED
        doc.update(status="not_embeddable", quadruple=list(exc.quadruple))
        if len(space) == 4:
            q = classify_quadruple(space, args.tol)
            doc.update(status="exceptional", x=q.x, y=q.y, roles=q.roles,
                       pairing=[[list(p) for p in m] for m in q.pairing])
    _emit(io.dumps(doc), args.out)
    return code


def cmd_admissible_region(args) -> int:
    pts = admissible_region(args.xmax, args.step)
    _emit(io.csv_text(["x", "y"], pts), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _process(args)
    times = _parse_times(args.times, spec.kind)
    paths = sample(spec, times, args.samples, args.seed)
    _emit(io.csv_text(times, paths.samples), args.out)
    return EXIT_OK


def cmd_condition_check(args) -> int:
    spec = _process(args)
    times = _parse_times(args.times, spec.kind)
    s0 = _parse_times(args.s0, spec.kind)
    doc = {"version": io.VERSION, "process": spec.kind, "s0": s0, "times": times}
    if args.samples:
        paths = sample_residual(spec, times, s0, args.samples, args.seed)
        cov, se = empirical_covariance(paths)
        phi = conditioning_multipliers(spec, times, s0)
        f = np.array([phi[t] for t in times])
        target = np.outer(f, f) * standardized_matrix(spec, times)
        diff = np.abs(cov - target)
        z = diff / np.where(se > 0, se, np.inf)
        passed = bool(np.all(diff <= 4 * se + 1e-15))
        doc.update(mode="monte_carlo", samples=args.samples, seed=args.seed,
                   max_discrepancy=float(diff.max()), max_standard_errors=float(z.max()),
                   passed=passed)
    else:
        check = check_conditioning_identity(spec, s0, times, args.tol)
        passed = check.passed
        doc.update(mode="analytic", tol=args.tol, max_discrepancy=check.max_discrepancy,
                   projective_discrepancy=check.projective_discrepancy, passed=passed, multipliers=[check.multipliers[t] for t in times])
    _emit(io.dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="check tolerance (default 1e-8)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--standardize", action="store_true",
                        help="accept a covariance matrix and rescale it to unit variances")
    common.add_argument("--out", help="write the result to this file instead of stdout")

    parser = argparse.ArgumentParser(
        prog="helixproj",
        description="Projection-invariant configurations: sech helix and exceptional quadruples.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="decompose a Gram file")
    p.add_argument("input")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify-invariance", parents=[common], help="check projection invariance")
    p.add_argument("input")
    p.set_defaults(func=cmd_verify_invariance)

    p = sub.add_parser("embed", parents=[common], help="embed a metric file into the line")
    p.add_argument("input")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("admissible-region", parents=[common], help="grid of admissible (x, y)")
    p.add_argument("--xmax", type=float, default=5.0)
    p.add_argument("--step", type=float, default=0.05)
    p.set_defaults(func=cmd_admissible_region)

    process = argparse.ArgumentParser(add_help=False)
    process.add_argument("--process", required=True,
                         choices=["helix", "taylor", "laplace", "quadruple", "explicit"])
    process.add_argument("--times", required=True, help="comma-separated times or labels")
    process.add_argument("--x", type=float)
    process.add_argument("--y", type=float)
    process.add_argument("--gram", help="Gram file for the explicit process")

    p = sub.add_parser("simulate", parents=[common, process], help="sample paths to CSV")
    p.add_argument("--samples", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("condition-check", parents=[common, process],
                       help="check the conditioning identity")
    p.add_argument("--s0", required=True, help="conditioning point(s), comma-separated")
    p.add_argument("--samples", type=int, default=0,
                   help="Monte Carlo check with this many samples instead of the analytic one")
    p.set_defaults(func=cmd_condition_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HelixProjError, ValueError, OSError, KeyError) as exc:
        print(f"helixproj: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
