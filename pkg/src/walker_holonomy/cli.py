"""Command line: ``analyze``, ``verify`` and ``decompose`` on metric-spec files.

Exit codes: 0 success, 1 input or evaluation error (or failed verification),
2 indeterminate classification. ``WH_TOL`` overrides the default tolerance.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .classify import DEFAULT_TOL
from .dsl import MetricSpec, as_point, parse_metric_spec
from .errors import WalkerError
from .report import AnalysisConfig, analyze, decompose_report, default_point, dumps
from .transport import STEPS_PER_UNIT
from .verification import random_points, run_suite

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INDETERMINATE = 2


def default_tol() -> float:
    raw = os.environ.get("WH_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise SystemExit(f"error: WH_TOL must be a number, got {raw!r}")
    if not tol > 0:
        raise SystemExit(f"error: WH_TOL must be positive, got {raw!r}")
    return tol


def _coords(text: str) -> list[float]:
    try:
        return [float(c) for c in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walker-holonomy",
        description="Curvature splitting and holonomy type of Walker metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec_file", help="metric-spec file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--fd-step", type=_positive_float, default=None,
                       help="finite-difference step (default 1e-5 * (1 + |p|_inf))")

    a = sub.add_parser("analyze", help="full pipeline report")
    common(a)
    a.add_argument("--point", type=_coords, action="append", default=None,
                   help="c0,...,c{n+1}; repeat for several points (first is the base)")
    a.add_argument("--samples", type=_nonneg_int, default=8,
                   help="extra random points for the pointwise criteria")
    a.add_argument("--tol", type=_positive_float, default=None)
    a.add_argument("--curves", type=_positive_int, default=64)
    a.add_argument("--steps", type=_positive_float, default=STEPS_PER_UNIT,
                   help="RK4 steps per unit coordinate length")
    fmt = a.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    a.set_defaults(fmt="json")

    v = sub.add_parser("verify", help="invariant residual table")
    common(v)
    v.add_argument("--points", type=_positive_int, default=10)
    v.add_argument("--json", action="store_true")

    d = sub.add_parser("decompose", help="curvature components at a point")
    common(d)
    d.add_argument("--point", type=_coords, required=True)
    return parser


def load_spec(path: str) -> MetricSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise WalkerError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_metric_spec(text)


def _text_report(rep: dict) -> str:
    hol = rep["holonomy"]
    lines = [f"type: {hol['type']}  ({hol['reason']})",
             f"algebra dim: {hol['algebra_dim']}  h dim: {hol['h_dim']}  "
             f"h' dim: {hol['h_prime_dim']}  centre dim: {hol['center_dim']}",
             f"weakly irreducible (heuristic): {hol['weak_irreducibility_flag']}"]
    for key in ("prop1", "prop2", "prop3"):
        pr = rep["propositions"][key]
        res = ", ".join(f"{k}={v:.2e}" for k, v in pr["residuals"].items())
        lines.append(f"{key}: {pr['verdict']}  [{res}]")
    for c in rep["components"]:
        norms = ", ".join(f"{k}={v:.3e}" for k, v in c["norms"].items())
        lines.append(f"point {c['point']}: {norms}")
    failed = [r["name"] for r in rep["verification"] if not r["pass"]]
    lines.append("verification: " + ("all pass" if not failed else "FAIL " + ", ".join(failed)))
    return "\n".join(lines) + "\n"


def _rows_text(rows) -> str:
    width = max(len(r.name) for r in rows)
    out = []
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        res = "error" if r.error else f"{r.residual:.3e}"
        line = f"{r.name:<{width}}  {res:>10}  budget {r.budget:.0e}  {status}"
        if r.error:
            line += f"  {r.error}"
        out.append(line)
    return "\n".join(out) + "\n"


def cmd_analyze(args) -> int:
    spec = load_spec(args.spec_file)
    points = [as_point(p, spec.n) for p in (args.point or [])]
    cfg = AnalysisConfig(points=[p.tolist() for p in points], samples=args.samples,
                         seed=args.seed, tol=args.tol if args.tol is not None else default_tol(),
                         curves=args.curves, steps_per_unit=args.steps, fd_step=args.fd_step)
    rep = analyze(spec, cfg)
    sys.stdout.write(dumps(rep) if args.fmt == "json" else _text_report(rep))
    return EXIT_OK if rep["holonomy"]["type"] != "indeterminate" else EXIT_INDETERMINATE


def cmd_verify(args) -> int:
    spec = load_spec(args.spec_file)
    base = default_point(spec.n)
    points = [base] + random_points(base, args.points - 1, args.seed)
    rows = run_suite(spec, points, args.seed, args.fd_step)
    if args.json:
        sys.stdout.write(dumps({"verification": [r.to_dict() for r in rows]}))
    else:
        sys.stdout.write(_rows_text(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_ERROR


def cmd_decompose(args) -> int:
    spec = load_spec(args.spec_file)
    p = as_point(args.point, spec.n)
    sys.stdout.write(dumps(decompose_report(spec, p, args.fd_step)))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "decompose": cmd_decompose}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (WalkerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except np.linalg.LinAlgError as exc:
        print(f"error: linear algebra failure: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
