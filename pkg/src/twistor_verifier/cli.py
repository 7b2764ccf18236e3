"""Command-line driver: ``twistor-verifier verify <check> [options]``.

Exit status is 0 when every case passes, 1 on a verification failure and 2
on a usage error.  JSON reports go to stdout; timing and logs to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .checks import CHECKS, SCHEMA, CheckReport, run_check

log = logging.getLogger("twistor_verifier")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_FAILED_LINES = 10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not np.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twistor-verifier", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification sweep")
    v.add_argument("check", choices=list(CHECKS) + ["all"])
    v.add_argument("--n", type=_positive_int, default=3, help="half the dimension (default 3, the S^6 case)")
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--samples", type=_positive_int, default=None,
                   help="number of random cases (default 50; 200 for holomorphy)")
    v.add_argument("--tol", type=_positive_float, default=None, help="override the check tolerance")
    v.add_argument("--h", type=_positive_float, default=None, help="finite-difference step")
    v.add_argument("--output", choices=("text", "json"), default="text")

    d = sub.add_parser("decompose", help="split a complex structure read from a JSON matrix file")
    d.add_argument("path", help="JSON file holding a square matrix (- for stdin)")
    d.add_argument("--output", choices=("text", "json"), default="text")
    return p


def _usage_checks(args, parser) -> None:
    if args.h is not None and args.check in ("index", "poincare", "retract", "morse"):
        log.warning("--h has no effect on the %s check", args.check)


def _text_report(rep, wall: float) -> str:
    lines = [f"check: {rep.check}  pass: {rep.passed}  max_residual: {rep.max_residual:.3e}  "
             f"cases: {len(rep.cases)}  wall_time: {wall:.2f}s"]
    for k, v in rep.summary.items():
        if rep.check == "all":
            lines.append(f"  {k:<11} pass={v['pass']!s:<5} max_residual={v['max_residual']:.3e}")
        else:
            lines.append(f"  {k}: {v}")
    failed = [c for c in sorted(rep.cases, key=lambda c: c.index) if not c.passed]
    for c in failed[:MAX_FAILED_LINES]:
        lines.append(f"  FAILED case {c.index}: residual={c.residual:.3e} {c.detail}")
    if len(failed) > MAX_FAILED_LINES:
        lines.append(f"  ... {len(failed) - MAX_FAILED_LINES} more failed cases (use --output json)")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    check: str
    n: int = 3
    seed: int = 0
    samples: Optional[int] = None
    tol: Optional[float] = None
    h: Optional[float] = None
    output: str = "text"

    def __post_init__(self):
        if self.check not in CHECKS and self.check != "all":
            raise ValueError(f"unknown check {self.check!r}")
        if self.n < 1 or (self.samples is not None and self.samples < 1):
            raise ValueError("n and samples must be >= 1")
        if (self.tol is not None and self.tol <= 0) or (self.h is not None and self.h <= 0):
            raise ValueError("tol and h must be positive")
        if self.output not in ("text", "json"):
            raise ValueError(f"unknown output format {self.output!r}")


def run(config: RunConfig) -> CheckReport:
    """Execute the configured check; deterministic in (check, n, seed, samples, tol, h)."""
    return run_check(config.check, n=config.n, seed=config.seed, samples=config.samples,
                     tol=config.tol, h=config.h)


def _verify(args, parser) -> int:
    _usage_checks(args, parser)
    rep = run(RunConfig(args.check, args.n, args.seed, args.samples, args.tol, args.h, args.output))
    if args.output == "json":
        doc = {"schema": SCHEMA, **rep.to_dict()}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wall_time: {rep.wall_time:.3f}s", file=sys.stderr)
    else:
        print(_text_report(rep, rep.wall_time))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _decompose(args, parser) -> int:
    from .matcore import NotAComplexStructure, matrix_from_json
    from .retract import decompose

    try:
        text = sys.stdin.read() if args.path == "-" else open(args.path, encoding="utf-8").read()
        A = matrix_from_json(text)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    try:
        d = decompose(A)
    except NotAComplexStructure as exc:
        print(f"not a complex structure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    res = d.residuals()
    if args.output == "json":
        doc = {"schema": SCHEMA, "check": "decompose", "A1": d.A1.tolist(), "A2": d.A2.tolist(),
               "B": d.B.tolist(), "P": d.P.tolist(), "eigenvalues": d.lam.tolist(),
               "residuals": res, "max_residual": d.max_residual(), "pass": d.max_residual() <= 1e-9}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        np.set_printoptions(precision=6, suppress=True)
        print(f"B =\n{d.B}\nP =\n{d.P}\nA2 eigenvalues: {d.lam}\nmax residual: {d.max_residual():.3e}")
    return EXIT_OK if d.max_residual() <= 1e-9 else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return _verify(args, parser)
    return _decompose(args, parser)


if __name__ == "__main__":
    sys.exit(main())
