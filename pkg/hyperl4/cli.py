"""
Command-line argument parsing for hyperl4.

This module provides the CLI interface for hyperl4, handling all argument
parsing and validation. The parsed arguments are turned into a RunConfig and
passed to the execution logic in hyperl4.core.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from hyperl4.core import DEFAULT_OUTPUT, RunConfig
from hyperl4.strichartz_lab import ExtremizerKind
from hyperl4.utils.checks_resolver import check_defaults
from hyperl4.utils.config import load_suite_config

THREADS_ENV = "HYPERL4_THREADS"
DEFAULT_SUITE_CONFIG = Path("configs/suite_default.toml")

# Arguments shared by every sub-command; the rest become RunConfig.params.
COMMON_ARGS = {
    "command",
    "output",
    "log_level",
    "log_file",
    "jobs",
    "budget",
    "mode",
    "seed",
}
INPUT_ARGS = ("input", "input2", "points", "lines", "circles", "config")


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def int_tuple(size: int):
    def parse(text: str) -> tuple[int, ...]:
        values = tuple(int_list(text))
        if len(values) != size:
            raise argparse.ArgumentTypeError(f"expected {size} integers: {text!r}")
        return values

    return parse


def default_jobs() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        logging.warning("Ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return None


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--output",
        "-o",
        type=Path,
        default=None,
        help="Output directory (default: output/, or [app].output for suite)",
    )
    common.add_argument(
        "--log-level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Log level (default: INFO)",
    )
    common.add_argument(
        "--log-file",
        action="store_true",
        help="Also write hyperl4.log into the output directory",
    )
    common.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=default_jobs(),
        help=f"Worker processes (default: ${THREADS_ENV} or 1; "
        "[app].jobs for suite)",
    )
    common.add_argument(
        "--budget",
        type=int,
        default=None,
        help="Work budget: resonant pairs, sum of m13 * m24 over (a, b) keys "
        "(default: $HYPERL4_WORK_BUDGET or 10^10)",
    )
    common.add_argument(
        "--mode",
        choices=["auto", "exact", "numeric"],
        default="auto",
        help="Weight arithmetic for CSV inputs (default: auto)",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Random seed (default: 0, or [app].seed for suite)",
    )
    return common


def _add_input(
    sub: argparse.ArgumentParser, name: str = "input", help_text: str = ""
) -> None:
    flag = f"--{name}"
    if name == "input":
        sub.add_argument(flag, "-i", type=Path, required=True, help=help_text)
    else:
        sub.add_argument(flag, type=Path, required=True, help=help_text)


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments for hyperl4.

    Returns:
        argparse.Namespace with the common attributes (command, output,
        log_level, log_file, jobs, budget, mode, seed) and the options of
        the chosen sub-command.
    """
    parser = argparse.ArgumentParser(
        description="hyperl4 - exact L^4 norms of hyperbolic Schrodinger "
        "evolutions on the 3-torus",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Omega, Omega1, Omega2 of a point set, cross-checked by the oracle
  %(prog)s count --input data/line3.csv --oracle

  # Scaling exponent of the line extremizer family
  %(prog)s scaling --kind line --N-list 8,16,32,64

  # Full acceptance suite on 8 workers
  %(prog)s suite --config configs/suite_default.toml --jobs 8
        """,
    )
    common = _common_parser()
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("count", parents=[common], help="Omega, Omega1, Omega2 of f")
    _add_input(sub, help_text="Point-set CSV (x,y,z,w_re[,w_im])")
    sub.add_argument("--oracle", action="store_true", help="Also run the slow oracle")

    sub = subs.add_parser("slice", parents=[common], help="Points of A_{a,b} in a box")
    sub.add_argument("--a", type=int_tuple(3), required=True, help="a as x,y,z")
    sub.add_argument("--b", type=int, required=True)
    sub.add_argument("--N", type=int, required=True, help="Box half-width")
    sub.add_argument(
        "--plane",
        type=int_tuple(4),
        default=None,
        help="Restrict to the plane n1,n2,n3,c (n . xi = c)",
    )

    sub = subs.add_parser("heavy-planes", parents=[common], help="Heavy planes and error part")
    _add_input(sub, help_text="Point-set CSV")
    sub.add_argument("--M", type=int, required=True, help="Cone normal radius")

    sub = subs.add_parser("incidence", parents=[common], help="Point-line incidences")
    _add_input(sub, "points", "CSV with header x,y")
    _add_input(sub, "lines", "CSV with header A,B,C (A x + B y + C = 0)")
    sub.add_argument("--oracle", action="store_true", help="Also run the double loop")

    sub = subs.add_parser("rich-lines", parents=[common], help="Lines with >= k points")
    _add_input(sub, "points", "CSV with header x,y,z")
    sub.add_argument("--k", type=int, default=3)

    sub = subs.add_parser(
        "sphere-incidence", parents=[common], help="Direction-great circle incidences"
    )
    _add_input(sub, "points", "CSV of directions, header x,y,z")
    _add_input(sub, "circles", "CSV of circle normals, header a,b,c")

    sub = subs.add_parser("cone-enum", parents=[common], help="Primitive cone points")
    sub.add_argument("--M", type=int, required=True)
    sub.add_argument(
        "--method", choices=["parametrized", "bruteforce"], default="parametrized"
    )
    sub.add_argument("--box", type=int, default=None, help="Also count Cone in [-box,box]^3")

    sub = subs.add_parser("parabola", parents=[common], help="Points on z^2 = q y + omega")
    sub.add_argument("--q", type=int)
    sub.add_argument("--omega", type=int)
    sub.add_argument("--N", type=int)
    sub.add_argument("--oracle", action="store_true")
    sub.add_argument("--scan", action="store_true", help="Random and adversarial scan")
    sub.add_argument("--q-max", type=int, default=200)
    sub.add_argument("--N-max", type=int, default=10_000)
    sub.add_argument("--trials", type=int, default=10_000)

    sub = subs.add_parser("extremizer", parents=[common], help="Write an extremizer CSV")
    sub.add_argument("--kind", type=str, required=True)
    sub.add_argument("--N", type=int, required=True)

    sub = subs.add_parser("l4", parents=[common], help="Exact L^4 norm of the evolution")
    _add_input(sub, help_text="Point-set CSV")
    sub.add_argument("--N", type=int, default=None, help="Box for the main ratio")
    sub.add_argument("--quadrature", action="store_true", help="Cross-check by FFT")

    sub = subs.add_parser("scaling", parents=[common], help="Log-log slope of a family")
    sub.add_argument("--kind", type=str, required=True)
    sub.add_argument("--N-list", type=int_list, required=True)
    sub.add_argument("--p", type=float, default=4.0)

    sub = subs.add_parser("decompose", parents=[common], help="Dyadic level-set blocks")
    _add_input(sub, help_text="Point-set CSV")

    sub = subs.add_parser("good-bad", parents=[common], help="Good/bad block split")
    _add_input(sub, help_text="Point-set CSV")
    sub.add_argument("--N", type=int, default=None)
    sub.add_argument("--delta", type=float, default=0.1)
    sub.add_argument("--c-threshold", type=float, default=1.0)

    sub = subs.add_parser("bilinear", parents=[common], help="Bilinear L^2 of two evolutions")
    _add_input(sub, help_text="First point-set CSV")
    _add_input(sub, "input2", "Second point-set CSV")

    sub = subs.add_parser("illposed", parents=[common], help="Ill-posedness example")
    sub.add_argument("--N", type=int, default=1024)
    sub.add_argument("--s", type=float, default=0.5)
    sub.add_argument("--k", type=int, default=1, help="Nonlinearity |u|^(2k) u")
    sub.add_argument("--gamma-k", type=int_list, default=[])

    sub = subs.add_parser("evolve", parents=[common], help="Split-step trajectory")
    _add_input(sub, help_text="Coefficient CSV")
    sub.add_argument("--box", type=int, default=None)
    sub.add_argument("--k", type=int, default=1)
    sub.add_argument("--sign", type=int, choices=[-1, 1], default=1)
    sub.add_argument("--dt", type=float, default=1e-3)
    sub.add_argument("--steps", type=int, default=100)
    sub.add_argument("--every", type=int, default=10)
    sub.add_argument("--grid", type=int, default=None)
    sub.add_argument("--linear", action="store_true", help="Drop the nonlinear step")

    sub = subs.add_parser("suite", parents=[common], help="Run the acceptance suite")
    sub.add_argument("--config", "-c", type=Path, default=DEFAULT_SUITE_CONFIG)
    sub.add_argument(
        "--calibrate", action="store_true", help="Measure and write golden values"
    )

    args = parser.parse_args(argv)
    _validate(args)
    return args


def _fail(message: str) -> None:
    logging.error(message)
    sys.exit(2)


def _validate(args: argparse.Namespace) -> None:
    for name in INPUT_ARGS:
        path = getattr(args, name, None)
        if path is not None and not path.is_file():
            _fail(f"Input file not found: {path}")

    if args.jobs is not None:
        if args.jobs < 1:
            logging.warning("--jobs < 1 clamped to 1")
            args.jobs = 1
        cpu = os.cpu_count() or 1
        if args.jobs > cpu:
            logging.warning(
                "--jobs=%d exceeds os.cpu_count()=%d; workers will queue",
                args.jobs,
                cpu,
            )
    if args.budget is not None and args.budget < 1:
        _fail("--budget must be positive")

    command = args.command
    if command in ("extremizer", "scaling"):
        kinds = [k.value for k in ExtremizerKind]
        if args.kind not in kinds:
            _fail(f"Unknown extremizer kind '{args.kind}'. Available: {kinds}")
    if command == "scaling":
        if args.p != 4:
            _fail("Only p = 4 norms are computed")
        if len(set(args.N_list)) < 4:
            _fail("--N-list needs at least 4 distinct values")
    if command == "parabola" and not args.scan:
        if args.q is None or args.omega is None or args.N is None:
            _fail("--q, --omega and --N are required unless --scan is given")
    if command == "rich-lines" and args.k < 2:
        _fail("--k must be >= 2")
    if command == "good-bad" and not 0 < args.delta < 0.25:
        _fail("--delta must lie in (0, 1/4)")
    if command == "evolve":
        if args.dt <= 0:
            _fail("--dt must be positive")
        if args.steps < 0 or args.every < 1:
            _fail("--steps must be >= 0 and --every >= 1")
    if command == "illposed" and args.N < 1:
        _fail("--N must be >= 1")


def to_run_config(args: argparse.Namespace) -> RunConfig:
    """Split the namespace into RunConfig fields, inputs and params.

    The suite writes into [app].output unless --output is given, and takes
    --jobs and --seed as overrides of [app].
    """
    raw = vars(args)
    inputs = {k: raw[k] for k in INPUT_ARGS if raw.get(k) is not None}
    params = {k: v for k, v in raw.items() if k not in COMMON_ARGS and k not in inputs}
    output = args.output
    if args.command == "suite":
        params["jobs"] = args.jobs
        params["seed"] = args.seed
        if output is None:
            output = load_suite_config(args.config, check_defaults()).app.output
    return RunConfig(
        command=args.command,
        output=output or DEFAULT_OUTPUT,
        inputs=inputs,
        params=params,
        mode=args.mode,
        seed=args.seed or 0,
        jobs=args.jobs or 1,
        budget=args.budget,
        log_level=args.log_level,
    )
