"""Command-line entry points: decompose, residue, fourier, convolve, verify, lie-dim."""

import argparse
import logging
import sys
from typing import List, Optional

from .core.config import settings
from .core.errors import OperadError
from .models.schemas import OutputFormat, SuiteName
from .services.commands import (
    convolve_command,
    decompose_command,
    fourier_command,
    lie_dim_command,
    residue_command,
)
from .services.suites import run_suite

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralcalc", description="Exact chiral and classical operad calculus")
    commands = parser.add_subparsers(dest="command", required=True)

    decompose = commands.add_parser("decompose", help="Coordinates of a graph in the line basis")
    decompose.add_argument("--graph", required=True, help="n=<k>; edges=i->j,...")

    residue = commands.add_parser("residue", help="Iterated residue along one line")
    residue.add_argument("--expr", required=True)
    residue.add_argument("--line", required=True, help="i1>i2>...")
    residue.add_argument("--n", type=int, default=None, help="arity (defaults to the largest index used)")

    fourier_cmd = commands.add_parser("fourier", help="Forest Fourier transform")
    fourier_cmd.add_argument("--expr", required=True)
    fourier_cmd.add_argument("--forest", required=True, help="1>2>3 | 4>5")

    convolve_cmd = commands.add_parser("convolve", help="Convolution product F * Q")
    convolve_cmd.add_argument("--f", required=True, help="function of w1..wp")
    convolve_cmd.add_argument("--q", required=True, help="polynomial in L1..Lp")
    convolve_cmd.add_argument("--p", type=int, default=None)

    verify = commands.add_parser("verify", help="Run a verification suite")
    verify.add_argument("--suite", default=SuiteName.ALL.value, choices=[s.value for s in SuiteName])
    verify.add_argument("--n", type=int, default=3)
    verify.add_argument("--seed", type=int, default=None, help=f"defaults to {settings.DEFAULT_SEED}")
    verify.add_argument("--format", default=OutputFormat.JSON.value, choices=[f.value for f in OutputFormat])

    lie_dim = commands.add_parser("lie-dim", help="Classical operations on the trivial module")
    lie_dim.add_argument("--n", type=int, required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "decompose":
            print(decompose_command(args.graph).result)
        elif args.command == "residue":
            print(residue_command(args.expr, args.line, args.n).result)
        elif args.command == "fourier":
            print(fourier_command(args.expr, args.forest).result)
        elif args.command == "convolve":
            print(convolve_command(args.f, args.q, args.p).result)
        elif args.command == "lie-dim":
            print(lie_dim_command(args.n).result)
        else:
            run = run_suite(args.suite, args.n, args.seed, OutputFormat(args.format))
            print(run.output)
            return run.exit_code
    except (OperadError, ValueError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0
