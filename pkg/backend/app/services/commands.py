"""Text-in, text-out operations shared by the command line and the HTTP API."""

import logging
from typing import NamedTuple, Optional

from ..core.errors import IndexOutOfRangeError
from .exact_algebra import VarKind
from .expr_parser import elaborate, elaborate_poly, infer_arity, parse_expr, parse_line
from .graph_core import DiGraph, LineForest, decompose_to_lines, format_line_combo
from .lie_check import classical_dimension, connected_forests, line_to_bracket
from .residue_fourier import convolve, fourier, line_residue

logger = logging.getLogger(__name__)


class CommandResult(NamedTuple):
    result: str
    n: int


def decompose_command(graph: str) -> CommandResult:
    g = DiGraph.parse(graph)
    return CommandResult(format_line_combo(decompose_to_lines(g)), g.n)


def residue_command(expr: str, line: str, n: Optional[int] = None) -> CommandResult:
    """Residue along one line; surviving z-variables are renamed to w with the same index"""
    vertices = parse_line(line)
    ast = parse_expr(expr)
    n = n if n is not None else max([infer_arity(ast)] + vertices)
    if max(vertices) > n or min(vertices) < 1:
        raise IndexOutOfRangeError(f"line {line} leaves vertices 1..{n}")
    value = line_residue(elaborate(ast, n), vertices)
    return CommandResult(str(value.relabel({i: i for i in value.labels}, VarKind.W)), n)


def fourier_command(expr: str, forest: str) -> CommandResult:
    parsed = LineForest.parse(forest)
    return CommandResult(str(fourier(elaborate(parse_expr(expr), parsed.n), parsed)), parsed.n)


def convolve_command(f: str, q: str, p: Optional[int] = None) -> CommandResult:
    f_ast, q_ast = parse_expr(f), parse_expr(q)
    p = p if p is not None else max(infer_arity(f_ast), infer_arity(q_ast))
    F = elaborate(f_ast, p, VarKind.W)
    Q = elaborate_poly(q_ast, p, VarKind.BIGLAMBDA)
    logger.debug(f"Convolving {F} with {Q}")
    return CommandResult(str(convolve(F, Q)), p)


def lie_dim_command(n: int) -> CommandResult:
    lines = [f"dim P^cl({n}) = {classical_dimension(n)}"]
    lines += [str(line_to_bracket(forest)) for forest in connected_forests(n)]
    return CommandResult("\n".join(lines), n)
