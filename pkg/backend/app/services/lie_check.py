"""Classical operations on the trivial module (V = F, d = 0): their dimension and the bijection
between connected lines and right-nested bracket words."""

import itertools
import logging
import re
from dataclasses import dataclass
from typing import List, Tuple

from sympy import Matrix, Rational

from ..core.cache import cached
from ..core.errors import DimensionCheckError, FormatError
from .exact_algebra import MPoly, VarId, VarKind
from .graph_core import LineForest, all_line_forests
from .module_spaces import lambda_monomials

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_CAP = 2


def _lam(ell: int) -> MPoly:
    return MPoly.var(VarId(VarKind.BIGLAMBDA, ell))


def _reduce_relation(poly: MPoly, p: int) -> MPoly:
    """Work in F[Lambda_1..Lambda_p]/<Lambda_1 + ... + Lambda_p> by eliminating Lambda_p"""
    relation = MPoly.zero()
    for ell in range(1, p):
        relation = relation - _lam(ell)
    return poly.substitute({VarId(VarKind.BIGLAMBDA, p): relation})


def _exponents(poly_mono, nvars: int) -> Tuple[int, ...]:
    exps = [0] * nvars
    for var, e in poly_mono:
        exps[var.index - 1] = e
    return tuple(exps)


def forest_solution_space(forest: LineForest, cap: int = DEFAULT_LAMBDA_CAP) -> Tuple[List[Tuple[int, ...]], List[Matrix]]:
    """Unknown monomials and a nullspace basis for Lambda_l * P = 0 over every line l"""
    p = forest.p
    unknowns = lambda_monomials(p - 1, cap)
    outputs = {exps: row for row, exps in enumerate(lambda_monomials(p - 1, cap + 1))}
    rows = []
    for ell in range(1, p + 1):
        block = [[Rational(0)] * len(unknowns) for _ in outputs]
        for col, exps in enumerate(unknowns):
            monomial = MPoly({tuple((VarId(VarKind.BIGLAMBDA, k + 1), e) for k, e in enumerate(exps) if e): 1})
            image = _reduce_relation(_lam(ell) * monomial, p)
            for mono, c in image.terms.items():
                block[outputs[_exponents(mono, p - 1)]][col] += Rational(c.numerator, c.denominator)
        rows.extend(block)
    return unknowns, Matrix(rows).nullspace()


@cached("classical_dimension")
def classical_dimension(n: int, cap: int = DEFAULT_LAMBDA_CAP) -> int:
    """dim of the classical operations of arity n on V = F with d = 0"""
    if n < 1:
        raise ValueError("classical_dimension needs n >= 1")
    total = 0
    for forest in all_line_forests(n):
        unknowns, basis = forest_solution_space(forest, cap)
        if basis and forest.p != 1:
            raise DimensionCheckError(f"disconnected forest [{forest}] carries {len(basis)} solutions")
        for vector in basis:
            if any(vector[k] != 0 for k, exps in enumerate(unknowns) if sum(exps)):
                raise DimensionCheckError(f"non-constant solution on [{forest}]")
        total += len(basis)
    logger.info(f"Classical dimension for n={n} at Lambda-degree cap {cap}: {total}")
    return total


@dataclass(frozen=True)
class BracketWord:
    """[x_s(1), [x_s(2), [..., x_s(n)]]] with s(1) = 1"""

    sigma: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.sigma) != list(range(1, len(self.sigma) + 1)):
            raise FormatError(f"{self.sigma} is not a permutation")
        if not self.sigma or self.sigma[0] != 1:
            raise FormatError(f"bracket words start with x1, got {self.sigma}")

    @property
    def n(self) -> int:
        return len(self.sigma)

    def __str__(self) -> str:
        text = f"x{self.sigma[-1]}"
        for k in reversed(self.sigma[:-1]):
            text = f"[x{k},{text}]"
        return text

    @classmethod
    def parse(cls, text: str) -> "BracketWord":
        compact = re.sub(r"\s+", "", text)
        word = cls(tuple(int(k) for k in re.findall(r"x(\d+)", compact)))
        if str(word) != compact:
            raise FormatError(f"'{text}' is not a right-nested bracket word")
        return word


def all_bracket_words(n: int) -> List[BracketWord]:
    return [BracketWord((1,) + tail) for tail in itertools.permutations(range(2, n + 1))]


def connected_forests(n: int) -> List[LineForest]:
    return [forest for forest in all_line_forests(n) if forest.is_connected()]


def line_to_bracket(forest: LineForest) -> BracketWord:
    if not forest.is_connected():
        raise FormatError(f"[{forest}] is not a single line")
    return BracketWord(forest.lines[0])


def bracket_to_line(word: BracketWord) -> LineForest:
    return LineForest(word.n, (word.sigma,))
