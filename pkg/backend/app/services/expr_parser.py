"""Text syntax for diagonal-localized functions and Lambda polynomials.

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' ['-'] digits)?
    atom   := rational | var | '(' expr ')'
    var    := ('z' | 'w' | 'l' | 'L') digits

Negative powers are only accepted on (scalar multiples of) differences v_i - v_j and on
nonzero constants.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Union

from ..core.errors import ExprSyntaxError, NonDiagonalDenominatorError, VariableRangeError
from .exact_algebra import VAR_PREFIX, DiagRat, MPoly, VarKind

logger = logging.getLogger(__name__)

_PREFIX_KIND = {prefix: kind for kind, prefix in VAR_PREFIX.items() if kind in
                (VarKind.Z, VarKind.W, VarKind.LAMBDA, VarKind.BIGLAMBDA)}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[zwlL]\d+)|(?P<op>[-+*^()]))")


class Token(NamedTuple):
    kind: str
    text: str
    position: int


# AST nodes

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    kind: VarKind
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exponent: int


ExprAst = Union[Num, Var, Neg, BinOp, Pow]


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if not match:
            offending = len(text) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[offending]!r}", offending)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


class ExprParser:
    """Recursive-descent parser over the token list"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def _peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _position(self) -> int:
        token = self._peek()
        return token.position if token else len(self.text)

    def _accept(self, text: str) -> bool:
        token = self._peek()
        if token and token.kind == "op" and token.text == text:
            self.pos += 1
            return True
        return False

    def _expect(self, text: str):
        if not self._accept(text):
            raise ExprSyntaxError(f"expected '{text}'", self._position())

    def parse(self) -> ExprAst:
        if not self.tokens:
            raise ExprSyntaxError("empty expression", 0)
        node = self.expr()
        if self._peek() is not None:
            raise ExprSyntaxError(f"unexpected '{self._peek().text}'", self._position())
        return node

    def expr(self) -> ExprAst:
        node = Neg(self.term()) if self._accept("-") else self.term()
        while True:
            if self._accept("+"):
                node = BinOp("+", node, self.term())
            elif self._accept("-"):
                node = BinOp("-", node, self.term())
            else:
                return node

    def term(self) -> ExprAst:
        node = self.factor()
        while self._accept("*"):
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> ExprAst:
        base = self.atom()
        if not self._accept("^"):
            return base
        sign = -1 if self._accept("-") else 1
        token = self._peek()
        if token is None or token.kind != "num" or "/" in token.text:
            raise ExprSyntaxError("exponent must be an integer", self._position())
        self.pos += 1
        return Pow(base, sign * int(token.text))

    def atom(self) -> ExprAst:
        token = self._peek()
        if token is None:
            raise ExprSyntaxError("unexpected end of expression", len(self.text))
        if token.kind == "num":
            _, slash, denominator = token.text.partition("/")
            if slash and int(denominator) == 0:
                raise ExprSyntaxError("zero denominator", token.position)
            self.pos += 1
            return Num(Fraction(token.text))
        if token.kind == "var":
            self.pos += 1
            return Var(_PREFIX_KIND[token.text[0]], int(token.text[1:]))
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        raise ExprSyntaxError(f"unexpected '{token.text}'", token.position)


def parse_expr(text: str) -> ExprAst:
    return ExprParser(text).parse()


def variables(node: ExprAst) -> List[Var]:
    if isinstance(node, Var):
        return [node]
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) + variables(node.right)
    if isinstance(node, Pow):
        return variables(node.base)
    return []


def infer_arity(node: ExprAst) -> int:
    return max((var.index for var in variables(node)), default=0)


def _check_var(var: Var, n: int, kind: VarKind):
    if var.kind != kind:
        raise VariableRangeError(f"{VAR_PREFIX[var.kind]}{var.index} is not a {VAR_PREFIX[kind]}-variable")
    if not 1 <= var.index <= n:
        raise VariableRangeError(f"{VAR_PREFIX[kind]}{var.index} outside 1..{n}")


def _diagonal_of(value: DiagRat):
    """(c, i, j) when value = c * (v_i - v_j), else None"""
    if not value.is_polynomial() or len(value.numerator.terms) != 2:
        return None
    items = sorted(value.numerator.terms.items())
    (m1, c1), (m2, c2) = items
    if c1 != -c2 or len(m1) != 1 or len(m2) != 1 or m1[0][1] != 1 or m2[0][1] != 1:
        return None
    return c1, m1[0][0].index, m2[0][0].index


def elaborate(node: ExprAst, n: Optional[int] = None, kind: VarKind = VarKind.Z) -> DiagRat:
    """Evaluate to a normalized DiagRat on labels 1..n (n defaults to the largest index used)"""
    n = infer_arity(node) if n is None else n
    return _elaborate(node, n, kind)


def _elaborate(node: ExprAst, n: int, kind: VarKind) -> DiagRat:
    if isinstance(node, Num):
        return DiagRat.constant(node.value, n, kind)
    if isinstance(node, Var):
        _check_var(node, n, kind)
        return DiagRat.variable(node.index, n, kind)
    if isinstance(node, Neg):
        return -_elaborate(node.operand, n, kind)
    if isinstance(node, BinOp):
        left, right = _elaborate(node.left, n, kind), _elaborate(node.right, n, kind)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        return left * right
    base = _elaborate(node.base, n, kind)
    if node.exponent >= 0:
        return base ** node.exponent
    if base.is_constant() and not base.is_zero():
        return DiagRat.constant(base.constant_value() ** node.exponent, n, kind)
    diagonal = _diagonal_of(base)
    if diagonal is None:
        raise NonDiagonalDenominatorError(f"negative power of {base}, which is not a difference of two variables")
    c, i, j = diagonal
    return DiagRat.diagonal(i, j, node.exponent, n, kind).scale(c ** node.exponent)


def elaborate_poly(node: ExprAst, nvars: Optional[int] = None, kind: VarKind = VarKind.BIGLAMBDA) -> MPoly:
    """Evaluate to a polynomial; only constants may carry negative powers"""
    nvars = infer_arity(node) if nvars is None else nvars
    value = elaborate(node, nvars, kind)
    if not value.is_polynomial():
        raise NonDiagonalDenominatorError(f"{value} is not a polynomial")
    return value.numerator


def parse_function(text: str, n: Optional[int] = None, kind: VarKind = VarKind.Z) -> DiagRat:
    return elaborate(parse_expr(text), n, kind)


def parse_polynomial(text: str, nvars: Optional[int] = None, kind: VarKind = VarKind.BIGLAMBDA) -> MPoly:
    return elaborate_poly(parse_expr(text), nvars, kind)


def parse_line(text: str) -> List[int]:
    """``i1>i2>...`` as a list of vertices"""
    try:
        line = [int(v) for v in text.strip().split(">")]
    except ValueError:
        raise ExprSyntaxError(f"malformed line {text!r}", 0)
    if len(set(line)) != len(line):
        raise ExprSyntaxError(f"line {text!r} repeats a vertex", 0)
    return line
