from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ExprSyntaxError, NonDiagonalDenominatorError, VariableRangeError
from app.services.exact_algebra import DiagRat, MPoly, VarId, VarKind
from app.services.expr_parser import infer_arity, parse_expr, parse_function, parse_line, parse_polynomial


@st.composite
def functions(draw, n=3):
    total = DiagRat.zero(n)
    for _ in range(draw(st.integers(1, 3))):
        term = DiagRat.constant(Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 2))), n)
        for i, j in ((1, 2), (1, 3), (2, 3)):
            term = term * DiagRat.diagonal(i, j, draw(st.integers(-2, 1)), n)
        k = draw(st.integers(0, n))
        if k:
            term = term * DiagRat.variable(k, n)
        total = total + term
    return total


def test_parse_diagonal_powers():
    """Test that differences may carry negative powers"""
    assert parse_function("(z1-z2)^-1") == DiagRat.diagonal(1, 2, -1, 2)
    assert parse_function("2*(z2-z1)^-2") == DiagRat.diagonal(1, 2, -2, 2) * 2
    assert parse_function("(3*z1-3*z2)^-1") == DiagRat.diagonal(1, 2, -1, 2) * Fraction(1, 3)
    assert parse_function("2^-1*z1") == DiagRat.variable(1, 1) * Fraction(1, 2)


def test_parse_uses_largest_index_unless_given():
    """Test arity inference"""
    assert infer_arity(parse_expr("z1*z3")) == 3
    assert parse_function("z1", n=3).labels == frozenset({1, 2, 3})
    value = parse_function("(z1-z2)^-2*(z1-z3)^-1")
    assert value == DiagRat.diagonal(1, 2, -2, 3) * DiagRat.diagonal(1, 3, -1, 3)


@pytest.mark.parametrize("text", ["z1^-1", "(z1+z2)^-1", "(z1-z2)^2^-1", "(z1*z2)^-1", "0^-1"])
def test_non_diagonal_denominator(text):
    """Test that only differences of two variables may be inverted"""
    with pytest.raises((NonDiagonalDenominatorError, ExprSyntaxError)):
        parse_function(text)


def test_single_variable_inverse_is_non_diagonal():
    with pytest.raises(NonDiagonalDenominatorError):
        parse_function("z1^-1")


@pytest.mark.parametrize("text,position", [("z1 + * z2", 5), ("z1 $ z2", 3), ("(z1-z2", 6), ("", 0),
                                           ("z1^1/2", 3), ("1/0", 0), ("z1 + 3/0", 5)])
def test_syntax_error_positions(text, position):
    """Test that syntax errors report where parsing stopped"""
    with pytest.raises(ExprSyntaxError) as excinfo:
        parse_function(text)
    assert excinfo.value.position == position


def test_variable_range():
    """Test variables outside 1..n or of the wrong family"""
    with pytest.raises(VariableRangeError):
        parse_function("z3", n=2)
    with pytest.raises(VariableRangeError):
        parse_function("w1", n=1)
    with pytest.raises(VariableRangeError):
        parse_polynomial("L1*l2")


def test_parse_polynomial():
    """Test Lambda polynomials"""
    L1, L2 = MPoly.var(VarId(VarKind.BIGLAMBDA, 1)), MPoly.var(VarId(VarKind.BIGLAMBDA, 2))
    assert parse_polynomial("L1^2*L2 + 3") == L1 ** 2 * L2 + 3
    assert parse_polynomial("-1/2*L1") == L1 * Fraction(-1, 2)
    with pytest.raises(NonDiagonalDenominatorError):
        parse_polynomial("(L1-L2)^-1")


def test_parse_line():
    """Test the i1>i2>... syntax"""
    assert parse_line("1>3>2") == [1, 3, 2]
    assert parse_line(" 4 ") == [4]
    with pytest.raises(ExprSyntaxError):
        parse_line("1>1")
    with pytest.raises(ExprSyntaxError):
        parse_line("1>x")


@given(functions())
def test_text_round_trip(f):
    """Test that printed functions parse back to themselves"""
    assert parse_function(str(f), n=3) == f
