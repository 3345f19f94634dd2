from math import factorial

import pytest

from app.core.errors import FormatError
from app.services.graph_core import LineForest
from app.services.lie_check import (
    BracketWord,
    all_bracket_words,
    bracket_to_line,
    classical_dimension,
    connected_forests,
    line_to_bracket,
)


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 1), (3, 2), (4, 6)])
def test_classical_dimension_matches_lie(n, expected):
    """Test dim P^cl(n) = (n-1)! for the trivial module"""
    assert classical_dimension(n) == expected


def test_classical_dimension_rejects_zero():
    with pytest.raises(ValueError):
        classical_dimension(0)


def test_bracket_word_text():
    """Test right-nested bracket words"""
    assert str(BracketWord((1, 2, 3))) == "[x1,[x2,x3]]"
    assert str(BracketWord((1, 3, 2))) == "[x1,[x3,x2]]"
    assert str(BracketWord((1,))) == "x1"
    assert BracketWord.parse("[x1, [x3, x2]]") == BracketWord((1, 3, 2))


@pytest.mark.parametrize("text", ["[[x1,x2],x3]", "[x2,x1]", "[x1,x1]"])
def test_bracket_word_parse_rejects(text):
    with pytest.raises(FormatError):
        BracketWord.parse(text)


def test_bracket_word_must_start_with_x1():
    with pytest.raises(FormatError):
        BracketWord((2, 1))


def test_line_bracket_bijection():
    """Test lines 1>s2>...>sn against bracket words"""
    word = line_to_bracket(LineForest.parse("1>3>2"))
    assert str(word) == "[x1,[x3,x2]]"
    assert bracket_to_line(word) == LineForest.parse("1>3>2")
    with pytest.raises(FormatError):
        line_to_bracket(LineForest.parse("1 | 2>3"))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bracket_words_cover_connected_forests(n):
    """Test that bracket words and single lines are counted by (n-1)!"""
    words = all_bracket_words(n)
    assert len(words) == factorial(n - 1)
    assert sorted(bracket_to_line(w) for w in words) == sorted(connected_forests(n))
