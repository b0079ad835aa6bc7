import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import ALPHA_SQ, FIBONACCI, random_regex
from drx import syntax as sx
from drx.errors import RegexSyntaxError


def test_star_is_sugar_for_epsilon_or_plus():
    assert sx.parse("a*") == sx.Disjunction(sx.Epsilon(), sx.Plus(sx.Terminal("a")))
    assert sx.is_star(sx.parse("a*"))
    assert not sx.is_star(sx.parse("(()|a)+"))


def test_binding_and_reference():
    ast = sx.parse("{x:a|b}&x")
    assert ast == sx.Concat(sx.Binding("x", sx.Disjunction(sx.Terminal("a"), sx.Terminal("b"))),
                            sx.Reference("x"))


def test_empty_and_epsilon():
    assert sx.parse("#") == sx.Empty()
    assert sx.parse("()") == sx.Epsilon()


def test_whitespace_is_ignored():
    assert sx.parse(" a  b ") == sx.parse("ab")


def test_multi_character_names():
    ast = sx.parse(FIBONACCI)
    assert sx.variable_order(ast) == ("x0", "x1", "x2", "x3")
    assert sx.terminals(ast) == ("a", "b")


def test_variables_and_occurrences():
    ast = sx.parse(ALPHA_SQ)
    assert sx.variables(ast) == frozenset({"x", "y"})
    assert sx.occurrence_count(ast) == 3


@pytest.mark.parametrize("text, position", [
    ("&", 1),
    ("a|", 2),
    ("(a", 2),
    ("ab)", 2),
    ("a#", 1),
    ("{x:{x:a}}", 0),
    ("{x:&x}", 0),
    ("{:a}", 1),
])
def test_syntax_errors_carry_a_position(text, position):
    with pytest.raises(RegexSyntaxError) as info:
        sx.parse(text)
    assert info.value.position == position


@pytest.mark.parametrize("text, expected", [
    ("a**", True),
    ("{x:a}&x(ab)*", True),
    ("{x:a}(&x)*", False),
    ("({x:a})*", False),
    ("(a&x)+", False),
])
def test_vstar_free(text, expected):
    assert sx.is_vstar_free(sx.parse(text)) is expected


def test_power_and_word():
    assert sx.to_text(sx.power(sx.Terminal("a"), 3)) == "aaa"
    assert sx.power(sx.Terminal("a"), 0) == sx.Epsilon()
    assert sx.word("ab") == sx.Concat(sx.Terminal("a"), sx.Terminal("b"))


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=12))
def test_printing_then_parsing_is_identity(seed, budget):
    ast = random_regex(random.Random(seed), budget)
    assert sx.parse(sx.to_text(ast)) == ast
