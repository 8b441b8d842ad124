import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowentropy.expr import BinOp, Call, ExprError, Name, Neg, Num, evaluate, format_real, parse_expr, unparse, variables


def test_precedence_and_associativity():
    assert evaluate(parse_expr("1 + 2 * 3")) == 7
    assert evaluate(parse_expr("8 / 4 / 2")) == 1
    assert evaluate(parse_expr("2 ^ 3 ^ 2")) == 512
    assert evaluate(parse_expr("-2 ^ 2")) == -4
    assert evaluate(parse_expr("2 ** -1")) == 0.5
    assert evaluate(parse_expr("(1 - 2) - 3")) == -4


def test_functions_constants_and_coordinates():
    node = parse_expr("0.1*cos(x) + exp(-y^2) * sin(pi/2) - e")
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 2.0])
    expected = 0.1 * np.cos(x) + np.exp(-(y**2)) - math.e
    assert np.allclose(evaluate(node, x=x, y=y), expected, rtol=0, atol=1e-15)
    assert variables(node) == {"x", "y"}


@pytest.mark.parametrize(
    "text, column",
    [("1 +", 4), ("tan(x)", 1), ("x $ 2", 3), ("(1 + 2", 7), ("1 2", 3), ("z", 1)],
)
def test_errors_report_column(text, column):
    with pytest.raises(ExprError) as info:
        parse_expr(text)
    assert info.value.column == column


def test_undefined_variable_errors():
    with pytest.raises(ValueError):
        evaluate(parse_expr("y"), x=1.0)


def test_format_real():
    assert format_real(1.0) == "1"
    assert format_real(0.1) == "0.1"
    assert format_real(-2.5e-300) == "-2.5e-300"
    with pytest.raises(ValueError):
        format_real(float("nan"))


numbers = st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num)
leaves = st.one_of(numbers, st.sampled_from([Name("x"), Name("y"), Name("pi"), Name("e")]))
trees = st.recursive(
    leaves,
    lambda sub: st.one_of(
        st.builds(Neg, sub),
        st.builds(BinOp, st.sampled_from("+-*/^"), sub, sub),
        st.builds(Call, st.sampled_from(["sin", "cos", "exp"]), sub),
    ),
    max_leaves=12,
)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_unparse_round_trip(node):
    text = unparse(node)
    assert parse_expr(text) == node
    assert unparse(parse_expr(text)) == text
