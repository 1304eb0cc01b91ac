import math

import pytest

from fairdyn import (
    ArityError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    appendix_c_dynamics,
    compile_expression,
)

APPENDIX_F1 = "0.5*(b1 + b1/5)/1.4 + exp(-0.000000001*(b0+b1))*sin(18*(b0+b1)) + 0.1"
APPENDIX_F0 = "(b1 + b1/5)/1.2 + 0.01"


def test_constants_and_variables():
    assert compile_expression("0.8")(0.3, 0.7) == 0.8
    assert compile_expression("b0")(0.3, 0.7) == 0.3
    assert compile_expression("b1")(0.3, 0.7) == 0.7
    assert compile_expression("1e-3")(0, 0) == 1e-3
    assert compile_expression(".5")(0, 0) == 0.5


def test_arithmetic_and_precedence():
    f = compile_expression("1 + 2*b0 - b1/4")
    assert f(0.5, 2.0) == pytest.approx(1 + 1.0 - 0.5)
    assert compile_expression("2^3^2")(0, 0) == 512  # right associative
    assert compile_expression("-2^2")(0, 0) == -4  # unary minus binds looser
    assert compile_expression("(1+2)*3")(0, 0) == 9


def test_functions():
    assert compile_expression("sin(0)")(0, 0) == 0.0
    assert compile_expression("cos(0)")(0, 0) == 1.0
    assert compile_expression("exp(1)")(0, 0) == pytest.approx(math.e)
    assert compile_expression("abs(-3)")(0, 0) == 3.0
    assert compile_expression("min(b0, b1)")(0.2, 0.9) == 0.2
    assert compile_expression("max(b0, 0.5)")(0.2, 0.9) == 0.5


def test_appendix_formulas_match_builtin():
    dyn = appendix_c_dynamics()
    f0 = compile_expression(APPENDIX_F0)
    f1 = compile_expression(APPENDIX_F1)
    n = 10_000
    for i in range(n):
        x = (i * 0.7548776662466927) % 1.0
        y = (i * 0.5698402909980532) % 1.0
        assert abs(f0(x, y) - dyn.f0(x, y)) <= 1e-12
        assert abs(f1(x, y) - dyn.f1(x, y)) <= 1e-12


def test_simple_constant_pair_matches_builtin():
    from fairdyn import constant_dynamics

    dyn = constant_dynamics(0.2, 0.8)
    f0 = compile_expression("0.2")
    f1 = compile_expression("0.8")
    for x, y in [(0, 0), (0.3, 0.4), (1, 1)]:
        assert f0(x, y) == dyn.f0(x, y)
        assert f1(x, y) == dyn.f1(x, y)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as exc:
        compile_expression("b2 + 1")
    assert exc.value.position == 0
    with pytest.raises(UnknownIdentifierError):
        compile_expression("sqrt(b0)")


def test_syntax_errors_carry_position():
    with pytest.raises(ExpressionSyntaxError) as exc:
        compile_expression("1 + * 2")
    assert exc.value.position == 4
    with pytest.raises(ExpressionSyntaxError):
        compile_expression("(b0 + 1")
    with pytest.raises(ExpressionSyntaxError):
        compile_expression("b0 b1")
    with pytest.raises(ExpressionSyntaxError):
        compile_expression("1 @ 2")


def test_arity_errors():
    with pytest.raises(ArityError):
        compile_expression("sin(b0, b1)")
    with pytest.raises(ArityError):
        compile_expression("min(b0)")


def test_evaluation_is_reproducible():
    f = compile_expression(APPENDIX_F1)
    vals = {f(0.123456, 0.654321) for _ in range(100)}
    assert len(vals) == 1
