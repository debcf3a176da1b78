import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucp2d.fields import (
    EvalDomainError,
    ParseError,
    ScalarField,
    differentiate,
    evaluate,
    parse,
)


def test_parse_zero_constant():
    f = parse("0")
    assert evaluate(f, 1.7, -2.3) == 0.0


def test_parse_exp_identity():
    f = parse("exp(x)")
    assert evaluate(f, 1.0, 0.0) == pytest.approx(math.e, rel=1e-15)


def test_parse_power_product():
    assert evaluate(parse("x*y^2"), 3.0, 2.0) == 12.0


def test_evaluate_examples():
    assert evaluate(parse("exp(x)+exp(y)"), 0.0, 0.0) == 2.0
    assert evaluate(parse("x*y"), 0.5, 0.5) == 0.25
    assert evaluate(parse("(2+4)/2"), 9.9, -1.0) == 3.0


def test_evaluate_deterministic_bits():
    f = parse("sin(x)*exp(y) - x/(y+2)")
    a = evaluate(f, 0.3141, 2.718)
    b = evaluate(f, 0.3141, 2.718)
    assert a == b


def test_precedence_and_unary_minus():
    assert evaluate(parse("-x^2"), 3.0, 0.0) == -9.0
    assert evaluate(parse("2^-2"), 0.0, 0.0) == 0.25
    assert evaluate(parse("2^3^2"), 0.0, 0.0) == 512.0  # right associative
    assert evaluate(parse("1 - 2 - 3"), 0.0, 0.0) == -4.0
    assert evaluate(parse("6/3/2"), 0.0, 0.0) == 1.0
    assert evaluate(parse("pi"), 0.0, 0.0) == math.pi


def test_derivative_examples():
    assert evaluate(differentiate(parse("x*y^2"), "x"), 3.0, 2.0) == 4.0
    assert evaluate(differentiate(parse("exp(y)"), "y"), 0.7, 0.0) == 1.0
    assert evaluate(differentiate(parse("exp(-x)"), "x"), 0.0, 0.4) == -1.0


def test_parse_error_offsets():
    with pytest.raises(ParseError) as err:
        parse("x + * y")
    assert err.value.offset == 4
    with pytest.raises(ParseError) as err:
        parse("x + zz")
    assert err.value.offset == 4
    with pytest.raises(ParseError):
        parse("exp(x, y)")  # arity
    with pytest.raises(ParseError):
        parse("(x + y")
    with pytest.raises(ParseError):
        parse("")


def test_domain_errors_are_raised_not_nan():
    with pytest.raises(EvalDomainError):
        evaluate(parse("1/x"), 0.0, 1.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("log(x)"), -1.0, 0.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("sqrt(x)"), -0.5, 0.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("x^0.5"), -2.0, 0.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("exp(x)"), 1e6, 0.0)  # overflow -> inf


def test_parse_time_fold_keeps_domain_errors_lazy():
    f = parse("1/0 + x")  # must not raise at parse time
    with pytest.raises(EvalDomainError):
        evaluate(f, 1.0, 1.0)


def test_field_arithmetic_and_constant():
    f = parse("x") * parse("y") + 2.0
    assert evaluate(f, 3.0, 4.0) == 14.0
    g = ScalarField.constant(5.0) / parse("x")
    assert evaluate(g, 2.0, 0.0) == 2.5
    assert (-parse("x"))(2.0, 0.0) == -2.0


def test_vectorised_evaluation_matches_scalar():
    f = parse("exp(x)*cos(y) + x/(2+y)")
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(-0.5, 0.5, 7)
    grid = evaluate(f, xs[:, None], ys[None, :])
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            assert grid[i, j] == evaluate(f, float(xv), float(yv))


# -- random well-formed expressions ------------------------------------

_leaf = st.sampled_from(["x", "y", "pi", "1", "2", "0.5", "3.25"])


def _expr_strategy(depth=3):
    if depth == 0:
        return _leaf
    sub = _expr_strategy(depth - 1)
    return st.one_of(
        _leaf,
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"
        ),
        st.tuples(sub).map(lambda t: f"(-{t[0]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), sub).map(
            lambda t: f"{t[0]}({t[1]})"
        ),
        st.tuples(sub, st.sampled_from(["2", "3"])).map(lambda t: f"({t[0]})^{t[1]}"),
    )


@given(_expr_strategy())
@settings(max_examples=200, deadline=None)
def test_parser_totality_on_generated_expressions(text):
    f = parse(text)
    # evaluation must produce a finite value or a reported domain error
    # (nested exp can overflow), never a silent NaN/Inf
    try:
        v = evaluate(f, 0.37, -0.21)
    except EvalDomainError:
        return
    assert math.isfinite(v)


@given(_expr_strategy(), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
@settings(max_examples=200, deadline=None)
def test_mixed_partials_commute(text, x, y):
    f = parse(text)
    fxy = differentiate(differentiate(f, "x"), "y")
    fyx = differentiate(differentiate(f, "y"), "x")
    try:
        a = evaluate(fxy, x, y)
        b = evaluate(fyx, x, y)
    except EvalDomainError:
        return
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=100, deadline=None)
def test_derivative_linearity(alpha, beta):
    f = parse("sin(x)*y + x^3")
    g = parse("exp(x - y) + y^2")
    combo = alpha * f + beta * g
    rng = np.random.default_rng(42)
    pts = rng.uniform(-1.0, 1.0, size=(100, 2))
    for var in ("x", "y"):
        d_combo = differentiate(combo, var)
        df, dg = differentiate(f, var), differentiate(g, var)
        for px, py in pts[:10]:
            lhs = evaluate(d_combo, px, py)
            rhs = alpha * evaluate(df, px, py) + beta * evaluate(dg, px, py)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


def test_derivative_matches_central_difference():
    exprs = ["exp(x)*sin(y)", "x^3 - 2*x*y^2", "1/(2 + x + y)", "sqrt(2 + x)", "log(2 + y)"]
    rng = np.random.default_rng(7)
    h = 1e-6
    for text in exprs:
        f = parse(text)
        for var in ("x", "y"):
            df = differentiate(f, var)
            for _ in range(20):
                x, y = rng.uniform(-0.9, 0.9, size=2)
                if var == "x":
                    fd = (evaluate(f, x + h, y) - evaluate(f, x - h, y)) / (2 * h)
                else:
                    fd = (evaluate(f, x, y + h) - evaluate(f, x, y - h)) / (2 * h)
                exact = evaluate(df, x, y)
                assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_source_round_trip():
    f = parse("exp(x)*y - 3/(y + 2)")
    g = parse(differentiate(f, "y").source)
    for x, y in [(0.1, 0.2), (-0.5, 1.3)]:
        assert evaluate(g, x, y) == pytest.approx(
            evaluate(differentiate(f, "y"), x, y), rel=1e-15
        )
