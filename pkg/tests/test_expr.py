import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pseudospec import expr as ex
from pseudospec.errors import DomainError, ExprSyntaxError, UnknownFunction


# --- parsing ---------------------------------------------------------------


def test_parse_single_function():
    assert ex.parse("tanh(x)") == ex.Unary("tanh", ex.X)


def test_parse_gaussian_tree_shape():
    e = ex.parse("exp(-x^2)")
    assert e == ex.Unary("exp", ex.Unary("neg", ex.Pow(ex.X, 2.0)))


def test_power_binds_tighter_than_unary_minus():
    assert ex.evaluate(ex.parse("-x^2"), 3.0) == -9.0
    assert ex.evaluate(ex.parse("(-x)^2"), 3.0) == 9.0


def test_power_is_right_associative():
    assert ex.evaluate(ex.parse("2^3^2"), 0.0) == 512.0


def test_precedence_and_whitespace():
    a = ex.parse("1+2*x - x/4")
    b = ex.parse("  1 +  2 * x-x / 4 ")
    xs = np.linspace(-3, 3, 7)
    np.testing.assert_array_equal(ex.evaluate(a, xs), ex.evaluate(b, xs))
    np.testing.assert_allclose(ex.evaluate(a, xs), 1 + 1.75 * xs)


def test_scientific_literals():
    assert ex.evaluate(ex.parse("1.5e-3*x"), 2.0) == pytest.approx(3e-3)


def test_unbalanced_parenthesis_offset():
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse("sinh(x")
    assert info.value.offset == 7
    assert "')'" in info.value.msg


@pytest.mark.parametrize(
    "source, offset",
    [("", 1), ("2*", 3), ("x)", 2), ("x + * 3", 5), ("3 x", 3)],
)
def test_syntax_error_offsets(source, offset):
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse(source)
    assert info.value.offset == offset


def test_unknown_function():
    with pytest.raises(UnknownFunction) as info:
        ex.parse("1 + foo(x)")
    assert info.value.offset == 5
    # also a SyntaxError, so generic handlers catch it
    assert isinstance(info.value, SyntaxError)


def test_variable_exponent_rejected():
    with pytest.raises(ExprSyntaxError, match="constant"):
        ex.parse("x^x")


def test_constant_exponent_expression_is_folded():
    e = ex.parse("x^(1/2)")
    assert isinstance(e, ex.Pow) and e.exponent == 0.5


# --- evaluation ------------------------------------------------------------


def test_evaluate_examples():
    assert ex.evaluate(ex.parse("exp(-x^2)"), 0.0) == 1.0
    assert ex.evaluate(ex.parse("tanh(x)"), 1e9) == 1.0


def test_evaluate_scalar_returns_float():
    v = ex.evaluate(ex.parse("sin(x)"), 1.0)
    assert isinstance(v, float)


@pytest.mark.parametrize("source, x", [("1/x", 0.0), ("ln(x)", 0.0), ("ln(x)", -1.0),
                                        ("sqrt(x)", -1e-3), ("x^(-1)", 0.0), ("x^0.5", -2.0)])
def test_domain_errors(source, x):
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse(source), x)


def test_overflow_is_flagged():
    with pytest.raises(OverflowError):
        ex.evaluate(ex.parse("exp(2*x^2)"), 30.0)


def test_vector_evaluation_flags_any_bad_point():
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse("1/x"), np.array([-1.0, 0.0, 1.0]))


# --- differentiation -------------------------------------------------------


def test_sinh_derivative_is_cosh():
    d = ex.differentiate(ex.parse("sinh(x)"))
    assert d == ex.Unary("cosh", ex.X)


def test_tanh_derivative_against_central_difference():
    d = ex.differentiate(ex.parse("tanh(x)"))
    h = 1e-5
    fd = (math.tanh(0.7 + h) - math.tanh(0.7 - h)) / (2 * h)
    assert abs(ex.evaluate(d, 0.7) - fd) <= 1e-9
    assert ex.evaluate(d, 0.7) == pytest.approx(1 - math.tanh(0.7) ** 2, abs=1e-15)


def test_constant_derivative_is_zero():
    assert ex.differentiate(ex.Const(3.5)) == ex.Const(0.0)


def test_third_derivative_of_gaussian():
    g3 = ex.derivatives(ex.parse("exp(-x^2)"), 3)[3]
    xs = np.linspace(-2, 2, 9)
    expected = (-8 * xs**3 + 12 * xs) * np.exp(-(xs**2))
    np.testing.assert_allclose(ex.evaluate(g3, xs), expected, atol=1e-13)


def test_taylor_coefficients_of_exp():
    c = ex.taylor(ex.parse("exp(x)"), 0.0, 6)
    np.testing.assert_allclose(c, [1 / math.factorial(k) for k in range(7)], rtol=1e-15)


@pytest.mark.parametrize("source", ["tanh(x)", "sqrt(2+sin(x))", "ln(cosh(x))*x",
                                    "(1+x^2)^(-1.5)", "exp(-x^2)/(2+cos(x))"])
def test_taylor_matches_symbolic_derivatives(source):
    e = ex.parse(source)
    ds = ex.derivatives(e, 3)
    for x0 in (-0.8, 0.3, 1.1):
        c = ex.taylor(e, x0, 3)
        for k in range(4):
            assert c[k] * math.factorial(k) == pytest.approx(ex.evaluate(ds[k], x0),
                                                             rel=1e-11, abs=1e-12)


# --- random expression trees -----------------------------------------------


def _trees(depth):
    leaves = st.one_of(
        st.just(ex.X),
        st.floats(-3, 3, allow_nan=False).map(lambda c: ex.Const(round(c, 3))),
    )
    if depth == 0:
        return leaves
    sub = _trees(depth - 1)
    return st.one_of(
        leaves,
        st.tuples(st.sampled_from(ex.FUNCTIONS + ("neg",)), sub).map(lambda t: ex.Unary(*t)),
        st.tuples(st.sampled_from(sorted(ex.BINARY_OPS)), sub, sub).map(lambda t: ex.Binary(*t)),
        st.tuples(sub, st.sampled_from([2.0, 3.0, -1.0, 0.5])).map(lambda t: ex.Pow(*t)),
    )


TREES = _trees(4)
POINTS = st.floats(-2.0, 2.0, allow_nan=False)


def _safe(e, xs):
    """Values at xs, or None when e is undefined or badly scaled nearby."""
    try:
        v = ex.evaluate(e, xs)
    except (DomainError, OverflowError):
        return None
    return v if np.all(np.abs(v) < 1e6) else None


@settings(max_examples=200, deadline=None)
@given(TREES, st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=100))
def test_print_parse_round_trip(e, xs):
    xs = np.array(xs)
    back = ex.parse(str(e))
    a = _safe(e, xs)
    assume(a is not None)
    np.testing.assert_allclose(ex.evaluate(back, xs), a, rtol=1e-12, atol=1e-300)


@settings(max_examples=300, deadline=None)
@given(TREES, POINTS)
def test_derivative_matches_central_difference_at_order_two(e, x):
    d = ex.differentiate(e)
    errs = []
    for h in (1e-3, 1e-4):
        vals = _safe(e, np.array([x - 2 * h, x - h, x, x + h, x + 2 * h]))
        dv = _safe(d, np.array([x]))
        assume(vals is not None and dv is not None)
        fd = (vals[3] - vals[1]) / (2 * h)
        errs.append(abs(dv[0] - fd))
    # third derivative bounds the O(h^2) constant; estimate it from the symbolic tree
    d3 = _safe(ex.derivatives(e, 3)[3], np.linspace(x - 1e-3, x + 1e-3, 5))
    assume(d3 is not None)
    C = np.abs(d3).max() / 6 + 1.0
    scale = max(1.0, float(np.abs(vals).max()))
    for h, err in zip((1e-3, 1e-4), errs):
        # truncation C h^2 plus cancellation eps*|e|/h
        assert err <= 2 * C * h**2 + 1e-12 * scale / h


@settings(max_examples=200, deadline=None)
@given(TREES, TREES, st.floats(-4, 4, allow_nan=False), POINTS)
def test_differentiation_is_linear(e1, e2, a, x):
    lhs = ex.differentiate(ex.Const(a) * e1 + e2)
    d1, d2 = ex.differentiate(e1), ex.differentiate(e2)
    xs = np.array([x])
    vals = [_safe(t, xs) for t in (lhs, d1, d2)]
    assume(all(v is not None for v in vals))
    lhs_v, v1, v2 = (float(v[0]) for v in vals)
    tol = 1e-12 * (abs(a * v1) + abs(v2) + 1)
    assert abs(lhs_v - (a * v1 + v2)) <= tol


@settings(max_examples=100, deadline=None)
@given(TREES, POINTS)
def test_taylor_oracle_agrees_with_differentiate(e, x):
    ds = ex.derivatives(e, 3)
    vals = [_safe(t, np.array([x])) for t in ds]
    assume(all(v is not None for v in vals))
    try:
        c = ex.taylor(e, x, 3)
    except (DomainError, OverflowError):
        assume(False)
    for k in range(4):
        assert c[k] * math.factorial(k) == pytest.approx(vals[k][0], rel=1e-8, abs=1e-8)


@given(TREES)
def test_constants_stay_finite(e):
    def walk(node):
        if isinstance(node, ex.Const):
            assert math.isfinite(node.value)
        for c in node.children:
            walk(c)

    walk(ex.differentiate(ex.differentiate(e)))
