"""Parser, differentiation and evaluation tests.

Derivative values are frozen from an independent finite-difference oracle
(5-point central differences), recomputed here so the oracle stays in view.
"""

import cmath
import math

import numpy as np
import pytest

from pdmsusy.expr import (Add, Const, Func, Param, ParamEnv, ParseError,
                          PoleError, Sub, UnboundParameterError, Var,
                          differentiate, evaluate, parse)


def fd_derivative(f, x, h=1e-5):
    """5-point central difference; the independent oracle for first
    derivatives."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def fd_second(f, x, h=1e-4):
    # h balances the O(h^2) truncation against the eps/h^2 roundoff of the
    # 3-point second difference; 1e-5 would be roundoff-dominated
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_worked_superpotential_structure():
    e = parse("exp(i*alpha*x) - sin(x)")
    assert isinstance(e, Sub)
    assert isinstance(e.left, Func) and e.left.name == "exp"
    assert isinstance(e.right, Func) and e.right.name == "sin"


def test_parse_variable_identity():
    assert parse("x") == Var()


def test_parse_sec_square_folds_to_product():
    assert parse("sec(x)^2/4") == parse("(sec(x)*sec(x))/4")


def test_parse_numbers_and_constants():
    assert parse("2.5").value == 2.5
    assert parse("1e-3").value == 1e-3
    assert parse("pi").value == math.pi
    assert parse("i").value == 1j


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse("-x^2"), 3.0) == -9.0
    assert evaluate(parse("x^-2"), 2.0) == 0.25
    # right associativity
    assert evaluate(parse("2^3^2"), 0.0) == 512.0


@pytest.mark.parametrize("source", [
    "exp(i*alpha*x)-sin(x)",
    "1/4*sec(x)^2",
    "x^2+i*x",
    "-x^3 + 2*(x - 1/(1+x^2))",
    "sqrt(1+x^2)*tanh(0.5*x)",
    "a*cos(2*x) - i*b*sinh(x)/(1+x^2)",
    "2*i*x - (3.5e-2 + x)^3",
    "log(2+cos(x))^2",
])
def test_print_parse_round_trip(source):
    tree = parse(source)
    assert parse(str(tree)) == tree


def test_print_parse_round_trip_random_trees():
    from pdmsusy.expr import (add, sub, mul, div, pow_, neg, func, Const,
                              Param, Var, FUNCTIONS)
    rng = np.random.default_rng(13)

    def random_tree(depth):
        if depth == 0:
            pick = rng.integers(0, 5)
            if pick == 0:
                return Var()
            if pick == 1:
                return Param("alpha")
            if pick == 2:
                return Const(float(np.round(rng.uniform(-3, 3), 3)))
            if pick == 3:
                return Const(complex(0.0, float(np.round(rng.uniform(-3, 3), 3))))
            return Const(complex(float(np.round(rng.uniform(-2, 2), 2)),
                                 float(np.round(rng.uniform(-2, 2), 2))))
        op = rng.integers(0, 7)
        a = random_tree(depth - 1)
        b = random_tree(depth - 1)
        if op == 0:
            return add(a, b)
        if op == 1:
            return sub(a, b)
        if op == 2:
            return mul(a, b)
        if op == 3:
            return div(a, b)
        if op == 4:
            return pow_(a, Const(float(rng.integers(0, 4))))
        if op == 5:
            return neg(a)
        return func(FUNCTIONS[int(rng.integers(0, len(FUNCTIONS)))], a)

    for _ in range(300):
        tree = random_tree(int(rng.integers(1, 5)))
        assert parse(str(tree)) == tree, str(tree)


def test_parse_errors_carry_offsets():
    with pytest.raises(ParseError) as err:
        parse("1 + $")
    assert err.value.offset == 4
    with pytest.raises(ParseError, match="unknown function 'sech'"):
        parse("sech(x)")
    with pytest.raises(ParseError, match="expected"):
        parse("(1 + x")
    with pytest.raises(ParseError):
        parse("1 + x)")
    with pytest.raises(ParseError):
        parse("sin()")


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def test_derivative_of_constant_is_zero():
    assert differentiate(parse("3.7")) == Const(0.0)
    assert differentiate(parse("alpha")) == Const(0.0)


def test_chain_rule_exponential():
    d = differentiate(parse("exp(i*alpha*x)"))
    env = ParamEnv(alpha=1.3)
    for x in (-0.7, 0.0, 0.4, 2.1):
        expected = 1.3j * cmath.exp(1.3j * x)
        assert abs(evaluate(d, x, env) - expected) < 1e-14


def test_second_derivative_of_sec_matches_fd_oracle():
    d2 = differentiate(parse("sec(x)"), 2)
    x = math.pi / 4
    oracle = fd_second(lambda t: 1 / math.cos(t), x).real
    value = evaluate(d2, x)
    assert abs(value - oracle) < 1e-6
    assert abs(value - 3 * math.sqrt(2)) < 1e-12   # 4.242640687...


def test_derivative_order_must_be_positive():
    with pytest.raises(Exception):
        differentiate(parse("x"), 0)


def test_linearity_of_differentiation():
    rng = np.random.default_rng(7)
    f = parse("exp(i*x)*cos(2*x)")
    g = parse("x^3/(1+x^2) + i*sinh(0.3*x)")
    a, b = 1.7 - 0.4j, -0.9 + 2.2j
    combo = Const(a) * f + Const(b) * g
    d_combo = differentiate(combo)
    d_split = Const(a) * differentiate(f) + Const(b) * differentiate(g)
    for x in rng.uniform(-2.0, 2.0, size=100):
        lhs = evaluate(d_combo, float(x))
        rhs = evaluate(d_split, float(x))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@pytest.mark.parametrize("source", [
    "sec(x)*tan(0.4*x)",
    "sqrt(1+x^2)",
    "log(2+cos(x))",
    "exp(i*x) - sin(x)",
    "tanh(x)*cosh(0.5*x)",
    "1/(1+x^2)^2",
    "x^2.5",
])
def test_symbolic_derivative_matches_fd(source):
    tree = parse(source)
    d = differentiate(tree)
    for x in (0.3, 0.9, 1.3):
        oracle = fd_derivative(lambda t: evaluate(tree, t), x)
        value = evaluate(d, x)
        assert abs(value - oracle) <= 1e-6 * max(1.0, abs(value))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_evaluate_basics():
    assert evaluate(parse("exp(i*alpha*x)"), 0.0, ParamEnv(alpha=1.0)) == 1.0
    assert abs(evaluate(parse("sec(x)"), math.pi / 4) - math.sqrt(2)) < 1e-15


def test_evaluate_is_deterministic():
    e = parse("exp(i*x)*sec(0.3*x) - sqrt(1+x^2)")
    a = evaluate(e, 0.7731)
    b = evaluate(e, 0.7731)
    assert a == b


def test_evaluate_pole_reports_subexpression():
    with pytest.raises(PoleError, match="sec"):
        evaluate(parse("1/4*sec(x)^2"), math.pi / 2)
    with pytest.raises(PoleError):
        evaluate(parse("1/(x-1)"), 1.0)


def test_unbound_parameter_is_an_error_not_zero():
    with pytest.raises(UnboundParameterError, match="alpha"):
        evaluate(parse("alpha*x"), 1.0)
