import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kahania.errors import DomainError, UnboundSymbol
from kahania.expr import (
    Add,
    ComplexInfinity,
    Exp,
    Indeterminate,
    Num,
    add,
    arccot,
    differentiate,
    ln,
    mul,
    num,
    pow_,
    simplify,
    sqrt,
    substitute,
    sym,
    symbols,
)
from kahania.normal import equivalent
from kahania.numeric import eval_numeric
from kahania.parser import parse

from .strategies import BINDING_SYMBOLS, expressions

z, a, s, l, x = symbols("z alpha sigma lambda x")


def test_add_zero_is_identity():
    assert add(x, 0) == x


def test_symbolic_base_power_becomes_exp():
    e = pow_(a, mul(s, z))
    assert isinstance(e, Exp)
    assert e.arg == mul(s, z, ln(a))


def test_exact_coefficients_combine():
    assert mul(2, num(Fraction(1, 2)), x) == x


def test_rationals_are_reduced():
    r = num(Fraction(6, -4))
    assert r.value == Fraction(-3, 2)


def test_flattening_and_order():
    e = add(add(x, z), add(1, x))
    assert isinstance(e, Add)
    assert not any(isinstance(t, Add) for t in e.args)
    assert e == add(1, z, mul(2, x))
    assert mul(z, x) == mul(x, z)


def test_pow_exponents_zero_and_one_collapse():
    assert pow_(num(2), 1) == num(2)
    assert pow_(num(3), 0) == num(1)
    assert isinstance(pow_(num(2), -1), Num)


def test_empty_add_and_mul():
    assert add() == num(0)
    assert mul() == num(1)


def test_special_atoms_absorb():
    assert add(x, Indeterminate) is Indeterminate
    assert mul(x, ComplexInfinity) is ComplexInfinity
    assert mul(ComplexInfinity, Indeterminate) is Indeterminate


def test_substitute_pole():
    G = parse("z^(alpha+1)/(alpha+1)")
    assert substitute(G, a, num(-1)) is ComplexInfinity


def test_substitute_plain():
    assert substitute(add(x, a), a, num(0)) == x


def test_substitute_opening_at_equal_exponents():
    G = parse("(1/(2*ln(alpha)))*(alpha^(2*lambda*z)/lambda + alpha^(2*sigma*z)/sigma"
              " - 4*alpha^((lambda+sigma)*z)/(lambda+sigma))")
    H = substitute(G, s, l)
    b = {"alpha": 3, "lambda": 2, "z": 1}
    # d/dz of the substituted form must vanish because the integrand is 0 at sigma=lambda
    assert abs(eval_numeric(differentiate(H, z), b)) < 1e-9


def test_derivative_power_rule():
    assert equivalent(differentiate(parse("z^(alpha+1)/(alpha+1)"), z), parse("z^alpha"))


def test_derivative_ln():
    assert differentiate(ln(z), z) == pow_(z, -1)


def test_derivative_opening():
    G = parse("(1/(2*ln(alpha)))*(alpha^(2*lambda*z)/lambda + alpha^(2*sigma*z)/sigma"
              " - 4*alpha^((lambda+sigma)*z)/(lambda+sigma))")
    f = parse("(alpha^(sigma*z) - alpha^(lambda*z))^2")
    assert equivalent(differentiate(G, z), f)


def test_eval_ln():
    assert eval_numeric(ln(z), {"z": 2}) == pytest.approx(0.6931471805599453, abs=1e-15)


def test_eval_sqrt_of_square_is_principal():
    assert eval_numeric(sqrt(pow_(z, 2)), {"z": -2}) == pytest.approx(2)


def test_eval_arccot_convention():
    assert eval_numeric(arccot(z), {"z": 1}).real == pytest.approx(math.pi / 4, abs=1e-15)
    assert eval_numeric(arccot(z), {"z": 0}).real == pytest.approx(math.pi / 2, abs=1e-15)
    assert eval_numeric(arccot(z), {"z": -1}).real == pytest.approx(-math.pi / 4, abs=1e-15)


def test_eval_errors():
    with pytest.raises(UnboundSymbol):
        eval_numeric(add(x, z), {"z": 1})
    with pytest.raises(DomainError):
        eval_numeric(pow_(z, -1), {"z": 0})


def test_linearity_of_differentiate():
    f, g = parse("sin(2*z)*z"), parse("exp(alpha*z)")
    lhs = differentiate(add(mul(3, f), mul(a, g)), z)
    rhs = add(mul(3, differentiate(f, z)), mul(a, differentiate(g, z)))
    assert simplify(lhs) == simplify(rhs)


# -- properties ---------------------------------------------------------------

def _binding(rng):
    return {n.name: complex(rng.uniform(0.3, 1.7), rng.uniform(-0.2, 0.2)) for n in BINDING_SYMBOLS}


@settings(max_examples=200, deadline=None)
@given(expressions())
def test_simplify_is_idempotent(e):
    assert simplify(simplify(e)) == simplify(e)


@settings(max_examples=100, deadline=None)
@given(expressions(), st.integers(0, 2**32))
def test_simplify_is_numerically_sound(e, seed):
    rng = random.Random(seed)
    b = _binding(rng)
    try:
        want = eval_numeric(e, b)
    except DomainError:
        return
    got = eval_numeric(simplify(e), b)
    assert abs(got - want) <= 1e-9 * (1 + abs(want))


FD_EXPRS = [
    "z^alpha", "exp(alpha*z)*sin(z)", "ln(z^2 + alpha)", "sqrt(z^2 + 1)", "arccot(alpha*z)",
    "(alpha^(sigma*z) - alpha^(lambda*z))^2", "cos(z)/(1 + z^2)", "z*ln(z*(1 - z))",
]


@pytest.mark.parametrize("text", FD_EXPRS)
def test_finite_differences(text):
    e = parse(text)
    d = differentiate(e, z)
    rng = random.Random(text)
    h = 1e-5
    for _ in range(20):
        b = {"alpha": rng.uniform(1.2, 2.0), "sigma": rng.uniform(0.3, 1.0), "lambda": rng.uniform(-1.0, -0.3),
             "z": rng.uniform(0.2, 0.8)}
        want = eval_numeric(d, b)
        up = eval_numeric(e, {**b, "z": b["z"] + h})
        down = eval_numeric(e, {**b, "z": b["z"] - h})
        fd = (up - down) / (2 * h)
        assert abs(fd - want) <= 1e-5 * (1 + abs(want))


def test_principal_log_branch():
    assert eval_numeric(ln(z), {"z": -1}) == pytest.approx(cmath.log(-1))


def test_sum_factors_are_primitive():
    y = sym("y")
    assert mul(-1, add(Fraction(1, 4), x, z), ln(a)) == mul(add(Fraction(-1, 4), mul(-1, x), mul(-1, z)), ln(a))
    assert mul(add(mul(2, x), 2), y) == mul(2, add(x, 1), y)
    assert mul(add(1, mul(-1, x)), add(x, -1)) == mul(-1, pow_(add(1, mul(-1, x)), 2))
    # a lone sum still absorbs its coefficient
    assert mul(-1, add(1, x)) == add(-1, mul(-1, x))
