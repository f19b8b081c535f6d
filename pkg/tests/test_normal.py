import random

from hypothesis import given, settings, strategies as st

from kahania.errors import DomainError
from kahania.expr import Add, node_count
from kahania.normal import equivalent, expand, is_zero, normal, numerator_denominator, together
from kahania.numeric import eval_numeric
from kahania.parser import parse, render

from .strategies import expressions


def test_together_combines_over_common_denominator():
    e = together(parse("1/(k - w) + 1/(k + w)"))
    n, d = numerator_denominator(e)
    assert equivalent(n, parse("2*k"))
    assert equivalent(d, parse("(k - w)*(k + w)"))


def test_is_zero_rational():
    assert is_zero(parse("1/(k - w) + 1/(w - k)"))
    assert not is_zero(parse("1/(k - w) + 1/(k + w)"))


def test_is_zero_with_exponentials():
    # exp of a sum splits into products of exponentials
    assert is_zero(parse("exp(a*z + b*z) - exp(a*z)*exp(b*z)"))
    assert is_zero(parse("a^(2*z) - (a^z)^2"))


def test_is_zero_with_trig():
    assert is_zero(parse("sin(z)^2 + cos(z)^2 - 1"))
    assert is_zero(parse("cos(a + b) - cos(a)*cos(b) + sin(a)*sin(b)"))
    assert is_zero(parse("sqrt(z)^2 - z"))


def test_equivalent_kahanian_constant():
    c = parse("-(1/(2*ln(a)))*(1/l + 1/s - 4/(l + s))")
    want = parse("-(l - s)^2/(2*l*s*(l + s)*ln(a))")
    assert equivalent(c, want)


def test_normal_of_resonance_wronskian():
    assert normal(parse("cos(k*t)*k*cos(k*t) + sin(k*t)*k*sin(k*t)")) == parse("k")


def test_expand_square_of_binomial():
    e = expand(parse("(a^(s*z) - a^(l*z))^2"))
    assert isinstance(e, Add) and len(e.args) == 3


def test_together_display_sign():
    assert render(together(parse("1/(1+n) - z^(1+n)/(1+n)"))) == "(1 - z^(1 + n))/(1 + n)"


@settings(max_examples=100, deadline=None)
@given(expressions(max_leaves=6), st.integers(0, 2**32))
def test_together_is_numerically_sound(e, seed):
    rng = random.Random(seed)
    b = {n: complex(rng.uniform(0.3, 1.7), rng.uniform(-0.2, 0.2)) for n in ("z", "alpha", "sigma", "x")}
    try:
        want = eval_numeric(e, b)
        got = eval_numeric(together(e), b)
    except DomainError:
        return
    assert abs(got - want) <= 1e-7 * (1 + abs(want))


@settings(max_examples=100, deadline=None)
@given(expressions(max_leaves=6))
def test_together_is_idempotent(e):
    once = together(e)
    assert together(once) == once


@settings(max_examples=100, deadline=None)
@given(expressions(max_leaves=6))
def test_difference_with_self_is_zero(e):
    assert is_zero(e - e)
    assert node_count(normal(e)) >= 1
