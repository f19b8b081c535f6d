"""Rule-based generic antidifferentiation.

The integrand is expanded, split over sums, and each term is separated into
a z-free coefficient and a z-dependent rest.  The rest is matched against
an ordered rule table; the first rule returning a result wins.  No constant
of integration is attached.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from .errors import UnsupportedForm
from .expr import (
    Add,
    Cos,
    Exp,
    Expr,
    Ln,
    Mul,
    Num,
    ONE,
    Pow,
    Sin,
    Sqrt,
    Sym,
    ZERO,
    add,
    arccot,
    coefficient_free_of,
    cos,
    differentiate,
    exp,
    has_special,
    is_special,
    ln,
    mul,
    neg,
    pow_,
    sin,
    sqrt,
    substitute,
)
from .normal import expand, together

Rule = Callable[[Expr, Sym], Optional[Expr]]


def _factors(e: Expr) -> tuple[Expr, ...]:
    return e.args if isinstance(e, Mul) else (e,)


def linear_parts(u: Expr, z: Sym) -> tuple[Expr, Expr] | None:
    """``(a, b)`` with ``u == a*z + b`` and ``a`` nonzero and z-free."""
    if not u.has(z):
        return None
    a = together(differentiate(u, z))
    if a == ZERO or a.has(z) or has_special(a):
        return None
    b = substitute(u, z, ZERO)
    if has_special(b):
        return None
    return a, b


def _log_coeff(arg: Expr, z: Sym) -> tuple[Expr, Expr] | None:
    """Match ``arg == k*ln(u)`` with ``k`` z-free; returns ``(k, u)``."""
    terms = arg.args if isinstance(arg, Add) else (arg,)
    base = None
    ks = []
    for t in terms:
        k, rest = coefficient_free_of(t, z)
        if not isinstance(rest, Ln) or (base is not None and rest.arg != base):
            return None
        base = rest.arg
        ks.append(k)
    return add(*ks), base


def _as_power(f: Expr, z: Sym) -> tuple[Expr, Expr] | None:
    """View a single factor as ``u**e``; returns ``(u, e)``."""
    if isinstance(f, Sqrt):
        return f.arg, Fraction(1, 2)
    if isinstance(f, Pow):
        if isinstance(f.base, Sqrt):
            return f.base.arg, f.exp.value / 2
        return f.base, f.exp.value
    if isinstance(f, Exp):
        return _log_coeff(f.arg, z)[::-1] if _log_coeff(f.arg, z) else None
    return f, Fraction(1)


# -- rules ------------------------------------------------------------------

def rule_inverse_sqrt_table(r: Expr, z: Sym) -> Expr | None:
    """1/(z*sqrt(z^2 + c)) -> (1/a)*arccot(a/sqrt(z^2 - a^2)) with c = -a^2."""
    fs = _factors(r)
    if len(fs) != 2 or pow_(z, -1) not in fs:
        return None
    other = fs[0] if fs[1] == pow_(z, -1) else fs[1]
    if not (isinstance(other, Pow) and isinstance(other.base, Sqrt) and other.exp == -1):
        return None
    root = other.base
    u = root.arg
    c = together(add(u, mul(-1, pow_(z, 2))))
    if c.has(z):
        return None
    if c == ZERO:
        return neg(pow_(root, -1))
    if isinstance(c, Mul) and len(c.args) == 2 and c.args[0] == -1 and isinstance(c.args[1], Pow) \
            and c.args[1].exp == 2:
        a = c.args[1].base
    else:
        a = sqrt(neg(c))
    return mul(pow_(a, -1), arccot(mul(a, pow_(root, -1))))


def rule_power(r: Expr, z: Sym) -> Expr | None:
    """Products of powers of one z-linear base, symbolic exponents allowed."""
    base = None
    total: list = []
    for f in _factors(r):
        parts = _as_power(f, z)
        if parts is None:
            return None
        u, e = parts
        if base is not None and u != base:
            return None
        base = u
        total.append(e)
    lin = linear_parts(base, z)
    if lin is None:
        return None
    a = lin[0]
    e = together(add(*total))
    if e.has(z):
        return None
    if e == -1:
        return mul(ln(base), pow_(a, -1))
    e1 = together(add(e, 1))
    return mul(exp(mul(e1, ln(base))), pow_(mul(e1, a), -1))


def rule_exp_linear(r: Expr, z: Sym) -> Expr | None:
    if not isinstance(r, Exp):
        return None
    lin = linear_parts(r.arg, z)
    if lin is None:
        return None
    return mul(r, pow_(lin[0], -1))


def rule_trig_linear(r: Expr, z: Sym) -> Expr | None:
    if not isinstance(r, (Sin, Cos)):
        return None
    lin = linear_parts(r.arg, z)
    if lin is None:
        return None
    inv = pow_(lin[0], -1)
    if isinstance(r, Sin):
        return mul(-1, cos(r.arg), inv)
    return mul(sin(r.arg), inv)


def rule_log_of_linear_product(r: Expr, z: Sym) -> Expr | None:
    """ln(K * prod L_i^n_i) -> z ln(P) - sum n_i (z - (b_i/a_i) ln L_i)."""
    if not isinstance(r, Ln):
        return None
    out = [mul(z, r)]
    for f in _factors(r.arg):
        if not f.has(z):
            continue
        if isinstance(f, Pow):
            u, n = f.base, f.exp
        else:
            u, n = f, ONE
        lin = linear_parts(u, z)
        if lin is None:
            return None
        a, b = lin
        piece = add(z, mul(-1, b, pow_(a, -1), ln(u)))
        out.append(mul(-1, n, piece))
    return add(*out)


def product_to_sum(e: Expr) -> Expr:
    """Rewrite products of sin/cos factors as sums of single sin/cos terms.

    Factors without trigonometric content are kept as a common multiplier.
    """
    if isinstance(e, Add):
        return add(*(product_to_sum(t) for t in e.args))
    trig: list[Expr] = []
    other: list[Expr] = []
    for f in _factors(e):
        if isinstance(f, (Sin, Cos)):
            trig.append(f)
        elif isinstance(f, Pow) and isinstance(f.base, (Sin, Cos)) and 0 < f.exp.value <= 4:
            trig.extend([f.base] * int(f.exp.value))
        else:
            other.append(f)
    if len(trig) < 2:
        return e
    # terms are (coefficient, is_sin, angle)
    terms = [(Fraction(1), isinstance(trig[0], Sin), trig[0].arg)]
    for f in trig[1:]:
        fs, b = isinstance(f, Sin), f.arg
        nxt = []
        for c, s, a in terms:
            half = c / 2
            plus, minus = add(a, b), add(a, neg(b))
            if s and not fs:  # sin a cos b
                nxt += [(half, True, plus), (half, True, minus)]
            elif fs and not s:  # cos a sin b
                nxt += [(half, True, plus), (-half, True, minus)]
            elif s and fs:  # sin a sin b
                nxt += [(half, False, minus), (-half, False, plus)]
            else:
                nxt += [(half, False, minus), (half, False, plus)]
        terms = nxt
    total = add(*(mul(c, sin(a) if s else cos(a)) for c, s, a in terms))
    return mul(*other, total)


def rule_trig_product(r: Expr, z: Sym) -> Expr | None:
    rewritten = product_to_sum(r)
    if rewritten == r:
        return None
    return antiderivative(rewritten, z)


RULES: tuple[tuple[str, Rule], ...] = (
    ("inverse-sqrt-table", rule_inverse_sqrt_table),
    ("power", rule_power),
    ("exp-linear", rule_exp_linear),
    ("trig-linear", rule_trig_linear),
    ("log-linear-product", rule_log_of_linear_product),
    ("trig-product", rule_trig_product),
)


def integrate_term(term: Expr, z: Sym) -> Expr:
    c, r = coefficient_free_of(term, z)
    if r == ONE:
        return mul(c, z)
    for _name, rule in RULES:
        got = rule(r, z)
        if got is not None:
            return mul(c, got)
    raise UnsupportedForm(f"cannot integrate term {term}")


def antiderivative(f: Expr, z: Sym) -> Expr:
    """Generic antiderivative of ``f`` with respect to ``z`` (no constant)."""
    if has_special(f):
        raise UnsupportedForm("integrand contains a special value")
    e = expand(f)
    terms = e.args if isinstance(e, Add) else (e,)
    return add(*(integrate_term(t, z) for t in terms if t != ZERO))
