"""Rational normal forms over transcendental kernels.

An expression is viewed as a quotient of polynomials with exact rational
coefficients whose variables ("kernels") are symbols and irreducible
function applications.  Two modes:

* ``together`` keeps kernels as they are and only combines fractions;
  it is the display normalisation used for Kahanian constants.
* ``normal``/``is_zero`` additionally splits ``exp`` of sums into products,
  expands ``sin``/``cos`` of sums by the addition formulas and applies
  ``sqrt(u)^2 = u`` and ``sin^2 = 1 - cos^2``.  The result is canonical for
  the expression class the engine produces, so ``is_zero(a - b)`` decides
  structural equality of formulas written in different shapes.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable

from .expr import (
    Add,
    ArcCot,
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
    cos,
    exp,
    has_special,
    ln,
    mul,
    num,
    pow_,
    sin,
    sqrt,
    walk,
)

Mono = tuple  # ((kernel index, exponent), ...) sorted by index
Poly = dict  # Mono -> Fraction


# -- polynomial arithmetic ------------------------------------------------

def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, e in b:
        d[i] = d.get(i, 0) + e
    return tuple(sorted((i, e) for i, e in d.items() if e))


def _mono_div(a: Mono, b: Mono):
    d = dict(a)
    for i, e in b:
        if d.get(i, 0) < e:
            return None
        d[i] -= e
    return tuple(sorted((i, e) for i, e in d.items() if e))


def p_add(p: Poly, q: Poly, scale: Fraction = Fraction(1)) -> Poly:
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def p_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def p_pow(p: Poly, n: int) -> Poly:
    out: Poly = {(): Fraction(1)}
    base = p
    while n:
        if n & 1:
            out = p_mul(out, base)
        n >>= 1
        if n:
            base = p_mul(base, base)
    return out


def p_const(c) -> Poly:
    c = Fraction(c)
    return {(): c} if c else {}


def _lex(m: Mono, n: int) -> tuple:
    v = [0] * n
    for i, e in m:
        v[i] = e
    return tuple(v)


def p_divexact(p: Poly, d: Poly, nvars: int):
    """Exact quotient ``p/d`` or ``None`` when ``d`` does not divide ``p``."""
    if not d:
        raise ZeroDivisionError("polynomial division by zero")
    ltd = max(d, key=lambda m: _lex(m, nvars))
    cd = d[ltd]
    r = dict(p)
    q: Poly = {}
    while r:
        ltr = max(r, key=lambda m: _lex(m, nvars))
        mq = _mono_div(ltr, ltd)
        if mq is None:
            return None
        cq = r[ltr] / cd
        q[mq] = q.get(mq, 0) + cq
        r = p_add(r, p_mul({mq: cq}, d), Fraction(-1))
    return q


def _freeze(p: Poly) -> tuple:
    return tuple(sorted(p.items()))


def _rat_gcd(values: Iterable[Fraction]) -> Fraction:
    values = [Fraction(v) for v in values if v]
    if not values:
        return Fraction(0)
    den = 1
    for v in values:
        den = den * v.denominator // gcd(den, v.denominator)
    g = 0
    for v in values:
        g = gcd(g, int(v * den))
    return Fraction(g, den)


class Frac:
    """``num / prod(factor**mult)`` with denominator factors kept separate."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: dict | None = None):
        self.num = num
        self.den = den or {}  # frozen poly -> multiplicity


class _Context:
    def __init__(self, full: bool):
        self.full = full
        self.kernels: list[Expr] = []
        self.index: dict[Expr, int] = {}
        self.sqrt_rel: dict[int, Poly] = {}
        self.sin_rel: dict[int, int] = {}
        self.exp_units: dict[Expr, Fraction] = {}
        self.trig_units: dict[Expr, Fraction] = {}
        self.cache: dict[Expr, Frac] = {}

    # kernels --------------------------------------------------------------
    def var(self, k: Expr) -> Frac:
        i = self.index.get(k)
        if i is None:
            i = len(self.kernels)
            self.kernels.append(k)
            self.index[k] = i
        return Frac({((i, 1),): Fraction(1)})

    @property
    def n(self) -> int:
        return len(self.kernels)

    def lead(self, p: Poly) -> Mono:
        """Monomial whose coefficient is made positive: the one built from
        the earliest kernels in canonical order, ignoring the constant."""
        cands = [m for m in p if m] or list(p)
        return min(cands, key=self.canon_key)

    def canon_key(self, m: Mono) -> tuple:
        return tuple(sorted(((self.kernels[i].sort_key(), e) for i, e in m), reverse=True))

    # fractions ------------------------------------------------------------
    def reduce(self, p: Poly) -> Poly:
        if not self.full or not (self.sqrt_rel or self.sin_rel):
            return p
        changed = True
        while changed:
            changed = False
            out: Poly = {}
            for m, c in p.items():
                repl = None
                for i, e in m:
                    if e >= 2 and (i in self.sqrt_rel or i in self.sin_rel):
                        repl = (i, e)
                        break
                if repl is None:
                    out = p_add(out, {m: c})
                    continue
                changed = True
                i, e = repl
                rest = tuple((j, f) for j, f in m if j != i)
                if e % 2:
                    rest = _mono_mul(rest, ((i, 1),))
                if i in self.sqrt_rel:
                    sub = self.sqrt_rel[i]
                else:
                    sub = p_add(p_const(1), {((self.sin_rel[i], 2),): Fraction(1)}, Fraction(-1))
                term = p_mul({rest: c}, p_pow(sub, e // 2))
                out = p_add(out, term)
            p = out
        return p

    def factorize(self, p: Poly) -> tuple[Fraction, dict]:
        """Split a denominator polynomial into (constant, {factor: mult})."""
        if not p:
            raise ZeroDivisionError("division by zero")
        if list(p) == [()]:
            return p[()], {}
        c = p[self.lead(p)]
        p = {m: v / c for m, v in p.items()}
        common = dict(next(iter(p)))
        for m in p:
            md = dict(m)
            common = {i: min(e, md.get(i, 0)) for i, e in common.items() if md.get(i, 0)}
        factors: dict = {}
        if common:
            cm = tuple(sorted(common.items()))
            p = {_mono_div(m, cm): v for m, v in p.items()}
            for i, e in cm:
                key = _freeze({((i, 1),): Fraction(1)})
                factors[key] = factors.get(key, 0) + e
        if list(p) != [()]:
            key = _freeze(p)
            factors[key] = factors.get(key, 0) + 1
        return c, factors

    def cancel(self, f: Frac) -> Frac:
        if not f.num:
            return Frac({})
        den = dict(f.den)
        num_ = f.num
        if self.full and self.sqrt_rel:
            for key in list(den):
                p = dict(key)
                if len(p) == 1 and den[key] >= 2:
                    (m, c), = p.items()
                    if len(m) == 1 and m[0][0] in self.sqrt_rel and m[0][1] == 1:
                        k = den.pop(key)
                        if k % 2:
                            den[key] = 1
                        cc, fs = self.factorize(self.sqrt_rel[m[0][0]])
                        num_ = p_mul(num_, p_const(Fraction(1) / cc ** (k // 2)))
                        for fk, fm in fs.items():
                            den[fk] = den.get(fk, 0) + fm * (k // 2)
        for key in sorted(den, key=lambda k: len(k)):
            d = dict(key)
            while den.get(key, 0) > 0:
                q = p_divexact(num_, d, self.n)
                if q is None:
                    break
                num_ = q
                den[key] -= 1
            if not den.get(key):
                den.pop(key, None)
        return Frac(num_, den)

    def f_add(self, a: Frac, b: Frac) -> Frac:
        if not a.num:
            return b
        if not b.num:
            return a
        keys = set(a.den) | set(b.den)
        lcm = {k: max(a.den.get(k, 0), b.den.get(k, 0)) for k in keys}

        def lift(f: Frac) -> Poly:
            out = f.num
            for k, m in lcm.items():
                extra = m - f.den.get(k, 0)
                if extra:
                    out = p_mul(out, p_pow(dict(k), extra))
            return out

        num_ = self.reduce(p_add(lift(a), lift(b)))
        return self.cancel(Frac(num_, lcm))

    def f_mul(self, a: Frac, b: Frac) -> Frac:
        if not a.num or not b.num:
            return Frac({})
        den = dict(a.den)
        for k, m in b.den.items():
            den[k] = den.get(k, 0) + m
        return self.cancel(Frac(self.reduce(p_mul(a.num, b.num)), den))

    def f_inv(self, a: Frac) -> Frac:
        c, factors = self.factorize(a.num)
        num_: Poly = p_const(Fraction(1) / c)
        for k, m in a.den.items():
            num_ = p_mul(num_, p_pow(dict(k), m))
        return self.cancel(Frac(self.reduce(num_), factors))

    def f_pow(self, a: Frac, n: int) -> Frac:
        if n < 0:
            return self.f_pow(self.f_inv(a), -n)
        out = Frac(p_const(1))
        for _ in range(n):
            out = self.f_mul(out, a)
        return out

    # conversion -------------------------------------------------------------
    def to_frac(self, e: Expr) -> Frac:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        out = self._to_frac(e)
        self.cache[e] = out
        return out

    def _to_frac(self, e: Expr) -> Frac:
        if isinstance(e, Num):
            return Frac(p_const(e.value))
        if isinstance(e, Sym):
            return self.var(e)
        if isinstance(e, Add):
            out = Frac({})
            for a in e.args:
                out = self.f_add(out, self.to_frac(a))
            return out
        if isinstance(e, Mul):
            out = Frac(p_const(1))
            for a in e.args:
                out = self.f_mul(out, self.to_frac(a))
            return out
        if isinstance(e, Pow):
            return self.f_pow(self.to_frac(e.base), int(e.exp.value))
        if isinstance(e, (Exp, Sin, Cos)) and self.full:
            arg = self.to_frac(e.arg)
            if not arg.den:
                return self._expand_transcendental(e, arg.num)
        if isinstance(e, (Exp, Ln, Sin, Cos, ArcCot, Sqrt)):
            inner = self.to_expr(self.to_frac(e.arg))
            k = {Exp: exp, Ln: ln, Sin: sin, Cos: cos, ArcCot: arccot, Sqrt: sqrt}[type(e)](inner)
            if type(k) is not type(e):
                return self.to_frac(k)
            f = self.var(k)
            if isinstance(k, Sqrt) and self.full:
                rel = self.to_frac(k.arg)
                if not rel.den:
                    self.sqrt_rel[self.index[k]] = rel.num
            return f
        raise ValueError(f"no normal form for {type(e).__name__}")

    def _terms(self, p: Poly):
        for m, c in p.items():
            yield c, self.mono_expr(m)

    def _expand_transcendental(self, e: Expr, arg: Poly) -> Frac:
        units = self.exp_units if isinstance(e, Exp) else self.trig_units
        if isinstance(e, Exp):
            out = Frac(p_const(1))
            for c, m in self._terms(arg):
                q = units.get(m, abs(c))
                k = self.var(exp(mul(q, m)))
                out = self.f_mul(out, self.f_pow(k, int(c / q)))
            return out
        re_, im_ = Frac(p_const(1)), Frac({})
        for c, m in self._terms(arg):
            q = units.get(m, abs(c))
            n = int(c / q)
            angle = mul(q, m)
            ck, sk = self.var(cos(angle)), self.var(sin(angle))
            self.sin_rel[self.index[sin(angle)]] = self.index[cos(angle)]
            if n < 0:
                sk = self.f_mul(sk, Frac(p_const(-1)))
                n = -n
            for _ in range(n):
                re_, im_ = (
                    self.f_add(self.f_mul(re_, ck), self.f_mul(self.f_mul(im_, sk), Frac(p_const(-1)))),
                    self.f_add(self.f_mul(im_, ck), self.f_mul(re_, sk)),
                )
        return re_ if isinstance(e, Cos) else im_

    def mono_expr(self, m: Mono) -> Expr:
        return mul(*(pow_(self.kernels[i], e) for i, e in m))

    def poly_expr(self, p: Poly) -> Expr:
        return add(*(mul(c, self.mono_expr(m)) for m, c in p.items()))

    def to_expr(self, f: Frac) -> Expr:
        if not f.num:
            return ZERO
        p = f.num
        c = _rat_gcd(p.values())
        negatives = sum(1 for v in p.values() if v < 0)
        if 2 * negatives > len(p) or (len(p) == 1 and negatives):
            c = -c
        p = {m: v / c for m, v in p.items()}
        parts: list[Expr] = [num(c)]
        if len(p) > 1:
            common = dict(next(iter(p)))
            for m in p:
                md = dict(m)
                common = {i: min(e, md.get(i, 0)) for i, e in common.items() if md.get(i, 0)}
            if common:
                cm = tuple(sorted(common.items()))
                parts.append(self.mono_expr(cm))
                p = {_mono_div(m, cm): v for m, v in p.items()}
        parts.append(self.poly_expr(p))
        for key, mult in f.den.items():
            parts.append(pow_(self.poly_expr(dict(key)), -mult))
        return mul(*parts)


def _collect_units(e: Expr, ctx: _Context) -> None:
    scratch = _Context(full=True)
    coeffs: dict[int, dict[Expr, list[Fraction]]] = {0: {}, 1: {}}
    for node in walk(e):
        if isinstance(node, (Exp, Sin, Cos)):
            arg = scratch.to_frac(node.arg)
            if arg.den:
                continue
            bucket = coeffs[0 if isinstance(node, Exp) else 1]
            for c, m in scratch._terms(arg.num):
                bucket.setdefault(m, []).append(c)
    for m, cs in coeffs[0].items():
        ctx.exp_units[m] = _rat_gcd(cs)
    for m, cs in coeffs[1].items():
        ctx.trig_units[m] = _rat_gcd(cs)


def together(e: Expr) -> Expr:
    """Combine ``e`` over a common denominator, cancelling exact factors."""
    if has_special(e):
        return e
    ctx = _Context(full=False)
    return ctx.to_expr(ctx.to_frac(e))


def normal(e: Expr) -> Expr:
    """Canonical rational normal form with exp/trig/sqrt identities applied."""
    if has_special(e):
        return e
    ctx = _Context(full=True)
    _collect_units(e, ctx)
    return ctx.to_expr(ctx.to_frac(e))


def is_zero(e: Expr) -> bool:
    if has_special(e):
        return False
    if e == ZERO:
        return True
    ctx = _Context(full=True)
    _collect_units(e, ctx)
    try:
        return not ctx.to_frac(e).num
    except ZeroDivisionError:
        return False


def equivalent(a: Expr, b: Expr) -> bool:
    """Structural equality modulo the canonical rational normal form."""
    if has_special(a) or has_special(b):
        return a == b
    return is_zero(add(a, mul(-1, b)))


def numerator_denominator(e: Expr) -> tuple[Expr, Expr]:
    ctx = _Context(full=False)
    f = ctx.to_frac(e)
    den = mul(*(pow_(ctx.poly_expr(dict(k)), m) for k, m in f.den.items()))
    return ctx.poly_expr(f.num), den


# -- expansion ------------------------------------------------------------

MAX_POWER = 4
MAX_SUM_FACTORS = 3


def expand(e: Expr) -> Expr:
    """Distribute products over sums and expand ``(sum)^n`` for ``n <= 4``.

    Function arguments are left untouched.  Products with more than three sum
    factors are left as they are.
    """
    if isinstance(e, Add):
        return add(*(expand(a) for a in e.args))
    if isinstance(e, Pow):
        base = expand(e.base)
        n = int(e.exp.value)
        if isinstance(base, Add) and 2 <= n <= MAX_POWER:
            return _distribute([base] * n)
        return pow_(base, n)
    if isinstance(e, Mul):
        parts = [expand(a) for a in e.args]
        sums = [p for p in parts if isinstance(p, Add)]
        if not sums or len(sums) > MAX_SUM_FACTORS:
            return mul(*parts)
        rest = mul(*(p for p in parts if not isinstance(p, Add)))
        return _distribute(sums, rest)
    return e


def _distribute(sums: list[Expr], rest: Expr = ONE) -> Expr:
    terms = [rest]
    for s in sums:
        terms = [mul(t, a) for t in terms for a in s.args]
    return add(*(expand(t) if isinstance(t, Mul) and any(isinstance(f, Add) for f in t.args) else t for t in terms))
