"""Truncated Laurent series in one parameter and limits built on them.

Series are computed bottom-up by series arithmetic in ``eps = sym - point``.
Each intermediate series carries its coefficients and an absolute
truncation order ``trunc``: every coefficient with exponent ``< trunc`` is
exact, the rest is ``O(eps**trunc)``.  Exact finite series (polynomials in
``eps``) use a very large ``trunc``.

Logarithms of the expansion variable itself (as at an integration endpoint)
are carried as the reserved symbol ``LOGEPS`` standing for ``ln|eps|``; the
limit classifier treats a surviving ``LOGEPS`` at order zero as divergent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import EssentialSingularity, UnsupportedForm
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
    differentiate,
    exp,
    has_special,
    ln,
    mul,
    num,
    pow_,
    sin,
    sqrt,
    substitute,
    sym,
)
from .normal import is_zero, together

LOGEPS = sym("_logeps")
BIG = 10**9
ORDER_LADDER = (4, 8, 12)


class _Cancellation(Exception):
    """Every computed coefficient vanished; more working order is needed."""


@lru_cache(maxsize=8192)
def _vanishes(c: Expr) -> bool:
    return c == ZERO or is_zero(c)


class _S:
    __slots__ = ("c", "trunc")

    def __init__(self, coeffs: dict, trunc: int):
        self.trunc = trunc
        self.c = {k: v for k, v in coeffs.items() if k < trunc and v != ZERO}

    def get(self, k: int) -> Expr:
        return self.c.get(k, ZERO)

    def val(self) -> int:
        """Exponent of the leading nonzero coefficient."""
        for k in sorted(self.c):
            if _vanishes(self.c[k]):
                del self.c[k]
                continue
            return k
        if self.trunc >= BIG // 2:
            return BIG
        raise _Cancellation


def _const(e: Expr) -> _S:
    return _S({0: e}, BIG)


def _s_add(a: _S, b: _S) -> _S:
    t = min(a.trunc, b.trunc)
    keys = set(a.c) | set(b.c)
    return _S({k: add(a.get(k), b.get(k)) for k in keys}, t)


def _s_scale(a: _S, c: Expr) -> _S:
    return _S({k: mul(c, v) for k, v in a.c.items()}, a.trunc)


def _s_shift(a: _S, n: int) -> _S:
    return _S({k + n: v for k, v in a.c.items()}, a.trunc + n if a.trunc < BIG // 2 else BIG)


def _val_or_none(a: _S):
    try:
        return a.val()
    except _Cancellation:
        return None


def _s_mul(a: _S, b: _S, w: int) -> _S:
    va, vb = _val_or_none(a), _val_or_none(b)
    if va is None or vb is None:
        if va is None and vb is None:
            raise _Cancellation
        # one factor is O(eps**trunc) with no known term
        return _S({}, min(a.trunc + vb if va is None else b.trunc + va, w))
    if va == BIG or vb == BIG:
        return _S({}, BIG)
    t = min(a.trunc + vb, b.trunc + va, w)
    out: dict = {}
    for i, x in a.c.items():
        for j, y in b.c.items():
            if i + j < t:
                out.setdefault(i + j, []).append(mul(x, y))
    return _S({k: add(*v) for k, v in out.items()}, t)


def _s_inv(a: _S, w: int) -> _S:
    v = a.val()
    if v == BIG:
        raise ZeroDivisionError("series of an identically zero denominator")
    r = min(a.trunc - v, w + v)
    if r <= 0:
        raise _Cancellation
    a0 = a.get(v)
    inv0 = pow_(a0, -1)
    b = [inv0]
    for n in range(1, r):
        acc = add(*(mul(a.get(v + k), b[n - k]) for k in range(1, n + 1) if a.get(v + k) != ZERO))
        b.append(mul(-1, inv0, acc))
    return _S({n - v: b[n] for n in range(r)}, r - v)


def _s_pow(a: _S, n: int, w: int) -> _S:
    if n < 0:
        a = _s_inv(a, w)
        n = -n
    out = _const(ONE)
    for _ in range(n):
        out = _s_mul(out, a, w)
    return out


def _split_const(a: _S) -> tuple[Expr, _S]:
    """(constant term, remainder with positive valuation)."""
    rest = _S({k: v for k, v in a.c.items() if k != 0}, a.trunc)
    return a.get(0), rest


def _compose(rest: _S, coeffs, w: int) -> _S:
    """``sum coeffs[k] * rest**k`` for a series ``rest`` with positive valuation."""
    t = min(rest.trunc, w)
    v = _val_or_none(rest)
    if v is None:
        return _S({0: num(coeffs(0))}, t)
    if v == BIG:
        return _S({0: num(coeffs(0))}, BIG)
    out = _S({0: num(coeffs(0))}, t)
    power = _const(ONE)
    k = 1
    while k * v < t:
        power = _s_mul(power, rest, w)
        ck = num(coeffs(k))
        if ck != ZERO:
            out = _s_add(out, _s_scale(power, ck))
        k += 1
    return _S(out.c, t)


def _leading(a: _S) -> tuple[int, Expr]:
    v = a.val()
    return v, a.get(v)


class _Builder:
    def __init__(self, var: Sym, point: Expr, direction: int, w: int):
        self.var = var
        self.point = point
        self.direction = direction
        self.w = w
        self.memo: dict[Expr, _S] = {}

    def series(self, e: Expr) -> _S:
        hit = self.memo.get(e)
        if hit is None:
            hit = self._series(e)
            self.memo[e] = hit
        return hit

    def _series(self, e: Expr) -> _S:
        if not e.has(self.var):
            return _const(e)
        if e == self.var:
            return _S({0: self.point, 1: ONE}, BIG)
        w = self.w
        if isinstance(e, Add):
            out = _S({}, BIG)
            for a in e.args:
                out = _s_add(out, self.series(a))
            return out
        if isinstance(e, Mul):
            out = _const(ONE)
            for a in e.args:
                out = _s_mul(out, self.series(a), w)
            return out
        if isinstance(e, Pow):
            return _s_pow(self.series(e.base), int(e.exp.value), w)
        a = self.series(e.arg)
        if isinstance(e, Exp):
            return self._exp(a)
        if isinstance(e, (Sin, Cos)):
            return self._trig(a, isinstance(e, Sin))
        if isinstance(e, Ln):
            return self._ln(a)
        if isinstance(e, Sqrt):
            return self._sqrt(a)
        if isinstance(e, ArcCot):
            return self._arccot(a)
        raise UnsupportedForm(f"no series rule for {type(e).__name__}")

    def _exp(self, a: _S) -> _S:
        if a.val() < 0:
            raise EssentialSingularity("exp of a series with a pole")
        c0, rest = _split_const(a)
        shift = 0
        if c0.has(LOGEPS):
            q = differentiate(c0, LOGEPS)
            if not isinstance(q, Num) or not q.is_integer:
                raise UnsupportedForm("non-integer power of the expansion variable")
            shift = int(q.value)
            c0 = substitute(c0, LOGEPS, ZERO)
            # |eps|**n == (direction*eps)**n
            c0_scale = pow_(self.direction, shift)
        else:
            c0_scale = ONE
        base = _compose(rest, lambda k: Fraction(1, factorial(k)), self.w)
        return _s_shift(_s_scale(base, mul(c0_scale, exp(c0))), shift)

    def _trig(self, a: _S, is_sin: bool) -> _S:
        if a.val() < 0:
            raise EssentialSingularity("sin/cos of a series with a pole")
        c0, rest = _split_const(a)

        def cos_k(k):
            return Fraction((-1) ** (k // 2), factorial(k)) if k % 2 == 0 else 0

        def sin_k(k):
            return Fraction((-1) ** (k // 2), factorial(k)) if k % 2 else 0

        cs = _compose(rest, cos_k, self.w)
        sn = _compose(rest, sin_k, self.w)
        if is_sin:
            return _s_add(_s_scale(cs, sin(c0)), _s_scale(sn, cos(c0)))
        return _s_add(_s_scale(cs, cos(c0)), _s_scale(sn, mul(-1, sin(c0))))

    def _normalised(self, a: _S) -> tuple[int, Expr, _S]:
        """Write ``a = eps**v * a0 * (1 + t)`` and return (v, a0, t)."""
        v, a0 = _leading(a)
        if v == BIG:
            raise UnsupportedForm("logarithm or root of zero")
        t = _s_scale(_s_shift(a, -v), pow_(a0, -1))
        t = _S({k: c for k, c in t.c.items() if k != 0}, t.trunc)
        return v, a0, t

    def _ln(self, a: _S) -> _S:
        v, a0, t = self._normalised(a)
        head = ln(mul(pow_(self.direction, v), a0)) if v else ln(a0)
        if v:
            head = add(mul(v, LOGEPS), head)
        body = _compose(t, lambda k: Fraction((-1) ** (k + 1), k) if k else 0, self.w)
        return _s_add(_const(head), body)

    def _sqrt(self, a: _S) -> _S:
        v, a0, t = self._normalised(a)
        if v % 2:
            raise UnsupportedForm("fractional power series (Puiseux) not supported")

        def binom(k):
            out = Fraction(1)
            for j in range(k):
                out *= Fraction(1, 2) - j
            return out / factorial(k)

        body = _compose(t, binom, self.w)
        lead = mul(pow_(self.direction, v // 2), sqrt(a0))
        return _s_shift(_s_scale(body, lead), v // 2)

    def _arccot(self, a: _S) -> _S:
        v = a.val()
        if v < 0:
            u = _s_inv(a, self.w)
            return _compose(u, lambda k: Fraction((-1) ** (k // 2), k) if k % 2 else 0, self.w)
        c0 = a.get(0)
        if _vanishes(add(1, mul(c0, c0))):
            raise UnsupportedForm("arccot series at a branch point")
        # arccot(a) = arccot(a0) - integral of a'/(1 + a^2)
        da = _S({k - 1: mul(k, c) for k, c in a.c.items() if k}, a.trunc - 1 if a.trunc < BIG // 2 else BIG)
        g = _s_mul(da, _s_inv(_s_add(_const(ONE), _s_mul(a, a, self.w)), self.w), self.w)
        integ = {k + 1: mul(Fraction(-1, k + 1), c) for k, c in g.c.items()}
        t = min(g.trunc + 1, self.w) if g.trunc < BIG // 2 else self.w
        return _s_add(_const(arccot(c0)), _S(integ, t))


@dataclass(frozen=True)
class SeriesExpansion:
    variable: Sym
    point: Expr
    min_order: int
    coefficients: tuple = field(default_factory=tuple)
    truncation_order: int = 0

    def coefficient(self, k: int) -> Expr:
        i = k - self.min_order
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return ZERO

    def as_expr(self, eps: Expr | None = None) -> Expr:
        """Sum of the terms with ``eps`` (default ``sym - point``) substituted."""
        if eps is None:
            eps = add(self.variable, mul(-1, self.point))
        return add(*(mul(c, pow_(eps, self.min_order + i)) for i, c in enumerate(self.coefficients)))

    def __str__(self) -> str:
        parts = [f"({c})*eps^{self.min_order + i}" for i, c in enumerate(self.coefficients) if c != ZERO]
        return " + ".join(parts or ["0"]) + f" + O(eps^{self.truncation_order + 1})"


def _build(e: Expr, var: Sym, point: Expr, order: int, direction: int) -> _S:
    if has_special(e):
        raise UnsupportedForm("series of an expression containing a special value")
    last: _S | None = None
    for w in ORDER_LADDER:
        w = max(w, order + 2)
        try:
            s = _Builder(var, point, direction, w).series(e)
            v = s.val()
        except _Cancellation:
            continue
        last = s
        if v == BIG or s.trunc > order:
            return s
    if last is None:
        raise _Cancellation
    return last


def laurent_series(e: Expr, var: Sym, point, order: int, direction: int = 1) -> SeriesExpansion:
    """Laurent expansion of ``e`` about ``var = point`` through ``eps**order``."""
    point = num(point) if isinstance(point, (int, Fraction)) else point
    try:
        s = _build(e, var, point, order, direction)
    except _Cancellation:
        raise EssentialSingularity("no leading term found up to the escalation cap") from None
    v = s.val()
    if v == BIG:
        return SeriesExpansion(var, point, order + 1, (), order)
    top = min(order, s.trunc - 1)
    coeffs = tuple(together(s.get(k)) for k in range(v, top + 1))
    return SeriesExpansion(var, point, v, coeffs, top)


@dataclass(frozen=True)
class Finite:
    value: Expr

    def __str__(self) -> str:
        return f"Finite({self.value})"


@dataclass(frozen=True)
class Pole:
    order: int

    def __str__(self) -> str:
        return f"Pole({self.order})"


@dataclass(frozen=True)
class IndeterminateLimit:
    reason: str = ""

    def __str__(self) -> str:
        return "Indeterminate"


LimitResult = Finite | Pole | IndeterminateLimit


def limit(e: Expr, var: Sym, point, direction: int = 1) -> LimitResult:
    """Classify the limit of ``e`` as ``var -> point`` from the given side."""
    point = num(point) if isinstance(point, (int, Fraction)) else point
    try:
        s = _build(e, var, point, 0, direction)
        v = s.val()
    except _Cancellation:
        return IndeterminateLimit("cancellation beyond the escalation cap")
    if v == BIG or v > 0:
        return Finite(ZERO)
    if v < 0:
        return Pole(-v)
    c0 = together(s.get(0))
    if c0.has(LOGEPS):
        return IndeterminateLimit("logarithmic divergence")
    return Finite(c0)
