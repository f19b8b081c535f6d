"""Immutable symbolic expressions kept in canonical form.

Every node is built through a smart constructor (``add``, ``mul``, ``pow_``,
``exp``, ...) which flattens, sorts and folds exact numbers, so two
expressions that print the same are ``==``.  Powers with a non-numeric base
and a non-integer exponent are stored as ``exp(b*ln(a))``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Callable, Iterator, Mapping, Union

Number = Union[int, Fraction]


class Expr:
    __slots__ = ("_data", "_hash", "_key", "_free")

    rank = 99

    def __init__(self, data: tuple):
        self._data = data
        self._hash = None
        self._key = None
        self._free = None

    # -- structure -------------------------------------------------------
    @property
    def args(self) -> tuple["Expr", ...]:
        return ()

    def rebuild(self, args: tuple["Expr", ...]) -> "Expr":
        return self

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Num) and self.value == other
            return NotImplemented
        return type(self) is type(other) and hash(self) == hash(other) and self._data == other._data

    def __ne__(self, other: object) -> bool:
        res = self.__eq__(other)
        return res if res is NotImplemented else not res

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((type(self).__name__, self._data))
        return self._hash

    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self) -> tuple:
        return (self.rank, tuple(a.sort_key() for a in self.args))

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            out: frozenset = frozenset()
            for a in self.args:
                out = out | a.free_symbols
            self._free = out
        return self._free

    def has(self, sym: "Sym") -> bool:
        return sym in self.free_symbols

    # -- arithmetic sugar ------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(sympify(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, pow_(other, -1))

    def __rtruediv__(self, other):
        return mul(other, pow_(self, -1))

    def __pow__(self, other):
        return pow_(self, other)

    def __rpow__(self, other):
        return pow_(other, self)

    def __neg__(self):
        return neg(self)

    def __repr__(self) -> str:
        from .parser import render

        return render(self, "plain")

    __str__ = __repr__


class Num(Expr):
    __slots__ = ()
    rank = 0

    def __init__(self, value: Number):
        super().__init__((Fraction(value),))
        self._free = frozenset()

    @property
    def value(self) -> Fraction:
        return self._data[0]

    @property
    def is_integer(self) -> bool:
        return self._data[0].denominator == 1

    def _make_key(self) -> tuple:
        return (0, self.value)


class Sym(Expr):
    __slots__ = ()
    rank = 1

    def __init__(self, name: str):
        super().__init__((name,))
        self._free = frozenset([self])

    @property
    def name(self) -> str:
        return self._data[0]

    def _make_key(self) -> tuple:
        return (1, self.name)


class Pow(Expr):
    __slots__ = ()
    rank = 2

    def __init__(self, base: Expr, exponent: Expr):
        super().__init__((base, exponent))

    @property
    def base(self) -> Expr:
        return self._data[0]

    @property
    def exp(self) -> Expr:
        return self._data[1]

    @property
    def args(self):
        return self._data

    def rebuild(self, args):
        return pow_(*args)


class Mul(Expr):
    __slots__ = ()
    rank = 3

    @property
    def args(self):
        return self._data

    def rebuild(self, args):
        return mul(*args)


class Add(Expr):
    __slots__ = ()
    rank = 4

    @property
    def args(self):
        return self._data

    def rebuild(self, args):
        return add(*args)


class Function(Expr):
    """Unary elementary function node."""

    __slots__ = ()
    name = "?"

    def __init__(self, arg: Expr):
        super().__init__((arg,))

    @property
    def arg(self) -> Expr:
        return self._data[0]

    @property
    def args(self):
        return self._data

    def rebuild(self, args):
        return FUNCTIONS[self.name](args[0])


class Exp(Function):
    __slots__ = ()
    rank = 5
    name = "exp"


class Ln(Function):
    __slots__ = ()
    rank = 6
    name = "ln"


class Sin(Function):
    __slots__ = ()
    rank = 7
    name = "sin"


class Cos(Function):
    __slots__ = ()
    rank = 8
    name = "cos"


class ArcCot(Function):
    __slots__ = ()
    rank = 9
    name = "arccot"


class Sqrt(Function):
    __slots__ = ()
    rank = 10
    name = "sqrt"


class _Special(Expr):
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            inst = super().__new__(cls)
            Expr.__init__(inst, ())
            inst._free = frozenset()
            cls._instance = inst
        return cls._instance

    def __init__(self):
        pass


class ComplexInfinityAtom(_Special):
    __slots__ = ()
    rank = 11


class IndeterminateAtom(_Special):
    __slots__ = ()
    rank = 12


ComplexInfinity = ComplexInfinityAtom()
Indeterminate = IndeterminateAtom()
SPECIALS = (ComplexInfinity, Indeterminate)

_SMALL = {i: Num(i) for i in range(-4, 17)}
ZERO = _SMALL[0]
ONE = _SMALL[1]
NEG_ONE = _SMALL[-1]


def num(value: Number) -> Num:
    value = Fraction(value)
    if value.denominator == 1 and int(value) in _SMALL:
        return _SMALL[int(value)]
    return Num(value)


def sym(name: str) -> Sym:
    return Sym(name)


def symbols(names: str) -> tuple[Sym, ...]:
    return tuple(Sym(n) for n in names.replace(",", " ").split())


def sympify(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not an expression")
    if isinstance(x, (int, Fraction)):
        return num(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_special(e: Expr) -> bool:
    return e is ComplexInfinity or e is Indeterminate


# -- canonical helpers ----------------------------------------------------

def split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    """Return ``(c, rest)`` with ``e == c*rest`` and ``rest`` coefficient-free."""
    if isinstance(e, Num):
        return e.value, ONE
    if isinstance(e, Mul) and isinstance(e.args[0], Num):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), e


def _scale(rest: Expr, c: Fraction) -> Expr:
    if c == 1:
        return rest
    if rest == ONE:
        return num(c)
    if isinstance(rest, Mul):
        return Mul((num(c),) + rest.args)
    return Mul((num(c), rest))


def is_negative_form(e: Expr) -> bool:
    """Sign convention used to canonicalise odd/even functions.

    For sums the sign of the term with the smallest coefficient-free key
    decides, which is stable under negation.
    """
    if isinstance(e, Num):
        return e.value < 0
    if isinstance(e, Mul):
        return isinstance(e.args[0], Num) and e.args[0].value < 0
    if isinstance(e, Add):
        best = None
        for t in e.args:
            if isinstance(t, Num):
                continue
            c, rest = split_coeff(t)
            if best is None or rest.sort_key() < best[1].sort_key():
                best = (c, rest)
        return best is not None and best[0] < 0
    return False


def _primitive(e: Add) -> tuple[Fraction, Expr]:
    """``(c, p)`` with ``e == c*p`` and ``p`` having coprime integer coefficients.

    The sign makes a constant term positive, or failing that follows
    ``is_negative_form``; both are stable under negation.
    """
    cs = [split_coeff(t)[0] for t in e.args]
    num_gcd = 0
    den_lcm = 1
    for c in cs:
        num_gcd = gcd(num_gcd, c.numerator)
        den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    content = Fraction(num_gcd, den_lcm)
    const = e.args[0] if isinstance(e.args[0], Num) else None
    if (const.value < 0) if const is not None else is_negative_form(e):
        content = -content
    if content == 1:
        return Fraction(1), e
    return content, add(*(_scale(r, c / content) for c, r in map(split_coeff, e.args)))


# -- smart constructors ---------------------------------------------------

def add(*terms) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        t = sympify(t)
        if isinstance(t, Add):
            flat.extend(t.args)
        else:
            flat.append(t)
    if any(t is Indeterminate for t in flat):
        return Indeterminate
    n_inf = sum(1 for t in flat if t is ComplexInfinity)
    if n_inf:
        return ComplexInfinity if n_inf == 1 else Indeterminate
    const = Fraction(0)
    coeffs: dict[Expr, Fraction] = {}
    for t in flat:
        if isinstance(t, Num):
            const += t.value
            continue
        c, rest = split_coeff(t)
        coeffs[rest] = coeffs.get(rest, Fraction(0)) + c
    out = [num(const)] if const else []
    for rest, c in coeffs.items():
        if c:
            out.append(_scale(rest, c))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=Expr.sort_key)
    return Add(tuple(out))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        f = sympify(f)
        if isinstance(f, Mul):
            flat.extend(f.args)
        else:
            flat.append(f)
    if any(f is Indeterminate for f in flat):
        return Indeterminate
    has_zero = any(isinstance(f, Num) and f.value == 0 for f in flat)
    if any(f is ComplexInfinity for f in flat):
        return Indeterminate if has_zero else ComplexInfinity
    if has_zero:
        return ZERO

    coeff = Fraction(1)
    powers: dict[Expr, Fraction] = {}
    exp_args: list[Expr] = []
    for f in flat:
        if isinstance(f, Num):
            coeff *= f.value
        elif isinstance(f, Pow):
            powers[f.base] = powers.get(f.base, Fraction(0)) + f.exp.value
        elif isinstance(f, Exp):
            exp_args.append(f.arg)
        else:
            powers[f] = powers.get(f, Fraction(0)) + 1

    out: list[Expr] = []
    changed = False
    for base, n in powers.items():
        if n == 0:
            continue
        p = pow_(base, num(n))
        if not (p == base or (isinstance(p, Pow) and p.base == base)):
            changed = True
        out.append(p)
    if len(exp_args) == 1:
        out.append(Exp(exp_args[0]))
    elif exp_args:
        e = exp(add(*exp_args))
        if not isinstance(e, Exp):
            changed = True
        out.append(e)
    if changed:
        return mul(num(coeff), *out)

    if not out:
        return num(coeff)
    if len(out) > 1 and any(isinstance(f, Add) for f in out):
        # a sum sharing a product with other factors is kept primitive, so
        # that -(1 + x)*y and (-1 - x)*y have one canonical form
        prim = []
        for f in out:
            if isinstance(f, Add):
                c, f = _primitive(f)
                if c != 1:
                    coeff *= c
                    changed = True
            prim.append(f)
        if changed:
            return mul(num(coeff), *prim)
    out.sort(key=Expr.sort_key)
    if coeff == 1:
        return out[0] if len(out) == 1 else Mul(tuple(out))
    if len(out) == 1 and isinstance(out[0], Add):
        return add(*(mul(num(coeff), t) for t in out[0].args))
    return Mul((num(coeff),) + tuple(out))


def neg(e) -> Expr:
    return mul(NEG_ONE, e)


def pow_(base, exponent) -> Expr:
    b = sympify(base)
    e = sympify(exponent)
    if b is Indeterminate or e is Indeterminate:
        return Indeterminate
    if isinstance(e, Num):
        v = e.value
        if v == 0:
            return Indeterminate if b is ComplexInfinity else ONE
        if v == 1:
            return b
        if b is ComplexInfinity:
            return ComplexInfinity if v > 0 else ZERO
        if v.denominator == 1:
            n = int(v)
            if isinstance(b, Num):
                if b.value == 0:
                    return ComplexInfinity if n < 0 else ZERO
                return num(b.value**n)
            if isinstance(b, Pow):
                return pow_(b.base, num(b.exp.value * n))
            if isinstance(b, Mul):
                return mul(*(pow_(f, e) for f in b.args))
            if isinstance(b, Exp):
                return exp(mul(e, b.arg))
            if isinstance(b, Sqrt) and abs(n) >= 2:
                q = n // 2 if n > 0 else -((-n) // 2)
                return mul(pow_(b.arg, q), pow_(b, n - 2 * q))
            return Pow(b, e)
    if e is ComplexInfinity or b is ComplexInfinity:
        return Indeterminate
    return exp(mul(e, ln(b)))


def exp(a) -> Expr:
    a = sympify(a)
    if is_special(a):
        return Indeterminate
    if a == ZERO:
        return ONE
    if isinstance(a, Ln):
        return a.arg
    if isinstance(a, Mul) and len(a.args) == 2 and isinstance(a.args[0], Num) and isinstance(a.args[1], Ln):
        c = a.args[0].value
        inner = a.args[1].arg
        if c.denominator == 1:
            return pow_(inner, num(c))
        if c.denominator == 2:
            return pow_(sqrt(inner), num(2 * c))
    return Exp(a)


def ln(a) -> Expr:
    a = sympify(a)
    if is_special(a):
        return a
    if a == ONE:
        return ZERO
    if a == ZERO:
        return ComplexInfinity
    return Ln(a)


def _exact_root(v: Fraction):
    from math import isqrt

    n, d = v.numerator, v.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt(a) -> Expr:
    a = sympify(a)
    if is_special(a):
        return a
    if isinstance(a, Num) and a.value >= 0:
        r = _exact_root(a.value)
        if r is not None:
            return num(r)
    return Sqrt(a)


def sin(a) -> Expr:
    a = sympify(a)
    if is_special(a):
        return Indeterminate
    if a == ZERO:
        return ZERO
    if is_negative_form(a):
        return neg(Sin(neg(a)))
    return Sin(a)


def cos(a) -> Expr:
    a = sympify(a)
    if is_special(a):
        return Indeterminate
    if a == ZERO:
        return ONE
    if is_negative_form(a):
        return Cos(neg(a))
    return Cos(a)


def arccot(a) -> Expr:
    a = sympify(a)
    if a is ComplexInfinity:
        return ZERO
    if a is Indeterminate:
        return Indeterminate
    return ArcCot(a)


FUNCTIONS: dict[str, Callable[[Expr], Expr]] = {
    "exp": exp,
    "ln": ln,
    "sin": sin,
    "cos": cos,
    "arccot": arccot,
    "sqrt": sqrt,
}


# -- tree operations ------------------------------------------------------

def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    yield e
    for a in e.args:
        yield from walk(a)


def node_count(e: Expr) -> int:
    return 1 + sum(node_count(a) for a in e.args)


def has_special(e: Expr) -> bool:
    return any(is_special(n) for n in walk(e))


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the smart constructors."""
    if not e.args:
        return e
    return e.rebuild(tuple(simplify(a) for a in e.args))


def substitute(e: Expr, target, value=None) -> Expr:
    """Replace symbols simultaneously and re-simplify.

    ``substitute(e, x, v)`` or ``substitute(e, {x: v, y: w})``.  Division by
    an exact zero surfaces as ``ComplexInfinity``/``Indeterminate``.
    """
    mapping: Mapping[Expr, Expr]
    if isinstance(target, Mapping):
        mapping = {k: sympify(v) for k, v in target.items()}
    else:
        mapping = {target: sympify(value)}
    keys = frozenset(mapping)

    def go(node: Expr) -> Expr:
        if isinstance(node, Sym):
            return mapping.get(node, node)
        if not node.args or not (node.free_symbols & keys):
            return node
        return node.rebuild(tuple(go(a) for a in node.args))

    return go(e)


def differentiate(e: Expr, var: Sym) -> Expr:
    if var not in e.free_symbols:
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Add):
        return add(*(differentiate(a, var) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = differentiate(a, var)
            if da != ZERO:
                terms.append(mul(*e.args[:i], da, *e.args[i + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        n = e.exp
        return mul(n, pow_(e.base, add(n, NEG_ONE)), differentiate(e.base, var))
    da = differentiate(e.args[0], var)
    if isinstance(e, Exp):
        return mul(e, da)
    if isinstance(e, Ln):
        return mul(da, pow_(e.arg, NEG_ONE))
    if isinstance(e, Sin):
        return mul(cos(e.arg), da)
    if isinstance(e, Cos):
        return neg(mul(sin(e.arg), da))
    if isinstance(e, Sqrt):
        return mul(Fraction(1, 2), da, pow_(e, NEG_ONE))
    if isinstance(e, ArcCot):
        return neg(mul(da, pow_(add(ONE, pow_(e.arg, 2)), NEG_ONE)))
    raise TypeError(f"cannot differentiate {type(e).__name__}")


def coefficient_free_of(e: Expr, var: Sym) -> tuple[Expr, Expr]:
    """Split a product into ``(var-free part, var-dependent part)``."""
    factors = e.args if isinstance(e, Mul) else (e,)
    free = [f for f in factors if var not in f.free_symbols]
    dep = [f for f in factors if var in f.free_symbols]
    return mul(*free), mul(*dep)
