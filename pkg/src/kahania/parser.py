"""Text grammar for expressions, plus plain/LaTeX/JSON printers.

Grammar (no implicit multiplication)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Decimal and scientific literals become exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import ParseError
from .expr import (
    Add,
    ComplexInfinity,
    Expr,
    FUNCTIONS,
    Function,
    Indeterminate,
    Mul,
    Num,
    Pow,
    Sym,
    add,
    mul,
    neg,
    num,
    pow_,
    split_coeff,
)

RESERVED = set(FUNCTIONS) | {"ComplexInfinity", "Indeterminate"}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    start: int
    end: int


def _byte_span(text: str, start: int, end: int) -> tuple[int, int]:
    return len(text[:start].encode()), len(text[:end].encode())


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            tokens.append(Token("num", text[i:j], i, j))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], i, j))
            i = j
            continue
        if c in "+-*/^(),":
            tokens.append(Token("op", c, i, i + 1))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", _byte_span(text, i, i + 1))
    tokens.append(Token("end", "", n, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, _byte_span(self.text, tok.start, tok.end))

    def take(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.kind != "op" or self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.take()

    def is_op(self, chars: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in chars

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("expected expression, found end of input")
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"expected operator or end of input, found {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.is_op("+-"):
            op = self.take().text
            right = self.term()
            left = add(left, right) if op == "+" else add(left, neg(right))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.is_op("*/"):
            op = self.take().text
            right = self.unary()
            left = mul(left, right) if op == "*" else mul(left, pow_(right, -1))
        return left

    def unary(self) -> Expr:
        if self.is_op("-"):
            self.take()
            return neg(self.unary())
        if self.is_op("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.is_op("^"):
            self.take()
            return pow_(base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return num(Fraction(tok.text))
        if tok.kind == "name":
            self.take()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[tok.text](arg)
            if self.is_op("("):
                raise self.error(f"unknown function {tok.text!r}", tok)
            if tok.text == "ComplexInfinity":
                return ComplexInfinity
            if tok.text == "Indeterminate":
                return Indeterminate
            return Sym(tok.text)
        if self.is_op("("):
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise self.error(f"expected number, name or '(', found {found!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into a canonical expression; raises :class:`ParseError`."""
    return _Parser(text).parse()


def parse_symbol(text: str) -> Sym:
    e = parse(text)
    if not isinstance(e, Sym):
        raise ParseError(f"expected a symbol name, got {text!r}", (0, len(text.encode())))
    return e


# -- plain printer --------------------------------------------------------

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _as_power(e: Expr):
    """``(u, k)`` when ``e`` is ``exp(k*ln(u))``, printed back as ``u^k``."""
    if getattr(e, "name", "") != "exp" or not isinstance(e.arg, Mul):
        return None
    logs = [f for f in e.arg.args if getattr(f, "name", "") == "ln"]
    if len(logs) != 1:
        return None
    rest = mul(*(f for f in e.arg.args if f is not logs[0]))
    return logs[0].arg, rest


def _is_negative_term(t: Expr) -> bool:
    return split_coeff(t)[0] < 0


def _plain(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        v = e.value
        if v.denominator != 1:
            return f"{v.numerator}/{v.denominator}", (_NEG if v < 0 else _MUL)
        return str(v.numerator), (_NEG if v < 0 else _ATOM)
    if isinstance(e, Sym):
        return e.name, _ATOM
    if e is ComplexInfinity:
        return "ComplexInfinity", _ATOM
    if e is Indeterminate:
        return "Indeterminate", _ATOM
    if isinstance(e, Function):
        power = _as_power(e)
        if power is not None:
            base, k = power
            return f"{_wrap(base, _ATOM)}^{_wrap(k, _POW)}", _POW
        return f"{e.name}({_plain(e.arg)[0]})", _ATOM
    if isinstance(e, Add):
        return _plain_add(e), _ADD
    if isinstance(e, (Mul, Pow)):
        return _plain_mul(e)
    raise TypeError(type(e).__name__)


def _wrap(e: Expr, min_prec: int) -> str:
    s, p = _plain(e)
    return f"({s})" if p < min_prec else s


def _positive_first(e: Add) -> list:
    terms = list(e.args)
    if _is_negative_term(terms[0]):
        for i, t in enumerate(terms):
            if not _is_negative_term(t):
                terms.insert(0, terms.pop(i))
                break
    return terms


def _plain_add(e: Add) -> str:
    terms = _positive_first(e)
    out = _plain(terms[0])[0]
    for t in terms[1:]:
        if _is_negative_term(t):
            out += " - " + _wrap(neg(t), _MUL)
        else:
            out += " + " + _wrap(t, _MUL)
    return out


def _absorb_sign(c, factors: tuple) -> tuple:
    """Move a negative coefficient into the product's only sum, for display."""
    sums = [i for i, f in enumerate(factors) if isinstance(f, Add)]
    if c >= 0 or len(sums) != 1:
        return c, factors
    i = sums[0]
    flipped = add(*(neg(t) for t in factors[i].args))
    return -c, factors[:i] + (flipped,) + factors[i + 1:]


def _plain_mul(e: Expr) -> tuple[str, int]:
    c, rest = split_coeff(e)
    c, factors = _absorb_sign(c, rest.args if isinstance(rest, Mul) else (rest,))
    numer: list[str] = []
    denom: list[str] = []
    for f in factors:
        if isinstance(f, Pow) and f.exp.value < 0:
            d = pow_(f.base, -f.exp.value)
            denom.append(_wrap(d, _POW) if not isinstance(d, Pow) else _plain_pow(d))
        elif isinstance(f, Pow):
            numer.append(_plain_pow(f))
        elif f != 1:
            numer.append(_wrap(f, _NEG))
    sign = "-" if c < 0 else ""
    c = abs(c)
    if c.numerator != 1 or not numer:
        numer.insert(0, str(c.numerator))
    if c.denominator != 1:
        denom.insert(0, str(c.denominator))
    s = "*".join(numer)
    if denom:
        d = denom[0] if len(denom) == 1 else "(" + "*".join(denom) + ")"
        s = f"{s}/{d}"
    if not sign and not denom and len(numer) == 1 and isinstance(e, Pow):
        return s, _POW
    return sign + s, (_NEG if sign else _MUL)


def _plain_pow(p: Pow) -> str:
    base = _wrap(p.base, _ATOM)
    exp = _wrap(p.exp, _POW)
    return f"{base}^{exp}"


# -- LaTeX (display only) -------------------------------------------------

_LATEX_FUNCS = {"exp": r"\exp", "ln": r"\ln", "sin": r"\sin", "cos": r"\cos", "arccot": r"\operatorname{arccot}"}


def _latex(e: Expr) -> str:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator)
        sign = "-" if v < 0 else ""
        return rf"{sign}\frac{{{abs(v.numerator)}}}{{{v.denominator}}}"
    if isinstance(e, Sym):
        greek = {"alpha", "beta", "lambda", "sigma", "omega", "tau", "epsilon"}
        return "\\" + e.name if e.name in greek else e.name
    if e is ComplexInfinity:
        return r"\tilde{\infty}"
    if e is Indeterminate:
        return r"\mathrm{Indeterminate}"
    if isinstance(e, Function):
        power = _as_power(e)
        if power is not None:
            base, k = power
            return f"{_latex_pow_base(base)}^{{{_latex(k)}}}"
        if e.name == "sqrt":
            return rf"\sqrt{{{_latex(e.arg)}}}"
        return rf"{_LATEX_FUNCS[e.name]}\left({_latex(e.arg)}\right)"
    if isinstance(e, Add):
        terms = _positive_first(e)
        out = _latex(terms[0])
        for t in terms[1:]:
            if _is_negative_term(t):
                out += " - " + _latex_factor(neg(t))
            else:
                out += " + " + _latex(t)
        return out
    if isinstance(e, Pow) and e.exp.value > 0:
        return f"{_latex_pow_base(e.base)}^{{{_latex(e.exp)}}}"
    c, rest = split_coeff(e)
    c, factors = _absorb_sign(c, rest.args if isinstance(rest, Mul) else (rest,))
    top_factors = [f for f in factors if not (isinstance(f, Pow) and f.exp.value < 0)]
    numer = [_latex_factor(f) for f in top_factors]
    bottom = [pow_(f.base, -f.exp.value) for f in factors if isinstance(f, Pow) and f.exp.value < 0]
    denom = [_latex_factor(f) for f in bottom]
    if len(bottom) == 1 and c.denominator == 1:
        denom = [_latex(bottom[0])]
    sign = "-" if c < 0 else ""
    c = abs(c)
    if c.denominator != 1:
        denom.insert(0, str(c.denominator))
    if c.numerator != 1 or not numer:
        numer.insert(0, str(c.numerator))
    top = r" \, ".join(numer)
    if denom:
        if len(top_factors) == 1 and c.numerator == 1:
            top = _latex(top_factors[0])
        return rf"{sign}\frac{{{top}}}{{{' '.join(denom)}}}"
    return sign + top


def _latex_pow_base(base: Expr) -> str:
    b = _latex(base)
    if isinstance(base, Sym) or (isinstance(base, Num) and base.value.denominator == 1 and base.value > 0):
        return b
    return rf"\left({b}\right)"


def _latex_factor(e: Expr) -> str:
    s = _latex(e)
    return rf"\left({s}\right)" if isinstance(e, Add) else s


# -- JSON AST -------------------------------------------------------------

def to_json(e: Expr) -> dict[str, Any]:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1:
            return {"op": "Int", "num": v.numerator}
        return {"op": "Rat", "num": v.numerator, "den": v.denominator}
    if isinstance(e, Sym):
        return {"op": "Sym", "name": e.name}
    if e is ComplexInfinity:
        return {"op": "ComplexInfinity"}
    if e is Indeterminate:
        return {"op": "Indeterminate"}
    op = {"exp": "Exp", "ln": "Ln", "sin": "Sin", "cos": "Cos", "arccot": "ArcCot", "sqrt": "Sqrt"}.get(
        getattr(e, "name", ""), type(e).__name__
    )
    return {"op": op, "args": [to_json(a) for a in e.args]}


def from_json(d: dict[str, Any]) -> Expr:
    op = d["op"]
    if op == "Int":
        return num(int(d["num"]))
    if op == "Rat":
        return num(Fraction(int(d["num"]), int(d["den"])))
    if op == "Sym":
        return Sym(d["name"])
    if op == "ComplexInfinity":
        return ComplexInfinity
    if op == "Indeterminate":
        return Indeterminate
    args = [from_json(a) for a in d["args"]]
    if op == "Add":
        return add(*args)
    if op == "Mul":
        return mul(*args)
    if op == "Pow":
        return pow_(*args)
    return FUNCTIONS[op.lower()](args[0])


AST_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "$ref": "#/definitions/node",
    "definitions": {
        "node": {
            "type": "object",
            "required": ["op"],
            "properties": {
                "op": {
                    "enum": [
                        "Add", "Mul", "Pow", "Exp", "Ln", "Sin", "Cos", "ArcCot", "Sqrt",
                        "Sym", "Int", "Rat", "ComplexInfinity", "Indeterminate",
                    ]
                },
                "args": {"type": "array", "items": {"$ref": "#/definitions/node"}},
                "name": {"type": "string"},
                "num": {"type": "integer"},
                "den": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        }
    },
}


def render(e: Expr, format: str = "plain"):
    """Render as ``plain`` text (re-parseable), ``latex`` or ``json`` (a dict)."""
    if format == "plain":
        return _plain(e)[0]
    if format == "latex":
        return _latex(e)
    if format == "json":
        return to_json(e)
    raise ValueError(f"unknown format {format!r}")
