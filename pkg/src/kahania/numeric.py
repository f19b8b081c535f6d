"""Complex double-precision evaluation on principal branches.

ArcCot is pinned to ``arctan(1/w)`` with ``arccot(0) = pi/2``; this is the
convention every grid file and numeric check in the package relies on.
"""

from __future__ import annotations

import cmath
import math
from typing import Mapping

from .errors import DomainError, UnboundSymbol
from .expr import (
    Add,
    ArcCot,
    ComplexInfinity,
    Cos,
    Exp,
    Expr,
    Indeterminate,
    Ln,
    Mul,
    Num,
    Pow,
    Sin,
    Sqrt,
    Sym,
)

Binding = Mapping[str, complex]


def arccot(w: complex) -> complex:
    if w == 0:
        return complex(math.pi / 2)
    try:
        return cmath.atan(1 / w)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"arccot pole at {w}") from exc


def eval_numeric(e: Expr, binding: Binding) -> complex:
    """Evaluate ``e`` with every free symbol taken from ``binding`` (by name)."""
    try:
        return _ev(e, binding)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError(str(exc)) from exc


def _ev(e: Expr, b: Binding) -> complex:
    if isinstance(e, Num):
        v = e.value
        return complex(v.numerator / v.denominator)
    if isinstance(e, Sym):
        try:
            return complex(b[e.name])
        except KeyError:
            raise UnboundSymbol(e.name) from None
    if isinstance(e, Add):
        return sum((_ev(a, b) for a in e.args), 0j)
    if isinstance(e, Mul):
        out = 1 + 0j
        for a in e.args:
            out *= _ev(a, b)
        return out
    if isinstance(e, Pow):
        base = _ev(e.base, b)
        n = int(e.exp.value)
        if base == 0 and n < 0:
            raise DomainError("division by zero")
        return base**n
    if e is ComplexInfinity or e is Indeterminate:
        raise DomainError(f"cannot evaluate {type(e).__name__}")
    x = _ev(e.args[0], b)
    if isinstance(e, Exp):
        return cmath.exp(x)
    if isinstance(e, Ln):
        if x == 0:
            raise DomainError("ln(0)")
        return cmath.log(x)
    if isinstance(e, Sin):
        return cmath.sin(x)
    if isinstance(e, Cos):
        return cmath.cos(x)
    if isinstance(e, Sqrt):
        return cmath.sqrt(x)
    if isinstance(e, ArcCot):
        return arccot(x)
    raise TypeError(f"cannot evaluate {type(e).__name__}")
