"""Variation of parameters for the forced oscillator x'' + k^2 x = cos(w t)."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, Sym, ZERO, add, cos, differentiate, mul, neg, pow_, sin, substitute
from .integrate import antiderivative, product_to_sum
from .normal import normal, together
from .series import Finite, LimitResult, limit


@dataclass
class OscillatorSolution:
    u1: Expr
    u2: Expr
    wronskian: Expr
    particular: Expr
    resonant: LimitResult
    used_kahanian: bool

    @property
    def resonant_limit(self) -> Expr | None:
        return self.resonant.value if isinstance(self.resonant, Finite) else None


def particular_integral(k: Sym, w: Sym, t: Sym, kahanian: bool = False) -> OscillatorSolution:
    """Particular solution built from x1 = cos(kt), x2 = sin(kt)."""
    x1, x2 = cos(mul(k, t)), sin(mul(k, t))
    forcing = cos(mul(w, t))
    W = normal(add(mul(x1, differentiate(x2, t)), neg(mul(x2, differentiate(x1, t)))))
    inv_w = pow_(W, -1)
    u1 = neg(antiderivative(product_to_sum(mul(x2, forcing, inv_w)), t))
    u2 = antiderivative(product_to_sum(mul(x1, forcing, inv_w)), t)
    if kahanian:
        # anchor t = 0; u2 already vanishes there
        u1 = add(u1, neg(substitute(u1, t, ZERO)))
    xp = _tidy(add(mul(u1, x1), mul(u2, x2)))
    return OscillatorSolution(u1, u2, W, xp, limit(xp, w, k), kahanian)


def _tidy(e: Expr) -> Expr:
    n = normal(e)
    return together(n)
