"""Semidefinite integration from a finite anchor and Kahanian constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DivergentIntegral, InfiniteAnchor, InvalidAnchor, NoValidAnchor
from .expr import (
    ComplexInfinity,
    Expr,
    Indeterminate,
    Sym,
    ZERO,
    add,
    has_special,
    neg,
    node_count,
    substitute,
    sympify,
)
from .integrate import antiderivative
from .normal import together
from .series import Finite, IndeterminateLimit, Pole, limit

DEFAULT_CANDIDATES = (1, 0, -1, 2)
_INFINITE_NAMES = {"inf", "+inf", "-inf", "oo", "+oo", "-oo", "infinity", "-infinity", "complexinfinity"}


@dataclass
class KahanianResult:
    generic: Expr
    anchor: Expr
    kahanian_constant: Expr
    continuous_form: Expr
    anchor_tried: list = field(default_factory=list)  # [(candidate, outcome), ...]


def check_anchor(A) -> Expr:
    """Validate an anchor: finite, exact and parameter-free."""
    if isinstance(A, str):
        if A.strip().lower() in _INFINITE_NAMES:
            raise InfiniteAnchor(f"anchor {A!r} is not finite")
        from .parser import parse

        A = parse(A)
    if isinstance(A, float):
        if not math.isfinite(A):
            raise InfiniteAnchor(f"anchor {A!r} is not finite")
        A = Fraction(A)
    A = sympify(A)
    if A is ComplexInfinity:
        raise InfiniteAnchor("anchor is ComplexInfinity")
    if A is Indeterminate:
        raise InvalidAnchor("anchor is Indeterminate")
    if A.free_symbols:
        raise InvalidAnchor(f"anchor {A} depends on symbols")
    return A


def _tidy(e: Expr) -> Expr:
    t = together(e)
    return t if node_count(t) < node_count(e) else e


def kahanian_constant(G: Expr, z: Sym, A) -> Expr:
    """``-G(A)`` as a single rational expression in the parameters."""
    A = check_anchor(A)
    g = substitute(G, z, A)
    if has_special(g):
        raise InvalidAnchor(f"G({A}) is {g}")
    return together(neg(g))


def continuous_form(G: Expr, C: Expr) -> Expr:
    return _tidy(add(G, C))


def semidefinite(f: Expr, z: Sym, A) -> Expr:
    """Integral of ``f`` from the anchor ``A`` to ``z``."""
    A = check_anchor(A)
    G = antiderivative(f, z)
    return continuous_form(G, kahanian_constant(G, z, A))


def select_anchor(G: Expr, z: Sym, candidates: Sequence = DEFAULT_CANDIDATES) -> KahanianResult:
    """Pick the anchor giving the simplest Kahanian constant.

    A zero constant wins outright; otherwise the smallest node count wins
    with ties going to the earlier candidate.
    """
    tried = []
    best = None
    for cand in candidates:
        A = check_anchor(cand)
        try:
            C = kahanian_constant(G, z, A)
        except InvalidAnchor as exc:
            tried.append((A, f"invalid: {exc}"))
            continue
        size = node_count(C)
        tried.append((A, f"constant {C} (size {size})"))
        if C == ZERO:
            best = (A, C)
            break
        if best is None or size < node_count(best[1]):
            best = (A, C)
    if best is None:
        raise NoValidAnchor("no candidate anchor gives a finite G(A)")
    A, C = best
    return KahanianResult(G, A, C, continuous_form(G, C), tried)


def kahanian(f: Expr, z: Sym, anchor=None, candidates: Sequence = DEFAULT_CANDIDATES) -> KahanianResult:
    """Generic antiderivative plus Kahanian constant for ``f``."""
    if anchor is not None:
        A = check_anchor(anchor)
        G = antiderivative(f, z)
        C = kahanian_constant(G, z, A)
        return KahanianResult(G, A, C, continuous_form(G, C), [(A, f"constant {C} (given)")])
    return select_anchor(antiderivative(f, z), z, candidates)


def _endpoint(G: Expr, z: Sym, x: Expr, direction: int) -> Expr:
    g = substitute(G, z, x)
    if not has_special(g):
        return g
    res = limit(G, z, x, direction)
    if isinstance(res, Finite):
        return res.value
    if isinstance(res, Pole):
        raise DivergentIntegral(f"antiderivative has a pole of order {res.order} at {z} = {x}")
    raise DivergentIntegral(f"antiderivative diverges at {z} = {x} ({res.reason})")


def definite_with_limit(f: Expr, z: Sym, a, b, at_point: tuple[Sym, Expr] | None = None) -> Expr:
    """``G(b) - G(a)`` kept as one expression, optionally taken to a parameter limit."""
    a, b = sympify(a), sympify(b)
    G = antiderivative(f, z)
    D = add(_endpoint(G, z, b, -1), neg(_endpoint(G, z, a, 1)))
    if at_point is None:
        return _tidy(D)
    p, pc = at_point
    res = limit(D, p, sympify(pc))
    if isinstance(res, Finite):
        return res.value
    if isinstance(res, Pole):
        raise DivergentIntegral(f"pole of order {res.order} as {p} -> {pc}")
    assert isinstance(res, IndeterminateLimit)
    return Indeterminate

