"""Antiderivatives with Kahanian constants and comprehensive special cases."""

from .comprehensive import PiecewiseAntiderivative, build_comprehensive, continuity_check, kahanianize
from .errors import KahaniaError, ParseError
from .expr import Expr, Sym, differentiate, simplify, substitute
from .integrate import antiderivative
from .kahanian import KahanianResult, definite_with_limit, kahanian, select_anchor
from .normal import equivalent, normal, together
from .numeric import eval_numeric
from .parser import parse, render
from .resonance import particular_integral
from .series import Finite, IndeterminateLimit, Pole, laurent_series, limit
from .special import discover_constraints
from .verify import diff_roundtrip_check, quadrature

__version__ = "0.1.0"

__all__ = [
    "Expr", "Finite", "IndeterminateLimit", "KahaniaError", "KahanianResult", "ParseError",
    "PiecewiseAntiderivative", "Pole", "Sym", "antiderivative", "build_comprehensive",
    "continuity_check", "definite_with_limit", "diff_roundtrip_check", "differentiate",
    "discover_constraints", "equivalent", "eval_numeric", "kahanian", "kahanianize",
    "laurent_series", "limit", "normal", "parse", "particular_integral", "quadrature",
    "render", "select_anchor", "simplify", "substitute", "together",
]
