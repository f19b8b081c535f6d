"""Parameter constraints where a generic antiderivative fails.

Constraints are linear equations ``lhs = 0`` over the parameters with exact
rational coefficients.  Conjunctions are solved by Gaussian elimination;
their reduced row echelon form (the "closure") identifies equivalent sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import KahaniaError, NonlinearConstraint, UnsupportedForm
from .expr import (
    Add,
    Exp,
    Expr,
    Ln,
    Num,
    Pow,
    Sym,
    ZERO,
    add,
    is_special,
    mul,
    num,
    split_coeff,
    substitute,
    walk,
)
from .integrate import antiderivative
from .normal import expand

MAX_COMBINATION = 3


@dataclass(frozen=True)
class Constraint:
    """``sum coeffs[p]*p + const = 0``; normalised so the first coefficient is 1."""

    coeffs: tuple  # ((name, Fraction), ...) sorted by name
    const: Fraction

    @property
    def lhs(self) -> Expr:
        return add(*(mul(c, Sym(n)) for n, c in self.coeffs), self.const)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coeffs)

    def __str__(self) -> str:
        if len(self.coeffs) == 1:
            return f"{self.coeffs[0][0]}={_fmt(-self.const)}"
        parts = []
        for i, (n, c) in enumerate(self.coeffs):
            mag = "" if abs(c) == 1 else f"{_fmt(abs(c))}*"
            sign = "-" if c < 0 else ("+" if i else "")
            parts.append(f"{sign}{mag}{n}")
        if self.const:
            parts.append(f"{'-' if self.const < 0 else '+'}{_fmt(abs(self.const))}")
        return "".join(parts) + "=0"

    def __repr__(self) -> str:
        return f"Constraint({self})"


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def make_constraint(coeffs: dict, const) -> Constraint:
    items = sorted((n, Fraction(c)) for n, c in coeffs.items() if c)
    if not items:
        raise ValueError("constraint without parameters")
    lead = items[0][1]
    return Constraint(tuple((n, c / lead) for n, c in items), Fraction(const) / lead)


def linear_form(e: Expr, params: Iterable[Sym]) -> tuple[dict, Fraction] | None:
    """Coefficients of ``e`` as a linear form over ``params``, or ``None``."""
    names = {p.name for p in params}
    coeffs: dict[str, Fraction] = {}
    const = Fraction(0)
    e = expand(e)
    for t in e.args if isinstance(e, Add) else (e,):
        c, rest = split_coeff(t)
        if isinstance(rest, Num) or rest == 1:
            const += c
        elif isinstance(rest, Sym) and rest.name in names:
            coeffs[rest.name] = coeffs.get(rest.name, 0) + c
        else:
            return None
    return coeffs, const


def constraint_from(e: Expr, params: Iterable[Sym]) -> Constraint:
    """Constraint ``e = 0``; raises NonlinearConstraint outside the linear class."""
    params = list(params)
    if isinstance(e, Ln):
        e = add(e.arg, -1)
    form = linear_form(e, params)
    if form is None or not any(form[0].values()):
        raise NonlinearConstraint(f"cannot treat {e} = 0 as a linear parameter constraint")
    return make_constraint(*form)


def discover_constraints(f: Expr, G: Expr, params: Iterable[Sym], z: Sym | None = None) -> set[Constraint]:
    """Parameter constraints at which ``G`` (the antiderivative of ``f``) fails."""
    params = list(params)
    pset = set(params)
    if z is None:
        extra = sorted(f.free_symbols - pset, key=lambda s: s.name)
        z = extra[0] if len(extra) == 1 else None
    found: set[Constraint] = set()
    for node in walk(G):
        if isinstance(node, Pow) and node.exp.value < 0:
            base = node.base
            if base.free_symbols and base.free_symbols <= pset:
                found.add(constraint_from(base, params))
    for e in (f, G):
        for node in walk(e):
            if not isinstance(node, Exp):
                continue
            for inner in walk(node.arg):
                if isinstance(inner, Ln) and inner.arg in pset:
                    found.add(constraint_from(inner.arg, params))
    if z is not None:
        for node in walk(f):
            if isinstance(node, Exp):
                k = _power_of(node.arg, z)
                if k is not None and k.free_symbols and k.free_symbols <= pset:
                    found.add(constraint_from(add(k, 1), params))
    return found


def _power_of(arg: Expr, z: Sym) -> Expr | None:
    """``k`` when ``arg == k*ln(z)``."""
    from .integrate import _log_coeff

    got = _log_coeff(arg, z)
    if got is None or got[1] != z:
        return None
    return got[0]


# -- exact linear algebra ------------------------------------------------------

def _rref(cs: Sequence[Constraint], names: Sequence[str]):
    """Reduced rows over ``names + [const]``; ``None`` when inconsistent."""
    rows = []
    for c in cs:
        d = dict(c.coeffs)
        rows.append([d.get(n, Fraction(0)) for n in names] + [c.const])
    pivots = []
    r = 0
    for col in range(len(names)):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for row in rows[r:]:
        if row[-1]:
            return None
    return tuple(tuple(row) for row in rows[:r]), tuple(pivots)


@dataclass(frozen=True)
class ConstraintSet:
    """A consistent conjunction of constraints with its exact solution."""

    constraints: frozenset
    key: tuple  # reduced echelon rows, identifies equivalent conjunctions
    solution: tuple  # ((Sym, Expr), ...) pivot parameter -> value
    names: tuple = ()

    def canonical(self) -> list[Constraint]:
        """One constraint per reduced row, independent of how the set was written."""
        out = [make_constraint(dict(zip(self.names, row[:-1])), row[-1]) for row in self.key]
        return sorted(out, key=lambda c: (len(c.coeffs), str(c)))

    @property
    def rank(self) -> int:
        return len(self.key)

    def mapping(self) -> dict:
        return dict(self.solution)

    def implies(self, c: Constraint, names: Sequence[str]) -> bool:
        both = solve(list(self.constraints) + [c], names)
        return both is not None and both.key == self.key


def solve(cs: Sequence[Constraint], names: Sequence[str]) -> ConstraintSet | None:
    got = _rref(cs, names)
    if got is None:
        return None
    rows, pivots = got
    sol = []
    for row, col in zip(rows, pivots):
        terms = [mul(-row[j], Sym(names[j])) for j in range(len(names)) if j != col and row[j]]
        sol.append((Sym(names[col]), add(num(-row[-1]), *terms)))
    return ConstraintSet(frozenset(cs), rows, tuple(sol), tuple(names))


def consistent_combinations(base: Sequence[Constraint], names: Sequence[str],
                            max_size: int = MAX_COMBINATION) -> list[ConstraintSet]:
    """All consistent conjunctions of up to ``max_size`` base constraints, deduplicated."""
    seen: dict[tuple, ConstraintSet] = {}
    for size in range(1, max_size + 1):
        for combo in combinations(base, size):
            s = solve(combo, names)
            if s is None or s.key in seen or s.rank < size:
                continue
            seen[s.key] = s
    return list(seen.values())


def apply_solution(e: Expr, s: ConstraintSet) -> Expr:
    """Substitute a solution, ``ln`` arguments last (so that ``0^0 = 1``)."""
    mapping = s.mapping()
    log_args = {n.arg for n in walk(e) if isinstance(n, Ln)}
    first = {k: v for k, v in mapping.items() if k not in log_args}
    last = {k: v for k, v in mapping.items() if k in log_args}
    if first:
        e = substitute(e, first)
    if last and not is_special(e):
        e = substitute(e, last)
    return e


@dataclass
class SpecialCase:
    constraints: frozenset
    exclusions: frozenset = field(default_factory=frozenset)
    integrand: Expr = ZERO
    consequent: Expr | None = None
    error: str | None = None

    @property
    def evaluated(self) -> bool:
        return self.consequent is not None


def specialize(f: Expr, c: ConstraintSet | Iterable[Constraint], z: Sym,
               names: Sequence[str] | None = None) -> SpecialCase:
    """Specialise ``f`` to the constraint conjunction and integrate it."""
    if not isinstance(c, ConstraintSet):
        cs = list(c)
        names = names or sorted({n for k in cs for n in k.symbols})
        solved = solve(cs, names)
        if solved is None:
            raise ValueError("inconsistent constraints")
        c = solved
    g = apply_solution(f, c)
    case = SpecialCase(c.constraints, integrand=g)
    if is_special(g):
        case.consequent = g
        return case
    case.consequent = antiderivative(g, z)
    return case


def try_specialize(f: Expr, c: ConstraintSet, z: Sym) -> SpecialCase:
    """Like ``specialize`` but records engine errors instead of raising."""
    try:
        return specialize(f, c, z)
    except (UnsupportedForm, KahaniaError) as exc:
        return SpecialCase(c.constraints, integrand=apply_solution(f, c),
                           error=f"{type(exc).__name__}: {exc}")
