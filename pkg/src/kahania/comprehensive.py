"""Piecewise comprehensive antiderivatives and their parametric continuity.

Every consistent conjunction of discovered constraints (up to three) is
specialised.  A conjunction whose result agrees with the specialisation of
a less constrained arm is absorbed into that arm; the survivors become
arms, most constrained first, each excluding the single constraints whose
addition would hand the binding to another arm.  The generic result comes
last ("otherwise"), so evaluation is first-match-wins.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import InvalidAnchor, KahaniaError
from .expr import (
    Expr,
    Sym,
    ZERO,
    add,
    differentiate,
    has_special,
    is_special,
    neg,
    substitute,
)
from .integrate import antiderivative
from .kahanian import check_anchor, continuous_form
from .normal import equivalent, together
from .numeric import eval_numeric
from .parser import AST_SCHEMA, to_json
from .series import Finite, Pole, limit
from .special import (
    Constraint,
    ConstraintSet,
    apply_solution,
    consistent_combinations,
    discover_constraints,
    solve,
    try_specialize,
)


PIECEWISE_SCHEMA: dict = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["arms", "otherwise", "kahanian"],
    "additionalProperties": False,
    "properties": {
        "arms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["when", "unless", "body"],
                "additionalProperties": False,
                "properties": {
                    "when": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "unless": {"type": "array", "items": {"type": "string"}},
                    "body": {"oneOf": [
                        {"$ref": "#/definitions/node"},
                        {
                            "type": "object",
                            "required": ["op", "error"],
                            "properties": {"op": {"const": "Unevaluated"}, "error": {"type": "string"}},
                            "additionalProperties": False,
                        },
                    ]},
                },
            },
        },
        "otherwise": {"$ref": "#/definitions/node"},
        "kahanian": {"type": "boolean"},
    },
    "definitions": AST_SCHEMA["definitions"],
}


@dataclass
class Arm:
    when: ConstraintSet
    unless: tuple = ()  # Constraint, ...
    body: Expr | None = None  # None when the consequent could not be evaluated
    integrand: Expr = ZERO
    error: str | None = None

    @property
    def conditions(self) -> list[str]:
        return [str(c) for c in self.when.canonical()]

    @property
    def exclusions(self) -> list[str]:
        return [str(c) for c in self.unless]

    @property
    def is_atom(self) -> bool:
        return self.body is not None and is_special(self.body)


@dataclass
class PiecewiseAntiderivative:
    arms: list
    generic: Expr
    integrand: Expr
    variable: Sym
    params: tuple
    base: tuple = ()  # discovered constraints
    kahanianized: bool = False
    anchor: Expr | None = None

    @property
    def names(self) -> list[str]:
        return sorted(p.name for p in self.params)

    def to_json(self) -> dict:
        return {
            "arms": [
                {
                    "when": a.conditions,
                    "unless": a.exclusions,
                    "body": to_json(a.body) if a.body is not None else {"op": "Unevaluated", "error": a.error},
                }
                for a in self.arms
            ],
            "otherwise": to_json(self.generic),
            "kahanian": self.kahanianized,
        }

    def select(self, binding: dict) -> Expr:
        """First arm whose conditions hold for an exact parameter binding."""
        for arm in self.arms:
            if all(_holds(c, binding) for c in arm.when.constraints) and \
                    not any(_holds(c, binding) for c in arm.unless):
                return arm.body
        return self.generic


def _holds(c: Constraint, binding: dict) -> bool:
    return substitute(c.lhs, {Sym(n): v for n, v in binding.items()}) == ZERO


def _same(a: Expr | None, b: Expr | None) -> bool:
    if a is None or b is None:
        return False
    if is_special(a) or is_special(b):
        return a is b
    if has_special(a) or has_special(b):
        return False
    return equivalent(a, b)


def build_comprehensive(f: Expr, z: Sym, params: Iterable[Sym]) -> PiecewiseAntiderivative:
    params = tuple(sorted(params, key=lambda p: p.name))
    if z in params:
        raise ValueError("integration variable listed as a parameter")
    names = [p.name for p in params]
    G = antiderivative(f, z)
    base = tuple(sorted(discover_constraints(f, G, params, z), key=lambda c: (len(c.coeffs), str(c))))
    combos = consistent_combinations(base, names)
    combos.sort(key=lambda s: (s.rank, sorted(map(str, s.constraints))))
    cases = {s.key: try_specialize(f, s, z) for s in combos}
    by_key = {s.key: s for s in combos}

    owner: dict[tuple, tuple] = {}
    forced: set[tuple] = set()

    def assign():
        owner.clear()
        for s in combos:
            case = cases[s.key]
            if s.rank == 1 or s.key in forced or not case.evaluated:
                owner[s.key] = s.key
                continue
            parents = [p for p in combos if p.rank == s.rank - 1 and _subset(p, s, names)]
            # prefer the most constrained owning arm
            parents.sort(key=lambda p: -by_key[owner[p.key]].rank)
            owner[s.key] = s.key
            for p in parents:
                arm_key = owner[p.key]
                body = cases[arm_key].consequent
                if body is None:
                    continue
                got = body if is_special(body) else apply_solution(body, s)
                if _same(got, case.consequent):
                    owner[s.key] = arm_key
                    break

    def exclusions(arm: ConstraintSet) -> tuple:
        out, seen = [], set()
        for b in base:
            joint = solve(list(arm.constraints) + [b], names)
            if joint is None or joint.key == arm.key or joint.key in seen:
                continue
            seen.add(joint.key)
            if owner.get(joint.key, arm.key) != arm.key:
                out.append(b)
        return tuple(out)

    while True:
        assign()
        arm_keys = [k for k in owner if owner[k] == k]
        arm_keys.sort(key=lambda k: (-by_key[k].rank, _atom_rank(cases[k]), sorted(map(str, by_key[k].constraints))))
        arms = []
        for k in arm_keys:
            case = cases[k]
            arms.append(Arm(by_key[k], exclusions(by_key[k]), case.consequent, case.integrand, case.error))
        pw = PiecewiseAntiderivative(arms, G, f, z, params, base)
        bad = _ownership_conflicts(pw, combos, owner, cases)
        if not bad:
            return pw
        forced.update(bad)


def _atom_rank(case) -> int:
    return 1 if case.consequent is not None and is_special(case.consequent) else 0


def _subset(p: ConstraintSet, s: ConstraintSet, names: Sequence[str]) -> bool:
    joint = solve(list(p.constraints) + list(s.constraints), names)
    return joint is not None and joint.key == s.key


def _ownership_conflicts(pw: PiecewiseAntiderivative, combos, owner, cases) -> set:
    """Combos whose first matching arm disagrees with their own consequent."""
    names = pw.names
    bad = set()
    for s in combos:
        hit = None
        for arm in pw.arms:
            if _subset(arm.when, s, names) and not any(s.implies(b, names) for b in arm.unless):
                hit = arm
                break
        if hit is None or hit.when.key == s.key:
            continue
        mine = cases[s.key].consequent
        theirs = hit.body if hit.body is None or is_special(hit.body) else apply_solution(hit.body, s)
        if mine is not None and not _same(theirs, mine):
            bad.add(s.key)
    return bad


def exclusivity_violations(pw: PiecewiseAntiderivative) -> list[tuple[str, str]]:
    """Pairs of equally constrained arms whose conditions can hold together.

    Overlaps between arms of different rank are resolved by first-match
    order; ``dispatch_conflicts`` checks that this order is sound.
    """
    names = pw.names
    out = []
    for i, a in enumerate(pw.arms):
        for b in pw.arms[i + 1:]:
            if a.when.rank != b.when.rank:
                continue
            joint = solve(list(a.when.constraints) + list(b.when.constraints), names)
            if joint is None or any(joint.implies(c, names) for c in a.unless + b.unless):
                continue
            out.append((" & ".join(a.conditions), " & ".join(b.conditions)))
    return out


def dispatch_conflicts(pw: PiecewiseAntiderivative) -> list[str]:
    """Constraint combinations whose first matching arm gives a different result."""
    names = pw.names
    combos = consistent_combinations(pw.base, names)
    cases = {s.key: try_specialize(pw.integrand, s, pw.variable) for s in combos}
    bad = _ownership_conflicts(pw, combos, None, cases)
    return [" & ".join(sorted(map(str, s.constraints))) for s in combos if s.key in bad]


def kahanianize(pw: PiecewiseAntiderivative, z: Sym, anchor) -> PiecewiseAntiderivative:
    """Shift every non-atom body so that it vanishes at the anchor."""
    A = check_anchor(anchor)

    def shift(body: Expr, label: str) -> Expr:
        g = substitute(body, z, A)
        if has_special(g):
            raise InvalidAnchor(f"anchor {A} is not valid for the consequent {label}")
        return continuous_form(body, together(neg(g)))

    arms = []
    for arm in pw.arms:
        if arm.body is None or is_special(arm.body):
            arms.append(arm)
        else:
            arms.append(replace(arm, body=shift(arm.body, " & ".join(arm.conditions))))
    generic = shift(pw.generic, "otherwise")
    return replace(pw, arms=arms, generic=generic, kahanianized=True, anchor=A)


# -- continuity ----------------------------------------------------------------

@dataclass
class ArmCheck:
    conditions: list
    passed: bool
    method: str
    detail: str
    witnesses: list = field(default_factory=list)


DELTAS = (1e-2, 1e-3, 1e-4)


def _iterated_limit(e: Expr, steps: Sequence[tuple[Sym, Expr]]):
    for p, v in steps:
        res = limit(e, p, v)
        if not isinstance(res, Finite):
            return res
        e = res.value
    return Finite(e)


def continuity_check(pw: PiecewiseAntiderivative, z: Sym, z_samples: Sequence[float] = (0.5, 1.5, -1.2),
                     seed: int = 0, trials: int = 10) -> list[ArmCheck]:
    """Check that the generic body tends to each arm body at its constraints."""
    rng = random.Random(seed)
    report = []
    for arm in pw.arms:
        if arm.body is None or is_special(arm.body):
            continue
        sol = list(arm.when.solution)
        ok = True
        details = []
        outcome = None
        for i, (p, v) in enumerate(sol):
            order = sol[:i] + sol[i + 1:] + [(p, v)]
            try:
                outcome = _iterated_limit(pw.generic, order)
            except KahaniaError as exc:
                outcome = None
                details.append(f"{p}: {type(exc).__name__}")
            if isinstance(outcome, Finite) and _same(outcome.value, arm.body):
                details.append(f"{p}->{v}: limit matches")
                continue
            ok = False
            if isinstance(outcome, Pole):
                details.append(f"{p}->{v}: Pole({outcome.order})")
            elif outcome is not None:
                details.append(f"{p}->{v}: {outcome}")
        if ok:
            report.append(ArmCheck(arm.conditions, True, "symbolic", "; ".join(details)))
            continue
        if isinstance(outcome, Pole):
            report.append(ArmCheck(arm.conditions, False, "symbolic", "; ".join(details),
                                   [f"Pole({outcome.order})"]))
            continue
        passed, witnesses = _numeric_continuity(pw, arm, z, z_samples, rng, trials)
        report.append(ArmCheck(arm.conditions, passed, "numeric", "; ".join(details), witnesses))
    return report


def numeric_gaps(generic: Expr, body: Expr, sol: Sequence[tuple[Sym, Expr]], binding: dict,
                 deltas: Sequence[float] = DELTAS) -> list[float]:
    """|generic - body| with the last solved parameter offset by each delta."""
    exact = {p.name: complex(eval_numeric(v, binding)) for p, v in sol}
    target = eval_numeric(body, {**binding, **exact})
    p_last = sol[-1][0].name
    gaps = []
    for d in deltas:
        b = {**binding, **exact}
        b[p_last] = exact[p_last] + d
        gaps.append(abs(eval_numeric(generic, b) - target))
    return gaps


def _numeric_continuity(pw, arm, z, z_samples, rng, trials):
    sol = list(arm.when.solution)
    solved = {p for p, _ in sol}
    others = [p for p in pw.params if p not in solved]
    witnesses = []
    passed = True
    for zv in z_samples:
        for _ in range(max(1, trials if others else 1)):
            binding = {z.name: complex(zv)}
            for p in others:
                binding[p.name] = complex(rng.uniform(0.5, 2.0))
            try:
                gaps = numeric_gaps(pw.generic, arm.body, sol, binding)
            except KahaniaError as exc:
                witnesses.append(f"z={zv}: {type(exc).__name__}")
                passed = False
                continue
            monotone = all(b <= a for a, b in zip(gaps, gaps[1:]))
            if not monotone or gaps[-1] > 1e-4:
                passed = False
                witnesses.append(f"z={zv}: gaps {['%.3g' % g for g in gaps]}")
            if not others:
                break
    return passed, witnesses


def derivative_preserved(before: PiecewiseAntiderivative, after: PiecewiseAntiderivative) -> bool:
    pairs = [(a.body, b.body) for a, b in zip(before.arms, after.arms) if a.body is not None]
    pairs.append((before.generic, after.generic))
    z = before.variable
    for x, y in pairs:
        if is_special(x):
            if x is not y:
                return False
            continue
        if not equivalent(differentiate(x, z), differentiate(y, z)):
            return False
    return True

