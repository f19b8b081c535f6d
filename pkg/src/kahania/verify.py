"""Independent numeric oracles: adaptive quadrature and derivative sampling."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import KahaniaError
from .expr import Expr, Sym, differentiate
from .numeric import eval_numeric
from .special import Constraint

DEFAULT_TOL = 1e-9
DEFAULT_BUDGET = 100_000
MAX_DEPTH = 60


@dataclass
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int
    converged: bool


def quadrature(f: Expr, z: Sym, a: complex, b: complex, bindings: Mapping[str, complex] | None = None,
               tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> QuadratureResult:
    """Adaptive Simpson along the straight segment from ``a`` to ``b``.

    The segment is parameterised by ``t`` in [0, 1]; each panel is accepted
    when its Richardson error estimate is within its share of
    ``tol * (1 + |value|)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = complex(a), complex(b)
    scale = b - a
    env = dict(bindings or {})
    count = 0

    def g(t: float) -> complex:
        nonlocal count
        count += 1
        env[z.name] = a + t * scale
        return eval_numeric(f, env) * scale

    f0, fm, f1 = g(0.0), g(0.5), g(1.0)
    whole = (f0 + 4 * fm + f1) / 6
    # rough magnitude for the relative part of the tolerance
    target = tol * (1 + abs(whole))
    stack = [(0.0, 1.0, f0, fm, f1, whole, target, 0)]
    total = 0j
    err = 0.0
    converged = True
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        if count + 2 > budget:
            # out of evaluations: keep the coarse panel, its error unknown
            total += s
            err += abs(s)
            converged = False
            continue
        mid = (lo + hi) / 2
        fl, fr = g((lo + mid) / 2), g((mid + hi) / 2)
        h = hi - lo
        left = h * (flo + 4 * fl + fmid) / 12
        right = h * (fmid + 4 * fr + fhi) / 12
        delta = left + right - s
        if abs(delta) <= 15 * eps or depth >= MAX_DEPTH:
            if abs(delta) > 15 * eps:
                converged = False
            total += left + right + delta / 15
            err += abs(delta) / 15
            continue
        stack.append((mid, hi, fmid, fr, fhi, right, eps / 2, depth + 1))
        stack.append((lo, mid, flo, fl, fmid, left, eps / 2, depth + 1))
    if err > tol * (1 + abs(total)):
        converged = False
    return QuadratureResult(total, err, count, converged)


@dataclass
class RoundTripReport:
    passed: bool
    max_deviation: float
    samples: int
    witness: dict | None = None
    failures: list = field(default_factory=list)


def _far_from(binding: Mapping[str, complex], constraints: Sequence[Constraint], gap: float) -> bool:
    for c in constraints:
        v = c.const + sum(complex(binding[n]) * float(k) for n, k in c.coeffs)
        if abs(v) < gap:
            return False
    return True


def random_binding(rng: random.Random, z: Sym, params: Mapping[str, tuple[float, float]],
                   constraints: Sequence[Constraint] = (), z_range: tuple[float, float] = (0.2, 2.0),
                   gap: float = 0.1) -> dict:
    """A binding with every parameter at least ``gap`` from each constraint surface."""
    for _ in range(1000):
        b = {name: complex(rng.uniform(*rng_range)) for name, rng_range in params.items()}
        if _far_from(b, constraints, gap):
            b[z.name] = complex(rng.uniform(*z_range))
            return b
    raise ValueError("could not sample a binding away from the constraints")


def diff_roundtrip_check(G: Expr, f: Expr, z: Sym, param_ranges: Mapping[str, tuple[float, float]],
                         constraints: Sequence[Constraint] = (), samples: int = 50, seed: int = 0,
                         threshold: float = 1e-9, z_range: tuple[float, float] = (0.2, 2.0)) -> RoundTripReport:
    """Sample ``d/dz G`` against ``f`` at random generic points."""
    rng = random.Random(seed)
    dG = differentiate(G, z)
    worst, witness = 0.0, None
    failures = []
    for _ in range(samples):
        b = random_binding(rng, z, param_ranges, constraints, z_range)
        try:
            want = eval_numeric(f, b)
            got = eval_numeric(dG, b)
        except KahaniaError as exc:
            failures.append((b, f"{type(exc).__name__}: {exc}"))
            continue
        dev = abs(got - want) / (1 + abs(want))
        if dev > worst:
            worst, witness = dev, b
    passed = worst <= threshold and not failures
    return RoundTripReport(passed, worst, samples, witness if not passed else None, failures)

