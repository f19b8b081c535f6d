"""Command-line interface.

Exit codes: 0 success, 1 malformed input or flags, 2 engine error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Sequence

from .comprehensive import PiecewiseAntiderivative, build_comprehensive, kahanianize
from .errors import InvalidAnchor, KahaniaError, NoValidAnchor, NonlinearConstraint, ParseError
from .expr import Expr, Sym, is_special, substitute
from .integrate import antiderivative
from .kahanian import DEFAULT_CANDIDATES, check_anchor, definite_with_limit, kahanian, select_anchor
from .numeric import eval_numeric
from .parser import parse, parse_symbol, render
from .resonance import particular_integral
from .series import Finite
from .special import discover_constraints
from .verify import diff_roundtrip_check, quadrature, random_binding

DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt_expr(e: Expr, fmt: str) -> str:
    return render(e, "latex" if fmt == "latex" else "plain")


def _symbols(text: str | None) -> list[Sym]:
    if not text:
        return []
    return [parse_symbol(s.strip()) for s in text.split(",") if s.strip()]


def _range(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        lo_f, hi_f, count = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected lo:hi:n") from None
    if count < 2:
        raise UsageError("grid ranges need at least 2 steps")
    return [lo_f + i * (hi_f - lo_f) / (count - 1) for i in range(count)]


def _tolerance(args) -> float:
    tol = args.tol
    if tol is None:
        env = os.environ.get("KAHANIA_TOL")
        try:
            tol = float(env) if env else DEFAULT_TOL
        except ValueError:
            raise UsageError(f"KAHANIA_TOL is not a number: {env!r}") from None
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    return tol


def _emit(out, payload, fmt: str, text_lines: Sequence[str]):
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write("\n".join(text_lines) + "\n")


def _ast(e: Expr) -> dict:
    return render(e, "json")


# -- subcommands -------------------------------------------------------------

def cmd_integrate(args, out):
    z = parse_symbol(args.var)
    f = parse(args.expr)
    G = antiderivative(f, z)
    _emit(out, {"integrand": _ast(f), "antiderivative": _ast(G), "text": render(G)}, args.format,
          [_fmt_expr(G, args.format)])


def cmd_kahanian(args, out):
    z = parse_symbol(args.var)
    f = parse(args.expr)
    if args.anchor is not None:
        res = kahanian(f, z, anchor=args.anchor)
    else:
        cands = [check_anchor(c) for c in args.candidates.split(",")] if args.candidates else DEFAULT_CANDIDATES
        res = kahanian(f, z, candidates=cands)
    payload = {
        "generic": _ast(res.generic),
        "anchor": _ast(res.anchor),
        "kahanianConstant": _ast(res.kahanian_constant),
        "continuousForm": _ast(res.continuous_form),
        "anchorTried": [{"candidate": _ast(a), "outcome": o} for a, o in res.anchor_tried],
        "text": {
            "G": render(res.generic),
            "A": render(res.anchor),
            "C": render(res.kahanian_constant),
            "P": render(res.continuous_form),
        },
    }
    fmt = args.format
    lines = [
        f"G = {_fmt_expr(res.generic, fmt)}",
        f"A = {_fmt_expr(res.anchor, fmt)}",
        f"C = {_fmt_expr(res.kahanian_constant, fmt)}",
        f"P = {_fmt_expr(res.continuous_form, fmt)}",
    ]
    lines += [f"tried {render(a)}: {o}" for a, o in res.anchor_tried]
    _emit(out, payload, fmt, lines)


def auto_kahanianize(pw: PiecewiseAntiderivative, z: Sym, anchor=None) -> PiecewiseAntiderivative:
    """Kahanianise with the given anchor, or the simplest candidate valid for every arm."""
    if anchor is not None:
        return kahanianize(pw, z, anchor)
    ranked = []
    try:
        sel = select_anchor(pw.generic, z)
        ranked.append(sel.anchor)
    except NoValidAnchor:
        pass
    ranked += [check_anchor(c) for c in DEFAULT_CANDIDATES if check_anchor(c) not in ranked]
    last = None
    for A in ranked:
        try:
            return kahanianize(pw, z, A)
        except InvalidAnchor as exc:
            last = exc
    raise NoValidAnchor(f"no candidate anchor is valid for every consequent ({last})")


def _piecewise_lines(pw: PiecewiseAntiderivative, fmt: str) -> list[str]:
    lines = []
    for arm in pw.arms:
        body = _fmt_expr(arm.body, fmt) if arm.body is not None else f"Unevaluated ({arm.error})"
        cond = ", ".join(arm.conditions)
        if arm.exclusions:
            cond += "; unless " + ", ".join(arm.exclusions)
        lines.append(f"{body}    if {cond}")
    lines.append(f"{_fmt_expr(pw.generic, fmt)}    otherwise")
    if pw.kahanianized:
        lines.append(f"anchor: {render(pw.anchor)}")
    return lines


def cmd_comprehensive(args, out):
    z = parse_symbol(args.var)
    params = _symbols(args.params)
    if z in params:
        raise UsageError("the integration variable cannot be a parameter")
    f = parse(args.expr)
    pw = build_comprehensive(f, z, params)
    if args.kahanian:
        pw = auto_kahanianize(pw, z, args.anchor)
    _emit(out, pw.to_json(), args.format, _piecewise_lines(pw, args.format))


def cmd_definite(args, out):
    z = parse_symbol(args.var)
    f = parse(args.expr)
    at = None
    if args.limit:
        if "=" not in args.limit:
            raise UsageError("--limit expects p=c")
        p, c = args.limit.split("=", 1)
        at = (parse_symbol(p.strip()), parse(c))
    res = definite_with_limit(f, z, parse(args.lower), parse(args.upper), at)
    _emit(out, {"result": _ast(res), "text": render(res)}, args.format, [_fmt_expr(res, args.format)])


def cmd_verify(args, out):
    tol = _tolerance(args)
    z = parse_symbol(args.var)
    f = parse(args.expr)
    G = parse(args.against) if args.against else antiderivative(f, z)
    params = sorted((f.free_symbols | G.free_symbols) - {z}, key=lambda s: s.name)
    try:
        constraints = sorted(discover_constraints(f, G, params, z), key=str)
    except NonlinearConstraint:
        constraints = []
    ranges = {p.name: (0.5, 2.0) for p in params}
    rt = diff_roundtrip_check(G, f, z, ranges, constraints, threshold=max(tol, 1e-9), seed=args.seed)
    report = {
        "roundtrip": {"passed": rt.passed, "maxDeviation": rt.max_deviation, "samples": rt.samples,
                      "witness": {k: [v.real, v.imag] for k, v in (rt.witness or {}).items()} or None},
    }
    lines = [f"roundtrip: {'pass' if rt.passed else 'FAIL'} (max relative deviation {rt.max_deviation:.3g}"
             f" over {rt.samples} samples)"]
    if not args.against:
        rng = random.Random(args.seed)
        res = kahanian(f, z)
        A = complex(eval_numeric(res.anchor, {}))
        worst = 0.0
        ok = True
        for _ in range(args.samples):
            b = random_binding(rng, z, ranges, constraints)
            q = quadrature(f, z, A, b[z.name], {k: v for k, v in b.items() if k != z.name}, tol=tol)
            dev = abs(q.value - eval_numeric(res.continuous_form, b)) / (1 + abs(q.value))
            worst = max(worst, dev)
            ok = ok and q.converged
        passed = ok and worst <= max(1e-6, tol)
        report["quadrature"] = {"passed": passed, "maxDeviation": worst, "anchor": render(res.anchor)}
        lines.append(f"quadrature from anchor {render(res.anchor)}: {'pass' if passed else 'FAIL'}"
                     f" (max relative deviation {worst:.3g})")
    report["passed"] = all(v["passed"] for v in report.values() if isinstance(v, dict))
    _emit(out, report, args.format, lines)


def cmd_resonance(args, out):
    k, w, t = Sym("k"), Sym("w"), Sym("t")
    sol = particular_integral(k, w, t, args.kahanian)
    res = sol.resonant
    lim_text = render(res.value) if isinstance(res, Finite) else str(res)
    fmt = args.format
    lim_fmt = _fmt_expr(res.value, fmt) if isinstance(res, Finite) else str(res)
    payload = {
        "wronskian": _ast(sol.wronskian),
        "u1": _ast(sol.u1),
        "u2": _ast(sol.u2),
        "particular": _ast(sol.particular),
        "resonantLimit": _ast(res.value) if isinstance(res, Finite) else str(res),
        "usedKahanian": sol.used_kahanian,
        "text": {"particular": render(sol.particular), "resonantLimit": lim_text},
    }
    lines = [
        f"W = {_fmt_expr(sol.wronskian, fmt)}",
        f"u1 = {_fmt_expr(sol.u1, fmt)}",
        f"u2 = {_fmt_expr(sol.u2, fmt)}",
        f"x_p = {_fmt_expr(sol.particular, fmt)}",
        f"resonant limit = {lim_fmt}",
    ]
    _emit(out, payload, fmt, lines)


def _grid_target(args, z: Sym, param: Sym) -> Expr:
    e = parse(args.expr)
    if args.consequent is None:
        if args.kahanian:
            A = check_anchor(args.anchor if args.anchor is not None else 1)
            g = substitute(e, z, A)
            if is_special(g):
                raise InvalidAnchor(f"expression is {g} at the anchor")
            e = e - g
        return e
    params = [param] + [p for p in _symbols(args.params) if p != param]
    pw = build_comprehensive(e, z, params)
    if args.kahanian:
        pw = auto_kahanianize(pw, z, args.anchor)
    if args.consequent in ("generic", "otherwise"):
        return pw.generic
    try:
        body = pw.arms[int(args.consequent)].body
    except (ValueError, IndexError):
        raise UsageError(f"no consequent {args.consequent!r}; there are {len(pw.arms)} arms") from None
    if body is None:
        raise KahaniaError(f"consequent {args.consequent} could not be evaluated")
    return body


def cmd_grid(args, out):
    z = parse_symbol(args.var)
    param = parse_symbol(args.param)
    zs, ps = _range(args.zrange), _range(args.prange)
    fixed = {}
    for item in args.set or ():
        name, _, value = item.partition("=")
        try:
            fixed[parse_symbol(name.strip()).name] = complex(value)
        except ValueError:
            raise UsageError(f"bad --set {item!r}") from None
    target = _grid_target(args, z, param)
    rows = ["z," + ",".join(format(p, ".17g") for p in ps)]
    for zv in zs:
        cells = [format(zv, ".17g")]
        for pv in ps:
            b = {**fixed, z.name: complex(zv), param.name: complex(pv)}
            try:
                v = eval_numeric(target, b).real + 0.0  # no "-0" cells
                cells.append(format(v, ".17g") if v == v and abs(v) != float("inf") else "nan")
            except KahaniaError:
                cells.append("nan")
        rows.append(",".join(cells))
    out.write("\n".join(rows) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kahania", description="Antiderivatives with Kahanian constants.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, expr=True, var=True):
        if expr:
            sp.add_argument("expr")
        if var:
            sp.add_argument("--var", default="z")
        sp.add_argument("--format", choices=("text", "json", "latex"), default="text")
        sp.add_argument("--tol", type=float, default=None)

    sp = sub.add_parser("integrate", help="generic antiderivative")
    common(sp)
    sp.set_defaults(func=cmd_integrate)

    sp = sub.add_parser("kahanian", help="antiderivative with Kahanian constant")
    common(sp)
    sp.add_argument("--anchor")
    sp.add_argument("--candidates", help="comma separated anchor candidates")
    sp.set_defaults(func=cmd_kahanian)

    sp = sub.add_parser("comprehensive", help="piecewise comprehensive antiderivative")
    common(sp)
    sp.add_argument("--params", required=True)
    sp.add_argument("--kahanian", action="store_true")
    sp.add_argument("--anchor")
    sp.set_defaults(func=cmd_comprehensive)

    sp = sub.add_parser("definite", help="definite integral, optionally at a parameter limit")
    common(sp)
    sp.add_argument("--from", dest="lower", required=True)
    sp.add_argument("--to", dest="upper", required=True)
    sp.add_argument("--limit")
    sp.set_defaults(func=cmd_definite)

    sp = sub.add_parser("verify", help="numeric self-check")
    common(sp)
    sp.add_argument("--against")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("resonance", help="forced oscillator particular integral")
    common(sp, expr=False, var=False)
    sp.add_argument("--kahanian", action="store_true")
    sp.set_defaults(func=cmd_resonance)

    sp = sub.add_parser("grid", help="CSV of Re(value) over a (z, parameter) lattice")
    common(sp)
    sp.add_argument("--param", required=True)
    sp.add_argument("--zrange", required=True)
    sp.add_argument("--prange", required=True)
    sp.add_argument("--consequent")
    sp.add_argument("--params", help="further parameters for --consequent")
    sp.add_argument("--kahanian", action="store_true")
    sp.add_argument("--anchor")
    sp.add_argument("--set", action="append", help="fixed binding name=value")
    sp.set_defaults(func=cmd_grid)
    return p


_VALUE_OPTIONS = {"--anchor", "--from", "--to", "--zrange", "--prange", "--limit", "--set", "--against"}


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Attach values that look like flags (``--from -1``) to their option."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = _glue_values(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "var", None) is not None:
            parse_symbol(args.var)
        _tolerance(args)
        args.func(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 1
    except ParseError as exc:
        err.write(f"ParseError: {exc}\n")
        return 1
    except KahaniaError as exc:
        out.write(f"{type(exc).__name__}: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run())
