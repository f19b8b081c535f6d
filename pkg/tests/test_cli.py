import io
import json
import subprocess
import sys

import jsonschema
import pytest

from kahania.cli import run
from kahania.comprehensive import PIECEWISE_SCHEMA
from kahania.parser import AST_SCHEMA, from_json, parse


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_integrate_text():
    assert call("integrate", "z^alpha") == (0, "z^(1 + alpha)/(1 + alpha)\n", "")


def test_kahanian_power_rule_json():
    code, out, _ = call("kahanian", "z^n", "--var", "z", "--format", "json")
    assert code == 0
    d = json.loads(out)
    for key in ("generic", "anchor", "kahanianConstant", "continuousForm"):
        jsonschema.validate(d[key], AST_SCHEMA)
    assert from_json(d["anchor"]) == parse("1")
    assert from_json(d["kahanianConstant"]) == parse("-1/(n+1)")
    assert [from_json(c["candidate"]) for c in d["anchorTried"]] == [parse(v) for v in ("1", "0", "-1", "2")]


def test_kahanian_latex():
    code, out, _ = call("kahanian", "z^n", "--format", "latex")
    assert code == 0 and "\\frac" in out


def test_comprehensive_json_schema():
    code, out, _ = call("comprehensive", "(a^(s*z) - a^(l*z))^2", "--params", "a,l,s", "--kahanian",
                        "--format", "json")
    assert code == 0
    d = json.loads(out)
    jsonschema.validate(d, PIECEWISE_SCHEMA)
    assert d["kahanian"] is True
    sigma = next(arm for arm in d["arms"] if arm["when"] == ["s=0"])
    assert sorted(sigma["unless"]) == ["a=0", "a=1", "l=0"]


def test_comprehensive_text_picks_common_anchor():
    code, out, _ = call("comprehensive", "1/(z*sqrt(z^2 - a^2))", "--params", "a", "--kahanian")
    assert code == 0
    assert out.splitlines()[-1] == "anchor: 1"


def test_definite_limit():
    assert call("definite", "x^n", "--var", "x", "--from", "a", "--to", "b", "--limit", "n=-1")[1] == \
        "ln(b) - ln(a)\n"
    code, out, _ = call("definite", "x^n", "--var", "x", "--from", "1", "--to", "2", "--limit", "n=-1",
                        "--format", "json")
    assert from_json(json.loads(out)["result"]) == parse("ln(2)")


def test_negative_values_need_no_equals():
    assert call("definite", "1", "--from", "-2", "--to", "-1")[1] == "1\n"


def test_verify_reports():
    code, out, _ = call("verify", "(a^(s*z) - a^(l*z))^2", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["passed"] and d["roundtrip"]["passed"] and d["quadrature"]["passed"]
    code, out, _ = call("verify", "z^a", "--against", "z^(a+1)/(a+2)")
    assert code == 0 and out.startswith("roundtrip: FAIL")


def test_resonance():
    code, out, _ = call("resonance", "--kahanian")
    lines = dict(line.split(" = ", 1) for line in out.splitlines())
    assert lines["W"] == "k"
    assert lines["resonant limit"] == "t*sin(k*t)/(2*k)"
    assert call("resonance")[1].splitlines()[-1] == "resonant limit = Pole(1)"


def test_grid_csv_shape():
    code, out, _ = call("grid", "arccot(a/sqrt(z^2-a^2))/a", "--var", "z", "--param", "a",
                        "--zrange", "-2:2:81", "--prange", "-1:1:41")
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()]
    assert len(rows) == 82 and all(len(r) == 42 for r in rows)
    assert rows[0][0] == "z" and float(rows[0][1]) == -1.0 and rows[0][21] == "0"
    # the a=0 column cannot be evaluated
    assert all(r[21] == "nan" for r in rows[1:])
    for r in rows[1:]:
        for cell in r:
            assert cell == "nan" or float(cell) == float(cell)
            assert cell != "-0"


def test_grid_consequent():
    code, out, _ = call("grid", "1/(z*sqrt(z^2-a^2))", "--param", "a", "--zrange", "0.5:1.5:3",
                        "--prange", "0:1:2", "--consequent", "0", "--kahanian")
    rows = [r.split(",") for r in out.splitlines()]
    # special arm 1 - 1/sqrt(z^2) does not depend on a
    assert rows[1][1] == rows[1][2] == "-1"
    assert call("grid", "z^a", "--param", "a", "--zrange", "1:2:2", "--prange", "0:1:2",
                "--consequent", "7")[0] == 1


def test_grid_with_fixed_binding():
    code, out, _ = call("grid", "z + a + b", "--param", "a", "--zrange", "0:1:2", "--prange", "0:1:2",
                        "--set", "b=10")
    assert out.splitlines()[2] == "1,11,12"


def test_determinism():
    argv = ("comprehensive", "(a^(s*z) - a^(l*z))^2", "--params", "a,l,s", "--kahanian", "--format", "json")
    assert call(*argv) == call(*argv)


@pytest.mark.parametrize("argv", [
    ("integrate", "z^("),
    ("integrate", "2 z"),
    ("integrate",),
    ("frobnicate", "z"),
    ("grid", "z", "--param", "a", "--zrange", "0:1:1", "--prange", "0:1:2"),
    ("comprehensive", "z^a", "--params", "z"),
    ("integrate", "z", "--var", "sin"),
    ("definite", "z", "--from", "0", "--to", "1", "--limit", "n"),
])
def test_bad_input_exits_1(argv):
    code, out, err = call(*argv)
    assert code == 1 and out == "" and err


@pytest.mark.parametrize("argv,name", [
    (("integrate", "exp(z^2)"), "UnsupportedForm"),
    (("kahanian", "z", "--anchor", "-inf"), "InfiniteAnchor"),
    (("kahanian", "1/z^2", "--candidates", "0"), "NoValidAnchor"),
    (("definite", "1/x^2", "--var", "x", "--from", "0", "--to", "1"), "DivergentIntegral"),
    (("comprehensive", "1/(z*sqrt(z^2-a^2))", "--params", "a", "--kahanian", "--anchor", "0"), "InvalidAnchor"),
])
def test_engine_errors_exit_2(argv, name):
    code, out, _ = call(*argv)
    assert code == 2
    assert out.split(":")[0] == name


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv("KAHANIA_TOL", "abc")
    assert call("verify", "z")[0] == 1
    monkeypatch.setenv("KAHANIA_TOL", "-1")
    assert call("verify", "z")[0] == 1
    monkeypatch.setenv("KAHANIA_TOL", "1e-7")
    assert call("verify", "z")[0] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kahania", "kahanian", "z^n", "--var", "z"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "C = -1/(1 + n)" in proc.stdout
