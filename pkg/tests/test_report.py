import json

from checker import CheckEntry, CheckReport
from report import parse_machine, render, render_machine, render_text

PASSING = CheckEntry("close", "close", "pass", tried=100, accepted=100, residual=1e-5)
FAILING = CheckEntry(
    "sqrt-preserves-not-close",
    "preserves-not-close",
    "fail",
    tried=100,
    accepted=100,
    residual=0.0,
    counterexample=(2 + 0j, -2 + 0j),
    detail="images differ by only 0",
)
INSUFFICIENT = CheckEntry("number", "number", "insufficient", tried=100, accepted=0, detail="only 0 of 100")


def test_text_table():
    lines = render_text(CheckReport([PASSING, FAILING])).splitlines()
    assert lines[0].split() == ["obligation", "status", "accepted/tried", "residual", "counterexample"]
    assert lines[1].split() == ["close", "pass", "100/100", "1.000e-05", "-"]
    assert lines[2].split() == ["sqrt-preserves-not-close", "fail", "100/100", "0.000e+00", "2,-2"]
    assert lines[3] == "sqrt-preserves-not-close: images differ by only 0"
    assert lines[-1] == "result: FAIL (1 of 2 obligations)"


def test_text_columns_line_up():
    lines = render_text(CheckReport([PASSING, FAILING])).splitlines()
    column = lines[0].index("status")
    assert lines[1][column:].startswith("pass")
    assert lines[2][column:].startswith("fail")


def test_text_pass_line():
    assert render_text(CheckReport([PASSING])).splitlines()[-1] == "result: pass (1 obligations)"


def test_insufficient_is_not_a_pass():
    text = render(CheckReport([PASSING, INSUFFICIENT]))
    assert "insufficient" in text
    assert text.endswith("result: FAIL (1 of 2 obligations)")


def test_machine_document():
    document = json.loads(render_machine(CheckReport([PASSING, FAILING])))
    assert document["passed"] is False
    record = document["obligations"][1]
    assert record["name"] == "sqrt-preserves-not-close"
    assert record["counterexample"] == [[2.0, 0.0], [-2.0, 0.0]]


def test_machine_round_trip():
    report = CheckReport([PASSING, FAILING, INSUFFICIENT, CheckEntry("agrees", "agrees", "pass", residual=float("inf"))])
    assert parse_machine(render(report, "machine")) == report
