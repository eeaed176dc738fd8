import json
import math

import numpy as np

from lmcheck.report import CheckReport, Kind, curve_csv, format_number, reports_json


def test_record_counts_and_vacuous():
    rep = CheckReport("x")
    assert rep.record("a", 1.0, 2.0) == 0.5
    assert rep.record("b", 1.0, 0.0) is None
    rep.record("c", 3.0, 1.0)
    assert (rep.cases, rep.vacuous, len(rep.violations)) == (2, 1, 1)
    assert rep.worst_ratio == 3.0 and not rep.ok()


def test_slack_is_relative():
    rep = CheckReport("x")
    rep.record("a", 1.0 + 5e-10, 1.0)
    assert rep.ok()
    rep.record("b", 1.0 + 2e-9, 1.0)
    assert not rep.ok()


def test_record_many_broadcasts():
    rep = CheckReport("x")
    rep.record_many(lambda i: f"c{i}", np.array([[1.0, 2.0], [3.0, 0.5]]), 2.0)
    assert rep.cases == 4 and [v.case for v in rep.violations] == ["c2"]


def test_kinds_judged_differently():
    imp = CheckReport("i", kind=Kind.IMPLICIT)
    assert not imp.ok()
    imp.constant_estimate = 3.0
    assert imp.ok()
    assert CheckReport("n", kind=Kind.INFO).ok()


def test_merge_keeps_worst():
    a, b = CheckReport("a"), CheckReport("b")
    a.record("x", 1, 4)
    b.record("y", 3, 2)
    a.merge(b, prefix="b/")
    assert a.cases == 2 and a.worst_ratio == 1.5 and a.violations[0].case == "b/y"


def test_json_round_trip_and_number_format():
    rep = CheckReport("x", {"q": [4.0, 8.0], "constant": 2.0})
    rep.record("a", 1.0, 3.0)
    text = reports_json([rep])
    doc = json.loads(text)
    assert doc[0]["check_id"] == "x" and doc[0]["cases"] == 1
    assert math.isclose(doc[0]["worst_ratio"], 1 / 3, rel_tol=1e-11)
    assert "3.33333333333e-01" in text
    assert format_number(2.0) == "2.00000000000e+00"
    assert reports_json([rep]) == text


def test_curve_csv():
    assert curve_csv([(4.0, 1.0), (8.0, 2.0)]).splitlines()[0] == "q,ratio"
