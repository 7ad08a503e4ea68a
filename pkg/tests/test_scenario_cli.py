import csv
import io
import json
from fractions import Fraction

import pytest

from fmcalc import cli, report
from fmcalc.errors import BadFraction, DimensionMismatch, ScenarioError, ScenarioSyntaxError, UnknownCatalogEntry, UnknownKey
from fmcalc.report import FAST, exact, render, run
from fmcalc.scenario import parse_scenario, scenario_from_dict

P2_SPECTRAL = """
schema_version = 1
[base]
name = "P2"
[[tasks]]
type = "spectral"
n = 3
eta = [9]
lambda = "1/2"
"""


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --------------------------------------------------------------- parsing


def test_spectral_scenario_parses():
    sc = parse_scenario(P2_SPECTRAL)
    assert sc.kind == "CY3" and sc.base.name == "P2"
    (task,) = sc.tasks
    assert task.kind == "spectral" and task.params["lambda"] == Fraction(1, 2)


def test_unknown_keys_carry_their_path():
    with pytest.raises(UnknownKey) as info:
        parse_scenario(P2_SPECTRAL + "colour = 3\n")
    assert info.value.location == "tasks[0].colour"
    with pytest.raises(UnknownKey) as info:
        scenario_from_dict({"bogus": 1})
    assert info.value.location == "bogus"


def test_floats_are_rejected():
    text = P2_SPECTRAL.replace('lambda = "1/2"', "lambda = 0.5")
    with pytest.raises(BadFraction) as info:
        parse_scenario(text)
    assert info.value.location == "tasks[0].lambda"
    with pytest.raises(BadFraction):
        parse_scenario(P2_SPECTRAL.replace('"1/2"', '"1/0"'))


def test_syntax_errors_report_line_and_column():
    with pytest.raises(ScenarioSyntaxError) as info:
        parse_scenario("schema_version = 1\n[base\nname = 'P2'\n")
    assert info.value.location.startswith("line 2, column")
    assert "(at line" not in str(info.value)


def test_base_and_dimension_errors():
    with pytest.raises(UnknownCatalogEntry):
        parse_scenario(P2_SPECTRAL.replace('"P2"', '"P7"'))
    with pytest.raises(DimensionMismatch):
        parse_scenario(P2_SPECTRAL.replace("eta = [9]", "eta = [9, 1]"))
    with pytest.raises(ScenarioError):
        scenario_from_dict({"schema_version": 2})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"base": "P2", "surface": {"genus": 0, "e": 1}})


def test_task_kind_must_match_the_model():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"surface": {"genus": 0, "e": 1}, "tasks": [{"type": "spectral", "n": 2, "eta": [1], "lambda": 1}]})


# --------------------------------------------------------------- reports


def test_exact_serialisation():
    assert exact({"a": Fraction(1, 2), "b": 3, "c": True, "d": None, "e": (Fraction(4),)}) == {
        "a": "1/2",
        "b": 3,
        "c": True,
        "d": None,
        "e": ["4"],
    }


def test_run_document_shape():
    doc = run(parse_scenario(P2_SPECTRAL), FAST)
    assert doc["all_checks_passed"] is True
    assert doc["model"] == {"kind": "CY3-over-surface", "base": "P2", "h11_base": 1}
    out = doc["tasks"][0]["outputs"]
    assert out["varpi"] == "-9" and out["c3_V"] == "0" and out["five_brane"]["a_f"] == "111"
    assert json.loads(render(doc, "json")) == doc


def test_scan_csv_is_one_row_per_model():
    sc = scenario_from_dict(
        {"base": "P2", "tasks": [{"type": "scan", "n": [3], "eta": [[9, 10]], "lambda": ["1/2"], "require_anomaly": False}]}
    )
    rows = list(csv.reader(io.StringIO(render(run(sc), "csv"))))
    assert rows[0] == ["task", *report.SCAN_FIELDS]
    assert len(rows) == 3
    assert rows[1][:4] == ["0", "3", "9", "1/2"]


# ------------------------------------------------------------------- CLI


def test_cli_transform_json(capsys):
    code, out, _ = run_cli(capsys, "transform", "--base", "P2", "--E", "0,0,0,0,0,1")
    assert code == 0
    doc = json.loads(out)
    # point -> fibre
    assert doc["tasks"][0]["outputs"]["transform"] == {"n": "0", "x": "0", "S": ["0"], "eta": ["0"], "a": "1", "s": "0"}
    assert "header" not in doc


def test_cli_surface_text(capsys):
    code, out, _ = run_cli(capsys, "transform", "--surface", "0,1", "--E", "2,1,3,-1/2", "--format", "text")
    assert code == 0 and "all_checks_passed = true" in out


def test_cli_header_is_opt_in(capsys):
    code, out, _ = run_cli(capsys, "tduality", "--base", "P2", "--header")
    doc = json.loads(out)
    assert code == 0 and list(doc)[0] == "header" and doc["header"]["command"] == "tduality"


def test_cli_usage_errors(capsys):
    assert run_cli(capsys, "transform", "--base", "P2", "--E", "1,2")[0] == 1
    code, _, err = run_cli(capsys, "transform", "--base", "P9", "--E", "0,0,0,0,0,1")
    assert code == 1 and "--base" in err
    assert run_cli(capsys, "frobnicate")[0] == 1
    assert run_cli(capsys, "run", "/nonexistent/scenario.toml")[0] == 1
    assert run_cli(capsys, "--version")[0] == 0


def test_cli_compute_errors(capsys):
    code, _, err = run_cli(capsys, "spectral", "--base", "P2", "--n", "0", "--eta", "9", "--lambda", "1/2")
    assert code == 2 and "NonPositiveRank" in err


def test_cli_failed_check_exits_three(capsys, monkeypatch):
    def broken(task, X, level, **_):
        return report.TaskResult(0, task.kind, {}, {}, {"forced": False}, {})

    monkeypatch.setitem(report._RUNNERS, "tduality", broken)
    code, out, _ = run_cli(capsys, "tduality", "--base", "P2")
    assert code == 3 and json.loads(out)["all_checks_passed"] is False


def test_check_level_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FMCALC_CHECK_LEVEL", "full")
    _, out, _ = run_cli(capsys, "spectral", "--base", "P2", "--n", "3", "--eta", "9", "--lambda", "1/2")
    doc = json.loads(out)
    assert doc["check_level"] == "full" and "oracle_route_agrees" in doc["tasks"][0]["checks"]
    monkeypatch.setenv("FMCALC_CHECK_LEVEL", "thorough")
    assert run_cli(capsys, "tduality", "--base", "P2")[0] == 1


def test_cli_run_from_stdin_and_out_file(capsys, monkeypatch, tmp_path):
    monkeypatch.setattr("sys.stdin", io.StringIO(P2_SPECTRAL))
    target = tmp_path / "r.csv"
    code, out, _ = run_cli(capsys, "run", "-", "--format", "csv", "--out", str(target))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(target.read_text())))
    assert rows[0] == ["path", "value"]
    assert ["all_checks_passed", "true"] in rows


def test_cli_scan_and_charges(capsys):
    code, out, _ = run_cli(capsys, "scan", "--base", "P2", "--n", "3", "--eta", "0:36", "--lambda", "1/2", "--target", "0")
    rows = json.loads(out)["tasks"][0]["outputs"]["rows"]
    assert code == 0 and rows and all(r["N_gen"] == "0" for r in rows)
    code, out, _ = run_cli(capsys, "charges", "--base", "P2", "--charge", "1,0,0,0,0,0", "--t", "0:1,1:2")
    assert code == 0 and json.loads(out)["all_checks_passed"]
