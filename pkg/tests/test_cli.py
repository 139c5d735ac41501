from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from conftest import ALL_MISSIONS, CORPUS, FAULTS
from skymission.cli import run_cli

CROP = str(CORPUS / "crop_survey.msn")
FIELD = str(CORPUS / "field.json")

REPORT_SCHEMA = {
    "type": "object",
    "required": ["file", "diagnostics", "errors", "warnings"],
    "additionalProperties": False,
    "properties": {
        "file": {"type": "string"},
        "errors": {"type": "integer", "minimum": 0},
        "warnings": {"type": "integer", "minimum": 0},
        "diagnostics": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["code", "severity", "message", "line", "column"],
                "properties": {
                    "code": {"type": "string", "pattern": "^[PMSRTW][0-9]{3}$"},
                    "severity": {"enum": ["error", "warning"]},
                    "message": {"type": "string"},
                    "line": {"type": "integer", "minimum": 1},
                    "column": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_check_clean():
    code, out, _ = cli("check", CROP)
    assert code == 0
    assert "0 errors" in out


def test_check_missing_touchdown():
    path = str(FAULTS / "P004_no_touchdown.msn")
    code, out, _ = cli("check", path)
    assert code == 1
    assert f"{path}:5:3: P004 error:" in out


def test_check_warning_only_exits_zero():
    code, out, _ = cli("check", str(FAULTS / "W001_unused_filter.msn"))
    assert code == 0 and "W001 warning" in out and "0 errors, 1 warning" in out


def test_run_writes_trace(tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = cli("run", CROP, "--scenario", FIELD, "--trace", str(trace))
    assert code == 0
    assert out.strip() == "Completed"
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert records[-1] == {"outcome": "Completed"}
    assert any(r.get("event") == "BranchTaken" for r in records)
    assert all("t" in r for r in records[:-1])


def test_run_abort_reports_reason():
    code, out, _ = cli("run", CROP, "--scenario", str(CORPUS / "low_battery.json"))
    assert (code, out.strip()) == (0, "Aborted: battery")


def test_run_rejects_invalid_mission():
    code, _, err = cli("run", str(FAULTS / "T003_ordering_on_text.msn"), "--scenario", FIELD)
    assert code == 1 and "T003" in err


def test_run_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    cli("run", CROP, "--scenario", FIELD, "--trace", str(a))
    cli("run", CROP, "--scenario", FIELD, "--trace", str(b))
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [[], ["launch", CROP], ["check"], ["check", CROP, "--colour"],
                                  ["run", CROP], ["run", CROP, "--scenario", FIELD, "--max-time", "x"]])
def test_usage_errors(argv):
    code, _, err = cli(*argv)
    assert code == 2
    assert "usage:" in err


def test_missing_files(tmp_path):
    assert cli("check", str(tmp_path / "none.msn"))[0] == 3
    assert cli("run", CROP, "--scenario", str(tmp_path / "none.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"tick_s": -1}')
    assert cli("run", CROP, "--scenario", str(bad))[0] == 3
    bad.write_text("{not json")
    assert cli("run", CROP, "--scenario", str(bad))[0] == 3


def test_gen_and_graph(tmp_path):
    code, out, _ = cli("gen", str(CORPUS / "minimal.msn"))
    assert code == 0 and out.splitlines()[-2:] == ["TAKEOFF 10.0", "TOUCHDOWN"]
    target = tmp_path / "crop.dot"
    assert cli("graph", CROP, "--out", str(target))[0] == 0
    assert target.read_text().startswith('digraph "crop_survey"')
    assert cli("gen", str(FAULTS / "R001_unknown_action.msn"))[0] == 1


@pytest.mark.parametrize("path", ALL_MISSIONS, ids=lambda p: p.name)
def test_json_report_schema_and_order(path):
    code, out, _ = cli("check", "--json", str(path))
    report = json.loads(out)
    jsonschema.validate(report, REPORT_SCHEMA)
    keys = [(d["line"], d["column"], d["code"]) for d in report["diagnostics"]]
    assert keys == sorted(keys)
    assert code == (1 if report["errors"] else 0)
    assert cli("check", "--json", str(path))[1] == out


@pytest.mark.parametrize("path", ALL_MISSIONS, ids=lambda p: p.name)
def test_fmt_preserves_diagnostics(path, tmp_path):
    copy = tmp_path / path.name
    shutil.copy(path, copy)
    before = json.loads(cli("check", "--json", str(copy))[1])["diagnostics"]
    code, _, _ = cli("fmt", "--write", str(copy))
    if code != 0:  # sources that do not parse cannot be formatted
        assert copy.read_bytes() == path.read_bytes()
        return
    after = json.loads(cli("check", "--json", str(copy))[1])["diagnostics"]
    assert {d["code"] for d in after} == {d["code"] for d in before}
    assert len(after) == len(before)


def test_fmt_stdout():
    code, out, _ = cli("fmt", CROP)
    assert code == 0 and out == (CORPUS / "crop_survey.msn").read_text()


def test_extension_env(tmp_path, monkeypatch):
    actions = tmp_path / "actions.toml"
    actions.write_text('[[action]]\nname = "count_trees"\ncategory = "processing"\n'
                       'input = "Image"\noutput = "Number"\n')
    mission = tmp_path / "trees.msn"
    mission.write_text((CORPUS / "crop_survey.msn").read_text().replace(
        'if recognize_image(shot) == "disease found"', "if count_trees(shot) > 12.0"))
    assert cli("check", str(mission))[0] == 1
    monkeypatch.setenv("SKYMISSION_ACTIONS", str(actions))
    assert cli("check", str(mission))[0] == 0
    actions.write_text("[[action]]\nname = 'take_picture'\ncategory = 'regular'\n")
    assert cli("check", str(mission))[0] == 1


def test_console_script():
    exe = shutil.which("skymission")
    cmd = [exe] if exe else [sys.executable, "-c", "from skymission.cli import main; main()"]
    proc = subprocess.run(cmd + ["check", CROP], capture_output=True, text=True)
    assert proc.returncode == 0 and "0 errors" in proc.stdout
