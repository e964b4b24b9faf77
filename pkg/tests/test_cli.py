import json

import pytest

from sdpnormal.cli import run

from .conftest import EXPECTED, FIXTURES
from .golden import CASES, invoke


@pytest.mark.parametrize("key", sorted(CASES))
def test_golden_reports(key):
    code, out = invoke(CASES[key])
    assert code == 0
    assert out == (EXPECTED / f"{key}.json").read_text()


@pytest.mark.parametrize("key", ["analyze_large_bad", "closedness_map2", "slack_bonnans_shapiro"])
def test_reports_are_deterministic(key):
    assert invoke(CASES[key]) == invoke(CASES[key])


def test_analyze_large_bad_report():
    code, out = invoke(["analyze", "large_bad.json"])
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "badly_behaved"
    assert rep["slack"]["r"] == 2


def test_closedness_map2_report():
    code, out = invoke(["closedness", "map2.json", "--trace-file", "map2_trace.json"])
    rep = json.loads(out)
    assert rep["status"] == "not_closed"
    assert rep["witness"]["c_normal_form"] == ["0", "0", "1"]


@pytest.mark.parametrize("name", ["example1", "example2", "example3", "large_bad", "large_good", "bonnans_shapiro"])
def test_report_certificates_pass_certify(name, tmp_path):
    _, out = invoke(["analyze", f"{name}.json"])
    cert = json.loads(out)["certificate"]
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(cert))
    code, out = invoke(["certify", f"{name}.json", "--certificate", str(path)])
    assert code == 0, out
    assert json.loads(out)["verified"] is True
    _, out = invoke(["slack", f"{name}.json"])
    path.write_text(out)
    code, out = invoke(["certify", f"{name}.json", "--certificate", str(path)])
    assert code == 0, out


def test_certify_wrong_v_exits_2():
    assert run(["certify", str(FIXTURES / "example1.json"), "--certificate", str(FIXTURES / "example1_wrong_V.json")]) == 2


def test_missing_file_exits_1():
    assert run(["analyze", str(FIXTURES / "does_not_exist.json")]) == 1


def test_bad_document_exits_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"format_version": 1, "mode": "rational", "n": 2, "m": 1, "A": [[["0", "1"], ["2", "0"]]]}))
    assert run(["analyze", str(p)]) == 1


def test_exact_on_float_document_exits_1(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"format_version": 1, "mode": "float", "n": 2, "m": 1,
                             "A": [[[0.0, 1.0], [1.0, 0.0]]], "B": [[1.0, 0.0], [0.0, 0.0]]}))
    assert run(["analyze", str(p), "--mode", "exact"]) == 1
    assert run(["analyze", str(p)]) == 0


def test_float_mode_downgrade(capsys):
    assert run(["analyze", str(FIXTURES / "large_bad.json"), "--mode", "float"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "badly_behaved"


def test_text_output(capsys):
    assert run(["analyze", str(FIXTURES / "example1.json"), "--output", "text"]) == 0
    assert "badly_behaved" in capsys.readouterr().out


def test_solve_reports_minimal_face_values(capsys):
    assert run(["solve", str(FIXTURES / "example2.json")]) == 0
    rep = json.loads(capsys.readouterr().out)
    if rep["status"] != "optimal":
        assert rep["minimal_face"]["primal"]["value"] == 0.0
        assert abs(rep["minimal_face"]["dual"]["value"] - 1) < 1e-6


def test_solve_needs_objective(tmp_path):
    data = json.loads((FIXTURES / "example1.json").read_text())
    data.pop("c")
    p = tmp_path / "noc.json"
    p.write_text(json.dumps(data))
    assert run(["solve", str(p)]) == 1


def test_trace_file_recorded_then_replayed(tmp_path, capsys):
    t = tmp_path / "trace.json"
    assert run(["reformulate", str(FIXTURES / "large_bad.json"), "--trace-file", str(t)]) == 0
    first = capsys.readouterr().out
    assert t.exists()
    assert run(["reformulate", str(FIXTURES / "large_bad.json"), "--trace-file", str(t)]) == 0
    assert capsys.readouterr().out == first


def test_direction_command(capsys):
    assert run(["direction", str(FIXTURES / "example1_direction.json")]) == 0
    assert json.loads(capsys.readouterr().out)["classification"] == "in_closure_not_dir"
