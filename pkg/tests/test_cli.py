import csv
import json
import os

import pytest

from mapfluct.cli import main

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")


def model(name):
    return os.path.join(MODELS, f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fundamentals_header(capsys):
    code, out, _ = run(capsys, "fundamentals", model("bd12"))
    doc = json.loads(out)
    assert code == 0
    assert doc["command"] == "fundamentals" and len(doc["model_sha256"]) == 64
    assert doc["result"]["regime"] == "C1_negative_drift"
    assert doc["result"]["G"][0][0] == pytest.approx(1.0, abs=1e-10)


def test_exit_value(capsys):
    code, out, _ = run(capsys, "exit", model("bd12"), "--a", "2", "--b", "3")
    assert code == 0
    assert json.loads(out)["result"]["D"][0][0] == pytest.approx(28 / 31, abs=1e-10)


def test_mmbm_exit(capsys):
    code, out, _ = run(capsys, "exit", model("mmbm_scalar"), "--a", "0.5", "--b", "1.5")
    D = json.loads(out)["result"]["D"][0][0]
    assert code == 0 and 0 < D < 1


def test_csv_output_to_file(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "scale", model("bd12"), "--horizon", "5", "--format", "csv",
                       "--output", str(target))
    assert code == 0 and out == ""
    rows = [r for r in csv.reader(target.open()) if not r[0].startswith("#")]
    assert rows[0] == ["quantity", "i", "j", "value"]
    assert len(rows) > 5


def test_extrema_csv(capsys):
    code, out, _ = run(capsys, "extrema", model("bd12_killed"), "--format", "csv",
                       "--direction", "min")
    rows = [r for r in csv.reader(out.splitlines()) if not r[0].startswith("#")]
    assert code == 0 and rows[0] == ["m", "l", "i", "j", "probability"]
    assert sum(float(r[4]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-6)


def test_occupation_routes(capsys):
    vals = []
    for route in ("transient", "scale"):
        code, out, _ = run(capsys, "occupation", model("bd12"), "--k", "0", "--l", "2",
                           "--m", "2", "--route", route)
        assert code == 0
        vals.append(json.loads(out)["result"])
    for v in vals:
        assert v["occupation"][0][0] == pytest.approx(0.6, abs=1e-10)


def test_verify_passes_with_skips(capsys):
    code, out, _ = run(capsys, "verify", model("bd11"))
    checks = json.loads(out)["result"]["checks"]
    assert code == 0 and any(c["status"] == "skip" for c in checks)


@pytest.mark.parametrize("name", ["two_phase_down", "rank_one_down", "mmbm_two_phase"])
def test_verify_models(capsys, name):
    code, out, _ = run(capsys, "verify", model(name))
    assert code == 0 and json.loads(out)["result"]["passed"]


def test_transform_check_forms(capsys):
    code, out, _ = run(capsys, "transform-check", model("bd12_killed"))
    assert code == 0
    code, out, _ = run(capsys, "transform-check", model("bd12"), "--form", "unilateral",
                       "--z", "0.5")
    assert code == 0
    code, _, err = run(capsys, "transform-check", model("bd12"), "--z", "0.5")
    assert code == 1 and json.loads(err)["error"]


def test_decay(capsys):
    code, out, _ = run(capsys, "decay", model("bd12"), "--horizon", "40")
    res = json.loads(out)["result"]
    assert code == 0 and res["phi"] == pytest.approx(2.0, abs=1e-3)


def test_simulate_reproducible(capsys):
    argv = ["simulate", model("bd12_killed"), "--target", "exit", "--param", "a=1",
            "--param", "b=2", "--paths", "2000", "--seed", "3"]
    _, out1, _ = run(capsys, *argv)
    _, out2, _ = run(capsys, *argv)
    assert json.loads(out1)["result"] == json.loads(out2)["result"]


def test_creep(capsys):
    code, out, _ = run(capsys, "creep", model("bd12"), "--m", "3", "--l", "2")
    assert code == 0


@pytest.mark.parametrize("argv", [["nope"], ["exit", "x.json"], ["exit", "--a", "1"],
                                  ["fundamentals", "m.json", "--format", "xml"]])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2


def test_domain_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "lattice", "phases": 1,
                               "blocks": {"-1": [[1.0]], "0": [[-0.5]]}}))
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1 and "error" in json.loads(err)
    code, _, err = run(capsys, "fundamentals", str(tmp_path / "missing.json"))
    assert code == 1
    code, _, err = run(capsys, "extrema", model("bd12"))
    assert code == 1 and json.loads(err)["error"]
