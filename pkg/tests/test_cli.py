import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from casorati_lab import cli

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_characteristic_csv(capsys):
    code, out, _ = run(["characteristic", "--expr", "exp(z)", "--r-min", "1", "--r-max", "20",
                        "--r-points", "10"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "r,m,N,T,err"
    for row in lines[1:]:
        r, _, _, T, _ = map(float, row.split(","))
        assert T == pytest.approx(r / math.pi, abs=1e-8)


def test_example_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run(["example", "example-1.2", "--out", str(out)], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    inv = [p["checks"]["forward_invariant"] for p in rep["parts"] if p["scenario"].startswith("h")]
    assert inv == [True] * 7
    assert "pass" in err


def test_general_position_vandermonde_m4(capsys):
    code, out, _ = run(["general-position", "--scenario", str(SCENARIOS / "vandermonde-m4.json")], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["general_position"] is False and d["witness"]


def test_general_position_flag(capsys):
    code, out, _ = run(["general-position", "--vandermonde", "5"], capsys)
    assert code == 0 and json.loads(out)["checked"] == 252
    code, _, err = run(["general-position", "--vandermonde", "4"], capsys)
    assert code == 3 and "prime" in err


@pytest.mark.parametrize("name", ["example-7.3.json", "example-1.2.json"])
def test_invariance_scenarios(name, capsys):
    code, out, _ = run(["invariance", "--scenario", str(SCENARIOS / name)], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "pass"


def test_smt_scenario(capsys):
    code, out, _ = run(["smt", "--scenario", str(SCENARIOS / "smt-exp.json")], capsys)
    assert code == 0
    assert abs(json.loads(out)["checks"]["margin_slope"]) < 0.02 / math.pi


def test_icp_scenario(capsys):
    code, out, _ = run(["icp", "--scenario", str(SCENARIOS / "icp-exp.json")], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_icp_violation_exit_code(capsys):
    code, _, _ = run(["icp", "--f", "exp(z)", "--g", "exp(2*z)", "--target", "0", "--target", "inf",
                      "--target", "1", "--target", "-1", "--shift", "1", "--disc-radius", "3"], capsys)
    assert code == 2


def test_determinants_and_dependence(capsys):
    code, out, _ = run(["casorati", "--coord", "1", "--coord", "exp(z)", "--shift", "1", "--at", "0"], capsys)
    assert code == 0
    v = json.loads(out)["values"][0]["value"]
    assert v[0] == pytest.approx(math.e - 1) and v[1] == 0
    code, out, _ = run(["qcasorati", "--coord", "1", "--coord", "z", "--q", "2", "--at", "3",
                        "--precision", "100"], capsys)
    assert code == 0 and json.loads(out)["values"][0]["value"][0] == pytest.approx(3)
    code, out, _ = run(["dependence", "--coord", "1", "--coord", "exp(z)", "--shift", "2*pi*i"], capsys)
    assert json.loads(out)["verdict"] == "dependent"


def test_borel_and_cartan(capsys):
    code, out, _ = run(["borel", "--coord", "1", "--coord", "exp(z)", "--coord", "exp(z)+3",
                        "--shift", "2*pi*i"], capsys)
    assert code == 0 and json.loads(out)["classes"] == [[0, 1, 2]]
    code, out, _ = run(["cartan", "--coord", "1", "--coord", "exp(z)", "--r-min", "3.141592653589793",
                        "--r-max", "6.283185307179586", "--r-points", "2"], capsys)
    rows = out.strip().splitlines()[1:]
    assert [float(r.split(",")[1]) for r in rows] == pytest.approx([1, 2], abs=1e-9)


def test_logdiff_modes(capsys):
    code, out, _ = run(["logdiff", "--suite", "ineq", "--cases", "20"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "pass"
    code, out, _ = run(["logdiff", "--expr", "exp(z)", "--alpha", "2", "--delta", "0.5", "--r-min", "4",
                        "--r-max", "8", "--r-points", "2"], capsys)
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "pass" and d["checks"]["K"] == pytest.approx(152)
    code, out, _ = run(["logdiff", "--expr", "exp(2^z)", "--r-min", "3", "--r-max", "8", "--r-points", "3"],
                       capsys)
    assert code == 0 and json.loads(out)["verdict"] == "trend"


def test_sharpness(capsys):
    code, out, _ = run(["sharpness", "--p", "3"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "pass"
    code, out, _ = run(["sharpness", "--p", "4", "--projected"], capsys)
    assert code == 0


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": 1,\n  "curve": [')
    code, _, err = run(["cartan", "--scenario", str(bad)], capsys)
    assert code == 3 and "line 2" in err
    code, _, err = run(["characteristic", "--expr", "exp(z"], capsys)
    assert code == 3 and "line 1, column 6" in err
    code, _, _ = run(["example", "no-such-example"], capsys)
    assert code == 3
    code, _, _ = run(["smt", "--coord", "1", "--coord", "exp(z)", "--shift", "2*pi*i"], capsys)
    assert code == 3
    code, _, _ = run(["nonsense"], capsys)
    assert code == 3
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"schema": 2}')
    code, _, _ = run(["cartan", "--scenario", str(wrong)], capsys)
    assert code == 3


def test_scenario_round_trip(tmp_path):
    for path in sorted(SCENARIOS.glob("*.json")):
        sc = cli.load_scenario(path)
        text = sc.dumps()
        p = tmp_path / path.name
        p.write_text(text)
        assert cli.load_scenario(p).dumps() == text


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert cli.main(["example", "example-7.3", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("scenario,r,left,right,margin,err")


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "casorati_lab.cli", "example", "--list"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "example-1.2" in proc.stdout.split()
