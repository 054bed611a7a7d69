import json

import numpy as np
import pytest

from dne.cases import ramp_limited_case, two_bus_qsu_case
from dne.cli import main
from dne.report import emit_plot_csv
from dne.system import Bus, SystemCase, ThermalUnit, TimeGrid, WindFarm, serialize_case


@pytest.fixture
def files(tmp_path):
    def write(name, case):
        path = tmp_path / name
        path.write_text(serialize_case(case), encoding="utf-8")
        return str(path)
    short = SystemCase((Bus(1, is_slack=True),), (),
                       (ThermalUnit("G", 1, 0, 50, np.inf, 20, initial_output=40),),
                       (WindFarm("W", 1, (0.0,), (10.0,), (5.0,)),), {1: (100.0,)},
                       TimeGrid(1))
    return {"two": write("two.json", two_bus_qsu_case()),
            "ramp": write("ramp.json", ramp_limited_case()),
            "short": write("short.json", short),
            "dir": tmp_path}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_writes_box_and_objective(files, capsys):
    out = files["dir"] / "out.json"
    code, _, _ = run(capsys, "solve", files["two"], "-o", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["objective"] == pytest.approx(12.0, abs=1e-6)
    assert np.array(doc["lower"]).shape == (2, 1) and np.array(doc["upper"]).shape == (2, 1)
    assert doc["farms"] == ["W1"] and doc["periods"] == [1, 2]
    assert doc["audit"]["passed"]


def test_solve_exit_codes(files, capsys):
    code, _, err = run(capsys, "solve", files["dir"] / "missing.json")
    assert code == 1 and "not found" in err
    code, _, _ = run(capsys, "solve", files["two"], "--bogus")
    assert code == 1
    code, _, err = run(capsys, "solve", files["short"])
    assert code == 2 and "infeasible" in err
    cfg = files["dir"] / "cfg.json"
    cfg.write_text(json.dumps({"max_outer": 1}))
    code, _, err = run(capsys, "solve", files["ramp"], "--config", cfg)
    assert code == 3 and "solver failure" in err


def test_config_errors(files, capsys):
    cfg = files["dir"] / "cfg.json"
    cfg.write_text(json.dumps({"eps": 1e-6}))
    code, _, err = run(capsys, "solve", files["two"], "--config", cfg)
    assert code == 1 and "unknown setting" in err
    cfg.write_text("{not json")
    code, _, err = run(capsys, "solve", files["two"], "--config", cfg)
    assert code == 1 and "line 1" in err
    code, _, _ = run(capsys, "solve", files["two"], "--enable-qsu", "G1")
    assert code == 1


def test_enable_qsu_none_narrows(files, capsys):
    code, out, _ = run(capsys, "solve", files["two"], "--enable-qsu", "none", "--no-audit")
    assert code == 0
    assert json.loads(out)["objective"] == pytest.approx(4.0, abs=1e-6)


def test_ded_exit_codes(files, capsys):
    code, out, _ = run(capsys, "ded", files["ramp"])
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "ded" and np.array(doc["lmp"]).shape == (3, 3)
    code, _, _ = run(capsys, "ded", files["short"])
    assert code == 2
    code, _, _ = run(capsys, "ded", files["dir"] / "nope.json")
    assert code == 1


def test_periods_truncates(files, capsys):
    code, out, _ = run(capsys, "ded", files["ramp"], "--periods", "2")
    assert code == 0 and np.array(json.loads(out)["ddp"]).shape == (2, 3)
    code, _, _ = run(capsys, "ded", files["ramp"], "--periods", "0")
    assert code == 1


def test_single(files, capsys):
    code, out, _ = run(capsys, "single", files["two"], "--no-audit")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "single" and len(doc["periods"]) == 2


def test_log_iterations_emits_json_lines(files, capsys):
    code, _, err = run(capsys, "solve", files["ramp"], "--no-audit", "--log-iterations")
    assert code == 0
    recs = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
    assert recs and [r["k"] for r in recs] == list(range(len(recs)))
    assert set(recs[0]) >= {"k", "mp_objective", "q", "vertex"}
    assert recs[-1]["q"] <= 1e-6


def test_compare_then_check(files, capsys):
    d = files["dir"]
    code, _, _ = run(capsys, "compare", files["ramp"], "-o", d / "cmp.json",
                     "--plot-csv", d / "cmp.csv", "--trajectory-csv", d / "red.csv")
    assert code == 0
    doc = json.loads((d / "cmp.json").read_text())
    assert doc["trajectory_check"]["feasible"] is False
    lines = (d / "cmp.csv").read_text().splitlines()
    assert lines[0] == ("period,case_label,total_lower,total_upper,total_forecast,"
                        "single_lower,single_upper,trajectory")
    for line in lines[1:]:
        f = line.split(",")
        assert float(f[5]) <= float(f[2]) and float(f[3]) <= float(f[6])
    code, out, err = run(capsys, "check", files["ramp"], "--trajectory", d / "red.csv")
    assert code == 2
    assert "ramp" in err
    assert any(r.startswith("ramp") for r in json.loads(out)["violated_rows"])
    # the plot subcommand reproduces the table from the saved results
    code, _, _ = run(capsys, "plot", d / "cmp.json", "-o", d / "again.csv")
    assert code == 0
    assert (d / "again.csv").read_bytes() == (d / "cmp.csv").read_bytes()


def test_check_feasible_and_bad_csv(files, capsys):
    d = files["dir"]
    fc = d / "fc.csv"
    rows = ["period,farm,mw"] + [f"{t},{f},{v}" for t in (1, 2, 3)
                                 for f, v in (("W1", 15.0), ("W2", 10.0))]
    fc.write_text("\n".join(rows) + "\n")
    code, out, _ = run(capsys, "check", files["ramp"], "--trajectory", fc)
    assert code == 0 and json.loads(out)["feasible"] is True
    bad = d / "bad.csv"
    bad.write_text("period,farm,mw\n1,W1,5\n")
    code, _, err = run(capsys, "check", files["ramp"], "--trajectory", bad)
    assert code == 1 and "missing value" in err
    code, _, _ = run(capsys, "check", files["ramp"], "--trajectory", d / "none.csv")
    assert code == 1


def test_plot_round_trip_and_kind_errors(files, capsys):
    d = files["dir"]
    code, _, _ = run(capsys, "solve", files["two"], "-o", d / "r.json",
                     "--plot-csv", d / "bands.csv", "--label", "caseA")
    assert code == 0
    code, _, _ = run(capsys, "plot", d / "r.json", "-o", d / "bands2.csv")
    assert code == 0
    assert (d / "bands2.csv").read_bytes() == (d / "bands.csv").read_bytes()
    code, _, err = run(capsys, "plot", d / "r.json", "--kind", "comparison")
    assert code == 1 and "compare" in err
    code, _, _ = run(capsys, "plot", d / "absent.json")
    assert code == 1


def solve_doc(label, lower, upper, forecast):
    return {"kind": "solve", "case_label": label, "periods": list(range(1, len(lower) + 1)),
            "lower": lower, "upper": upper, "forecast": forecast}


def test_bands_single_farm():
    doc = solve_doc("a", [[10.0], [12.0]], [[30.0], [31.0]], [[20.0], [20.0]])
    assert emit_plot_csv(doc, "bands") == (
        "period,case_label,total_lower,total_upper,total_forecast\n"
        "1,a,10.000000,30.000000,20.000000\n"
        "2,a,12.000000,31.000000,20.000000\n")


def test_bands_sum_over_farms_and_sort():
    b = solve_doc("b", [[1.0, 2.5]], [[4.0, 5.0]], [[2.0, 3.0]])
    a = solve_doc("a", [[0.0, -0.0]], [[1.0, 1.0]], [[0.5, 0.5]])
    lines = emit_plot_csv([b, a], "bands").splitlines()
    assert lines[1] == "1,a,0.000000,2.000000,1.000000"
    assert lines[2] == "1,b,3.500000,9.000000,5.000000"


def test_plot_kind_mismatch():
    doc = solve_doc("a", [[1.0]], [[2.0]], [[1.5]])
    with pytest.raises(ValueError, match="compare"):
        emit_plot_csv(doc, "comparison")
    with pytest.raises(ValueError, match="unknown plot kind"):
        emit_plot_csv(doc, "lines")
