import csv
import json

import pytest

from slotsched.cli import main
from slotsched.workload import table2_scenario


def test_run_and_verify(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--horizon", "2000", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["horizon"] == 2000 and report["interval_length"] == 36 and report["policy"] == "themis"
    assert report["desired_avg_allocation"]["value"] == "1.2430"
    assert set(report["avg_alloc"]) == {"AES", "FFT", "SHA", "BFS", "KMP", "GEMM", "SORT", "SPMV"}
    assert (out / "trace.csv").exists() and (out / "snapshots.csv").exists()
    assert main(["verify", str(out)]) == 0


def test_verify_detects_tampering(tmp_path):
    out = tmp_path / "run"
    main(["run", "--horizon", "720", "--out", str(out)])
    rows = (out / "trace.csv").read_text().splitlines()
    pr = next(i for i, r in enumerate(rows) if ",PR," in r)
    del rows[pr]
    (out / "trace.csv").write_text("\n".join(rows) + "\n")
    assert main(["verify", str(out)]) == 1


def test_seed_is_echoed(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--demand", "random", "--slots", "17,17", "--seed", "5", "--horizon", "720", "--out", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["seed"] == 5


def test_config_file(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(table2_scenario(horizon=720).to_dict()))
    assert main(["run", "--config", str(cfg), "--policy", "drr", "--out", str(tmp_path / "o")]) == 0


def test_unknown_policy_exit_2(tmp_path, capsys):
    assert main(["run", "--policy", "lottery", "--out", str(tmp_path)]) == 2
    assert "themis, stfs, prr, rrr, drr" in capsys.readouterr().err


def test_short_interval_baseline_exit_2(capsys):
    assert main(["run", "--policy", "stfs", "--interval", "10"]) == 2
    err = capsys.readouterr().err
    assert "28" in err and "36" in err


def test_bad_config_key_exit_2(tmp_path, capsys):
    doc = table2_scenario().to_dict()
    doc["slots"][1]["shape"] = "square"
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(doc))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "slots[1].shape" in capsys.readouterr().err


def test_compare_outputs(tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--horizon", "720", "--policies", "themis,stfs", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "compare.csv")))
    assert [r["policy"] for r in rows] == ["themis", "stfs"]
    series = (out / "sod_series.csv").read_text().splitlines()
    assert series[0] == "interval,themis,stfs" and len(series) == 21
    assert (out / "stfs" / "report.json").exists()


def test_sweep_outputs(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--horizon", "640", "--intervals", "1,64", "--gnuplot", "--out", str(out)]) == 0
    assert len((out / "sweep.csv").read_text().splitlines()) == 3
    assert "sweep.csv" in (out / "sweep.gp").read_text()


def test_sweep_empty_intervals_exit_2():
    assert main(["sweep", "--intervals", ""]) == 2


def test_targets(capsys):
    assert main(["targets"]) == 0
    text = capsys.readouterr().out
    assert "lcm_workload: 1799280" in text and "4342716" in text and "1.2430" in text


def test_contract_violation_exit_3(monkeypatch, tmp_path, capsys):
    from slotsched import engine
    from slotsched.policy import Policy, PolicyDecision

    class Oversize(Policy):
        name = "themis"

        def schedule(self, view):
            return PolicyDecision({0: 5}, set(), {0})  # GEMM (area 14) into the 4-unit slot

    monkeypatch.setitem(engine.POLICIES, "themis", Oversize)
    assert main(["run", "--horizon", "72", "--out", str(tmp_path)]) == 3
    assert "does not fit" in capsys.readouterr().err


def test_verify_rejects_malformed_trace(tmp_path):
    out = tmp_path / "run"
    main(["run", "--horizon", "72", "--out", str(out)])
    with open(out / "trace.csv", "a") as fh:
        fh.write("5,0,ASSIGN,NOBODY\n")
    assert main(["verify", str(out)]) == 2
