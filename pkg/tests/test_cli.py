import json

import pytest

from flipdyn.cli import main


@pytest.fixture(autouse=True)
def one_thread(monkeypatch):
    monkeypatch.setenv("FLIPDYN_THREADS", "1")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_schedule_check(capsys):
    code, out, _ = run(capsys, "schedule-check", "--schedule", "cdmpp")
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["config"]["schedule"] == "cdmpp"


def test_failing_schedule_exits_one(capsys, tmp_path):
    f = tmp_path / "flat.txt"
    f.write_text("1 1 1 1 1 1")
    code, out, _ = run(capsys, "schedule-check", "--schedule", str(f))
    assert code == 1 and not json.loads(out)["ok"]


def test_invalid_schedule_exits_two(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("1 1/3 1/2")
    code, _, err = run(capsys, "schedule-check", "--schedule", str(f))
    assert code == 2 and "error" in err


def test_simulate_is_deterministic(capsys):
    a = run(capsys, "simulate", "--seed", "7")
    b = run(capsys, "simulate", "--seed", "7")
    assert a == b and a[0] == 0


def test_zero_rounds_means_zero_flips(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"T": 0}}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    res = json.loads(out)["result"]
    assert code == 0 and res["flips"] == 0 and res["rounds"] == 0


def test_engines_agree(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"graph": {"kind": "random_regular", "n": 12, "d": 3, "seed": 1}, "k": 6,
                               "alpha": "1/5", "params": {"T": 30}}))
    finals = []
    for engine in ("direct", "local"):
        code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--engine", engine, "--seed", "3")
        assert code == 0
        finals.append(json.loads(out)["result"]["final"])
    assert finals[0] == finals[1]


def test_csv_output_and_files(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# flipdyn ") and lines[1].startswith("# config: ")
    assert lines[2] == "t,coloring"
    assert (tmp_path / "simulate.csv").read_text() == out


def test_over_budget_exits_two(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"graph": {"kind": "path", "n": 12}, "k": 5}))
    code, _, err = run(capsys, "exact", "--config", str(cfg))
    assert code == 2 and "proper colorings" in err


def test_bad_presets_exit_two(capsys):
    assert run(capsys, "simulate", "--preset", "nope")[0] == 2
    assert run(capsys, "simulate", "--preset", "phi-cdmpp")[0] == 2


def test_phi_scan_emits_witnesses(capsys):
    code, out, _ = run(capsys, "phi-scan", "--preset", "phi-cdmpp")
    res = json.loads(out)["result"]
    assert code == 0
    general = res["general"]
    assert general["passed"] and res["c0_refined"]["passed"]
    classes = {w["class"] for w in general["equality_witnesses"]}
    assert classes == {"C1", "C2"}


def test_asymmetry_preset(capsys):
    code, out, _ = run(capsys, "exact", "--preset", "asymmetry")
    assert code == 0 and "43046721/10000000000" in out


def test_local_check(capsys):
    code, out, _ = run(capsys, "local-check")
    res = json.loads(out)["result"]
    assert code == 0 and res["mismatches"] == [] and res["rounds_used"] == [22]
