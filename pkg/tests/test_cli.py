import json

import pytest

from ranklip.cli import main


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "train.cfg"
    p.write_text("n = 40\nd = 4\n", encoding="utf-8")
    return p


def test_json_to_file(tmp_path, config):
    out = tmp_path / "r.json"
    assert main(["train", "--config", str(config), "--out", str(out), "--seed", "3"]) == 0
    report = json.loads(out.read_text())
    assert report["metadata"]["config"]["seed"] == 3
    assert all(r["seed"] == 3 for r in report["rows"])


def test_csv_to_stdout(config, capsys):
    assert main(["train", "--config", str(config), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("experiment,seed,config_hash")


def test_usage_errors(tmp_path, config, capsys):
    assert main(["nope", "--config", str(config)]) == 2
    assert main(["train"]) == 2
    assert main(["train", "--config", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("trials = 0\n", encoding="utf-8")
    assert main(["gap", "--config", str(bad)]) == 2
    assert "trials" in capsys.readouterr().err


def test_check_failure_exit_code(tmp_path):
    p = tmp_path / "cw.json"
    # over this m-grid the normalised ratio drifts well beyond 20%
    p.write_text(json.dumps({"m_grid": [2, 100000], "n": 10}), encoding="utf-8")
    assert main(["compare-cw", "--config", str(p)]) == 1


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
