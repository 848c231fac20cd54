import csv
import json
import subprocess
import sys

import pytest

from matrixballs import __version__
from matrixballs.cli import main

INVOCATIONS = {
    "constants": ["constants", "--p", "2", "--q", "4"],
    "constants_inf": ["constants", "--p", "inf"],
    "delta": ["delta", "--p", "1.5", "--n-max", "6"],
    "ullman": ["ullman", "--p", "2", "--x-grid=-1:1:5", "--check-potential"],
    "vandermonde": ["vandermonde", "--n-max", "12", "--check-gl"],
    "sample": ["sample", "--n", "3", "--p", "1", "--count", "20", "--burn-in", "50", "--seed", "5"],
    "wlln": ["wlln", "--p", "2", "--q", "4", "--n", "5,10", "--reps", "50"],
    "intersect": ["intersect", "--p", "2", "--q", "4", "--n", "20", "--reps", "100", "--t-grid", "0.9:1.1:3"],
    "volume": ["volume", "--p", "inf", "--n", "2,3", "--samples", "2000", "--seed", "3"],
}


def run(argv, tmp_path, name="out"):
    path = tmp_path / name
    code = main([*argv, "--output", str(path)])
    return code, path


@pytest.mark.parametrize("key", sorted(INVOCATIONS))
def test_rerun_is_byte_identical(key, tmp_path):
    argv = INVOCATIONS[key]
    c1, p1 = run(argv, tmp_path, "a")
    c2, p2 = run(argv, tmp_path, "b")
    assert c1 == c2 == 0
    assert p1.read_bytes() == p2.read_bytes()
    meta1 = tmp_path / "a.meta.json"
    if meta1.exists():
        assert meta1.read_bytes() == (tmp_path / "b.meta.json").read_bytes()
    assert json.loads((tmp_path / "a.timing.json").read_text())["duration_seconds"] >= 0


def test_json_header(tmp_path):
    code, path = run(INVOCATIONS["constants"], tmp_path)
    doc = json.loads(path.read_text())
    assert code == 0
    assert doc["schema"] == 1 and doc["version"] == __version__ and doc["seed"] == 0
    row = doc["results"][0]
    assert row["threshold"] == pytest.approx(1.0239152125785804, abs=1e-12)
    assert row["threshold_degenerate"] is False


def test_constants_inf(tmp_path):
    _, path = run(INVOCATIONS["constants_inf"], tmp_path)
    row = json.loads(path.read_text())["results"][0]
    assert row["delta_p"] == 0.5 and row["lambda_p"] is None


def test_sample_csv_and_sidecar(tmp_path):
    _, path = run(INVOCATIONS["sample"], tmp_path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x0", "x1", "x2"] and len(rows) == 21
    meta = json.loads((tmp_path / "out.meta.json").read_text())
    assert meta["seed"] == 5
    assert meta["metadata"]["base_source"] == "mcmc"
    assert 0 < meta["metadata"]["acceptance_rate"] < 1


def test_seed_changes_sample(tmp_path):
    _, a = run(INVOCATIONS["sample"], tmp_path, "a")
    argv = list(INVOCATIONS["sample"])
    argv[-1] = "6"
    _, b = run(argv, tmp_path, "b")
    assert a.read_bytes() != b.read_bytes()


def test_intersect_grid(tmp_path):
    code = main(["intersect", "--p", "2", "--q", "4", "--beta", "2", "--n", "60", "--reps", "500",
                 "--t-grid", "0.8:1.2:9", "--format", "csv", "--output", str(tmp_path / "i.csv")])
    rows = list(csv.DictReader((tmp_path / "i.csv").open()))
    assert code == 0 and len(rows) == 9
    fr = [float(r["fraction"]) for r in rows]
    assert fr == sorted(fr)


def test_vandermonde_gap(tmp_path):
    _, path = run(["vandermonde", "--n-max", "50", "--check-gl"], tmp_path)
    rows = json.loads(path.read_text())["results"]
    assert len(rows) == 49 and max(r["gl_identity_gap"] for r in rows) < 1e-9


def test_delta_output(tmp_path):
    _, path = run(INVOCATIONS["delta"], tmp_path)
    rows = json.loads(path.read_text())["results"]
    assert [r["n"] for r in rows] == [2, 3, 4, 5, 6, "inf"]
    assert all(r["status"] == "converged" for r in rows[:-1])


def test_delta_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"optimizer": {"tol": 1e-9}}))
    code, _ = run(["delta", "--p", "2", "--n-max", "3", "--config", str(cfg)], tmp_path)
    assert code == 0


def test_stdout_mode(capsys):
    assert main(["constants", "--p", "2"]) == 0
    out = capsys.readouterr()
    assert json.loads(out.out)["command"] == "constants"
    assert "delta_p" in out.err


@pytest.mark.parametrize(
    "argv",
    [
        ["constants"],
        ["constants", "--p", "2", "--seed", "-1"],
        ["intersect", "--p", "2", "--q", "4", "--n", "5", "--t-grid", "0:1:3"],
        ["ullman", "--p", "2", "--x-grid", "1:0:3"],
    ],
)
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_domain_error_exit_2(capsys):
    assert main(["constants", "--p", "-1"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["delta", "--p", "2", "--n-max", "1"]) == 2


def test_unwritable_output_exit_1(tmp_path):
    assert main(["constants", "--p", "2", "--output", str(tmp_path / "missing" / "x.json")]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "matrixballs", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
