import csv
import io
import json
import os
import subprocess
import sys

import pytest

from fwlab.cli import main, parse_args

DEFAULT_ARGS = ["--m", "1", "--e", "1", "--H", "0.1", "--mu-prime", "0.001", "--n-max", "64"]


def run_cli(args, tmp_path, name="out"):
    out = tmp_path / name
    status = main(list(args) + ["--out", str(out)])
    return status, out.read_bytes() if out.exists() else None


def parse_csv(data: bytes):
    lines = [ln for ln in data.decode().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_parse_spectrum_example():
    cfg = parse_args(["spectrum"] + DEFAULT_ARGS + ["--format", "csv", "--out", "levels.csv"])
    assert cfg.subcommand == "spectrum"
    assert cfg.params.H == 0.1 and cfg.params.n_max == 64 and cfg.params.mu_prime == 0.001
    assert cfg.output_path == "levels.csv" and cfg.format == "csv"


@pytest.mark.parametrize("argv", [[], ["spectrum", "--H", "-0.1"], ["spectrum", "--n-max", "2"],
                                  ["spectrum", "--m", "abc"], ["wavefunction", "--M", "1"],
                                  ["transform", "--lambda", "0"], ["frobnicate"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        parse_args(argv)
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_spectrum_row(tmp_path):
    status, data = run_cli(["spectrum", "--mu-prime", "0", "--n-max", "8"], tmp_path)
    assert status == 0
    rows = parse_csv(data)
    row = next(r for r in rows if r["n"] == "0" and r["lambda"] == "-1")
    assert float(row["eps0"]) == pytest.approx(1.0954451, abs=1e-7)
    assert float(row["E0"]) == 0.0
    assert float(row["E_total"]) == pytest.approx(1.0954451, abs=1e-7)
    assert len(rows) == 18


def test_verify_default_exit_0(tmp_path):
    status, data = run_cli(["verify", "--format", "json"] + DEFAULT_ARGS, tmp_path)
    assert status == 0
    doc = json.loads(data)
    assert doc["meta"]["all_passed"] is True
    assert all(r["passed"] for r in doc["rows"])


def test_verify_sabotage_exit_1(tmp_path):
    status, data = run_cli(["verify", "--n-max", "16", "--spin-operator", "sigma", "--format", "json"], tmp_path)
    assert status == 1
    failed = {r["check_name"] for r in json.loads(data)["rows"] if not r["passed"]}
    assert {"exactness_commutator", "connection_lower_spinor"} <= failed


def test_tolerance_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FWLAB_TOLERANCE_SCALE", "100")
    status, data = run_cli(["verify", "--n-max", "8", "--format", "json"], tmp_path)
    doc = json.loads(data)
    assert doc["meta"]["tolerance_scale"] == 100.0
    tol = {r["check_name"]: r["tolerance"] for r in doc["rows"]}
    assert tol["fw_conjugation"] == pytest.approx(1e-6)
    monkeypatch.setenv("FWLAB_TOLERANCE_SCALE", "-1")
    assert main(["verify", "--n-max", "8", "--out", str(tmp_path / "x")]) == 2


def test_transform_output(tmp_path):
    status, data = run_cli(["transform", "--n", "2", "--lambda", "-1", "--n-max", "12", "--format", "json"], tmp_path)
    assert status == 0
    doc = json.loads(data)
    assert doc["meta"]["difference_norm"] <= 1e-8
    assert len(doc["rows"]) == 4 * 13
    lower_fw = [r for r in doc["rows"] if r["s"] >= 2]
    assert max(abs(r["fw_re"]) + abs(r["fw_im"]) for r in lower_fw) <= 1e-8


def test_transform_edge_exit_4(tmp_path, capsys):
    status, data = run_cli(["transform", "--n", "12", "--n-max", "12"], tmp_path)
    assert status == 4 and data is None
    assert "interior" in capsys.readouterr().err


def test_wavefunction_lowest(tmp_path):
    b = 1 / 0.1**0.5
    status, data = run_cli(["wavefunction", "--n", "0", "--lambda", "1", "--M", "0.5", "--rho-max", repr(10 * b),
                            "--points", "500"], tmp_path)
    assert status == 0
    rows = parse_csv(data)
    vals = [float(r["R"]) for r in rows]
    assert len(vals) == 500
    assert all(v > 0 for v in vals)
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 1e-6
    header = [ln for ln in data.decode().splitlines() if ln.startswith("# state")][0]
    assert '"n_rho": 0' in header


def test_wavefunction_inadmissible_exit_4(tmp_path, capsys):
    status, _ = run_cli(["wavefunction", "--n", "0", "--lambda", "1", "--M", "-1.5"], tmp_path)
    assert status == 4
    assert "inadmissible" in capsys.readouterr().err


def test_unwritable_exit_3(tmp_path):
    assert main(["spectrum", "--out", str(tmp_path / "missing" / "x.csv")]) == 3


def test_no_temp_files_left(tmp_path):
    run_cli(["spectrum", "--n-max", "4"], tmp_path)
    assert sorted(os.listdir(tmp_path)) == ["out"]


@pytest.mark.parametrize("sub", [["spectrum"], ["verify", "--n-max", "8"], ["transform", "--n", "1"],
                                 ["wavefunction", "--n", "1", "--lambda", "-1", "--points", "200"]])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_identical(sub, fmt, tmp_path):
    _, a = run_cli(sub + ["--format", fmt], tmp_path, "a")
    _, b = run_cli(sub + ["--format", fmt], tmp_path, "b")
    assert a == b


@pytest.mark.parametrize("sub", [["spectrum", "--mu-prime", "0.0013"], ["transform", "--n", "3", "--n-max", "10"],
                                 ["wavefunction", "--n", "2", "--M", "-1.5", "--points", "300"]])
def test_csv_json_same_numbers(sub, tmp_path):
    _, c = run_cli(sub + ["--format", "csv"], tmp_path, "c")
    _, j = run_cli(sub + ["--format", "json"], tmp_path, "j")
    rows_c = parse_csv(c)
    rows_j = json.loads(j)["rows"]
    assert len(rows_c) == len(rows_j)
    for rc, rj in zip(rows_c, rows_j):
        for key, v in rj.items():
            # identical binary64 values, so identical 17-digit renderings
            assert f"{float(rc[key]):.17g}" == f"{float(v):.17g}"


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "fwlab", "spectrum", "--n-max", "4", "--format", "json",
                           "--out", str(out)], capture_output=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["meta"]["subcommand"] == "spectrum"
    proc = subprocess.run([sys.executable, "-m", "fwlab"], capture_output=True)
    assert proc.returncode == 2
