import json
import subprocess
import sys

import numpy as np
import pytest

from spinterval.cli import InputError, main, parse_draws


@pytest.fixture
def normal_file(tmp_path):
    path = tmp_path / "draws.txt"
    x = np.random.default_rng(2024).standard_normal(500)
    np.savetxt(path, x, fmt="%.17g")
    return path


@pytest.fixture
def five_file(tmp_path):
    path = tmp_path / "five.txt"
    path.write_text("0\n1\n2\n3\n10\n")
    return path


def test_parse_plain_header_crlf_and_exponents():
    assert parse_draws("1\n2.5\n-3e-2\n").tolist() == [1.0, 2.5, -0.03]
    assert parse_draws("value\r\n1\r\n.5\r\n+2E3\r\n").tolist() == [1.0, 0.5, 2000.0]
    assert parse_draws("\n1\n\n2\n").tolist() == [1.0, 2.0]


@pytest.mark.parametrize("text,line", [("1\n2\nabc\n", 3), ("x\ny\n", 2), ("1\n2,3\n", 2), ("1\nnan\n", 2),
                                        ("1\ninf\n", 2), ("1\n0x10\n", 2)])
def test_parse_rejects_malformed_lines(text, line):
    with pytest.raises(InputError, match=f"line {line}"):
        parse_draws(text)


def test_parse_rejects_overflow():
    with pytest.raises(InputError, match="infinity"):
        parse_draws("1\n1e999\n")


def test_shortest_on_five_points(five_file, capsys):
    assert main(["interval", "--input", str(five_file), "--method", "shortest", "--alpha", "0.2"]) == 0
    out = capsys.readouterr().out
    assert out == "shortest\t0\t3\n"


def test_spin_needs_ten_draws(five_file, capsys):
    assert main(["interval", "--input", str(five_file)]) == 1
    err = capsys.readouterr().err
    assert "at least 10" in err


def test_spin_json_on_normal_draws(normal_file, capsys):
    args = ["interval", "--input", str(normal_file), "--method", "spin", "--method", "central", "--json"]
    assert main(args) == 0
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert doc["schema"] == 1
    spin = doc["results"][0]
    assert set(spin) == {"method", "lower", "upper", "alpha", "n", "diagnostics"}
    assert spin["method"] == "spin" and spin["n"] == 500
    assert spin["lower"] == pytest.approx(-1.96, abs=0.25)
    assert spin["upper"] == pytest.approx(1.96, abs=0.25)
    assert doc["results"][1]["method"] == "central"
    # same flags, same bytes
    assert main(args) == 0
    assert capsys.readouterr().out == out


def test_all_methods_and_flags(normal_file, capsys):
    args = ["interval", "--input", str(normal_file), "--alpha", "0.5", "--bootstrap", "5",
            "--bandwidth", "10", "--seed", "3", "--compat", "paper-matrix,paper-qpp", "--json",
            "--lower-bound", "-100", "--upper-bound", "100"]
    for m in ("spin", "shortest", "central", "central-qp", "gaussian"):
        args += ["--method", m]
    assert main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in doc["results"]] == ["spin", "shortest", "central", "central-qp", "gaussian"]
    assert doc["results"][0]["diagnostics"]["bandwidth_b"] == 10
    assert doc["results"][0]["diagnostics"]["augmented"] == [-100.0, 100.0]


def test_missing_file(capsys):
    assert main(["interval", "--input", "/nonexistent/draws.txt"]) == 1
    captured = capsys.readouterr()
    assert captured.out == "" and "cannot read" in captured.err


def test_bound_inside_data_is_error(normal_file, capsys):
    assert main(["interval", "--input", str(normal_file), "--lower-bound", "0"]) == 1
    assert "inside the data range" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [["--alpha", "1.5"], ["--bandwidth", "1"], ["--bandwidth", "x"],
                                 ["--compat", "nope"], ["--method", "median"], ["--bootstrap", "0"]])
def test_usage_errors(normal_file, bad):
    with pytest.raises(SystemExit) as exc:
        main(["interval", "--input", str(normal_file)] + bad)
    assert exc.value.code == 2


def test_bench_zero_reps_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "--dist", "normal", "--reps", "0", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_bench_invalid_grid_values(tmp_path):
    for bad in (["--n", "0"], ["--alpha", "0.05,2"], ["--methods", "shortest,bogus"]):
        with pytest.raises(SystemExit):
            main(["bench", "--dist", "normal", "--out", str(tmp_path)] + bad)


def test_bench_writes_csv_with_efficiency(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["bench", "--dist", "normal", "--n", "100", "--reps", "3", "--methods", "shortest,spin",
            "--out", str(out), "--dump-raw", "--bootstrap", "3"]
    assert main(args) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    header = (out / "summary.csv").read_text().splitlines()[0].split(",")
    assert "efficiency" in header
    assert (out / "raw.csv").exists()
    assert (out / "efficiency-normal-a0.05.svg").exists()
    first = (out / "summary.csv").read_bytes()
    assert main(args + ["--workers", "2"]) == 0
    assert (out / "summary.csv").read_bytes() == first


def test_module_entry_point_logs_to_stderr(five_file):
    proc = subprocess.run(
        [sys.executable, "-m", "spinterval", "-v", "interval", "--input", str(five_file),
         "--method", "shortest", "--alpha", "0.2", "--json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["results"][0]["lower"] == 0.0
    assert "computing shortest" in proc.stderr
