import csv
import subprocess
import sys

import numpy as np
import pytest

from stablevol.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_check_params_pass(capsys):
    assert main(["check-params", "--alpha", "1.8", "--mu", "1.5", "--lambda", "2", "--kappa", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "C_alpha    = 0.1649" in out
    assert "delta_max  = 0.25" in out
    assert "FAIL" not in out


def test_check_params_fail(capsys):
    assert main(["check-params", "--alpha", "1.8", "--mu", "1.0", "--lambda", "2", "--kappa", "0.5"]) == 1
    assert "FAIL  μ > 1" in capsys.readouterr().out


def test_sample_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--alpha", "1.5", "--beta", "0", "--n", "100", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    assert rows[0] == ["index", "value"] and len(rows) == 101
    assert rows[5][0] == "4"


def test_simulate_three_paths(tmp_path):
    out = tmp_path / "paths.csv"
    args = ["simulate", "--alpha", "1.8", "--mu", "1.5", "--lambda", "2", "--kappa", "0.5",
            "--x0", "1", "--delta", "2^-8", "--horizon", "1", "--paths", "3", "--seed", "1",
            "--out", str(out)]
    assert main(args) == 0
    rows = read_csv(out)
    assert rows[0] == ["trajectory", "step", "time", "value"]
    assert len(rows) == 1 + 3 * 257
    vals = np.array([float(r[3]) for r in rows[1:]])
    assert vals.min() >= 2.0**-8
    assert rows[1][3] == "1.0" and rows[-1][2] == "1.0"


def test_simulate_rejects_bad_step(tmp_path, capsys):
    args = ["simulate", "--alpha", "1.8", "--mu", "1.5", "--lambda", "2", "--kappa", "0.5",
            "--delta", "0.5", "--paths", "1", "--out", str(tmp_path / "p.csv")]
    assert main(args) == 1
    assert "window" in capsys.readouterr().err


def test_simulate_rejects_bad_params(tmp_path):
    args = ["simulate", "--alpha", "1.8", "--mu", "0.5", "--lambda", "2", "--kappa", "0.5",
            "--delta", "2^-8", "--out", str(tmp_path / "p.csv")]
    assert main(args) == 1


def test_io_failure_exit_code(tmp_path):
    args = ["sample", "--alpha", "1.5", "--n", "3", "--out", str(tmp_path / "no" / "x.csv")]
    assert main(args) == 2


def small_convergence(out, *extra):
    return ["convergence", "--preset", "table1", "--desk-scale", "--alpha", "1.8,1.1",
            "--deltas", "2^-6,2^-5,2^-4", "--ref", "2^-9", "--m", "40", "--seed", "2",
            "--out", str(out), *extra]


def test_convergence_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(small_convergence(out)) == 0
    slopes = read_csv(out / "slopes.csv")
    assert slopes[0] == ["alpha", "slope", "stderr", "target"]
    assert [r[0] for r in slopes[1:]] == ["1.8", "1.1"]
    per = read_csv(out / "alpha_1.8.csv")
    assert per[0] == ["delta", "error", "stderr"]
    assert [float(r[0]) for r in per[1:]] == [2.0**-6, 2.0**-5, 2.0**-4]
    dat = (out / "loglog_alpha_1.1.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 4
    assert "plot" in (out / "plot.gp").read_text()
    assert (out / "config.json").exists()


def test_convergence_threads_do_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(small_convergence(a)) == 0
    assert main(small_convergence(b, "--workers", "3")) == 0
    for name in ("slopes.csv", "alpha_1.8.csv", "alpha_1.1.csv", "diagnostics.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_convergence_check_mode_exit_code(tmp_path, monkeypatch, capsys):
    import stablevol.cli as cli

    monkeypatch.setattr(cli, "SLOPE_BAND", -1.0)
    assert main(small_convergence(tmp_path / "c", "--check")) == 3
    assert "CHECK FAILED" in capsys.readouterr().err


def test_convergence_rejects_unknown_preset():
    with pytest.raises(SystemExit):
        main(["convergence", "--preset", "table9"])


def test_convergence_validation_failure(tmp_path):
    args = ["convergence", "--mu", "1.5", "--lambda", "0", "--kappa", "0.5", "--out", str(tmp_path)]
    assert main(args) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stablevol", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "convergence" in res.stdout


def test_config_snapshot_is_location_independent(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(small_convergence(a, "--alpha", "1.8")) == 0
    assert main(small_convergence(b, "--alpha", "1.8")) == 0
    assert (a / "config.json").read_bytes() == (b / "config.json").read_bytes()
