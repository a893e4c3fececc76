import json

import numpy as np
import pytest

from shadowgrowth.cli import main, read_table


def run(argv):
    return main([str(a) for a in argv])


def test_run_discrete_writes_outputs(tmp_path):
    out = tmp_path / "d"
    code = run(["run", "--mode", "discrete", "--L", 64, "--theta-max-deg", 60, "--t-end", 100,
                "--seed", 7, "--snapshot-times", "10,100", "--out-dir", out])
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert {"series.csv", "manifest.json", "snapshot_t10.csv", "snapshot_t100.csv",
            "histogram_t10.csv", "histogram_t100.csv"} <= names
    series = read_table(out / "series.csv")
    assert list(series) == ["t", "W", "mean_h"]
    np.testing.assert_array_equal(series["t"], series["mean_h"])
    snap = read_table(out / "snapshot_t100.csv")
    assert snap["h"].sum() == 100 * 64
    hist = read_table(out / "histogram_t100.csv")
    assert list(hist) == ["bin_center", "count", "frequency"]
    assert hist["frequency"].sum() == pytest.approx(1.0, abs=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["theta_max_deg"] == 60.0
    assert manifest["params"]["theta_max"] == pytest.approx(np.pi / 3)
    assert manifest["seed"] == 7


def test_every_output_has_a_header(tmp_path):
    run(["run", "--mode", "pure_shadow", "--L", 16, "--t-end", 1, "--snapshot-times", "1", "--out-dir", tmp_path])
    for path in tmp_path.glob("*.csv"):
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert all(c.isidentifier() for c in lines[1].split(","))


def test_nonlinear_run_and_17_digit_output(tmp_path):
    code = run(["run", "--mode", "nonlinear", "--L", 32, "--dt", 0.01, "--dx", 1, "--D", 1, "--nu", 1,
                "--R", 1, "--t-end", 2, "--seed", 7, "--out-dir", tmp_path])
    assert code == 0
    row = (tmp_path / "series.csv").read_text().splitlines()[-1]
    w = row.split(",")[1]
    assert float(w) == float(format(float(w), ".17g"))
    assert len(w.replace(".", "").lstrip("0")) >= 15


def test_byte_identical_reruns(tmp_path):
    argv = ["run", "--mode", "nonlinear", "--L", 32, "--t-end", 3, "--seed", 3, "--snapshot-times", "3"]
    run(argv + ["--out-dir", tmp_path / "a"])
    run(argv + ["--out-dir", tmp_path / "b"])
    run(["run", "--config", tmp_path / "a" / "manifest.json", "--out-dir", tmp_path / "c"])
    for name in ("series.csv", "snapshot_t3.csv", "histogram_t3.csv"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# discrete run\nmode = discrete\nL = 32\nt_end = 20  # monolayers\nseed = 4\ntheta_max_deg = 30\n")
    run(["run", "--config", cfg, "--L", 48, "--out-dir", tmp_path / "o"])
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["L"] == 48
    assert manifest["config"]["theta_max_deg"] == 30.0
    assert manifest["config"]["seed"] == 4
    assert read_table(tmp_path / "o" / "series.csv")["mean_h"][-1] == 20


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SHADOWGROWTH_OUT_DIR", str(tmp_path / "env"))
    assert run(["run", "--mode", "pure_shadow", "--L", 16, "--t-end", 1]) == 0
    assert (tmp_path / "env" / "series.csv").exists()


def test_seed_sweep(tmp_path):
    assert run(["run", "--mode", "discrete", "--L", 16, "--t-end", 5, "--seeds", "1..3", "--out-dir", tmp_path]) == 0
    dirs = sorted(p.name for p in tmp_path.iterdir())
    assert dirs == ["seed_1", "seed_2", "seed_3"]
    a = (tmp_path / "seed_1" / "series.csv").read_text()
    b = (tmp_path / "seed_2" / "series.csv").read_text()
    assert a != b


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--mode", "bogus", "--t-end", "1"],
        ["run", "--mode", "discrete"],
        ["run", "--mode", "discrete", "--t-end", "1", "--theta-max-deg", "100"],
        ["run", "--mode", "nonlinear", "--t-end", "1", "--dt", "0"],
        ["run", "--mode", "discrete", "--t-end", "1", "--seeds", "x..y"],
        ["frobnicate"],
        [],
    ],
)
def test_malformed_config_exit_1(argv, tmp_path):
    assert main(argv + (["--out-dir", str(tmp_path)] if argv and argv[0] == "run" else [])) == 1


def test_unknown_config_key_exit_1(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mode = discrete\nt_end = 1\ncolour = blue\n")
    assert run(["run", "--config", cfg, "--out-dir", tmp_path]) == 1


def test_numerical_abort_exit_2(tmp_path):
    assert run(["run", "--mode", "nonlinear", "--L", 32, "--dt", 2, "--t-end", 400, "--out-dir", tmp_path]) == 2


def test_io_failure_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["run", "--mode", "pure_shadow", "--L", 16, "--t-end", 1, "--out-dir", blocker / "sub"]) == 3
    assert run(["run", "--config", tmp_path / "missing.cfg", "--mode", "discrete", "--t-end", 1]) == 3


def test_disperse_table(tmp_path, capsys):
    code = run(["disperse", "--R", 1, "--nu", 1, "--alpha", 0.7, "--omega-bar", 3.14159265, "--out-dir", tmp_path])
    assert code == 0
    assert "k_star = 0.445634" in capsys.readouterr().out
    table = read_table(tmp_path / "dispersion.csv")
    assert list(table) == ["k", "sigma"]
    k, s = table["k"], table["sigma"]
    assert s[0] == 0
    assert (s[(k > 0) & (k < 0.4456)] > 0).all() and (s[k > 0.4457] < 0).all()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["k_star"] == pytest.approx(1.4 / 3.14159265)


def test_disperse_with_measurement(tmp_path):
    code = run(["disperse", "--measure-L", 64, "--measure-steps", 20, "--out-dir", tmp_path])
    assert code == 0
    table = read_table(tmp_path / "dispersion.csv")
    assert list(table) == ["k", "sigma", "sigma_measured"]
    assert np.all(np.sign(table["sigma"]) == np.sign(table["sigma_measured"]))


def test_analyze_snapshot_and_series(tmp_path, capsys):
    run(["run", "--mode", "discrete", "--L", 64, "--t-end", 50, "--seed", 1, "--snapshot-times", "50",
         "--out-dir", tmp_path / "r"])
    capsys.readouterr()
    code = run(["analyze", tmp_path / "r" / "snapshot_t50.csv", "--integer", "--series", tmp_path / "r" / "series.csv",
                "--fit", "0.5:10", "--out-dir", tmp_path / "a"])
    assert code == 0
    diag = dict(
        line.split(",") for line in (tmp_path / "a" / "diagnostics.csv").read_text().splitlines()[2:]
    )
    series = read_table(tmp_path / "r" / "series.csv")
    assert float(diag["W"]) == pytest.approx(series["W"][-1], rel=1e-15)
    assert float(diag["mean_h"]) == 50
    assert 0.2 < float(diag["beta[0.5:10]"]) < 0.8
    assert (tmp_path / "a" / "histogram.csv").exists()


def test_analyze_errors(tmp_path):
    assert run(["analyze", "--out-dir", tmp_path]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("x,h\n0,abc\n")
    assert run(["analyze", bad, "--out-dir", tmp_path]) == 1
    assert run(["analyze", tmp_path / "nope.csv", "--out-dir", tmp_path]) == 3
