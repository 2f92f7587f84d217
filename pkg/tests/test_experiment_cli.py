import filecmp
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from gibbsbound import cli, experiment
from gibbsbound.experiment import ExperimentConfig, emit_curves, load_config, run_experiment

TINY = dict(
    dataset="synthetic",
    n=40,
    d_in=4,
    separation=4.0,
    flip_rate=0.0,
    holdout_n=30,
    arch=(4, 6, 1),
    loss="savage",
    method="sgld",
    step=0.01,
    sigma=5.0,
    minibatch=10,
    max_steps=150,
    min_steps=120,
    init_width=0.1,
    ladder=(0.0, 5.0, 20.0),
    delta=0.05,
    seed=3,
    single_draw=True,
)


def tiny_config(**overrides):
    return ExperimentConfig(**{**TINY, **overrides})


def test_load_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "# sample config\n"
        "dataset = synthetic\n"
        "n = 64\n"
        "arch = 4,8,1\n"
        "ladder = 0,10,40\n"
        "loss = bbce\n"
        "warm_start = true\n"
    )
    cfg = load_config(str(cfg_file), [("seed", "9"), ("ladder", "0,5")])
    assert cfg.n == 64
    assert cfg.arch == (4, 8, 1)
    assert cfg.ladder == (0.0, 5.0)  # override wins
    assert cfg.warm_start is True
    assert cfg.seed == 9


def test_load_config_rejects_unknown_keys_and_bad_lines(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("frobnicate = 1\n")
    with pytest.raises(ValueError):
        load_config(str(bad))
    bad.write_text("just a line\n")
    with pytest.raises(ValueError):
        load_config(str(bad))


def test_config_validation():
    with pytest.raises(ValueError):
        tiny_config(ladder=(5.0, 10.0))
    with pytest.raises(ValueError):
        tiny_config(labels="everything")
    with pytest.raises(ValueError):
        tiny_config(dataset="imagenet")


def test_run_experiment_writes_all_artifacts(tmp_path):
    out = tmp_path / "run"
    summary = run_experiment(tiny_config(out_dir=str(out)))
    assert not summary["all_diverged"]
    assert set(summary["conditions"]) == {"true", "random"}
    for cond in ("true", "random"):
        assert os.path.exists(out / f"report_{cond}.csv")
        assert os.path.exists(out / f"report_{cond}.json")
        for k, beta in enumerate((0, 5, 20)):
            assert os.path.exists(out / "chains" / f"{cond}_rung{k}_beta{beta}.csv")
    est = json.loads((out / "estimates.json").read_text())
    assert set(est) == {"true", "random"}
    assert len(est["true"]["surrogate"]) == 3
    cal = json.loads((out / "calibration.json").read_text())
    assert cal["r"] >= 0.0
    header = json.loads((out / "report_true.json").read_text())
    assert header["r"] == cal["r"]
    assert header["config_digest"] == summary["config_digest"]
    # single-draw and test columns present
    report_lines = (out / "report_true.csv").read_text().splitlines()
    assert "bound01_single" in report_lines[0]
    assert "test01" in report_lines[0]


def test_rerun_is_bit_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_experiment(tiny_config(out_dir=str(a)))
    run_experiment(tiny_config(out_dir=str(b)))
    for name in ("report_true.csv", "report_random.csv", "estimates.json", "calibration.json"):
        assert filecmp.cmp(a / name, b / name, shallow=False), name
    for chain in sorted(os.listdir(a / "chains")):
        assert filecmp.cmp(a / "chains" / chain, b / "chains" / chain, shallow=False), chain


def test_holdout_never_touches_the_bounds(tmp_path):
    with_test = tmp_path / "with"
    without_test = tmp_path / "without"
    run_experiment(tiny_config(out_dir=str(with_test), holdout_n=30))
    run_experiment(tiny_config(out_dir=str(without_test), holdout_n=0))
    for cond in ("true", "random"):
        kept = []
        for path in (with_test / f"report_{cond}.csv", without_test / f"report_{cond}.csv"):
            lines = path.read_text().splitlines()
            cols = lines[0].split(",")
            take = [cols.index(c) for c in ("beta", "train_loss", "train01", "gamma",
                                            "budget", "bound01", "bound01_single", "penalty")]
            kept.append([",".join(line.split(",")[i] for i in take) for line in lines[1:]])
        assert kept[0] == kept[1]


def test_uncalibrated_flag_sets_r_to_one(tmp_path):
    out = tmp_path / "unc"
    summary = run_experiment(tiny_config(out_dir=str(out), uncalibrated=True))
    assert summary["calibration"]["r"] == 1.0
    assert summary["calibration"]["mode"] == "uncalibrated"


def test_true_only_run_skips_calibration(tmp_path):
    out = tmp_path / "true-only"
    summary = run_experiment(tiny_config(out_dir=str(out), labels="true"))
    assert summary["calibration"]["r"] == 1.0
    assert not os.path.exists(out / "report_random.csv")


def test_warm_start_and_jobs_paths(tmp_path):
    warm = run_experiment(tiny_config(out_dir=str(tmp_path / "warm"), warm_start=True))
    assert not warm["all_diverged"]
    par = run_experiment(tiny_config(out_dir=str(tmp_path / "par"), jobs=2))
    seq = run_experiment(tiny_config(out_dir=str(tmp_path / "seq"), jobs=1))
    assert par["conditions"]["true"]["bounds01"] == seq["conditions"]["true"]["bounds01"]


def test_emit_curves_round_trip(tmp_path):
    out = tmp_path / "run"
    run_experiment(tiny_config(out_dir=str(out)))
    report = out / "report_true.csv"
    curves = tmp_path / "curves.csv"
    emit_curves(str(report), str(curves))
    lines = curves.read_text().strip().splitlines()
    assert lines[0] == "beta,series,value"
    assert len(lines) == 1 + 3 * 2  # three series per rung, two rungs
    # values round-trip the report to 12 significant digits
    rows = [line.split(",") for line in report.read_text().splitlines()]
    cols = {name: i for i, name in enumerate(rows[0])}
    reported = float(rows[1][cols["bound01"]])
    emitted = [float(l.split(",")[2]) for l in lines[1:] if l.split(",")[1] == "bound01"][0]
    assert math.isclose(emitted, reported, rel_tol=1e-12)


def test_emit_curves_header_only_for_empty_report(tmp_path):
    report = tmp_path / "empty.csv"
    report.write_text("beta,train_loss,train01,gamma,budget,bound01,bound01_single,penalty\n")
    curves = tmp_path / "curves.csv"
    emit_curves(str(report), str(curves))
    assert curves.read_text() == "beta,series,value\n"


def test_cli_run_and_followup_commands(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "\n".join(
            f"{key} = {','.join(str(v) for v in val) if isinstance(val, tuple) else val}"
            for key, val in TINY.items()
        )
        + "\n"
    )
    out = tmp_path / "cli-run"
    code = cli.main(["run", "--config", str(cfg_file), "--out-dir", str(out), "--seed", "3"])
    assert code == 0
    est = out / "estimates.json"

    code = cli.main(["calibrate", "--estimates", str(est), "--condition", "random",
                     "--delta", "0.05"])
    assert code == 0

    report = tmp_path / "re-bound.csv"
    code = cli.main(["bound", "--estimates", str(est), "--condition", "true",
                     "--delta", "0.05", "--r", "1.0", "--out", str(report)])
    assert code == 0 and report.exists()

    curves = tmp_path / "curves.csv"
    code = cli.main(["emit-curves", "--report", str(report), "--out", str(curves)])
    assert code == 0 and curves.exists()


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("dataset = imagenet\n")
    assert cli.main(["run", "--config", str(bad)]) == cli.EXIT_CONFIG
    missing = tmp_path / "missing.json"
    assert cli.main(["calibrate", "--estimates", str(missing)]) == cli.EXIT_CONFIG


def test_cli_oracle_check_subprocess():
    out = subprocess.run(
        [sys.executable, "-m", "gibbsbound.cli", "oracle-check", "--seed", "0"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert out.returncode == 0, out.stdout + out.stderr
    lines = [l for l in out.stdout.splitlines() if l.startswith("[")]
    assert len(lines) >= 6
    assert all(l.startswith("[PASS]") for l in lines)
