"""Experiment orchestration: configs, dual-condition runs, persistence.

One experiment runs a chain per ladder rung for the true-label and the
random-label conditions, turns ergodic means into ladder estimates,
calibrates on the random condition, and writes per-chain CSVs, an
estimates JSON and a bound-report CSV per condition. Held-out data, when
configured, is evaluated for reporting only; bound assembly never sees it.
"""

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import data as data_mod
from .bounds import (
    DEFAULT_DELTA,
    DEFAULT_LADDER,
    LadderEstimates,
    TemperatureLadder,
    assemble_report,
    config_digest,
)
from .calibration import calibrate
from .data import BinarizationRule
from .ergodic import ALPHA_ERG, ALPHA_STOP, StopConfig
from .model import Architecture, LossConfig
from .sampler import ChainDiverged, SamplerConfig, run_chain

__all__ = ["ExperimentConfig", "load_config", "run_experiment", "emit_curves"]

CONDITIONS = {"true": 0, "random": 1}


@dataclass(frozen=True)
class ExperimentConfig:
    # dataset
    dataset: str = "synthetic"  # synthetic | mnist | cifar10
    mnist_images: str = ""
    mnist_labels: str = ""
    cifar_file: str = ""
    test_images: str = ""
    test_labels: str = ""
    test_cifar_file: str = ""
    positive_classes: tuple = ()  # empty: dataset default
    n: int = 500
    d_in: int = 20
    separation: float = 6.0
    flip_rate: float = 0.0
    holdout_n: int = 0
    # model and loss
    arch: tuple = ()  # empty: (d_in, 32, 1)
    loss: str = "savage"
    p_min: float = math.exp(-4.0)
    threshold: float = 0.0
    # sampler
    method: str = "sgld"
    step: float = 0.01
    sigma: float = 5.0
    minibatch: int = 0  # 0: sqrt(n) rule
    max_steps: int = 40000
    record_every: int = 1
    init_width: float = -1.0  # negative: draw the start from the prior
    warm_start: bool = False
    filter_form: str = ""  # empty: by method
    # filters and stopping
    alpha_stop: float = ALPHA_STOP
    alpha_erg: float = ALPHA_ERG
    stop_epsilon: float = 1e-7
    min_steps: int = 4000
    holdout_every: int = 10
    # bounds
    ladder: tuple = DEFAULT_LADDER
    delta: float = DEFAULT_DELTA
    labels: str = "both"  # true | random | both
    uncalibrated: bool = False
    single_draw: bool = False
    # run control
    seed: int = 0
    out_dir: str = "out"
    jobs: int = 1

    def __post_init__(self):
        if self.dataset not in ("synthetic", "mnist", "cifar10"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.labels not in ("true", "random", "both"):
            raise ValueError("labels must be true, random or both")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        TemperatureLadder(self.ladder)  # validates the rungs

    def resolved_arch(self):
        widths = self.arch or (self.d_in, 32, 1)
        return Architecture(tuple(widths))

    def loss_config(self):
        return LossConfig(kind=self.loss, p_min=self.p_min, threshold=self.threshold)

    def digest(self):
        payload = dataclasses.asdict(self)
        payload.pop("out_dir")
        payload.pop("jobs")
        return config_digest(payload)


_BOOL_KEYS = {"warm_start", "uncalibrated", "single_draw"}
_TUPLE_KEYS = {"arch", "ladder", "positive_classes"}


def _coerce(key, value, target_type):
    value = value.strip()
    if key in _TUPLE_KEYS:
        return tuple(float(v) if key == "ladder" else int(v) for v in value.split(",") if v)
    if key in _BOOL_KEYS:
        if value.lower() not in ("true", "false", "0", "1"):
            raise ValueError(f"{key} must be boolean, got {value!r}")
        return value.lower() in ("true", "1")
    return target_type(value)


def load_config(path=None, overrides=None):
    """Flat `key = value` config file plus override pairs from the CLI."""
    fields = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    types = {
        name: type(getattr(ExperimentConfig, name)) for name in fields
    }
    values = {}
    entries = []
    if path:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, val = line.split("=", 1)
                entries.append((key.strip(), val))
    entries.extend(overrides or [])
    for key, val in entries:
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _coerce(key, val, types[key])
    return ExperimentConfig(**values)


def _load_training_data(cfg):
    if cfg.dataset == "synthetic":
        train = data_mod.make_synthetic(
            cfg.n, cfg.d_in, cfg.separation, cfg.flip_rate, cfg.seed, name="synthetic"
        )
        holdout = None
        if cfg.holdout_n > 0:
            holdout = data_mod.make_synthetic(
                cfg.holdout_n, cfg.d_in, cfg.separation, cfg.flip_rate, cfg.seed + 1,
                name="synthetic-holdout",
            )
        return train, holdout

    if cfg.dataset == "mnist":
        rule = BinarizationRule(frozenset(cfg.positive_classes or data_mod.MNIST_POSITIVE_DIGITS))
        with open(cfg.mnist_images, "rb") as fh:
            images = fh.read()
        with open(cfg.mnist_labels, "rb") as fh:
            labels = fh.read()
        raw = data_mod.load_idx(images, labels, name="mnist")
        train = _subset(data_mod.binarize(raw, rule), cfg.n)
        holdout = None
        if cfg.test_images and cfg.test_labels:
            with open(cfg.test_images, "rb") as fh:
                images = fh.read()
            with open(cfg.test_labels, "rb") as fh:
                labels = fh.read()
            holdout = data_mod.binarize(data_mod.load_idx(images, labels, name="mnist-test"), rule)
        return train, holdout

    rule = BinarizationRule(frozenset(cfg.positive_classes or data_mod.CIFAR_VEHICLE_CLASSES))
    with open(cfg.cifar_file, "rb") as fh:
        records = fh.read()
    train = _subset(data_mod.binarize(data_mod.load_cifar_binary(records, name="cifar10"), rule), cfg.n)
    holdout = None
    if cfg.test_cifar_file:
        with open(cfg.test_cifar_file, "rb") as fh:
            records = fh.read()
        holdout = data_mod.binarize(data_mod.load_cifar_binary(records, name="cifar10-test"), rule)
    return train, holdout


def _subset(ds, n):
    if n <= 0 or n >= ds.n:
        return ds
    return data_mod.LabeledDataset(ds.features[:n], ds.labels[:n], ds.name)


def _chain_seed(master_seed, condition, rung_index):
    """Stable per-chain seed mixing the master seed, condition and rung."""
    ss = np.random.SeedSequence((master_seed, CONDITIONS[condition], rung_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _chain_task(args):
    (ds, holdout, arch, loss_cfg, scfg, stop_cfg, alpha_stop, alpha_erg, init, holdout_every) = args
    return run_chain(
        ds,
        arch,
        loss_cfg,
        scfg,
        stop_cfg,
        alpha_stop=alpha_stop,
        alpha_erg=alpha_erg,
        init=init,
        holdout=holdout,
        holdout_every=holdout_every,
    )


def run_experiment(cfg):
    """Run the configured experiment; returns a summary dict with file paths.

    Diverged chains are reported and skipped; if every rung of a condition
    diverges the condition is marked failed in the summary.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    chain_dir = os.path.join(cfg.out_dir, "chains")
    os.makedirs(chain_dir, exist_ok=True)

    train, holdout = _load_training_data(cfg)
    arch = cfg.resolved_arch()
    loss_cfg = cfg.loss_config()
    ladder = TemperatureLadder(cfg.ladder)
    stop_cfg = StopConfig(epsilon=cfg.stop_epsilon, min_steps=cfg.min_steps)
    digest = cfg.digest()

    conditions = ("true", "random") if cfg.labels == "both" else (cfg.labels,)
    datasets = {}
    for cond in conditions:
        if cond == "true":
            datasets[cond] = train
        else:
            datasets[cond] = data_mod.randomize_labels(train, _chain_seed(cfg.seed, cond, 10**6))

    summary = {"config_digest": digest, "out_dir": cfg.out_dir, "conditions": {}}
    estimates = {}
    extras = {}
    for cond in conditions:
        records = _run_condition(cfg, datasets[cond], holdout, arch, loss_cfg, ladder, stop_cfg, cond)
        diverged = [ladder.betas[k] for k, rec in enumerate(records) if rec is None]
        if diverged:
            # reported, not fatal: the other rungs ran, but the ladder is
            # incomplete so no report can be assembled for this condition
            summary["conditions"][cond] = {"diverged_rungs": diverged}
            continue
        for k, rec in enumerate(records):
            stem = os.path.join(chain_dir, f"{cond}_rung{k}_beta{ladder.betas[k]:g}")
            rec.save_csv(stem + ".csv")
            with open(stem + ".json", "w") as fh:
                json.dump(rec.summary(), fh, indent=2)
                fh.write("\n")
        est = LadderEstimates(
            surrogate=tuple(rec.ergodic_mean_loss for rec in records),
            error01=tuple(rec.ergodic_mean_01 for rec in records),
            n=datasets[cond].n,
        )
        estimates[cond] = est
        extras[cond] = {
            "single_draw": (
                tuple(rec.final_loss for rec in records),
                tuple(rec.final_01 for rec in records),
            ),
            "test01": tuple(rec.holdout_mean_01 for rec in records) if holdout is not None else None,
            "test01_single": (
                tuple(rec.holdout_final_01 for rec in records) if holdout is not None else None
            ),
        }
        summary["conditions"][cond] = {"stop_steps": [rec.stop_step for rec in records]}

    est_path = os.path.join(cfg.out_dir, "estimates.json")
    with open(est_path, "w") as fh:
        json.dump(
            {
                cond: {
                    "surrogate": list(est.surrogate),
                    "error01": list(est.error01),
                    "n": est.n,
                    "ladder": list(ladder.betas),
                }
                for cond, est in estimates.items()
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    summary["estimates"] = est_path

    if cfg.uncalibrated or "random" not in estimates:
        r = 1.0
        summary["calibration"] = {"r": r, "mode": "uncalibrated"}
    else:
        cal = calibrate(ladder, estimates["random"], cfg.delta)
        r = cal.r
        summary["calibration"] = {
            "r": cal.r,
            "iterations": cal.iterations,
            "rung_bounds": list(cal.rung_bounds),
        }
    with open(os.path.join(cfg.out_dir, "calibration.json"), "w") as fh:
        json.dump(summary["calibration"], fh, indent=2)
        fh.write("\n")

    for cond, est in estimates.items():
        extra = extras[cond]
        report = assemble_report(
            ladder,
            est,
            delta=cfg.delta,
            r=r,
            single_draw=extra["single_draw"] if cfg.single_draw else None,
            test01=extra["test01"],
            test01_single=extra["test01_single"] if cfg.single_draw else None,
            digest=digest,
        )
        report_path = os.path.join(cfg.out_dir, f"report_{cond}.csv")
        report.save_csv(report_path)
        report.save_json(os.path.join(cfg.out_dir, f"report_{cond}.json"))
        summary["conditions"][cond]["report"] = report_path
        summary["conditions"][cond]["bounds01"] = [row.bound01 for row in report.rows]

    summary["all_diverged"] = not estimates
    with open(os.path.join(cfg.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def _run_condition(cfg, ds, holdout, arch, loss_cfg, ladder, stop_cfg, cond):
    """One chain per rung; parallel across rungs unless warm starting."""

    def make_task(k, beta, init):
        scfg = SamplerConfig(
            method=cfg.method,
            step=cfg.step,
            beta=beta,
            sigma=cfg.sigma,
            minibatch_size=cfg.minibatch or None,
            max_steps=cfg.max_steps,
            record_every=cfg.record_every,
            filter_form=cfg.filter_form or None,
            seed=_chain_seed(cfg.seed, cond, k),
        )
        if init is None and beta > 0 and cfg.init_width >= 0.0:
            init = cfg.init_width * np.random.default_rng(scfg.seed).standard_normal(
                arch.param_count
            )
        return (ds, holdout, arch, loss_cfg, scfg, stop_cfg, cfg.alpha_stop, cfg.alpha_erg,
                init, cfg.holdout_every)

    records = [None] * len(ladder.betas)
    if cfg.warm_start:
        init = None
        for k, beta in enumerate(ladder.betas):
            try:
                rec = _chain_task(make_task(k, beta, init))
            except ChainDiverged:
                continue
            records[k] = rec
            if beta > 0:
                init = rec.final_params
        return records

    tasks = [make_task(k, beta, None) for k, beta in enumerate(ladder.betas)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_chain_task, task) for task in tasks]
            for k, fut in enumerate(futures):
                try:
                    records[k] = fut.result()
                except ChainDiverged:
                    continue
    else:
        for k, task in enumerate(tasks):
            try:
                records[k] = _chain_task(task)
            except ChainDiverged:
                continue
    return records


def emit_curves(report_path, out_path):
    """Tidy (beta, series, value) CSV from a bound report CSV."""
    with open(report_path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    idx = {name: i for i, name in enumerate(header)}
    for required in ("beta", "train01", "bound01"):
        if required not in idx:
            raise ValueError(f"report is missing column {required!r}")

    def get(row, col):
        val = row[idx[col]] if col in idx else ""
        return float(val) if val else math.nan

    with open(out_path, "w") as fh:
        fh.write("beta,series,value\n")
        for row in rows:
            beta = get(row, "beta")
            for series in ("train01", "test01", "bound01"):
                fh.write(f"{beta:.12g},{series},{get(row, series):.12g}\n")
    return out_path
