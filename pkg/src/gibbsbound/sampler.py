"""Langevin Monte Carlo chains targeting the Gibbs posterior.

The update is

    h_{t+1} = h_t - eta grad(h_t) - eta h_t / (beta sigma^2) + sqrt(2 eta / beta) xi_t

with xi_t standard Gaussian, which discretizes the Langevin diffusion for
the potential beta * mean_loss + |h|^2 / (2 sigma^2). ULA uses the
full-batch gradient, SGLD an unbiased minibatch estimate; both record the
full-data loss at every recorded step. At beta = 0 the posterior is the
prior itself, so the chain draws fresh prior samples instead of iterating
the (singular) update.

Within a chain, examples are processed in a canonical sorted order, so the
trajectory is bit-for-bit invariant to the row order of the dataset.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, model
from .ergodic import ALPHA_ERG, ALPHA_STOP, RunningMean, StopConfig, should_stop

__all__ = [
    "ChainDiverged",
    "SamplerConfig",
    "ChainRecord",
    "default_minibatch_size",
    "lmc_step",
    "run_chain",
]

_DIVERGENCE_LIMIT = 1e12


class ChainDiverged(RuntimeError):
    """Raised when the parameter vector or recorded loss becomes non-finite
    or astronomically large."""


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "ula"  # 'ula' or 'sgld'
    step: float = 0.01
    beta: float = 1.0
    sigma: float = 5.0
    minibatch_size: int | None = None  # SGLD only; None picks the sqrt(n) rule
    max_steps: int = 20000
    record_every: int = 1
    filter_form: str | None = None  # None: symmetric for ULA, ema for SGLD
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("ula", "sgld"):
            raise ValueError("method must be 'ula' or 'sgld'")
        if self.step <= 0:
            raise ValueError("step size must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")
        if self.filter_form not in (None, "ema", "symmetric"):
            raise ValueError("filter_form must be None, 'ema' or 'symmetric'")

    @property
    def resolved_filter_form(self):
        if self.filter_form is not None:
            return self.filter_form
        return "symmetric" if self.method == "ula" else "ema"


@dataclass
class ChainRecord:
    """One chain at one inverse temperature: trajectories and their means."""

    beta: float
    steps: np.ndarray
    losses: np.ndarray
    zero_ones: np.ndarray
    final_params: np.ndarray
    stop_step: int
    stopped_early: bool
    ergodic_mean_loss: float
    ergodic_mean_01: float
    stop_filter_value: float
    holdout_mean_01: float | None = None
    holdout_final_01: float | None = None
    config: SamplerConfig | None = None

    @property
    def final_loss(self):
        return float(self.losses[-1])

    @property
    def final_01(self):
        return float(self.zero_ones[-1])

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write("step,full_loss,zero_one\n")
            for t, loss, zo in zip(self.steps, self.losses, self.zero_ones):
                fh.write(f"{int(t)},{float(loss)!r},{float(zo)!r}\n")

    def summary(self):
        out = {
            "beta": self.beta,
            "stop_step": self.stop_step,
            "stopped_early": self.stopped_early,
            "ergodic_mean_loss": self.ergodic_mean_loss,
            "ergodic_mean_01": self.ergodic_mean_01,
            "stop_filter_value": self.stop_filter_value,
            "final_loss": self.final_loss,
            "final_01": self.final_01,
        }
        if self.holdout_mean_01 is not None:
            out["holdout_mean_01"] = self.holdout_mean_01
            out["holdout_final_01"] = self.holdout_final_01
        if self.config is not None:
            cfg = self.config
            out["config"] = {
                "method": cfg.method,
                "step": cfg.step,
                "sigma": cfg.sigma,
                "minibatch_size": cfg.minibatch_size,
                "max_steps": cfg.max_steps,
                "record_every": cfg.record_every,
                "filter_form": cfg.resolved_filter_form,
                "seed": cfg.seed,
            }
        return out


def default_minibatch_size(n):
    """sqrt(n) rounded up to a multiple of 10, capped at n."""
    return min(n, 10 * math.ceil(math.sqrt(n) / 10.0))


def lmc_step(h, grad, cfg, noise):
    """One Langevin update; at beta = 0, a fresh draw from the prior."""
    if cfg.beta == 0.0:
        return cfg.sigma * noise
    decay = cfg.step / (cfg.beta * cfg.sigma**2)
    scale = math.sqrt(2.0 * cfg.step / cfg.beta)
    out = kernels.langevin_update(h, grad, cfg.step, decay, scale, noise)
    amax = float(np.max(np.abs(out)))
    if not math.isfinite(amax) or amax > _DIVERGENCE_LIMIT:
        raise ChainDiverged(f"parameter magnitude diverged to {amax}")
    return out


def _canonical_order(features, labels):
    """Row order determined by content only: lexicographic in features, then label."""
    keys = [labels] + [features[:, j] for j in range(features.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def run_chain(
    ds,
    arch,
    loss_cfg,
    cfg,
    stop_cfg=None,
    alpha_stop=ALPHA_STOP,
    alpha_erg=ALPHA_ERG,
    init=None,
    holdout=None,
    holdout_every=10,
):
    """Run one chain and return its ChainRecord.

    The chain initializes from the prior (or `init` when warm starting),
    records the full-data surrogate loss and 0-1 error every
    `cfg.record_every` steps, and stops when the slow running mean of the
    loss stops decreasing (or at cfg.max_steps). The optional holdout set is
    evaluated on a stride purely for reporting; it never enters the
    dynamics. Deterministic in cfg.seed.
    """
    stop_cfg = stop_cfg or StopConfig()
    init_rng, noise_rng, batch_rng = (
        np.random.Generator(np.random.PCG64(s))
        for s in np.random.SeedSequence(cfg.seed).spawn(3)
    )

    order = _canonical_order(ds.features, ds.labels)
    X = np.ascontiguousarray(ds.features[order], dtype=np.float64)
    y = ds.labels[order].astype(np.float64)
    n = X.shape[0]
    d = arch.param_count
    kind, p_min, theta = loss_cfg.kind_code, loss_cfg.p_min, loss_cfg.threshold

    prior_only = cfg.beta == 0.0
    full_batch = cfg.method == "ula"
    m = None
    if not prior_only and not full_batch:
        m = cfg.minibatch_size or default_minibatch_size(n)
        if m > n:
            raise ValueError("minibatch_size cannot exceed the sample count")
        full_batch = m == n

    form = cfg.resolved_filter_form
    stop_filter = RunningMean(alpha_stop, form)
    erg_loss = RunningMean(alpha_erg, form)
    erg_01 = RunningMean(alpha_erg, form)
    hold_01 = RunningMean(alpha_erg, form) if holdout is not None else None
    if holdout is not None:
        hold_X = np.ascontiguousarray(holdout.features, dtype=np.float64)
        hold_y = holdout.labels.astype(np.float64)

    h = np.array(init, dtype=np.float64, copy=True) if init is not None else (
        cfg.sigma * init_rng.standard_normal(d)
    )
    if h.shape != (d,):
        raise ValueError(f"init must have {d} parameters")

    steps, losses, zero_ones = [], [], []
    stop_step = cfg.max_steps
    stopped_early = False
    last_hold = None

    for t in range(cfg.max_steps + 1):
        recording = t % cfg.record_every == 0 or t == cfg.max_steps
        weights, biases = model.unpack(h, arch)
        grad = None
        if prior_only:
            if recording:
                loss, zero_one = kernels.evaluate(X, y, weights, biases, kind, p_min, theta)
        elif full_batch:
            loss, zero_one, grad = kernels.evaluate_with_grad(
                X, y, weights, biases, kind, p_min, theta
            )
        else:
            if recording:
                loss, zero_one = kernels.evaluate(X, y, weights, biases, kind, p_min, theta)
            idx = batch_rng.choice(n, size=m, replace=False)
            _, grad = kernels.loss_and_grad(X[idx], y[idx], weights, biases, kind, p_min)

        if recording:
            if not math.isfinite(loss):
                raise ChainDiverged(f"loss diverged to {loss}")
            steps.append(t)
            losses.append(loss)
            zero_ones.append(zero_one)
            prev_stop_value = stop_filter.value
            stop_filter.update(loss)
            erg_loss.update(loss)
            erg_01.update(zero_one)
            if hold_01 is not None:
                if t % (cfg.record_every * holdout_every) == 0 or t == cfg.max_steps:
                    h_scores = kernels.forward_scores(hold_X, weights, biases)
                    last_hold = float(np.mean(h_scores * hold_y < theta))
                    hold_01.update(last_hold)
            if should_stop(prev_stop_value, stop_filter.value, t, stop_cfg):
                stop_step = t
                stopped_early = True
                break

        if t == cfg.max_steps:
            stop_step = t
            break

        if prior_only:
            h = cfg.sigma * noise_rng.standard_normal(d)
        else:
            h = lmc_step(h, grad, cfg, noise_rng.standard_normal(d))

    if hold_01 is not None and stopped_early:
        # fresh holdout read at the stopping iterate for the single-draw column
        weights, biases = model.unpack(h, arch)
        h_scores = kernels.forward_scores(hold_X, weights, biases)
        last_hold = float(np.mean(h_scores * hold_y < theta))

    return ChainRecord(
        beta=cfg.beta,
        steps=np.asarray(steps, dtype=np.int64),
        losses=np.asarray(losses),
        zero_ones=np.asarray(zero_ones),
        final_params=h,
        stop_step=stop_step,
        stopped_early=stopped_early,
        ergodic_mean_loss=erg_loss.value,
        ergodic_mean_01=erg_01.value,
        stop_filter_value=stop_filter.value,
        holdout_mean_01=hold_01.value if hold_01 is not None else None,
        holdout_final_01=last_hold,
        config=cfg,
    )
