"""Fully connected ReLU networks over flat parameter vectors.

Parameters live in a single float64 vector, laid out layer by layer: the
weight matrix in row-major (input-feature major) order, then the bias
vector. The flat layout is what the Langevin update manipulates; `unpack`
exposes per-layer views without copying.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import _numpy as _reference_kernels

__all__ = [
    "Architecture",
    "LossConfig",
    "init_params",
    "unpack",
    "forward_scores",
    "surrogate_loss",
    "surrogate_loss_many",
    "loss_and_gradient",
    "zero_one_error",
]

DEFAULT_P_MIN = math.exp(-4.0)

_KIND_CODES = {"bbce": kernels.KIND_BBCE, "savage": kernels.KIND_SAVAGE}


@dataclass(frozen=True)
class Architecture:
    """Layer widths [d_in, hidden..., 1]; ReLU hidden, linear scalar output."""

    layer_widths: tuple

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ValueError("need at least input and output widths")
        if widths[-1] != 1:
            raise ValueError("output width must be 1")
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive")

    @property
    def d_in(self):
        return self.layer_widths[0]

    @property
    def n_layers(self):
        return len(self.layer_widths) - 1

    @property
    def param_count(self):
        widths = self.layer_widths
        return sum((widths[i] + 1) * widths[i + 1] for i in range(len(widths) - 1))


@dataclass(frozen=True)
class LossConfig:
    """Surrogate loss selection plus the threshold for the 0-1 error."""

    kind: str = "bbce"
    p_min: float = DEFAULT_P_MIN
    threshold: float = 0.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"loss kind must be one of {sorted(_KIND_CODES)}")
        if not 0.0 < self.p_min < 1.0:
            raise ValueError("p_min must lie in (0, 1)")

    @property
    def kind_code(self):
        return _KIND_CODES[self.kind]


def init_params(arch, sigma, seed):
    """Draw every parameter i.i.d. N(0, sigma^2); deterministic in seed."""
    if sigma <= 0:
        raise ValueError("prior width sigma must be positive")
    rng = np.random.default_rng(seed)
    return sigma * rng.standard_normal(arch.param_count)


def unpack(params, arch):
    """Per-layer (weights, biases) views into the flat parameter vector."""
    params = np.ascontiguousarray(params, dtype=np.float64)
    if params.shape != (arch.param_count,):
        raise ValueError(f"expected {arch.param_count} parameters, got {params.shape}")
    widths = arch.layer_widths
    weights, biases, off = [], [], 0
    for w_in, w_out in zip(widths[:-1], widths[1:]):
        weights.append(params[off : off + w_in * w_out].reshape(w_in, w_out))
        off += w_in * w_out
        biases.append(params[off : off + w_out])
        off += w_out
    return weights, biases


def forward_scores(params, arch, features):
    """One scalar score per feature row."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != arch.d_in:
        raise ValueError(f"features must be (n, {arch.d_in})")
    weights, biases = unpack(params, arch)
    return kernels.forward_scores(features, weights, biases)


def surrogate_loss(score, label, cfg):
    """Surrogate loss of a single (score, label) pair; value in [0, 1]."""
    return float(surrogate_loss_many(np.array([score]), np.array([label]), cfg)[0])


def surrogate_loss_many(scores, labels, cfg):
    """Vectorized per-example surrogate losses."""
    margins = np.asarray(scores, dtype=np.float64) * np.asarray(labels, dtype=np.float64)
    loss, _ = _reference_kernels.loss_terms(margins, cfg.kind_code, cfg.p_min)
    return loss


def loss_and_gradient(params, arch, features, labels, cfg):
    """Mean surrogate loss over the batch and its exact gradient, flattened."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    if features.shape[1] != arch.d_in:
        raise ValueError(f"features must be (n, {arch.d_in})")
    weights, biases = unpack(params, arch)
    mean_loss, grad = kernels.loss_and_grad(
        features, np.asarray(labels, dtype=np.float64), weights, biases, cfg.kind_code, cfg.p_min
    )
    return mean_loss, grad


def zero_one_error(scores, labels, threshold=0.0):
    """Fraction of examples with label * score strictly below the threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have equal length")
    if scores.size == 0:
        raise ValueError("empty input")
    return float(np.mean(scores * labels < threshold))
