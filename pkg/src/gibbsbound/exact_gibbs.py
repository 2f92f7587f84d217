"""Exact Gibbs posterior computations on finite hypothesis spaces.

On a finite space everything the bound pipeline estimates by Monte Carlo
has a closed form: the partition function is a finite sum, posterior
expectations are weighted averages, and the free-energy integral can be
evaluated by quadrature to machine-level accuracy. These routines are the
ground truth against which the chain-based estimates are validated.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FiniteHypothesisSpace",
    "log_partition_function",
    "partition_function",
    "posterior_weights",
    "posterior_mean_loss",
    "heat_capacity",
    "free_energy_identity_check",
    "exact_gamma",
    "exact_kl_between_temperatures",
    "sample_hypotheses",
]

_PRIOR_TOL = 1e-12


@dataclass(frozen=True)
class FiniteHypothesisSpace:
    """Explicit hypotheses with prior weights and per-hypothesis losses.

    prior and emp_losses are required; true (expected) losses and empirical
    0-1 rates are optional extras used by the bound-validity experiments.
    """

    prior: np.ndarray
    emp_losses: np.ndarray
    true_losses: np.ndarray | None = None
    emp_01: np.ndarray | None = None

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float)
        losses = np.asarray(self.emp_losses, dtype=float)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "emp_losses", losses)
        if prior.ndim != 1 or prior.shape != losses.shape:
            raise ValueError("prior and emp_losses must be 1-d and equally long")
        if np.any(prior <= 0):
            raise ValueError("prior weights must be positive")
        if abs(prior.sum() - 1.0) > _PRIOR_TOL:
            raise ValueError(f"prior must sum to 1 within {_PRIOR_TOL}")
        if np.any(losses < 0) or np.any(losses > 1):
            raise ValueError("emp_losses must lie in [0, 1]")
        for name in ("true_losses", "emp_01"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                object.__setattr__(self, name, arr)
                if arr.shape != prior.shape or np.any(arr < 0) or np.any(arr > 1):
                    raise ValueError(f"{name} must match prior shape and lie in [0, 1]")

    @property
    def size(self):
        return self.prior.shape[0]

    @classmethod
    def from_table(cls, text):
        """Parse a whitespace table: prior, emp_loss[, true_loss[, emp_01]] per row."""
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
        if not rows:
            raise ValueError("empty hypothesis table")
        width = len(rows[0])
        if width < 2 or width > 4 or any(len(r) != width for r in rows):
            raise ValueError("rows must all have 2 to 4 columns")
        cols = np.asarray(rows, dtype=float).T
        return cls(
            prior=cols[0],
            emp_losses=cols[1],
            true_losses=cols[2] if width >= 3 else None,
            emp_01=cols[3] if width >= 4 else None,
        )


def _log_weights(space, betas):
    """Unnormalized log Gibbs weights, one row per beta."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if np.any(betas < 0):
        raise ValueError("beta must be nonnegative")
    return np.log(space.prior)[None, :] - betas[:, None] * space.emp_losses[None, :]


def log_partition_function(space, beta):
    """ln Z_beta via a max-shifted sum; finite for beta up to ~1e5."""
    logw = _log_weights(space, beta)[0]
    shift = logw.max()
    return shift + np.log(np.exp(logw - shift).sum())


def partition_function(space, beta):
    """Z_beta = sum_i prior_i exp(-beta * emp_loss_i); may underflow for huge beta."""
    return float(np.exp(log_partition_function(space, beta)))


def posterior_weights(space, beta):
    """Gibbs posterior probabilities at inverse temperature beta."""
    logw = _log_weights(space, beta)[0]
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _mean_loss_many(space, betas):
    logw = _log_weights(space, betas)
    w = np.exp(logw - logw.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    return w @ space.emp_losses


def posterior_mean_loss(space, beta):
    """Thermal average of the empirical loss, E_{G_beta}[emp_loss]."""
    return float(_mean_loss_many(space, beta)[0])


def heat_capacity(space, beta):
    """Negated posterior variance of the empirical loss; always <= 0."""
    w = posterior_weights(space, beta)
    mean = w @ space.emp_losses
    return float(-(w @ space.emp_losses**2 - mean**2))


def free_energy_identity_check(space, beta, quad_steps=4096):
    """Both sides of -ln Z_beta = integral over [0, beta] of the thermal average.

    The right side is a composite Simpson rule with quad_steps panels
    (rounded up to even). Returns (lhs, rhs) for the caller to compare.
    """
    if quad_steps < 2:
        raise ValueError("quad_steps must be at least 2")
    if beta == 0.0:
        return 0.0, 0.0
    panels = quad_steps + (quad_steps % 2)
    grid = np.linspace(0.0, beta, panels + 1)
    vals = _mean_loss_many(space, grid)
    h = beta / panels
    rhs = (h / 3.0) * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum())
    lhs = -log_partition_function(space, beta)
    return float(lhs), float(rhs)


def exact_gamma(space, betas, h_index):
    """Left-Riemann upper surrogate for -beta_K * L_h - ln Z_{beta_K}.

    betas is the full ladder starting at 0; the sum uses the thermal average
    at the left end of each rung, which dominates the integral because the
    thermal average is non-increasing in beta.
    """
    betas = np.asarray(betas, dtype=float)
    if betas[0] != 0.0:
        raise ValueError("ladder must start at beta_0 = 0")
    if np.any(np.diff(betas) <= 0):
        raise ValueError("ladder must be strictly increasing")
    means = _mean_loss_many(space, betas[:-1])
    riemann = float(np.diff(betas) @ means)
    return riemann - betas[-1] * float(space.emp_losses[h_index])


def exact_kl_between_temperatures(space, beta_1, beta_2):
    """KL(G_{beta_1}, G_{beta_2}) computed directly from the finite weights."""
    w1 = posterior_weights(space, beta_1)
    w2 = posterior_weights(space, beta_2)
    return float(np.sum(w1 * (np.log(w1) - np.log(w2))))


def sample_hypotheses(space, beta, size, rng):
    """Exact draws from G_beta by inverse CDF over the cumulative weights."""
    cum = np.cumsum(posterior_weights(space, beta))
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(size), side="right")
