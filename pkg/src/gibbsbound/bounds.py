"""Bound assembly: the ladder functional, KL budgets, and error bounds.

The central object is the data-computable functional

    Gamma = -beta_K * L_h + sum_k (beta_k - beta_{k-1}) * E_{k-1}

where E_k estimates the posterior mean surrogate loss at rung k. Through
the budget (Gamma + ln(2 sqrt(n)/delta)) / n and the partial KL inverse it
yields an upper bound on the expected 0-1 error, either for the posterior
mean (L_h set to the top-rung estimate) or for a single drawn hypothesis
(L_h set to that hypothesis' empirical loss). Approximation penalties for
samplers with known total-variation or Wasserstein error, and the
divergence calculators for the constant-step Langevin scheme under a
log-Sobolev assumption, live here as well.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass

from .klscalar import binary_kl_inverse

__all__ = [
    "DEFAULT_DELTA",
    "DEFAULT_LADDER",
    "NotApplicable",
    "TemperatureLadder",
    "LadderEstimates",
    "StabilityInputs",
    "TheoryParams",
    "UlaDivergence",
    "BoundRow",
    "BoundReport",
    "gamma_nu",
    "posterior_mean_gamma",
    "kl_budget",
    "bound_01",
    "subgaussian_bound",
    "stability_penalty",
    "ula_divergence",
    "kl_doubling_diagnostic",
    "assemble_report",
]

DEFAULT_DELTA = 0.01
DEFAULT_LADDER = (0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0, 32000.0, 64000.0)

PENALTY_MODES = ("tv_single_draw", "tv_posterior_mean", "w2_posterior_mean")


class NotApplicable(ValueError):
    """The requested bound's hypotheses are not met (for example Gamma < 1)."""


@dataclass(frozen=True)
class TemperatureLadder:
    """Strictly increasing inverse temperatures starting at 0."""

    betas: tuple

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)
        if len(betas) < 2:
            raise ValueError("ladder needs at least two rungs")
        if betas[0] != 0.0:
            raise ValueError("ladder must start at beta_0 = 0")
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("ladder must be strictly increasing")

    @property
    def K(self):
        return len(self.betas) - 1


@dataclass(frozen=True)
class LadderEstimates:
    """Per-rung ergodic estimates: surrogate loss and 0-1 error, plus n."""

    surrogate: tuple
    error01: tuple
    n: int

    def __post_init__(self):
        surrogate = tuple(float(v) for v in self.surrogate)
        error01 = tuple(float(v) for v in self.error01)
        object.__setattr__(self, "surrogate", surrogate)
        object.__setattr__(self, "error01", error01)
        if len(surrogate) != len(error01):
            raise ValueError("surrogate and error01 must cover the same rungs")
        if any(not 0.0 <= v <= 1.0 for v in surrogate + error01):
            raise ValueError("estimates must lie in [0, 1]")
        if self.n < 1:
            raise ValueError("n must be positive")


def _check_rungs(ladder, est, target_k):
    if len(est.surrogate) != len(ladder.betas):
        raise ValueError("estimates must cover every ladder rung")
    if not 1 <= target_k <= ladder.K:
        raise ValueError(f"target rung must lie in 1..{ladder.K}")


def gamma_nu(ladder, est, target_k, l_hat_h):
    """Ladder functional up to rung target_k with endpoint loss l_hat_h."""
    _check_rungs(ladder, est, target_k)
    betas = ladder.betas
    total = -betas[target_k] * l_hat_h
    for j in range(1, target_k + 1):
        total += (betas[j] - betas[j - 1]) * est.surrogate[j - 1]
    return total


def posterior_mean_gamma(ladder, est, target_k):
    """gamma_nu with the endpoint loss set to the rung's own estimate."""
    return gamma_nu(ladder, est, target_k, est.surrogate[target_k])


def kl_budget(gamma, n, delta=DEFAULT_DELTA):
    """(gamma + ln(2 sqrt(n)/delta)) / n, clamped at 0.

    The concentration step behind the budget requires n >= 8; smaller n
    produces a warning but still computes, so tiny fixtures stay testable.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if n < 8:
        warnings.warn(f"budget computed with n = {n} < 8", stacklevel=2)
    return max(0.0, (gamma + math.log(2.0 * math.sqrt(n) / delta)) / n)


def bound_01(emp01, budget):
    """Upper bound on the expected 0-1 error from its empirical rate."""
    return binary_kl_inverse(emp01, budget)


def subgaussian_bound(gamma, sigma_sg, n, delta=DEFAULT_DELTA):
    """Gap bound for sigma-sub-Gaussian losses; requires gamma >= 1."""
    if gamma < 1.0:
        raise NotApplicable(f"sub-Gaussian bound needs gamma >= 1, got {gamma}")
    if sigma_sg < 0:
        raise ValueError("sigma_sg must be nonnegative")
    inner = gamma * (1.0 + 1.0 / n) + math.log(gamma * (n + 1) / delta)
    return sigma_sg * math.sqrt(2.0 * inner / n)


@dataclass(frozen=True)
class StabilityInputs:
    """Loss bounds (or Lipschitz seminorms) and per-rung approximation errors.

    epsilons[k] is the sampler-to-posterior distance at rung k, in total
    variation for the tv modes and in 2-Wasserstein for the w2 mode.
    """

    m: float
    M: float
    epsilons: tuple
    mode: str

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if self.m < 0 or self.M < 0 or any(e < 0 for e in eps):
            raise ValueError("stability inputs must be nonnegative")
        if self.mode not in PENALTY_MODES:
            raise ValueError(f"mode must be one of {PENALTY_MODES}")


def stability_penalty(inp, ladder, target_k):
    """Additive budget penalty for approximate posteriors, clamped at 0.

    Single-draw mode pays M + beta m + ln(2 eps_beta) plus the rung sum;
    the posterior-mean modes pay (M + beta m) eps_beta plus the same sum.
    """
    if len(inp.epsilons) != len(ladder.betas):
        raise ValueError("need one epsilon per ladder rung")
    if not 1 <= target_k <= ladder.K:
        raise ValueError(f"target rung must lie in 1..{ladder.K}")
    betas = ladder.betas
    beta = betas[target_k]
    eps_top = inp.epsilons[target_k]
    rung_sum = sum(
        (betas[j] - betas[j - 1]) * inp.m * inp.epsilons[j - 1]
        for j in range(1, target_k + 1)
    )
    if inp.mode == "tv_single_draw":
        head = -math.inf if eps_top == 0.0 else inp.M + beta * inp.m + math.log(2.0 * eps_top)
    else:
        head = (inp.M + beta * inp.m) * eps_top
    return max(0.0, head + rung_sum)


@dataclass(frozen=True)
class TheoryParams:
    """Inputs to the Langevin divergence calculators.

    alpha_lsi is the log-Sobolev constant of the target, hessian_bound the
    spectral bound on the loss Hessian, initial_kl the divergence
    KL(posterior, initial law).
    """

    alpha_lsi: float
    hessian_bound: float
    eta: float
    t: int
    d: int
    beta: float
    sigma: float
    initial_kl: float

    def __post_init__(self):
        positives = {
            "alpha_lsi": self.alpha_lsi,
            "hessian_bound": self.hessian_bound,
            "eta": self.eta,
            "d": self.d,
            "beta": self.beta,
            "sigma": self.sigma,
            "initial_kl": self.initial_kl,
        }
        for name, value in positives.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t < 0:
            raise ValueError("t must be nonnegative")


@dataclass(frozen=True)
class UlaDivergence:
    kl: float
    w2: float
    tv: float
    step_size_admissible: bool


def ula_divergence(tp):
    """Divergence of the t-step constant-step Langevin law from its target.

    Returns KL, W2 and total-variation bounds; the admissibility flag
    reports whether eta <= alpha / (4 (beta R + 1/sigma^2)^2) holds.
    """
    lip = tp.beta * tp.hessian_bound + 1.0 / tp.sigma**2
    decay = math.exp(-tp.alpha_lsi * tp.eta * tp.t / tp.beta)
    bias = 8.0 * tp.eta * tp.d * lip**2 / (tp.beta * tp.alpha_lsi)
    kl = decay * tp.initial_kl + bias
    w2 = (2.0 / tp.alpha_lsi) * decay * tp.initial_kl + 2.0 * bias / tp.alpha_lsi
    tv = math.exp(-tp.alpha_lsi * tp.eta * tp.t / (2.0 * tp.beta)) * math.sqrt(
        tp.initial_kl
    ) + 2.0 * math.sqrt(tp.eta * tp.d / (tp.beta * tp.alpha_lsi)) * lip
    admissible = tp.eta <= tp.alpha_lsi / (4.0 * lip**2)
    return UlaDivergence(kl=kl, w2=w2, tv=tv, step_size_admissible=admissible)


def kl_doubling_diagnostic(e_beta, e_2beta, beta):
    """Upper bound on KL(G_beta, G_2beta): beta times the thermal-average drop.

    A small value means the sampler cannot resolve the two temperatures, the
    situation the calibration factor compensates for.
    """
    return max(0.0, beta * (e_beta - e_2beta))


@dataclass(frozen=True)
class BoundRow:
    beta: float
    train_loss: float
    train01: float
    gamma: float
    budget: float
    bound01: float
    bound01_single: float | None = None
    penalty: float = 0.0
    test01: float | None = None
    test01_single: float | None = None


@dataclass(frozen=True)
class BoundReport:
    """Assembled per-rung bounds plus the header values they used."""

    delta: float
    r: float
    ladder: TemperatureLadder
    rows: tuple
    config_digest: str = ""

    _CSV_COLUMNS = (
        "beta",
        "train_loss",
        "train01",
        "gamma",
        "budget",
        "bound01",
        "bound01_single",
        "penalty",
        "test01",
        "test01_single",
    )

    def header(self):
        return {
            "delta": self.delta,
            "r": self.r,
            "ladder": list(self.ladder.betas),
            "config_digest": self.config_digest,
        }

    def save_csv(self, path):
        def fmt(v):
            return "" if v is None else repr(float(v))

        with open(path, "w") as fh:
            fh.write(",".join(self._CSV_COLUMNS) + "\n")
            for row in self.rows:
                fh.write(",".join(fmt(getattr(row, c)) for c in self._CSV_COLUMNS) + "\n")

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.header(), fh, indent=2)
            fh.write("\n")


def config_digest(payload):
    """Stable short digest of a json-serializable configuration."""
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def assemble_report(
    ladder,
    est,
    delta=DEFAULT_DELTA,
    r=1.0,
    penalties=None,
    single_draw=None,
    test01=None,
    test01_single=None,
    digest="",
):
    """Compose gamma, budget and bound for every rung k >= 1.

    penalties, test01 and test01_single, when given, are sequences indexed
    like the ladder (entry 0 unused). single_draw is a pair of such
    sequences (final-iterate surrogate loss, final-iterate 0-1 error) for
    the single-draw variant.
    """
    _check_rungs(ladder, est, 1)
    K = ladder.K

    def per_rung(seq, name):
        if seq is None:
            return None
        if len(seq) != K + 1:
            raise ValueError(f"{name} must have one entry per ladder rung")
        return seq

    penalties = per_rung(penalties, "penalties")
    test01 = per_rung(test01, "test01")
    test01_single = per_rung(test01_single, "test01_single")
    if single_draw is not None:
        sd_loss = per_rung(single_draw[0], "single-draw losses")
        sd_01 = per_rung(single_draw[1], "single-draw errors")

    rows = []
    for k in range(1, K + 1):
        pen = float(penalties[k]) if penalties is not None else 0.0
        gamma = posterior_mean_gamma(ladder, est, k)
        budget = kl_budget(r * gamma + pen, est.n, delta)
        row = {
            "beta": ladder.betas[k],
            "train_loss": est.surrogate[k],
            "train01": est.error01[k],
            "gamma": gamma,
            "budget": budget,
            "bound01": bound_01(est.error01[k], budget),
            "penalty": pen,
        }
        if single_draw is not None:
            gamma_sd = gamma_nu(ladder, est, k, sd_loss[k])
            budget_sd = kl_budget(r * gamma_sd + pen, est.n, delta)
            row["bound01_single"] = bound_01(sd_01[k], budget_sd)
        if test01 is not None:
            row["test01"] = test01[k]
        if test01_single is not None:
            row["test01_single"] = test01_single[k]
        rows.append(BoundRow(**row))
    return BoundReport(delta=delta, r=r, ladder=ladder, rows=tuple(rows), config_digest=digest)
