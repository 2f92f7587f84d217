"""First-order lowpass filters and the chain stopping rule.

Two recursive running means track the loss trajectory: a very slow one
(alpha 0.0025) whose first increase triggers termination, and a faster one
(alpha 0.01) whose final state approximates the ergodic mean. Both start at
M_0 = 0; the minimum step count dwarfs the warm-up transient.
"""

from dataclasses import dataclass

__all__ = ["RunningMean", "StopConfig", "should_stop", "ALPHA_STOP", "ALPHA_ERG"]

ALPHA_STOP = 0.0025
ALPHA_ERG = 0.01


class RunningMean:
    """Recursive running mean, either plain EMA or the symmetric two-sample form.

    EMA:        M <- alpha x_t + (1 - alpha) M
    symmetric:  M <- (alpha/2) x_t + (alpha/2) x_{t-1} + (1 - alpha) M

    The symmetric form duplicates the first sample in place of the missing
    x_0, a transient of weight alpha/2.
    """

    def __init__(self, alpha, form="ema"):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if form not in ("ema", "symmetric"):
            raise ValueError("form must be 'ema' or 'symmetric'")
        self.alpha = alpha
        self.form = form
        self.value = 0.0
        self.previous_sample = None
        self.t = 0

    def update(self, x):
        if self.form == "ema":
            self.value = self.alpha * x + (1.0 - self.alpha) * self.value
        else:
            prev = x if self.previous_sample is None else self.previous_sample
            self.value = 0.5 * self.alpha * (x + prev) + (1.0 - self.alpha) * self.value
            self.previous_sample = x
        self.t += 1
        return self.value


@dataclass(frozen=True)
class StopConfig:
    """Trigger threshold and the minimum step count before it applies."""

    epsilon: float = 1e-7
    min_steps: int = 4000

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.min_steps < 1:
            raise ValueError("min_steps must be at least 1")


def should_stop(m_prev, m_curr, t, cfg):
    """True once t >= min_steps and the slow mean has stopped decreasing,
    i.e. M_t - M_{t-1} >= epsilon."""
    if t < cfg.min_steps:
        return False
    return m_curr - m_prev >= cfg.epsilon
