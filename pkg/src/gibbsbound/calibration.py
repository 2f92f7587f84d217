"""Calibration factor from random-label runs.

The estimated ladder functional is too optimistic with realistic step
sizes, so it is rescaled by the smallest factor r for which the bound
computed on randomly labeled training data is vacuous (at least 1/2) at
every rung:

    r = min{ r >= 0 : for all k,
             kl_inverse(e01_k, (r Gamma_k + ln(2 sqrt(n)/delta)) / n) >= 1/2 }

with Gamma_k the posterior-mean functional over the partial ladder up to
rung k. Each rung's bound is nondecreasing in r, so r is found by
bisection. Only training data enters: the procedure takes no test-set
input.
"""

import math
from dataclasses import dataclass

from .bounds import bound_01, posterior_mean_gamma

__all__ = ["Infeasible", "CalibrationResult", "calibrate"]

R_CAP = 2.0**10


class Infeasible(RuntimeError):
    """No factor up to the cap makes every rung vacuous; the random-label
    run is degenerate (for example near-zero 0-1 error with tiny Gamma)."""


@dataclass(frozen=True)
class CalibrationResult:
    r: float
    rung_bounds: tuple  # bounds at the returned r, rungs 1..K
    iterations: int


def calibrate(ladder, est_random, delta, r_tol=1e-6):
    """Smallest factor of the ladder functional that makes every rung's
    random-label bound at least 1/2. Returns 0 when r = 0 already works."""
    K = ladder.K
    n = est_random.n
    log_term = math.log(2.0 * math.sqrt(n) / delta)
    gammas = [posterior_mean_gamma(ladder, est_random, k) for k in range(1, K + 1)]
    e01 = est_random.error01[1:]

    def rung_bounds(r):
        return tuple(
            bound_01(p, max(0.0, (r * g + log_term) / n)) for p, g in zip(e01, gammas)
        )

    def feasible(bounds):
        return all(b >= 0.5 for b in bounds)

    iterations = 0
    at_zero = rung_bounds(0.0)
    if feasible(at_zero):
        return CalibrationResult(r=0.0, rung_bounds=at_zero, iterations=0)

    hi = 1.0
    while not feasible(rung_bounds(hi)):
        hi *= 2.0
        iterations += 1
        if hi > R_CAP:
            raise Infeasible(f"no feasible factor below {R_CAP}")
    lo = 0.0 if hi == 1.0 else hi / 2.0

    while hi - lo > r_tol * hi:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if feasible(rung_bounds(mid)):
            hi = mid
        else:
            lo = mid
    return CalibrationResult(r=hi, rung_bounds=rung_bounds(hi), iterations=iterations)
