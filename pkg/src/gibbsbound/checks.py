"""Validation suites behind the oracle-check command.

Everything here runs against the exact finite-hypothesis machinery, so a
failure indicates a real formula or implementation defect, not sampler
noise: the free-energy identity, monotonicity of the thermal average, the
ladder functional dominating the free energy, the scalar inverse round
trip, and a Monte Carlo validity check of the assembled bound with exact
posterior expectations and exact posterior draws.
"""

import math

import numpy as np

from .exact_gibbs import (
    FiniteHypothesisSpace,
    exact_gamma,
    free_energy_identity_check,
    log_partition_function,
    posterior_mean_loss,
    posterior_weights,
    sample_hypotheses,
)
from .klscalar import binary_kl, binary_kl_inverse

__all__ = ["oracle_check", "run_suites"]


def _random_space(rng, max_size=64):
    size = int(rng.integers(2, max_size + 1))
    prior = rng.random(size) + 1e-3
    prior /= prior.sum()
    prior[-1] += 1.0 - prior.sum()  # exact renormalization
    return FiniteHypothesisSpace(prior=prior, emp_losses=rng.random(size))


def check_free_energy_identity(seed=0, spaces=100, tol=1e-8):
    """|ln Z + Simpson integral of the thermal average| below tol."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(spaces):
        space = _random_space(rng)
        for beta in (1.0, 10.0, 50.0):
            lhs, rhs = free_energy_identity_check(space, beta)
            worst = max(worst, abs(lhs - rhs))
    return worst <= tol, f"free-energy identity: worst |lhs-rhs| = {worst:.3e} (tol {tol:g})"


def check_monotone_thermal_average(seed=1, spaces=100, tol=1e-12):
    """Posterior mean loss non-increasing in beta on 20-point grids."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(spaces):
        space = _random_space(rng)
        grid = np.linspace(0.0, 50.0, 20)
        means = [posterior_mean_loss(space, b) for b in grid]
        worst = max(worst, float(np.max(np.diff(means))))
    return worst <= tol, f"monotone thermal average: worst increase = {worst:.3e} (tol {tol:g})"


def check_density_bound(seed=2, spaces=100, slack=-1e-10):
    """Ladder functional dominates -beta L_h - ln Z; refinement shrinks it."""
    rng = np.random.default_rng(seed)
    worst_slack = math.inf
    refinement_ok = True
    for _ in range(spaces):
        space = _random_space(rng)
        beta = float(rng.uniform(1.0, 30.0))
        h = int(rng.integers(space.size))
        target = -beta * float(space.emp_losses[h]) - log_partition_function(space, beta)
        previous = math.inf
        for rungs in (2, 4, 8, 16, 32, 64):
            ladder = np.linspace(0.0, beta, rungs + 1)
            gamma = exact_gamma(space, ladder, h)
            worst_slack = min(worst_slack, gamma - target)
            if gamma > previous + 1e-12:
                refinement_ok = False
            previous = gamma
    ok = worst_slack >= slack and refinement_ok
    return ok, (
        f"density bound: min slack = {worst_slack:.3e} (>= {slack:g}), "
        f"dyadic refinement monotone: {refinement_ok}"
    )


def check_kl_roundtrip(tol=1e-9):
    """kl(p, kl_inverse(p, t)) recovers t on a 100 x 100 grid."""
    worst = 0.0
    for p in np.linspace(0.0, 0.99, 100):
        for t in np.linspace(0.0, 3.0, 100):
            q = binary_kl_inverse(p, t)
            if q < 1.0:
                worst = max(worst, abs(binary_kl(p, q) - t))
    return worst <= tol, f"kl inverse round trip: worst error = {worst:.3e} (tol {tol:g})"


def check_bound_validity(seed=3, trials=200, n=50, hypotheses=16, delta=0.05,
                         required_rate=0.99):
    """Assembled bound holds on a known distribution in >= 99% of trials.

    Uses a finite data alphabet so posterior expectations and true risks
    are exact; checks the posterior-mean form and, via exact inverse-CDF
    posterior draws, the single-draw form.
    """
    rng = np.random.default_rng(seed)
    alphabet = 8
    probs = rng.random(alphabet) + 0.2
    probs /= probs.sum()
    table = rng.random((hypotheses, alphabet))  # loss of hypothesis h on symbol x
    prior = np.full(hypotheses, 1.0 / hypotheses)
    true_risk = table @ probs
    betas = np.array([0.0, 2.0, 5.0, 10.0, 25.0])
    beta_top = betas[-1]
    log_term = math.log(2.0 * math.sqrt(n) / delta)

    held_mean = 0
    held_single = 0
    for _ in range(trials):
        draws = rng.choice(alphabet, size=n, p=probs)
        counts = np.bincount(draws, minlength=alphabet)
        emp_losses = table @ (counts / n)
        space = FiniteHypothesisSpace(prior=prior, emp_losses=emp_losses)

        rung_means = [posterior_mean_loss(space, b) for b in betas[:-1]]
        riemann = float(np.diff(betas) @ rung_means)
        w = posterior_weights(space, beta_top)

        # posterior-mean form
        gamma_pm = -beta_top * float(w @ emp_losses) + riemann
        lhs = binary_kl(float(w @ emp_losses), float(w @ true_risk))
        if lhs <= (gamma_pm + log_term) / n:
            held_mean += 1

        # single-draw form with an exact posterior sample
        h = int(sample_hypotheses(space, beta_top, 1, rng)[0])
        gamma_h = -beta_top * float(emp_losses[h]) + riemann
        lhs = binary_kl(float(emp_losses[h]), float(true_risk[h]))
        if lhs <= (gamma_h + log_term) / n:
            held_single += 1

    rate_mean = held_mean / trials
    rate_single = held_single / trials
    ok = rate_mean >= required_rate and rate_single >= required_rate
    return ok, (
        f"bound validity: posterior-mean held {rate_mean:.1%}, "
        f"single-draw held {rate_single:.1%} (required {required_rate:.0%})"
    )


def check_fixtures():
    from .fixtures import verify_fixtures

    failures = verify_fixtures()
    if failures:
        return False, "fixtures: " + "; ".join(failures)
    return True, "fixtures: all expectations reproduced"


def run_suites(seed=0):
    """All oracle suites; returns (all_passed, result lines)."""
    suites = [
        check_fixtures,
        lambda: check_free_energy_identity(seed=seed),
        lambda: check_monotone_thermal_average(seed=seed + 1),
        lambda: check_density_bound(seed=seed + 2),
        check_kl_roundtrip,
        lambda: check_bound_validity(seed=seed + 3),
    ]
    lines = []
    passed = True
    for suite in suites:
        ok, message = suite()
        passed = passed and ok
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {message}")
    return passed, lines


def oracle_check(seed=0, stream=None):
    """Print one line per suite; True when everything passed."""
    passed, lines = run_suites(seed=seed)
    for line in lines:
        print(line, file=stream)
    return passed
