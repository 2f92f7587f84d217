"""Binary relative entropy and its partial inverse.

kl(p, q) is the relative entropy between Bernoulli(p) and Bernoulli(q),

    kl(p, q) = p ln(p/q) + (1 - p) ln((1 - p)/(1 - q)),

with the conventions 0 ln 0 = 0 and kl = +inf when q is 0 or 1 but p is not.
The partial inverse in the second argument,

    kl_inverse(p, t) = inf{q : q >= p, kl(p, q) >= t},

turns a divergence budget t into an upper confidence bound on a Bernoulli
mean whose empirical value is p.
"""

import math

__all__ = ["binary_kl", "binary_kl_inverse"]

# Inverses closer to 1 than this are reported as exactly 1: float64 cannot
# resolve kl(p, .) to useful accuracy on that last sliver, and rounding the
# bound up to 1 is conservative.
_VACUOUS_SNAP = 1e-6

_BISECT_WIDTH = 1e-12
_BISECT_RESIDUAL = 1e-10
_BISECT_MAX_ITER = 200


def binary_kl(p, q):
    """Relative entropy kl(p, q) of Bernoulli means p, q in [0, 1].

    Returns +inf when q lies on the boundary and p disagrees with it; never
    raises, so divergent budgets propagate as infinities.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"binary_kl arguments must lie in [0, 1], got ({p}, {q})")
    if p == q:
        return 0.0
    if q == 0.0 or q == 1.0:
        return math.inf
    if p == 0.0:
        return -math.log1p(-q)
    if p == 1.0:
        return -math.log(q)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def binary_kl_inverse(p, t):
    """Smallest q >= p with kl(p, q) >= t, or 1 if none exists below 1.

    Bisection on q in [p, 1]; kl(p, .) is increasing there. The iteration
    refines until the bracket is below 1e-12 and the overshoot kl(p, q) - t
    is below 1e-10, so round trips through binary_kl recover t to ~1e-9.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0.0 or p == 1.0:
        return p if t == 0.0 else 1.0

    hi = 1.0 - _VACUOUS_SNAP
    if hi <= p or binary_kl(p, hi) < t:
        return 1.0
    lo = p
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket exhausted at float resolution
            break
        if binary_kl(p, mid) >= t:
            hi = mid
        else:
            lo = mid
        if hi - lo <= _BISECT_WIDTH and binary_kl(p, hi) - t <= _BISECT_RESIDUAL:
            break
    return hi
