"""Small numeric helpers shared across modules: compensated summation and
log-domain reductions that tolerate -inf sentinels."""

from __future__ import annotations

import math

import numpy as np

LOG_MAX = math.log(np.finfo(np.float64).max)  # ~709.78, exp overflow threshold
NEG_INF = float("-inf")


def neumaier_sum(values) -> float:
    """Sum of floats with Neumaier's improved Kahan compensation.

    The running error term also captures the case where the incoming value
    is larger in magnitude than the running sum, which plain Kahan loses.
    """
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def logsumexp(log_values) -> float:
    """log(sum(exp(v))) over a 1-d sequence, stable, -inf passes through."""
    arr = np.asarray(log_values, dtype=float)
    if arr.size == 0:
        return NEG_INF
    m = float(np.max(arr))
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(float(np.sum(np.exp(arr - m))))


def logaddexp(a: float, b: float) -> float:
    """Stable log(e^a + e^b) for scalars, -inf acting as additive zero."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    return float(np.logaddexp(a, b))


def triangle_wave(s):
    """Periodic triangle in [0, 1]: zero at integers, peak 1 at half-integers."""
    frac = s - np.floor(s)
    return 1.0 - 2.0 * np.abs(frac - 0.5)
