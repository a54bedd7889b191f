"""Converse direction: maximum-modulus profiles, three-circles convexity,
and the lower convex envelope decision for "equivalent to a log-convex
weight".

By Hadamard's three-circles theorem, log max_{|z|=r} |f(r e^{i.})| is a
convex function of log r for holomorphic f, and sums of log-convex
functions stay log-convex.  So if a radial weight is comparable to a sum
of holomorphic moduli, its profile F(x) = log omega(e^x) stays within a
bounded band of a convex function.  The decision procedure computes the
lower convex hull of sampled F and measures that band: a bounded gap g
certifies equivalence with constant e^g, and the hull itself is a valid
log-convex surrogate to feed back into the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .series import ScaledComplex
from .weight_model import WeightFunction, weight_from_knots

# Discrete convexity tolerance for sampled three-circles checks; absorbs
# the angle-grid error of the sampled maximum.
HADAMARD_TOL = 1e-7

# Default cap on the envelope gap: equivalence constants up to e^50.
GAP_BOUND = 50.0

_ADAPTIVE_START = 64
_ADAPTIVE_CAP = 1 << 16
_ADAPTIVE_TOL = 1e-9


def _log_abs_values(f: Callable, zs: np.ndarray) -> np.ndarray:
    """Evaluate f on an array of points, accepting callables that return
    complex scalars or ScaledComplex, vectorized or not."""
    try:
        vals = f(zs)
        arr = np.asarray(vals)
        if arr.shape == zs.shape and arr.dtype != object:
            with np.errstate(divide="ignore"):
                return np.where(np.abs(arr) > 0, np.log(np.abs(arr)), -np.inf)
    except (TypeError, ValueError):
        pass
    out = np.empty(zs.shape, dtype=float)
    for i, z in enumerate(zs.ravel()):
        v = f(complex(z))
        if isinstance(v, ScaledComplex):
            out.ravel()[i] = v.log_abs
        else:
            a = abs(complex(v))
            out.ravel()[i] = math.log(a) if a > 0 else -math.inf
    return out


def max_modulus(f: Callable, r: float, theta_count: int) -> float:
    """log max_j |f(r e^{2 pi i j / theta_count})|."""
    if theta_count < 16:
        raise ValueError("theta_count must be at least 16")
    if not 0.0 <= r < 1.0:
        raise ValueError(f"r={r} outside [0, 1)")
    thetas = 2.0 * math.pi * np.arange(theta_count) / theta_count
    zs = r * np.exp(1j * thetas)
    return float(np.max(_log_abs_values(f, zs)))


def max_modulus_adaptive(f: Callable, r: float, start: int = _ADAPTIVE_START,
                         tol: float = _ADAPTIVE_TOL,
                         cap: int = _ADAPTIVE_CAP):
    """Double the angle count until log M stabilizes within tol (or the
    cap is hit).  Returns (log M, theta_count_used)."""
    n = start
    prev = max_modulus(f, r, n)
    while n < cap:
        n *= 2
        cur = max_modulus(f, r, n)
        if abs(cur - prev) < tol:
            return cur, n
        prev = cur
    return prev, n


@dataclass(frozen=True)
class MaxModulusProfile:
    r_grid: tuple
    log_values: tuple
    theta_count: int


def max_modulus_profile(f: Callable, r_grid, theta_count: int = 0) -> MaxModulusProfile:
    """Profile of log M over the radii; theta_count 0 means adaptive."""
    rs = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(rs) <= 0):
        raise ValueError("r_grid must be strictly increasing")
    used = theta_count
    vals = []
    for r in rs:
        if theta_count:
            vals.append(max_modulus(f, float(r), theta_count))
        else:
            v, n = max_modulus_adaptive(f, float(r))
            vals.append(v)
            used = max(used, n)
    return MaxModulusProfile(tuple(float(r) for r in rs), tuple(vals), used)


@dataclass(frozen=True)
class HadamardReport:
    passed: bool
    min_second_diff: float
    witness_r: Optional[float]
    n_functions: int
    r_count: int
    theta_count: int
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_second_diff": self.min_second_diff,
            "witness_r": self.witness_r,
            "n_functions": self.n_functions,
            "r_count": self.r_count,
            "theta_count": self.theta_count,
            "tol": self.tol,
        }


def hadamard_check(fs: Sequence[Callable], r_grid, theta_count: int = 0,
                   tol: float = HADAMARD_TOL) -> HadamardReport:
    """Discrete three-circles check of S(r) = sum_m M_{|f_m|}(r).

    Requires f_m(0) != 0 for every function (the standard normalization:
    a modulus sum that vanishes at the origin cannot match a positive
    radial weight there, and zero adjustment removes such zeros) and a
    log-uniform radius grid with at least 3 points; verifies every raw
    second difference of log S against log r is >= -tol.  theta_count 0
    selects adaptive angle refinement.
    """
    rs = np.asarray(r_grid, dtype=float)
    if rs.size < 3:
        raise ValueError("r_grid needs at least 3 points")
    if np.any(rs <= 0) or np.any(rs >= 1) or np.any(np.diff(rs) <= 0):
        raise ValueError("r_grid must be strictly increasing inside (0, 1)")
    us = np.log(rs)
    du = np.diff(us)
    if np.max(du) - np.min(du) > 1e-9 * np.max(du):
        raise ValueError("r_grid must be uniform in log r")
    for m, f in enumerate(fs):
        v = f(np.zeros(1, dtype=complex)) if _is_vectorized(f) else f(0j)
        val = np.asarray(v).ravel()[0]
        mag = abs(val.to_complex()) if isinstance(val, ScaledComplex) else abs(complex(val))
        if mag == 0:
            raise ValueError(f"function {m} vanishes at 0")

    profiles = [max_modulus_profile(f, rs, theta_count) for f in fs]
    logs = np.array([p.log_values for p in profiles])  # (m, r)
    l_max = logs.max(axis=0)
    log_s = l_max + np.log(np.sum(np.exp(logs - l_max[None, :]), axis=0))
    d2 = log_s[2:] - 2.0 * log_s[1:-1] + log_s[:-2]
    i = int(np.argmin(d2))
    return HadamardReport(
        passed=bool(d2[i] >= -tol),
        min_second_diff=float(d2[i]),
        witness_r=float(rs[i + 1]),
        n_functions=len(fs),
        r_count=int(rs.size),
        theta_count=max(p.theta_count for p in profiles),
        tol=tol,
    )


def _is_vectorized(f) -> bool:
    try:
        out = f(np.zeros(2, dtype=complex))
        return np.asarray(out).shape == (2,)
    except Exception:
        return False


def random_polynomials(count: int, max_degree: int, seed: int):
    """Seeded random polynomials with coefficients in the complex unit box
    and constant term 1, as ascending coefficient arrays."""
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(count):
        d = int(rng.integers(1, max_degree + 1))
        c = rng.uniform(-1.0, 1.0, size=d + 1) + 1j * rng.uniform(-1.0, 1.0, size=d + 1)
        c[0] = 1.0
        polys.append(c)
    return polys


def polynomial_callable(coeffs) -> Callable:
    c = np.asarray(coeffs)
    return lambda z: np.polynomial.polynomial.polyval(z, c)


# -- lower convex envelope ----------------------------------------------------


@dataclass(frozen=True)
class EnvelopeResult:
    """Lower convex hull of sampled F, the worst gap F - hull, and the
    bounded-gap equivalence verdict."""

    hull_knots: tuple  # ((x, F_hull(x)), ...)
    gap: float
    gap_witness: Optional[float]
    equivalent: bool
    gap_bound: float

    def hull_value(self, x):
        xs = np.array([k[0] for k in self.hull_knots])
        ys = np.array([k[1] for k in self.hull_knots])
        x = np.asarray(x, dtype=float)
        # np.interp clamps; extend the end segments linearly instead.
        y = np.interp(x, xs, ys)
        left = x < xs[0]
        right = x > xs[-1]
        if xs.size >= 2:
            s0 = (ys[1] - ys[0]) / (xs[1] - xs[0])
            s1 = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            y = np.where(left, ys[0] + s0 * (x - xs[0]), y)
            y = np.where(right, ys[-1] + s1 * (x - xs[-1]), y)
        return y if y.shape else float(y)

    def to_json_dict(self) -> dict:
        return {
            "gap": self.gap,
            "gap_witness": self.gap_witness,
            "equivalent": self.equivalent,
            "gap_bound": self.gap_bound,
            "hull_knots": [[x, y] for x, y in self.hull_knots],
        }


def _lower_hull(xs: np.ndarray, ys: np.ndarray):
    """Monotone-chain lower hull of points already sorted by x.
    Collinear middle points are dropped, so re-hulling the hull is exact."""
    hull = []
    for x, y in zip(xs, ys):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # keep (x1, y1) only if it lies strictly below the chord
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) > 0.0:
                break
            hull.pop()
        hull.append((float(x), float(y)))
    return hull


def log_convex_envelope(w: WeightFunction, x_grid,
                        gap_bound: float = GAP_BOUND) -> EnvelopeResult:
    """Lower convex hull of {(x, F(x))} over the grid and the decision
    gap = max(F - hull) <= gap_bound."""
    xs = np.asarray(x_grid, dtype=float)
    if xs.size < 3:
        raise ValueError("x_grid needs at least 3 points")
    if np.any(xs >= 0.0) or np.any(np.diff(xs) <= 0.0):
        raise ValueError("x_grid must be strictly increasing and negative")
    ys = np.array([w.big_f(float(x)) for x in xs])
    if not np.all(np.isfinite(ys)):
        raise OverflowError("F is not finite on the whole grid")
    knots = _lower_hull(xs, ys)
    hx = np.array([k[0] for k in knots])
    hy = np.array([k[1] for k in knots])
    hull_at = np.interp(xs, hx, hy)
    gaps = ys - hull_at
    i = int(np.argmax(gaps))
    gap = max(float(gaps[i]), 0.0)
    return EnvelopeResult(
        hull_knots=tuple(knots),
        gap=gap,
        gap_witness=float(xs[i]),
        equivalent=bool(gap <= gap_bound),
        gap_bound=gap_bound,
    )


def hull_weight(result: EnvelopeResult, strictify: float = 0.0) -> WeightFunction:
    """The hull as a weight: a log-convex surrogate for the weight that
    produced it, optionally strictified (adds strictify * e^x to F) so the
    tangent construction can run on it."""
    return weight_from_knots(result.hull_knots, strictify=strictify)


# -- equivalence constants ----------------------------------------------------


@dataclass(frozen=True)
class EquivalenceConstants:
    c1: float
    c2: float
    log_c1: float
    log_c2: float
    unbounded: bool


def equivalence_constants(u, v, log_inputs: bool = False,
                          cap_log: float = GAP_BOUND) -> EquivalenceConstants:
    """Two-sided constants C1 <= v/u <= C2 over shared samples, computed in
    the log domain; flagged unbounded when the log-ratio spread exceeds
    cap_log."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.size == 0:
        raise ValueError("u and v must be non-empty samples on a shared grid")
    if log_inputs:
        lu, lv = u, v
    else:
        if np.any(u <= 0.0) or np.any(v <= 0.0):
            raise ValueError("samples must be positive")
        lu, lv = np.log(u), np.log(v)
    ratios = lv - lu
    lo = float(ratios.min())
    hi = float(ratios.max())
    return EquivalenceConstants(
        c1=math.exp(lo) if lo <= 709.0 else math.inf,
        c2=math.exp(hi) if hi <= 709.0 else math.inf,
        log_c1=lo,
        log_c2=hi,
        unbounded=bool(hi - lo > cap_log),
    )
