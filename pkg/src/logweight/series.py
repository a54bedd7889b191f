"""Lacunary series assembly, stable evaluation, and certified growth bounds.

The tangent induction hands over positive coefficients in log form with
strictly increasing integer exponents.  Splitting by parity of the step
index gives two series G1 (odd steps) and G2 (even steps); on each radius
interval of the construction one of the two is dominated by a single term,
which yields the two-sided bound

    (2/5) e^{-h} omega(t) < |G1(z)| + |G2(z)| < 4 omega(t),   t0 < |z| < 1.

Coefficients reach exp(1e5) and beyond for fast weights, so every
evaluation factors out the largest term magnitude in the log domain and
sums mantissas of order one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .construction import ConstructionState, next_tangent
from .numerics import NEG_INF, logaddexp, neumaier_sum
from .weight_model import WeightFunction

# Terms this far (log scale) below the leading one cannot move a float64
# sum at 1e-12 relative accuracy even in million-term sums; they are dropped.
DROP_THRESHOLD = 200.0

# Normalized-margin slack for the sandwich bounds, matching the lemma
# verifier convention.
SANDWICH_SLACK = 1e-9

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ScaledComplex:
    """A complex value mantissa * exp(log_scale) with |mantissa| in [1, 2).

    Zero is represented by mantissa 0 and log_scale -inf.  Normalizing to
    a power-of-two window keeps the representation unique, so equality and
    serialization are stable.
    """

    mantissa: complex
    log_scale: float

    @staticmethod
    def normalize(value: complex, log_scale: float = 0.0) -> "ScaledComplex":
        if value == 0:
            return ScaledComplex(0j, NEG_INF)
        k = math.floor(math.log2(abs(value)))
        return ScaledComplex(complex(value.real * 2.0 ** -k, value.imag * 2.0 ** -k),
                             log_scale + k * math.log(2.0))

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def log_abs(self) -> float:
        if self.is_zero:
            return NEG_INF
        return math.log(abs(self.mantissa)) + self.log_scale

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return self.mantissa * math.exp(self.log_scale)


@dataclass(frozen=True)
class LacunarySeries:
    """Finite list of terms exp(log_coeff) z^exponent, exponents strictly
    increasing non-negative integers.  Construction sorts the terms, so the
    summation order downstream never depends on input order."""

    terms: tuple  # ((log_coeff, exponent), ...)

    def __post_init__(self):
        terms = tuple(sorted(((float(lc), int(e)) for lc, e in self.terms),
                             key=lambda te: te[1]))
        es = [e for _, e in terms]
        if any(e < 0 for e in es):
            raise ValueError("exponents must be non-negative")
        if any(b <= a for a, b in zip(es, es[1:])):
            raise ValueError("exponents must be strictly increasing")
        object.__setattr__(self, "terms", terms)

    @property
    def exponents(self) -> tuple:
        return tuple(e for _, e in self.terms)

    @property
    def log_coeffs(self) -> tuple:
        return tuple(lc for lc, _ in self.terms)

    def shifted(self, shift: int) -> "LacunarySeries":
        """Divide by z^shift termwise (exponents must stay non-negative)."""
        return LacunarySeries(tuple((lc, e - shift) for lc, e in self.terms))


@dataclass(frozen=True)
class SeriesPair:
    """The odd/even split of a construction, plus the radii bracketing the
    range on which the sandwich bound is certified."""

    g1: LacunarySeries
    g2: LacunarySeries
    t0: float
    h: float
    t_last: float


def split_parity(state: ConstructionState) -> SeriesPair:
    """Odd-index lines (k = 1, 3, ...) feed g1, even-index lines feed g2."""
    if not state.lines:
        raise ValueError("state has no lines")
    g1 = [(l.log_a, e) for i, (l, e) in enumerate(zip(state.lines, state.es))
          if (i + 1) % 2 == 1]
    g2 = [(l.log_a, e) for i, (l, e) in enumerate(zip(state.lines, state.es))
          if (i + 1) % 2 == 0]
    return SeriesPair(
        g1=LacunarySeries(tuple(g1)),
        g2=LacunarySeries(tuple(g2)),
        t0=state.t0,
        h=state.params.h,
        t_last=state.t_last,
    )


def eval_series(s: LacunarySeries, z: complex) -> ScaledComplex:
    """Evaluate the series at |z| < 1, stably at any coefficient scale.

    Factors out L_max = max_k (log_coeff_k + e_k log|z|); terms more than
    200 below it are dropped, the rest are summed in ascending exponent
    order with Neumaier compensation on the real and imaginary parts.
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError(f"|z| = {abs(z)} is outside the open unit disk")
    if not s.terms:
        return ScaledComplex(0j, NEG_INF)
    if z == 0:
        for lc, e in s.terms:
            if e == 0:
                return ScaledComplex.normalize(1.0 + 0j, lc)
        return ScaledComplex(0j, NEG_INF)
    log_r = math.log(abs(z))
    theta = cmath.phase(z)
    logs = [lc + e * log_r for lc, e in s.terms]
    l_max = max(logs)
    re_parts = []
    im_parts = []
    for (lc, e), lv in zip(s.terms, logs):
        d = lv - l_max
        if d < -DROP_THRESHOLD:
            continue
        term = cmath.exp(complex(d, math.fmod(e * theta, _TWO_PI)))
        re_parts.append(term.real)
        im_parts.append(term.imag)
    total = complex(neumaier_sum(re_parts), neumaier_sum(im_parts))
    return ScaledComplex.normalize(total, l_max)


def modulus_sum(pair: SeriesPair, z: complex) -> float:
    """log(|G1(z)| + |G2(z)|); -inf when both vanish (e.g. at z = 0)."""
    return logaddexp(eval_series(pair.g1, z).log_abs,
                     eval_series(pair.g2, z).log_abs)


# -- grid evaluation --------------------------------------------------------


def _phase_table(exponents, theta_count: int, theta_indices=None) -> np.ndarray:
    """exp(i e theta_j) on the uniform angle grid theta_j = 2 pi j / N,
    computed through (e j mod N) in exact integer arithmetic so huge
    exponents lose no phase accuracy.  theta_indices selects a subset of
    the angle columns."""
    if theta_indices is None:
        j = np.arange(theta_count, dtype=np.int64)
    else:
        j = np.asarray(theta_indices, dtype=np.int64)
    rows = []
    for e in exponents:
        rows.append((int(e) % theta_count) * j % theta_count)
    idx = np.asarray(rows)
    base = np.exp(2j * math.pi * np.arange(theta_count) / theta_count)
    return base[idx]


def eval_series_grid(s: LacunarySeries, t_values, theta_count: int,
                     theta_indices=None) -> np.ndarray:
    """log|series(t e^{i theta_j})| on the (t, theta) product grid.

    Angles are theta_j = 2 pi j / theta_count with j over theta_indices
    (all of them by default).  Returns shape (len(t_values), n_angles).
    Rows whose terms all fall 200 below the per-radius maximum are
    skipped, which keeps deep constructions (thousands of terms)
    affordable.
    """
    ts = np.asarray(t_values, dtype=float)
    if ts.size and (ts.min() < 0.0 or ts.max() >= 1.0):
        raise ValueError("radii must lie in [0, 1)")
    n_angles = theta_count if theta_indices is None else len(theta_indices)
    out = np.full((ts.size, n_angles), NEG_INF)
    if not s.terms or ts.size == 0:
        return out
    log_coeffs = np.asarray(s.log_coeffs)
    exponents = np.asarray(s.exponents, dtype=float)
    phases = _phase_table(s.exponents, theta_count, theta_indices)

    zero_mask = ts == 0.0
    if zero_mask.any():
        for lc, e in s.terms:
            if e == 0:
                out[zero_mask, :] = lc
    pos = np.nonzero(~zero_mask)[0]
    if pos.size == 0:
        return out
    xs = np.log(ts[pos])

    block = 256
    for start in range(0, pos.size, block):
        sel = pos[start:start + block]
        xb = xs[start:start + block]
        logs = log_coeffs[:, None] + exponents[:, None] * xb[None, :]
        l_max = logs.max(axis=0)
        rel = logs - l_max[None, :]
        live = np.nonzero((rel >= -DROP_THRESHOLD).any(axis=1))[0]
        mant = np.where(rel[live] >= -DROP_THRESHOLD, np.exp(rel[live]), 0.0)
        total = mant.T @ phases[live]  # (len(sel), n_angles)
        mag = np.abs(total)
        with np.errstate(divide="ignore"):
            out[sel, :] = np.where(mag > 0.0, np.log(mag), NEG_INF) + l_max[:, None]
    return out


def modulus_sum_grid(pair: SeriesPair, t_values, theta_count: int) -> np.ndarray:
    a = eval_series_grid(pair.g1, t_values, theta_count)
    b = eval_series_grid(pair.g2, t_values, theta_count)
    return np.logaddexp(a, b)


# -- sandwich certification --------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    """Worst normalized margins of the two-sided bound over a grid."""

    passed: bool
    lower_margin: float
    lower_witness: tuple  # (t, theta)
    upper_margin: float
    upper_witness: tuple
    t_count: int
    theta_count: int
    h: float

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "lower_margin": self.lower_margin,
            "lower_witness": {"t": self.lower_witness[0], "theta": self.lower_witness[1]},
            "upper_margin": self.upper_margin,
            "upper_witness": {"t": self.upper_witness[0], "theta": self.upper_witness[1]},
            "t_count": self.t_count,
            "theta_count": self.theta_count,
            "h": self.h,
        }


def _normalized(diff, a, b):
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return diff / scale


def sandwich_check(pair: SeriesPair, w: WeightFunction, t_grid,
                   theta_count: int = 256) -> SandwichReport:
    """Certify (2/5)e^{-h} omega < |G1|+|G2| < 4 omega on the grid.

    Every t must lie in (t0, t_last], the range the construction actually
    covered; radii outside it are an input error, not a bound failure.
    Margins are log-domain differences normalized by the magnitudes of the
    compared sides; pass means every margin >= -1e-9.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("empty radius grid")
    if ts.min() <= pair.t0 or ts.max() > pair.t_last:
        raise ValueError(
            f"radius grid must lie in (t0, t_last] = ({pair.t0}, {pair.t_last}]")
    if theta_count < 1:
        raise ValueError("theta_count must be positive")
    log_s = modulus_sum_grid(pair, ts, theta_count)
    log_w = np.array([w.log_omega(float(t)) for t in ts])
    lo_bound = math.log(0.4) - pair.h + log_w
    hi_bound = math.log(4.0) + log_w
    lower = _normalized(log_s - lo_bound[:, None], log_s, lo_bound[:, None])
    upper = _normalized(hi_bound[:, None] - log_s, log_s, hi_bound[:, None])

    thetas = _TWO_PI * np.arange(theta_count) / theta_count
    li = np.unravel_index(np.argmin(lower), lower.shape)
    ui = np.unravel_index(np.argmin(upper), upper.shape)
    lower_margin = float(lower[li])
    upper_margin = float(upper[ui])
    return SandwichReport(
        passed=bool(lower_margin >= -SANDWICH_SLACK and upper_margin >= -SANDWICH_SLACK),
        lower_margin=lower_margin,
        lower_witness=(float(ts[li[0]]), float(thetas[li[1]])),
        upper_margin=upper_margin,
        upper_witness=(float(ts[ui[0]]), float(thetas[ui[1]])),
        t_count=int(ts.size),
        theta_count=theta_count,
        h=pair.h,
    )


# -- zero adjustment ---------------------------------------------------------


@dataclass(frozen=True)
class AdjustedPair:
    """The final pair (f1, f2) with f1(z) = (G1/z^{e1})(e^{i theta*} z).

    Dividing out the leading exponent makes f1(0) = a_1 != 0 and can only
    increase the modulus inside the closed unit disk, so the lower bound
    survives; the rotation theta* pushes the finitely many zeros of the
    two factors apart on the sampled inner disk.  c_low and c_high are the
    measured two-sided constants of (|f1|+|f2|)/omega over the sample set.
    """

    f1: LacunarySeries
    f2: LacunarySeries
    theta_star: float
    theta_index: int
    theta_candidates: int
    e1: int
    c_low: float
    c_high: float
    log_c_low: float
    log_c_high: float
    t0: float
    t_last: float
    grid_spec: tuple  # (inner_radii, inner_angles, outer_t_points, outer_angles)

    def eval_f1(self, z: complex) -> ScaledComplex:
        return eval_series(self.f1, cmath.exp(1j * self.theta_star) * z)

    def eval_f2(self, z: complex) -> ScaledComplex:
        return eval_series(self.f2, z)

    def log_modulus_sum(self, z: complex) -> float:
        return logaddexp(self.eval_f1(z).log_abs, self.eval_f2(z).log_abs)

    def sample_log_ratios(self, w: WeightFunction):
        """(log omega, log(|f1|+|f2|)) over exactly the sample grid the
        constants were measured on, for cross-checks against independent
        two-sided constant estimators."""
        return _log_ratio_samples(self.f1, self.f2, w, self.t0, self.t_last,
                                  self.theta_index, self.theta_candidates,
                                  *self.grid_spec)

    def to_json_dict(self) -> dict:
        return {
            "theta_star": self.theta_star,
            "theta_index": self.theta_index,
            "theta_candidates": self.theta_candidates,
            "e1": self.e1,
            "c_low": self.c_low,
            "c_high": self.c_high,
            "log_c_low": self.log_c_low,
            "log_c_high": self.log_c_high,
            "f1_terms": [[lc, e] for lc, e in self.f1.terms],
            "f2_terms": [[lc, e] for lc, e in self.f2.terms],
        }


def inner_disk_radii(t0: float, count: int) -> np.ndarray:
    """Radii in [0, t0], sine-spaced so they cluster near t0 where the
    zeros of the truncated series accumulate."""
    i = np.arange(count)
    return t0 * np.sin(0.5 * math.pi * i / (count - 1))


def _log_ratio_samples(f1: LacunarySeries, f2: LacunarySeries,
                       w: WeightFunction, t0: float, t_last: float,
                       theta_index: int, theta_count: int,
                       inner_radii: int, inner_angles: int,
                       outer_t_points: int, outer_angles: int):
    """log omega and log(|f1 rotated| + |f2|) on the inner-disk grid united
    with the outer sandwich grid, as flat arrays in a fixed order."""
    common = int(np.lcm(inner_angles, theta_count))
    if outer_angles:
        common = int(np.lcm(common, outer_angles))
    shift = theta_index * (common // theta_count)

    log_w_parts = []
    log_s_parts = []

    r_in = inner_disk_radii(t0, inner_radii)
    j_in = (np.arange(inner_angles) * (common // inner_angles) + shift) % common
    f1_in = eval_series_grid(f1, r_in, common, theta_indices=j_in)
    f2_in = eval_series_grid(f2, r_in, inner_angles)
    log_w_in = np.array([w.log_omega(float(t)) for t in r_in])
    log_s_parts.append(np.logaddexp(f1_in, f2_in).ravel())
    log_w_parts.append(np.repeat(log_w_in, inner_angles))

    if outer_t_points > 0:
        r_out = np.linspace(t0, t_last, outer_t_points + 1)[1:]
        j_out = (np.arange(outer_angles) * (common // outer_angles) + shift) % common
        f1_out = eval_series_grid(f1, r_out, common, theta_indices=j_out)
        f2_out = eval_series_grid(f2, r_out, outer_angles)
        log_w_out = np.array([w.log_omega(float(t)) for t in r_out])
        log_s_parts.append(np.logaddexp(f1_out, f2_out).ravel())
        log_w_parts.append(np.repeat(log_w_out, outer_angles))

    return np.concatenate(log_w_parts), np.concatenate(log_s_parts)


def zero_adjust(pair: SeriesPair, w: WeightFunction, theta_count: int = 720,
                inner_radii: int = 100, inner_angles: int = 64,
                outer_t_points: int = 200, outer_angles: int = 64) -> AdjustedPair:
    """Pick the rotation and report certified grid constants.

    theta* is chosen among theta_count uniform candidates to maximize the
    minimum of (|f1| + |f2|)/omega over a polar grid of the closed disk
    |z| <= t0; the constants c_low/c_high are then measured over that grid
    united with an outer grid spanning (t0, t_last].
    """
    if not pair.g1.terms:
        raise ValueError("g1 is empty")
    e1 = pair.g1.exponents[0]
    f1 = pair.g1.shifted(e1)

    # Evaluating f1 on a common refined angle grid lets each candidate
    # rotation reuse exact phases: angle(j, c) = 2 pi (j/inner_angles +
    # c/theta_count) lives on the lcm grid.
    common = int(np.lcm(inner_angles, theta_count))
    stride_j = common // inner_angles
    stride_c = common // theta_count

    r_in = inner_disk_radii(pair.t0, inner_radii)
    f1_in = eval_series_grid(f1, r_in, common)
    f2_in = eval_series_grid(pair.g2, r_in, inner_angles)
    log_w_in = np.array([w.log_omega(float(t)) for t in r_in])

    j_idx = np.arange(inner_angles) * stride_j
    best_c = -1
    best_min = -math.inf
    for c in range(theta_count):
        rot = f1_in[:, (j_idx + c * stride_c) % common]
        ratio = np.logaddexp(rot, f2_in) - log_w_in[:, None]
        m = float(ratio.min())
        if m > best_min:
            best_min = m
            best_c = c
    if best_min == -math.inf:
        raise RuntimeError("adjustment failed - refine grids")

    theta_star = _TWO_PI * best_c / theta_count

    log_w_all, log_s_all = _log_ratio_samples(
        f1, pair.g2, w, pair.t0, pair.t_last, best_c, theta_count,
        inner_radii, inner_angles, outer_t_points, outer_angles)
    ratios = log_s_all - log_w_all
    log_c_low = float(ratios.min())
    log_c_high = float(ratios.max())
    return AdjustedPair(
        f1=f1,
        f2=pair.g2,
        theta_star=theta_star,
        theta_index=best_c,
        theta_candidates=theta_count,
        e1=e1,
        c_low=math.exp(log_c_low),
        c_high=math.exp(log_c_high),
        log_c_low=log_c_low,
        log_c_high=log_c_high,
        t0=pair.t0,
        t_last=pair.t_last,
        grid_spec=(inner_radii, inner_angles, outer_t_points, outer_angles),
    )


def frequency_profile(state: ConstructionState) -> list:
    """Consecutive exponent ratios e_{k+1}/e_k; ratios sinking toward 1
    are the weakly lacunary regime of fast weights."""
    if len(state.es) < 2:
        raise ValueError("need at least 2 exponents")
    return [b / a for a, b in zip(state.es, state.es[1:])]


def tail_margin(state: ConstructionState, w: WeightFunction, t_grid,
                rel_bound: float = 1e-9) -> float:
    """Soundness margin of the truncation over the given radii.

    Computes the hypothetical next line of the induction and returns the
    worst value of log(rel_bound * omega(t)) - log(a t^delta) over the
    grid: >= 0 means every radius is far enough below the truncation point
    that the first omitted term (and hence, by the geometric separation of
    the lines, the whole omitted tail up to the factor 1/(1-e^{-h})) is
    below rel_bound * omega(t).  Returns +inf when the weight admits no
    further tangent step at float resolution.
    """
    from .construction import SlowGrowthError

    try:
        line, _ = next_tangent(w, state.xs[-1], state.params.h,
                               state.params.root_tol)
    except (SlowGrowthError, OverflowError):
        return math.inf
    worst = math.inf
    for t in np.asarray(t_grid, dtype=float):
        t = float(t)
        x = math.log(t)
        margin = (math.log(rel_bound) + w.log_omega(t)) - line.value(x)
        worst = min(worst, margin)
    return worst
