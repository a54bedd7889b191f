"""Tangent-line induction on the log-log profile of a radial weight.

Write F(x) = log omega(e^x) on x < 0 and fix a vertical gap h >= 2 and a
start abscissa x_0 < 0.  Step k produces the unique line

    l_k(x) = log_a_k + delta_k * x

that is tangent to the graph of F and meets the graph of F - h at the
previous abscissa x_{k-1}; the second crossing defines x_k > x_{k-1}.
Exponentiating, l_k describes the monomial bound a_k t^{delta_k}, which

  * never exceeds omega on [t_0, 1)            (tangency from below),
  * matches omega within e^{-h} on [t_k-1, t_k] (the chord conditions),
  * dominates the other monomials geometrically away from its own
    interval (successive lines separate by h per index step).

Both solves are bisection on residual functions that are strictly
monotone whenever F is strictly convex, so every step is deterministic
and costs O(log(1/root_tol)) evaluations of F and F'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .numerics import NEG_INF
from .weight_model import WeightFunction, check_log_convexity

# Threshold t_0 above which the integer-exponent estimates keep the 9/10
# and 5/9 constants used by the verifier (they need 1/t < 10/9).
T0_INTEGER_ESTIMATES = 0.9

# Margins are normalized by the magnitude of the compared log quantities;
# a check passes when the worst normalized margin clears this slack.
LEMMA_SLACK = 1e-9

_GATE_POINTS = 200
_GATE_SHRINK = 1e-6
_MAX_RESTARTS = 8


class ConstructionError(RuntimeError):
    """Base class for failures of the tangent induction."""


class NotStrictlyConvexError(ConstructionError):
    pass


class SlowGrowthError(ConstructionError):
    pass


class ExponentCollisionError(ConstructionError):
    pass


@dataclass(frozen=True)
class ConstructionParams:
    """Knobs of the induction.  h >= 2 is required by the separation
    estimates; exp(x0) > 9/10 is recommended so the integer-exponent
    estimates keep their stated constants."""

    x0: float
    h: float = 2.0
    k_max: int = 500
    t_stop: float = 0.9999
    root_tol: float = 1e-13
    auto_restart: bool = False

    def __post_init__(self):
        if not self.h >= 2.0:
            raise ValueError(f"h={self.h} must be >= 2")
        if not self.x0 < 0.0:
            raise ValueError(f"x0={self.x0} must be negative")
        if not 0.0 < self.t_stop < 1.0:
            raise ValueError(f"t_stop={self.t_stop} must lie in (0, 1)")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not 0.0 < self.root_tol < 1e-3:
            raise ValueError("root_tol must lie in (0, 1e-3)")


@dataclass(frozen=True)
class TangentLine:
    """A line log_a + delta*x tangent to F at xi (xi is None for lines
    loaded from JSON, where only the coefficients are stored)."""

    delta: float
    log_a: float
    xi: Optional[float] = None

    def value(self, x):
        return self.log_a + self.delta * x


@dataclass(frozen=True)
class ConstructionState:
    """The full output of a run: abscissas (xs includes x0), radii
    ts = exp(xs), lines l_1..l_K and integer exponents e_k = floor(delta_k)+1."""

    params: ConstructionParams
    xs: tuple
    ts: tuple
    lines: tuple
    es: tuple

    @property
    def deltas(self) -> tuple:
        return tuple(l.delta for l in self.lines)

    @property
    def log_as(self) -> tuple:
        return tuple(l.log_a for l in self.lines)

    @property
    def t0(self) -> float:
        return self.ts[0]

    @property
    def t_last(self) -> float:
        return self.ts[-1]

    def to_json_dict(self) -> dict:
        return {
            "h": self.params.h,
            "x0": self.params.x0,
            "xs": list(self.xs),
            "deltas": list(self.deltas),
            "log_as": list(self.log_as),
            "es": list(self.es),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ConstructionState":
        xs = tuple(float(x) for x in d["xs"])
        params = ConstructionParams(x0=float(d["x0"]), h=float(d["h"]))
        lines = tuple(TangentLine(delta=float(dd), log_a=float(la))
                      for dd, la in zip(d["deltas"], d["log_as"]))
        return ConstructionState(
            params=params,
            xs=xs,
            ts=tuple(math.exp(x) for x in xs),
            lines=lines,
            es=tuple(int(e) for e in d["es"]),
        )


def _bisect(fn, lo, hi, positive_at_lo, tol):
    # The tolerance is relative to the abscissa magnitude: near 0 the
    # slopes of F blow up like 1/|x| or faster, so an absolute-in-x stop
    # would leave function residuals that grow without bound.  Both the
    # bracket width and the tolerance scale with |x|, so the iteration
    # count stays near log2(1/tol) regardless of scale.
    for _ in range(200):
        if hi - lo <= tol * abs(hi):
            break
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0.0) == positive_at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def next_tangent(w: WeightFunction, x_prev: float, h: float,
                 root_tol: float = 1e-13):
    """One induction step: the tangent line through (x_prev, F(x_prev) - h)
    and the next crossing abscissa.

    Returns (TangentLine, x_next).  Solved in two stages:

    (a) the tangency abscissa xi is the root of
        G(xi) = F(xi) + F'(xi)(x_prev - xi) - F(x_prev) + h,
        which equals h at xi = x_prev and is strictly decreasing in xi
        (G' = F''(xi)(x_prev - xi) < 0 under strict convexity);
    (b) x_next > xi is the root of H(x) = F(x) - h - l(x), which equals
        -h at xi and is strictly increasing there.

    Both roots are bracketed by geometrically halving the abscissa toward
    0 and then bisected to root_tol.
    """
    if x_prev >= 0.0:
        raise ValueError("x_prev must be negative")
    f_prev = w.big_f(x_prev)
    if not math.isfinite(f_prev):
        raise OverflowError(f"F({x_prev}) is not finite; start farther from 0")

    def big_g(xi):
        f = w.big_f(xi)
        fp = w.big_f_prime(xi)
        if not (math.isfinite(f) and math.isfinite(fp)):
            return NEG_INF
        return f + fp * (x_prev - xi) - f_prev + h

    # Stage (a): bracket the tangency.
    lo, g_lo = x_prev, h
    hi = x_prev / 2.0
    decreased = False
    while True:
        if hi > -root_tol:
            if decreased:
                raise SlowGrowthError(
                    "weight grows too slowly (or is not unbounded): no tangent "
                    f"line drops {h} below F left of x = {-root_tol}")
            raise NotStrictlyConvexError(
                "weight profile is not strictly convex: the tangent never "
                "separates from the chord")
        g_hi = big_g(hi)
        if g_hi > g_lo + 1e-9 * max(1.0, abs(g_lo)):
            raise NotStrictlyConvexError(
                f"weight profile is not strictly convex near x = {hi}")
        if g_hi < g_lo - 1e-12 * max(1.0, abs(g_lo)):
            decreased = True
        if g_hi <= 0.0:
            break
        lo, g_lo = hi, g_hi
        hi = hi / 2.0
    xi = _bisect(big_g, lo, hi, positive_at_lo=True, tol=root_tol)
    delta = w.big_f_prime(xi)
    log_a = w.big_f(xi) - delta * xi
    if not (delta > 0.0 and math.isfinite(log_a)):
        raise ConstructionError(f"degenerate tangent at xi={xi}")

    def big_h(x):
        f = w.big_f(x)
        if not math.isfinite(f):
            return math.inf
        return f - h - (log_a + delta * x)

    # Stage (b): bracket the next crossing.
    lo2 = xi
    hi2 = xi / 2.0
    while True:
        if hi2 > -root_tol:
            raise SlowGrowthError(
                "weight grows too slowly (or is not unbounded): F - h never "
                f"crosses the tangent line again left of x = {-root_tol}")
        if big_h(hi2) >= 0.0:
            break
        lo2 = hi2
        hi2 = hi2 / 2.0
    x_next = _bisect(big_h, lo2, hi2, positive_at_lo=False, tol=root_tol)
    return TangentLine(delta=delta, log_a=log_a, xi=xi), x_next


def _gate_grid(x0: float):
    mags = np.geomspace(abs(x0), abs(x0) * _GATE_SHRINK, _GATE_POINTS)
    return -mags  # increasing toward 0


def _convexity_gate(w: WeightFunction, x0: float):
    xs = _gate_grid(x0)
    # Fast families overflow near 0; keep the finite prefix of the grid.
    finite = []
    for x in xs:
        x = float(x)
        f = w.big_f(x)
        fp = w.big_f_prime(x)
        if not (math.isfinite(f) and math.isfinite(fp)):
            break
        finite.append(x)
    if len(finite) < 3:
        raise OverflowError("F is not finite on enough of the gate grid")
    report = check_log_convexity(w, finite)
    if not report.is_strictly_convex:
        raise NotStrictlyConvexError(
            "weight is not strictly convex on the gate grid "
            f"(min slope gap {report.min_slope_gap:.3g}, first violation near "
            f"x = {report.violation_points[0]:.6g})")


def run_construction(w: WeightFunction, params: ConstructionParams) -> ConstructionState:
    """Run the induction until t_k > t_stop or k_max lines are placed.

    Preconditions: F strictly convex on the gate grid over [x0, x0*1e-6].
    Raises ExponentCollisionError when floor(delta_k)+1 fails to increase
    strictly, advising a start closer to 0 (with auto_restart the run
    retries with x0/2, up to 8 times).
    """
    attempts = 1 + (_MAX_RESTARTS if params.auto_restart else 0)
    x0 = params.x0
    last_err: Optional[ExponentCollisionError] = None
    for _ in range(attempts):
        try:
            return _run_once(w, replace(params, x0=x0))
        except ExponentCollisionError as err:
            last_err = err
            x0 = x0 / 2.0
    raise last_err


def _run_once(w: WeightFunction, params: ConstructionParams) -> ConstructionState:
    _convexity_gate(w, params.x0)
    xs = [params.x0]
    lines = []
    es = []
    x_prev = params.x0
    for _ in range(params.k_max):
        line, x_next = next_tangent(w, x_prev, params.h, params.root_tol)
        e = math.floor(line.delta) + 1
        if es and e <= es[-1]:
            raise ExponentCollisionError(
                f"integer exponents collide at k={len(es) + 1} "
                f"(floor(delta)+1 = {e} after {es[-1]}); restart with x0 "
                f"closer to 0, e.g. x0/2 = {params.x0 / 2.0}, or enable "
                "auto_restart")
        lines.append(line)
        es.append(e)
        xs.append(x_next)
        x_prev = x_next
        if math.exp(x_next) > params.t_stop:
            break
    return ConstructionState(
        params=params,
        xs=tuple(xs),
        ts=tuple(math.exp(x) for x in xs),
        lines=tuple(lines),
        es=tuple(es),
    )


def h_for_delta(delta: float) -> float:
    """Smallest gap h that makes both geometric tails of the off-interval
    monomial sum total at most delta/2: each tail is bounded by
    e^{-h}/(1-e^{-h}), so 2 e^{-h}/(1-e^{-h}) <= delta/2 iff
    h >= log(1 + 4/delta); clamped below at 2."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta={delta} outside (0, 1]")
    return max(2.0, math.log(1.0 + 4.0 / delta))


# -- lemma verification -----------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    worst_margin: float  # normalized: (lhs - rhs) / max(1, |lhs|, |rhs|)
    witness_x: Optional[float]
    witness_k: Optional[int]
    n_points: int
    passed: bool


@dataclass(frozen=True)
class LemmaReport:
    checks: tuple
    passed: bool
    samples_per_interval: int
    delta: Optional[float] = None

    def check(self, name: str) -> LemmaCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "samples_per_interval": self.samples_per_interval,
            "delta": self.delta,
            "checks": [
                {
                    "name": c.name,
                    "worst_margin": c.worst_margin,
                    "witness_x": c.witness_x,
                    "witness_k": c.witness_k,
                    "n_points": c.n_points,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def _normalized_margins(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return (lhs - rhs) / scale


class _Worst:
    """Order-independent min-reduction with witness."""

    def __init__(self, name):
        self.name = name
        self.margin = math.inf
        self.x = None
        self.k = None
        self.n = 0

    def update(self, margins, xs, k):
        margins = np.asarray(margins, dtype=float)
        self.n += margins.size
        if margins.size == 0:
            return
        i = int(np.argmin(margins))
        if margins[i] < self.margin:
            self.margin = float(margins[i])
            self.x = float(np.asarray(xs, dtype=float)[i])
            self.k = k

    def check(self, slack=LEMMA_SLACK):
        return LemmaCheck(
            name=self.name,
            worst_margin=self.margin,
            witness_x=self.x,
            witness_k=self.k,
            n_points=self.n,
            passed=(self.n == 0) or (self.margin >= -slack),
        )


def verify_tangent_lemmas(state: ConstructionState, w: WeightFunction,
                          samples_per_interval: int = 50,
                          delta: Optional[float] = None) -> LemmaReport:
    """Check every separation and sandwich estimate the induction promises.

    All quantities are compared in the log domain; margins are (lhs-rhs)
    normalized by the magnitude of the sides, and a check passes when its
    worst margin is >= -1e-9.  With `delta` given, the run must have used
    h >= h_for_delta(delta) and the delta-weighted tail bounds are checked
    as well.

    Checks (K = number of lines, I_k = [x_{k-1}, x_k]):
      lines_later_below    l_m >= l_{m+1} + h on [x_0, x_{m-1}]
      lines_earlier_below  l_m >= l_{m-1} + h on [x_m, 0)
      segment_upper        l_k <= F on [x_0, ...) (tangency from below)
      segment_lower        F - h <= l_k on I_k (chord conditions)
      segment_tail_half    sum_{|m-k|>=2} a_m t^{delta_m} < 1/2 a_k t^{delta_k} on I_k
      segment_upper_int    integer-exponent form of segment_upper
      segment_lower_int    a_k t^{e_k} >= (9/10) e^{-h} omega on I_k
      segment_tail_int     integer tail < (5/9) a_k t^{e_k} on I_k
      segment_tail_delta   tail < (delta/2) a_k t^{delta_k} on I_k
      segment_tail_delta_int  integer tail < (5 delta / 9) a_k t^{e_k} on I_k
    """
    if samples_per_interval < 2:
        raise ValueError("samples_per_interval must be at least 2")
    if not state.lines:
        raise ValueError("state has no lines")
    if delta is not None:
        if not 0.0 < delta <= 1.0:
            raise ValueError(f"delta={delta} outside (0, 1]")
        need = h_for_delta(delta)
        if state.params.h < need - 1e-12:
            raise ValueError(
                f"state was built with h={state.params.h} < h_for_delta({delta})"
                f" = {need}")

    h = state.params.h
    xs = np.asarray(state.xs)
    K = len(state.lines)
    deltas = np.asarray(state.deltas)
    log_as = np.asarray(state.log_as)
    es = np.asarray(state.es, dtype=float)

    # State/weight consistency gate: the chord identities must hold.
    for k in (1, K):
        lhs = state.lines[k - 1].value(xs[k - 1])
        rhs = w.big_f(float(xs[k - 1])) - h
        if abs(lhs - rhs) > 1e-6 * max(1.0, abs(rhs)):
            raise ValueError(
                "state does not match this weight (chord residual "
                f"{abs(lhs - rhs):.3g} at k={k})")

    def interval(k, n=samples_per_interval):
        return np.linspace(xs[k - 1], xs[k], n)

    # Points approaching 0 past the last abscissa, used for the open-ended
    # inequality ranges; F is only sampled where it stays finite.
    ext = [float(xs[-1]) / 2.0 ** j for j in range(1, 9)]
    ext_f = [x for x in ext if math.isfinite(w.big_f(x))]

    def line_vals(idx, pts):
        return log_as[idx] + deltas[idx] * np.asarray(pts)

    checks = []

    later = _Worst("lines_later_below")
    for m in range(1, K):  # l_m vs l_{m+1}, valid on [x0, x_{m-1}]
        pts = np.linspace(xs[0], xs[m - 1], samples_per_interval)
        later.update(_normalized_margins(line_vals(m - 1, pts),
                                         line_vals(m, pts) + h), pts, m)
    checks.append(later.check())

    earlier = _Worst("lines_earlier_below")
    for m in range(2, K + 1):  # l_m vs l_{m-1}, valid on [x_m, 0)
        pts = np.concatenate([np.linspace(xs[m], xs[-1], samples_per_interval),
                              np.asarray(ext)])
        earlier.update(_normalized_margins(line_vals(m - 1, pts),
                                           line_vals(m - 2, pts) + h), pts, m)
    checks.append(earlier.check())

    up = _Worst("segment_upper")
    up_int = _Worst("segment_upper_int")
    low = _Worst("segment_lower")
    low_int = _Worst("segment_lower_int")
    tail = _Worst("segment_tail_half")
    tail_int = _Worst("segment_tail_int")
    tail_d = _Worst("segment_tail_delta")
    tail_d_int = _Worst("segment_tail_delta_int")
    log_half = math.log(0.5)
    log_59 = math.log(5.0 / 9.0)

    # Per interval, the work is restricted to lines that can matter there.
    # A line whose larger endpoint value on the interval lies below the
    # smaller endpoint value of some other line is dominated pointwise
    # (lines are monotone between endpoints), so it never attains the
    # upper envelope; for the tail sums, lines more than 250 log units
    # below can shift the log of the sum by at most K e^{-250}, far under
    # the 1e-9 slack.  This keeps deep runs (thousands of lines) linear.
    def process_interval(k, pts, f_pts, with_tails):
        ends = np.stack([pts[0] * deltas + log_as, pts[-1] * deltas + log_as])
        ends_i = np.stack([pts[0] * es + log_as, pts[-1] * es + log_as])
        for e_mat, up_acc, coeff in ((ends, up, deltas), (ends_i, up_int, es)):
            dominated_by = e_mat.min(axis=0).max()
            live = np.nonzero(e_mat.max(axis=0) >= dominated_by)[0]
            env = (log_as[live][:, None] + coeff[live][:, None] * pts[None, :]).max(axis=0)
            up_acc.update(_normalized_margins(f_pts, env), pts, k)

        lk = line_vals(k - 1, pts)
        lk_int = log_as[k - 1] + es[k - 1] * pts
        low.update(_normalized_margins(lk, f_pts - h), pts, k)
        low_int.update(_normalized_margins(
            lk_int, math.log(T0_INTEGER_ESTIMATES) - h + f_pts), pts, k)
        if not with_tails:
            return
        others = np.asarray([m for m in range(1, K + 1) if abs(m - k) >= 2]) - 1
        if others.size == 0:
            return
        for e_mat, coeff, acc, acc_d, const, const_d in (
                (ends, deltas, tail, tail_d, log_half,
                 None if delta is None else math.log(delta / 2.0)),
                (ends_i, es, tail_int, tail_d_int, log_59,
                 None if delta is None else math.log(5.0 * delta / 9.0))):
            cutoff = e_mat[:, others].min(axis=0).max() - 250.0
            live = others[e_mat[:, others].max(axis=0) >= cutoff]
            mat = log_as[live][:, None] + coeff[live][:, None] * pts[None, :]
            mmax = mat.max(axis=0)
            lse = mmax + np.log(np.sum(np.exp(mat - mmax[None, :]), axis=0))
            lhs = lk if coeff is deltas else lk_int
            acc.update(_normalized_margins(const + lhs, lse), pts, k)
            if const_d is not None:
                acc_d.update(_normalized_margins(const_d + lhs, lse), pts, k)

    for k in range(1, K + 1):
        pts = interval(k)
        f_pts = np.array([w.big_f(float(x)) for x in pts])
        process_interval(k, pts, f_pts, with_tails=True)
    if ext_f:
        # the upper (tangency) estimates extend past the last abscissa
        pts = np.asarray(ext_f)
        f_pts = np.array([w.big_f(float(x)) for x in pts])
        ends = np.stack([pts[0] * deltas + log_as, pts[-1] * deltas + log_as])
        for e_mat, up_acc, coeff in ((ends, up, deltas),
                                     (np.stack([pts[0] * es + log_as,
                                                pts[-1] * es + log_as]),
                                      up_int, es)):
            dominated_by = e_mat.min(axis=0).max()
            live = np.nonzero(e_mat.max(axis=0) >= dominated_by)[0]
            env = (log_as[live][:, None] + coeff[live][:, None] * pts[None, :]).max(axis=0)
            up_acc.update(_normalized_margins(f_pts, env), pts, K)

    checks.extend([up.check(), low.check(), tail.check(),
                   up_int.check(), low_int.check(), tail_int.check()])
    if delta is not None:
        checks.extend([tail_d.check(), tail_d_int.check()])

    checks = tuple(checks)
    return LemmaReport(
        checks=checks,
        passed=all(c.passed for c in checks),
        samples_per_interval=samples_per_interval,
        delta=delta,
    )
