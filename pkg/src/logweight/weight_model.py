"""Radial weight functions on [0, 1) and their log-log reparametrization.

A weight is a positive, non-decreasing, continuous, unbounded function
omega on [0, 1), extended radially to the unit disk by omega(|z|).  All
growth analysis happens through

    F(x) = log omega(e^x),   x < 0,

because omega is comparable to a sum of two holomorphic moduli exactly
when F is (equivalent to) a convex function.  Everything is evaluated in
the log domain: omega itself overflows float64 long before the fast
families stop being tractable.

Families
--------
ramey_ullrich   omega(t) = 1/(1-t)
power           omega(t) = (1-t)^(-a),            params (a,), a > 0
exp_power       omega(t) = exp((1-t)^(-alpha)),   params (alpha,), alpha > 0
double_exp      omega(t) = exp(exp(1/(1-t)))
log_power       omega(t) = (1 + log(1/(1-t)))^b,  params (b,), b > 0
inv_log         omega(t) = exp(-1/log t), i.e. F(x) = -1/x (closed-form
                tangent oracle family)
tabulated       piecewise-linear F through given (t, omega) knots
perturbed_*     diagnostic families: a convex base plus a bump or sawtooth,
                used to exercise the convexity / envelope decision paths.
                These model *invalid* weights and may be non-monotone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .numerics import LOG_MAX, triangle_wave

# Slope gap below which F' is not considered strictly increasing.
STRICTNESS_TOL = 1e-10
# Doubling constant cap: larger estimates count as "not doubling".
DOUBLING_CAP = 1e6
# Unboundedness heuristic: require log omega(1 - 1e-6) > this.
UNBOUNDED_LOG_THRESHOLD = 10.0
UNBOUNDED_PROBE_S = 1e-6

_EPS_CBRT = float(np.finfo(float).eps) ** (1.0 / 3.0)

# The four analytic families fast enough to drive the tangent construction
# at desk scale.  log_power grows too slowly (it fails the unboundedness
# heuristic and exhausts float resolution within a few tangent steps) and
# inv_log is kept as a closed-form oracle.
CONSTRUCTIBLE_FAMILIES = ("ramey_ullrich", "power", "exp_power", "double_exp")


class OmegaValue(NamedTuple):
    """omega(t), returned in log form when exp would overflow float64."""

    value: float
    is_log: bool


def _u(x: float) -> float:
    """1 - e^x computed accurately for x near 0-."""
    return -math.expm1(x)


@dataclass(frozen=True)
class _Family:
    name: str
    n_params: int
    defaults: tuple
    log_omega: Callable  # (t, params) -> float
    log_omega_1m: Callable  # (s, params) -> log omega(1 - s), accurate in s
    big_f: Callable  # (x, params) -> float, may return +inf for fast weights
    big_f_prime: Optional[Callable]  # analytic F' or None


def _ramey_f(x, p):
    return -math.log(_u(x))


def _power_f(x, p):
    return -p[0] * math.log(_u(x))


def _exp_power_f(x, p):
    return _u(x) ** (-p[0])


def _double_exp_f(x, p):
    inner = 1.0 / _u(x)
    return math.exp(inner) if inner <= LOG_MAX else math.inf


def _log_power_f(x, p):
    return p[0] * math.log1p(-math.log(_u(x)))


def _inv_log_f(x, p):
    return -1.0 / x


_FAMILIES = {
    "ramey_ullrich": _Family(
        "ramey_ullrich", 0, (),
        lambda t, p: -math.log1p(-t),
        lambda s, p: -math.log(s),
        _ramey_f,
        lambda x, p: math.exp(x) / _u(x),
    ),
    "power": _Family(
        "power", 1, (2.0,),
        lambda t, p: -p[0] * math.log1p(-t),
        lambda s, p: -p[0] * math.log(s),
        _power_f,
        lambda x, p: p[0] * math.exp(x) / _u(x),
    ),
    "exp_power": _Family(
        "exp_power", 1, (1.0,),
        lambda t, p: (1.0 - t) ** (-p[0]),
        lambda s, p: s ** (-p[0]),
        _exp_power_f,
        lambda x, p: p[0] * _u(x) ** (-p[0] - 1.0) * math.exp(x),
    ),
    "double_exp": _Family(
        "double_exp", 0, (),
        lambda t, p: math.exp(1.0 / (1.0 - t)) if 1.0 / (1.0 - t) <= LOG_MAX else math.inf,
        lambda s, p: math.exp(1.0 / s) if 1.0 / s <= LOG_MAX else math.inf,
        _double_exp_f,
        lambda x, p: (math.exp(1.0 / _u(x) + x) / _u(x) ** 2
                      if 1.0 / _u(x) + x - 2.0 * math.log(_u(x)) <= LOG_MAX else math.inf),
    ),
    "log_power": _Family(
        "log_power", 1, (2.0,),
        lambda t, p: p[0] * math.log1p(-math.log1p(-t)),
        lambda s, p: p[0] * math.log1p(-math.log(s)),
        _log_power_f,
        lambda x, p: p[0] * math.exp(x) / (_u(x) * (1.0 - math.log(_u(x)))),
    ),
    "inv_log": _Family(
        "inv_log", 0, (),
        lambda t, p: 0.0 if t == 0.0 else -1.0 / math.log(t),
        lambda s, p: -1.0 / math.log1p(-s),
        _inv_log_f,
        lambda x, p: 1.0 / (x * x),
    ),
}

# Diagnostic perturbations on top of the ramey_ullrich profile.  They are
# intentionally not monotone: the point is to feed the convexity checks and
# the envelope decision with controlled counterexamples.

def _bump(x, p):
    height, x_star, width = p
    return height * max(0.0, 1.0 - abs(x - x_star) / width)


def _sawtooth(x, p):
    amp, period = p
    return amp * float(triangle_wave(x / period))


def _unbounded_sawtooth(x, p):
    scale, log_period = p
    return (scale / abs(x)) * float(triangle_wave(math.log(1.0 / abs(x)) / log_period))


_PERTURBATIONS = {
    "perturbed_bump": (_bump, (3.0, -1.0, 0.02)),
    "perturbed_sawtooth": (_sawtooth, (0.5, 0.25)),
    "perturbed_unbounded_sawtooth": (_unbounded_sawtooth, (2.0, 0.5)),
}

_FAMILY_ALIASES = {"perturbed": "perturbed_bump"}


@dataclass(frozen=True)
class WeightFunction:
    """A radial weight, evaluated through log omega and F = log omega(e^x).

    Immutable and side-effect free; instances are safe to share across
    threads.  `params` are family-specific (see module docstring);
    `table` holds (x, F) knots for the tabulated family; `deriv_mode`
    selects the analytic derivative when the family has one, otherwise a
    central finite difference with step max(eps^(1/3) |x|, 1e-8).
    """

    family: str
    params: tuple = ()
    table: Optional[tuple] = None  # ((x_0, F_0), ...), x strictly increasing
    deriv_mode: str = "analytic"  # "analytic" | "fd"

    def __post_init__(self):
        if self.family == "tabulated":
            if not self.table or len(self.table) < 2:
                raise ValueError("tabulated weight needs at least 2 knots")
            xs = [k[0] for k in self.table]
            fs = [k[1] for k in self.table]
            if any(b <= a for a, b in zip(xs, xs[1:])) or xs[-1] >= 0.0:
                raise ValueError("tabulated knots must be strictly increasing and negative")
            if any(b < a for a, b in zip(fs, fs[1:])):
                raise ValueError("tabulated omega must be non-decreasing")
        elif self.family in _PERTURBATIONS:
            pert, defaults = _PERTURBATIONS[self.family]
            if not self.params:
                object.__setattr__(self, "params", defaults)
            object.__setattr__(self, "deriv_mode", "fd")
        else:
            fam = _FAMILIES.get(self.family)
            if fam is None:
                raise ValueError(f"unknown weight family {self.family!r}")
            if not self.params:
                object.__setattr__(self, "params", fam.defaults)
            if len(self.params) != fam.n_params:
                raise ValueError(
                    f"family {self.family!r} takes {fam.n_params} parameter(s), "
                    f"got {len(self.params)}")
            if any(p <= 0 for p in self.params):
                raise ValueError(f"family {self.family!r} parameters must be positive")

    # -- core evaluations ------------------------------------------------

    def log_omega(self, t: float) -> float:
        """log omega(t) for t in [0, 1); may be +inf for fast families."""
        if not 0.0 <= t < 1.0:
            raise ValueError(f"t={t} outside the weight domain [0, 1)")
        if self.family == "tabulated":
            if t <= 0.0:
                raise ValueError("tabulated weight needs t > 0")
            return self.big_f(math.log(t))
        if self.family in _PERTURBATIONS:
            if t <= 0.0:
                raise ValueError("perturbed weight needs t > 0")
            return self.big_f(math.log(t))
        return _FAMILIES[self.family].log_omega(t, self.params)

    def log_omega_one_minus(self, s: float) -> float:
        """log omega(1 - s) computed from s directly, so that ratios like
        omega(1-s/2)/omega(1-s) stay exact in the log domain."""
        if not 0.0 < s <= 1.0:
            raise ValueError(f"s={s} outside (0, 1]")
        fam = _FAMILIES.get(self.family)
        if fam is not None:
            return fam.log_omega_1m(s, self.params)
        return self.log_omega(1.0 - s)

    def big_f(self, x: float) -> float:
        """F(x) = log omega(e^x) for x < 0; +inf where exp overflows."""
        if x >= 0.0:
            raise ValueError(f"x={x} must be negative")
        if self.family == "tabulated":
            base = self._table_interp(x)
            if self.params:  # optional strict-convexity regularizer
                base += self.params[0] * math.exp(x)
            return base
        if self.family in _PERTURBATIONS:
            pert, _ = _PERTURBATIONS[self.family]
            return _ramey_f(x, ()) + pert(x, self.params)
        return _FAMILIES[self.family].big_f(x, self.params)

    def big_f_prime(self, x: float) -> float:
        """F'(x), analytic when available and deriv_mode permits."""
        if x >= 0.0:
            raise ValueError(f"x={x} must be negative")
        if self.family == "tabulated":
            slope = self._table_slope(x)
            if self.params:
                slope += self.params[0] * math.exp(x)
            return slope
        fam = _FAMILIES.get(self.family)
        if self.deriv_mode == "analytic" and fam is not None and fam.big_f_prime is not None:
            return fam.big_f_prime(x, self.params)
        return self._fd_prime(x)

    def _fd_prime(self, x: float) -> float:
        h = max(_EPS_CBRT * abs(x), 1e-8)
        h = min(h, abs(x) / 2.0)  # keep both stencil points negative
        return (self.big_f(x + h) - self.big_f(x - h)) / (2.0 * h)

    # -- tabulated interpolation ------------------------------------------

    def _knot_arrays(self):
        cached = self.__dict__.get("_knots")
        if cached is None:
            cached = (np.array([k[0] for k in self.table]),
                      np.array([k[1] for k in self.table]))
            object.__setattr__(self, "_knots", cached)
        return cached

    def _table_interp(self, x: float) -> float:
        xs, fs = self._knot_arrays()
        # end segments extrapolate linearly, which keeps the profile convex
        i = int(np.clip(np.searchsorted(xs, x), 1, len(xs) - 1))
        x0, x1 = xs[i - 1], xs[i]
        f0, f1 = fs[i - 1], fs[i]
        return float(f0 + (f1 - f0) * (x - x0) / (x1 - x0))

    def _table_slope(self, x: float) -> float:
        xs, fs = self._knot_arrays()
        i = int(np.clip(np.searchsorted(xs, x), 1, len(xs) - 1))
        return float((fs[i] - fs[i - 1]) / (xs[i] - xs[i - 1]))


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of the discrete strict-convexity test on F."""

    is_strictly_convex: bool
    min_slope_gap: float
    violation_points: tuple
    tol: float = STRICTNESS_TOL


class DoublingResult(NamedTuple):
    is_doubling: bool
    a_estimate: float
    log_a_estimate: float


# -- public operations ----------------------------------------------------


def make_weight(family: str, params: Sequence[float] = (), table=None,
                deriv_mode: str = "analytic") -> WeightFunction:
    """Build a WeightFunction, resolving family aliases."""
    family = _FAMILY_ALIASES.get(family, family)
    tab = None
    if table is not None:
        tab = tuple((float(t), float(v)) for t, v in table)
        # JSON tables come as (t, omega) pairs; convert to (x, F) knots.
        if family == "tabulated" and tab and tab[0][0] > 0.0:
            for t, v in tab:
                if not 0.0 < t < 1.0:
                    raise ValueError(f"table abscissa t={t} outside (0, 1)")
                if v <= 0.0:
                    raise ValueError(f"table value omega={v} must be positive")
            tab = tuple((math.log(t), math.log(v)) for t, v in tab)
    return WeightFunction(family=family, params=tuple(float(p) for p in params),
                          table=tab, deriv_mode=deriv_mode)


def weight_from_knots(knots, strictify: float = 0.0) -> WeightFunction:
    """Tabulated weight directly from (x, F) knots, optionally adding
    strictify * e^x to make F strictly convex (the term is convex,
    increasing, and bounded by strictify on x < 0)."""
    params = (float(strictify),) if strictify else ()
    return WeightFunction(family="tabulated", params=params,
                          table=tuple((float(x), float(f)) for x, f in knots))


def weight_from_spec(spec: dict) -> WeightFunction:
    """Parse the JSON weight spec {"family":, "params":, "table":}."""
    if "family" not in spec:
        raise ValueError('weight spec needs a "family" field')
    return make_weight(spec["family"], spec.get("params") or (),
                       table=spec.get("table"))


def weight_to_spec(w: WeightFunction) -> dict:
    spec = {"family": w.family, "params": list(w.params)}
    if w.table is not None:
        spec["table"] = [[math.exp(x), math.exp(f)] for x, f in w.table]
    return spec


def omega_eval(w: WeightFunction, t: float) -> OmegaValue:
    """omega(t); falls back to the log value (flagged) past exp overflow."""
    lw = w.log_omega(t)
    if lw <= LOG_MAX:
        return OmegaValue(math.exp(lw), False)
    return OmegaValue(lw, True)


def log_omega_eval(w: WeightFunction, t: float) -> float:
    return w.log_omega(t)


def big_F_eval(w: WeightFunction, x: float, order: int = 0) -> float:
    """F(x) (order 0) or F'(x) (order 1); raises on non-finite results."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    val = w.big_f(x) if order == 0 else w.big_f_prime(x)
    if not math.isfinite(val):
        name = "F" if order == 0 else "F'"
        raise OverflowError(f"{name}({x}) is not finite for family {w.family!r}")
    return val


def check_log_convexity(w: WeightFunction, x_grid, tol: float = STRICTNESS_TOL) -> ConvexityReport:
    """Strict convexity of F on a grid: F' must increase between every pair
    of consecutive grid points by more than `tol`."""
    xs = np.asarray(x_grid, dtype=float)
    if xs.size < 3:
        raise ValueError("convexity grid needs at least 3 points")
    if np.any(xs >= 0.0) or np.any(np.diff(xs) <= 0.0):
        raise ValueError("convexity grid must be strictly increasing and negative")
    slopes = np.array([w.big_f_prime(float(x)) for x in xs])
    if not np.all(np.isfinite(slopes)):
        raise OverflowError("F' is not finite on the whole grid")
    gaps = np.diff(slopes)
    bad = np.nonzero(gaps <= tol)[0]
    return ConvexityReport(
        is_strictly_convex=bool(bad.size == 0),
        min_slope_gap=float(gaps.min()),
        violation_points=tuple(float(xs[i]) for i in bad),
        tol=tol,
    )


def check_doubling(w: WeightFunction, s_grid, cap: float = DOUBLING_CAP) -> DoublingResult:
    """Estimate the doubling constant sup_s omega(1-s/2)/omega(1-s).

    Computed in the log domain from s directly (never through 1 - s), so
    families with an exact ratio report it to full precision.
    """
    log_cap = math.log(cap)
    worst = -math.inf
    for s in np.asarray(s_grid, dtype=float):
        s = float(s)
        if not 0.0 < s <= 1.0:
            raise ValueError(f"s={s} outside (0, 1]")
        ratio = w.log_omega_one_minus(s / 2.0) - w.log_omega_one_minus(s)
        worst = max(worst, ratio)
    is_doubling = math.isfinite(worst) and worst < log_cap
    a_est = math.exp(worst) if worst <= LOG_MAX else math.inf
    return DoublingResult(is_doubling, a_est, worst)


def check_unbounded(w: WeightFunction, threshold: float = UNBOUNDED_LOG_THRESHOLD):
    """Heuristic unboundedness gate: log omega(1 - 1e-6) > threshold.

    Returns None (with a warning) for tabulated weights, where
    unboundedness cannot be decided from finite data.
    """
    if w.family == "tabulated":
        warnings.warn("unboundedness is not verifiable for tabulated weights",
                      stacklevel=2)
        return None
    return w.log_omega_one_minus(UNBOUNDED_PROBE_S) > threshold
