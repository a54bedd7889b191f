"""Unit-ball generalization over pluggable homogeneous polynomial families.

A family supplies, for each degree n, Q homogeneous polynomials W_q[n] on
C^d with sup norm at most 1 on the unit sphere and max_q |W_q[n]| >= delta
everywhere on the sphere.  Replacing the monomials z^{e_k} of the disk
construction by W_q[e_k] (and running the induction with the larger gap
h_for_delta(delta)) produces 2Q functions whose modulus sum dominates
(2 delta / 5) e^{-h} omega(|z|) outside the inner ball |z| <= t0; adding
the constant function 1 covers the inside, for 2Q + 1 functions total.

Family existence is not constructed here: providers are supplied and
their claims verified numerically on deterministic sphere samples.  The
d = 1 monomial family reproduces the disk pipeline exactly; the d = 2
coordinate family ships as a negative example (it has no uniform delta).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .construction import ConstructionState, h_for_delta
from .numerics import NEG_INF, logsumexp
from .series import ScaledComplex
from .weight_model import WeightFunction

SUP_NORM_SLACK = 1e-9
MIN_OF_MAX_SLACK = 1e-9
HOMOGENEITY_TOL = 1e-10
BALL_SLACK = 1e-9

_EPS = float(np.finfo(float).eps)


def _degree_noise(n: int) -> float:
    """Relative noise floor of evaluating a degree-n homogeneous polynomial
    in float64: powering accumulates O(n eps), so conditions cannot be
    certified tighter than this for very large degrees.  At desk-scale
    degrees (n below ~1e6) the fixed tolerances above dominate."""
    return 8.0 * n * _EPS


@dataclass(frozen=True)
class PolynomialFamily:
    """Provider of homogeneous polynomials; provider(q, n, z) evaluates
    W_q[n] at a point z of C^d (1-based q)."""

    d: int
    Q: int
    delta_claimed: float
    provider: Callable[[int, int, np.ndarray], complex]
    name: str = "custom"

    def __post_init__(self):
        if self.d < 1 or self.Q < 1:
            raise ValueError("d and Q must be positive")
        if not 0.0 < self.delta_claimed <= 1.0:
            raise ValueError("delta_claimed must lie in (0, 1]")

    def eval(self, q: int, n: int, z: np.ndarray) -> complex:
        try:
            return complex(self.provider(q, n, z))
        except Exception as exc:  # surface degree/index context
            raise RuntimeError(
                f"family {self.name!r} provider failed at q={q}, n={n}") from exc


def monomial_family() -> PolynomialFamily:
    """d = 1, Q = 1, W_1[n](z) = z^n: the family that reduces the ball
    pipeline to the disk one, with delta = 1."""
    return PolynomialFamily(
        d=1, Q=1, delta_claimed=1.0,
        provider=lambda q, n, z: complex(z[0]) ** n,
        name="monomial_d1",
    )


def coordinate_family_d2(delta_claimed: float = 0.5) -> PolynomialFamily:
    """d = 2, Q = 2, W_q[n](z) = z_q^n: a deliberate negative example.
    At balanced points |z_1| = |z_2| = 1/sqrt(2) the max drops like
    2^{-n/2}, so no uniform delta exists and verify_family must reject
    the claim for large enough degree."""
    return PolynomialFamily(
        d=2, Q=2, delta_claimed=delta_claimed,
        provider=lambda q, n, z: complex(z[q - 1]) ** n,
        name="coordinate_d2",
    )


_BUILTIN_FAMILIES = {
    "monomial_d1": monomial_family,
    "coordinate_d2": coordinate_family_d2,
}


def provider_from_interleaved(fn: Callable) -> Callable:
    """Adapt an external plugin f(q, n, coords) -> complex, where coords
    are interleaved real pairs [re_1, im_1, ..., re_d, im_d], to the
    complex-vector provider signature used internally."""
    def provider(q: int, n: int, z: np.ndarray) -> complex:
        coords = np.empty(2 * len(z))
        coords[0::2] = np.real(z)
        coords[1::2] = np.imag(z)
        return complex(fn(q, n, coords))
    return provider


def family_from_manifest(manifest: dict) -> PolynomialFamily:
    """Build a builtin family from {"d":, "Q":, "delta":, "kind":}."""
    kind = manifest.get("kind")
    if kind not in _BUILTIN_FAMILIES:
        raise ValueError(f"unknown builtin family kind {kind!r}")
    fam = _BUILTIN_FAMILIES[kind]()
    if "delta" in manifest and manifest["delta"] is not None:
        fam = PolynomialFamily(d=fam.d, Q=fam.Q,
                               delta_claimed=float(manifest["delta"]),
                               provider=fam.provider, name=fam.name)
    for key, val in (("d", fam.d), ("Q", fam.Q)):
        if key in manifest and int(manifest[key]) != val:
            raise ValueError(f"manifest {key}={manifest[key]} does not match "
                             f"builtin {kind!r} ({val})")
    return fam


def sphere_points(d: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic points on the unit sphere of C^d.

    A scrambled Sobol sequence mapped through the Gaussian inverse CDF and
    normalized covers the sphere uniformly; a small structured prefix
    (coordinate vectors and balanced-modulus vectors, where coordinate
    families are extremal) is always included so that degenerate families
    are measured at their worst points exactly.
    """
    if count < 2 * d + 2:
        raise ValueError(f"need at least {2 * d + 2} sphere samples for d={d}")
    structured = []
    for q in range(d):
        v = np.zeros(d, dtype=complex)
        v[q] = 1.0
        structured.append(v)
        v = np.zeros(d, dtype=complex)
        v[q] = cmath.exp(0.5j * math.pi / (q + 1))
        structured.append(v)
    structured.append(np.full(d, 1.0 / math.sqrt(d), dtype=complex))
    phases = np.exp(2j * math.pi * np.arange(d) / max(d, 2))
    structured.append(phases / math.sqrt(d))
    structured = np.asarray(structured)

    n_rand = count - len(structured)
    sob = qmc.Sobol(2 * d, scramble=True, seed=seed)
    m = 1 << max(1, math.ceil(math.log2(max(n_rand, 1))))
    raw = sob.random(m)[:n_rand]
    g = ndtri(np.clip(raw, 1e-12, 1.0 - 1e-12))
    z = g[:, :d] + 1j * g[:, d:]
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0] = 1.0
    z = z / norms[:, None]
    return np.concatenate([structured, z], axis=0)


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    sup_norm: float
    min_of_max: float
    homogeneity_residual: float
    passed: bool
    sup_ok: bool
    min_ok: bool
    homogeneity_ok: bool


@dataclass(frozen=True)
class FamilyReport:
    family: str
    delta_claimed: float
    sphere_samples: int
    per_degree: tuple
    passed: bool

    def degree(self, n: int) -> DegreeReport:
        for rep in self.per_degree:
            if rep.degree == n:
                return rep
        raise KeyError(n)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "delta_claimed": self.delta_claimed,
            "sphere_samples": self.sphere_samples,
            "passed": self.passed,
            "per_degree": [
                {
                    "degree": r.degree,
                    "sup_norm": r.sup_norm,
                    "min_of_max": r.min_of_max,
                    "homogeneity_residual": r.homogeneity_residual,
                    "passed": r.passed,
                }
                for r in self.per_degree
            ],
        }


def _homogeneity_residual(fam: PolynomialFamily, n: int, pts: np.ndarray) -> float:
    """Relative residual of W(lambda z) = lambda^n W(z) at probe scalings.

    lambda = i is exact for any degree (i^n cycles through 4 values); a
    contracting probe is added only while |lambda|^n stays representable.
    """
    probes = [1j]
    if n * abs(math.log(0.7)) < 600.0:
        probes.append(0.7 + 0.0j)
        probes.append(0.9 * cmath.exp(1j * math.pi / 3.0))
    worst = 0.0
    for z in pts[: min(8, len(pts))]:
        for q in range(1, fam.Q + 1):
            base = fam.eval(q, n, z)
            for lam in probes:
                lhs = fam.eval(q, n, lam * z)
                rhs = lam ** n * base
                denom = max(abs(rhs), 1e-30)
                worst = max(worst, abs(lhs - rhs) / denom)
    return worst


def verify_family(fam: PolynomialFamily, degrees, sphere_samples: int = 256,
                  seed: int = 0) -> FamilyReport:
    """Measure the family's claims per degree on deterministic samples:
    sup norm <= 1, min over the sphere of max_q |W_q[n]| >= delta, and
    homogeneity."""
    if sphere_samples < 64:
        raise ValueError("sphere_samples must be at least 64")
    pts = sphere_points(fam.d, sphere_samples, seed=seed)
    # Float sphere points carry norms 1 + O(eps); a degree-n homogeneous
    # polynomial amplifies that to (1 + O(eps))^n, which swamps the 1e-9
    # tolerances once n ~ 1e7.  Rescaling by ||zeta||^n (in log form)
    # measures the value at the exact sphere point zeta/||zeta||.
    log_norms = 0.5 * np.log1p(np.sum(np.abs(pts) ** 2, axis=1) - 1.0)
    reports = []
    for n in degrees:
        n = int(n)
        mags = np.empty((fam.Q, len(pts)))
        for q in range(1, fam.Q + 1):
            for i, z in enumerate(pts):
                a = abs(fam.eval(q, n, z))
                mags[q - 1, i] = (math.exp(math.log(a) - n * log_norms[i])
                                  if a > 0.0 else 0.0)
        sup_norm = float(mags.max())
        min_of_max = float(mags.max(axis=0).min())
        resid = _homogeneity_residual(fam, n, pts)
        noise = _degree_noise(n)
        sup_ok = sup_norm <= 1.0 + max(SUP_NORM_SLACK, noise)
        min_ok = min_of_max >= fam.delta_claimed - max(MIN_OF_MAX_SLACK, noise)
        hom_ok = resid <= max(HOMOGENEITY_TOL, noise)
        reports.append(DegreeReport(
            degree=n, sup_norm=sup_norm, min_of_max=min_of_max,
            homogeneity_residual=resid,
            passed=sup_ok and min_ok and hom_ok,
            sup_ok=sup_ok, min_ok=min_ok, homogeneity_ok=hom_ok,
        ))
    return FamilyReport(
        family=fam.name,
        delta_claimed=fam.delta_claimed,
        sphere_samples=sphere_samples,
        per_degree=tuple(reports),
        passed=all(r.passed for r in reports),
    )


@dataclass(frozen=True)
class BallFunction:
    """One assembled function: sum_j exp(log_a_j) W_q[e_j], or the
    constant 1."""

    q: int  # 0 for the constant function
    terms: tuple  # ((log_a, e), ...), empty for the constant
    is_one: bool = False


@dataclass(frozen=True)
class BallFunctionSystem:
    functions: tuple  # 2Q + 1 BallFunction values, the last is constant 1
    family: PolynomialFamily
    state: ConstructionState

    @property
    def Q(self) -> int:
        return self.family.Q

    def eval(self, index: int, t: float, zeta: np.ndarray) -> ScaledComplex:
        """Evaluate function `index` (0-based) at z = t * zeta, |zeta| = 1.

        Homogeneity turns each term into exp(log_a + e log t) W_q[e](zeta),
        so the radial scale separates exactly and only the largest term
        magnitude is exponentiated.
        """
        func = self.functions[index]
        if func.is_one:
            return ScaledComplex.normalize(1.0 + 0j, 0.0)
        if not 0.0 <= t < 1.0:
            raise ValueError(f"t={t} outside [0, 1)")
        if t == 0.0 or not func.terms:
            # every term has e >= 1; a one-step construction leaves the
            # even-parity functions empty
            return ScaledComplex(0j, NEG_INF)
        log_t = math.log(t)
        vals = [self.family.eval(func.q, e, zeta) for _, e in func.terms]
        logs = []
        for (log_a, e), v in zip(func.terms, vals):
            a = abs(v)
            logs.append(log_a + e * log_t + (math.log(a) if a > 0 else NEG_INF))
        l_max = max(logs)
        if l_max == NEG_INF:
            return ScaledComplex(0j, NEG_INF)
        total = 0j
        for lv, v in zip(logs, vals):
            if lv - l_max < -200.0:
                continue
            total += math.exp(lv - l_max) * (v / abs(v))
        return ScaledComplex.normalize(total, l_max)

    def log_modulus_sum(self, t: float, zeta: np.ndarray,
                        include_constant: bool = False) -> float:
        logs = [self.eval(i, t, zeta).log_abs
                for i in range(len(self.functions) - (0 if include_constant else 1))]
        return logsumexp(logs)

    def slice_callable(self, index: int, zeta: np.ndarray, shift: int = 0):
        """The slice lam -> f(lam * zeta) as a one-variable callable.

        Homogeneity turns the slice into a lacunary series in lam with
        coefficients a_j W_q[e_j](zeta), so the disk-side machinery (for
        example the three-circles convexity check) applies directly to
        ball functions through their slices.  A nonzero `shift` divides by
        lam^shift termwise; shifting by the least exponent makes the slice
        nonvanishing at 0, as the convexity check requires.
        """
        func = self.functions[index]
        if func.is_one:
            return lambda lam: ScaledComplex.normalize(1.0 + 0j, 0.0)
        if not func.terms:
            return lambda lam: ScaledComplex(0j, NEG_INF)
        ws = [self.family.eval(func.q, e, zeta) for _, e in func.terms]

        def slice_fn(lam: complex) -> ScaledComplex:
            lam = complex(lam)
            if abs(lam) >= 1.0:
                raise ValueError("slice argument must lie in the open unit disk")
            if lam == 0:
                for (log_a, e), wv in zip(func.terms, ws):
                    if e == shift and wv != 0:
                        return ScaledComplex.normalize(wv / abs(wv), log_a + math.log(abs(wv)))
                return ScaledComplex(0j, NEG_INF)
            log_r = math.log(abs(lam))
            arg = cmath.phase(lam)
            logs = [log_a + (e - shift) * log_r
                    + (math.log(abs(wv)) if wv != 0 else NEG_INF)
                    for (log_a, e), wv in zip(func.terms, ws)]
            l_max = max(logs)
            if l_max == NEG_INF:
                return ScaledComplex(0j, NEG_INF)
            total = 0j
            for (log_a, e), wv, lv in zip(func.terms, ws, logs):
                if lv - l_max < -200.0:
                    continue
                phase = cmath.exp(1j * math.fmod((e - shift) * arg, 2.0 * math.pi))
                total += math.exp(lv - l_max) * phase * (wv / abs(wv))
            return ScaledComplex.normalize(total, l_max)

        return slice_fn


def build_ball_functions(state: ConstructionState, fam: PolynomialFamily,
                         sphere_samples: int = 256, seed: int = 0,
                         family_report: Optional[FamilyReport] = None) -> BallFunctionSystem:
    """Assemble the 2Q + 1 functions from a construction state.

    Preconditions: the state was built with h >= h_for_delta(delta) and the
    family passes verify_family on every degree the state uses (a report
    can be passed in to skip re-measuring).
    """
    need_h = h_for_delta(fam.delta_claimed)
    if state.params.h < need_h - 1e-12:
        raise ValueError(
            f"state used h={state.params.h} but delta={fam.delta_claimed} "
            f"needs h >= {need_h}")
    if family_report is None:
        family_report = verify_family(fam, state.es, sphere_samples, seed=seed)
    else:
        have = {r.degree for r in family_report.per_degree}
        missing = [e for e in state.es if e not in have]
        if missing:
            raise ValueError(f"family report lacks degrees {missing[:5]}")
    if not family_report.passed:
        raise ValueError(
            f"family {fam.name!r} fails its claimed conditions; see report")

    funcs = []
    for s in (0, 1):
        # step indices k = 2j + 1 + s, i.e. odd for s=0, even for s=1
        terms = tuple((line.log_a, e)
                      for i, (line, e) in enumerate(zip(state.lines, state.es))
                      if (i + 1) % 2 == (1 - s))
        for q in range(1, fam.Q + 1):
            funcs.append(BallFunction(q=q, terms=terms))
    funcs.append(BallFunction(q=0, terms=(), is_one=True))
    return BallFunctionSystem(functions=tuple(funcs), family=fam, state=state)


@dataclass(frozen=True)
class BallReport:
    passed: bool
    lower_margin: float
    witness_t: Optional[float]
    witness_point: Optional[int]
    c_measured: float
    log_c_measured: float
    t_count: int
    sphere_samples: int
    delta: float
    h: float

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "lower_margin": self.lower_margin,
            "witness_t": self.witness_t,
            "witness_point": self.witness_point,
            "c_measured": self.c_measured,
            "log_c_measured": self.log_c_measured,
            "t_count": self.t_count,
            "sphere_samples": self.sphere_samples,
            "delta": self.delta,
            "h": self.h,
        }


def ball_lower_bound_check(sys: BallFunctionSystem, w: WeightFunction,
                           t_grid, sphere_samples: int = 256,
                           seed: int = 0) -> BallReport:
    """Certify (2 delta / 5) e^{-h} omega(t) < sum_{m<=2Q} |f_m(t zeta)|
    over the product of the radius grid and deterministic sphere samples.

    Also measures the constant C of omega(|z|) <= C sum_{m<=2Q+1} |f_m(z)|
    over the same grid extended into the inner ball |z| <= t0, where the
    constant function takes over.
    """
    state = sys.state
    ts = np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("empty radius grid")
    if ts.min() <= state.t0 or ts.max() > state.t_last:
        raise ValueError(
            f"radius grid must lie in (t0, t_last] = ({state.t0}, {state.t_last}]")
    pts = sphere_points(sys.family.d, sphere_samples, seed=seed)
    delta = sys.family.delta_claimed
    h = state.params.h
    log_bound_const = math.log(0.4 * delta) - h

    worst = math.inf
    wit_t = None
    wit_i = None
    log_c = -math.inf
    for t in ts:
        t = float(t)
        log_w = w.log_omega(t)
        bound = log_bound_const + log_w
        for i, zeta in enumerate(pts):
            s_log = sys.log_modulus_sum(t, zeta, include_constant=False)
            margin = (s_log - bound) / max(1.0, abs(s_log), abs(bound))
            if margin < worst:
                worst = margin
                wit_t = t
                wit_i = i
            s_all = logsumexp([s_log, 0.0])  # constant contributes log 1
            log_c = max(log_c, log_w - s_all)

    # Inner ball: the constant function dominates once omega is capped.
    for t in np.linspace(0.0, state.t0, 16):
        t = float(t)
        log_w = w.log_omega(t)
        for i, zeta in enumerate(pts[: min(16, len(pts))]):
            s_log = sys.log_modulus_sum(t, zeta, include_constant=False) if t > 0 else NEG_INF
            s_all = logsumexp([s_log, 0.0])
            log_c = max(log_c, log_w - s_all)

    return BallReport(
        passed=bool(worst >= -BALL_SLACK),
        lower_margin=float(worst),
        witness_t=wit_t,
        witness_point=wit_i,
        c_measured=math.exp(log_c) if log_c <= 709.0 else math.inf,
        log_c_measured=float(log_c),
        t_count=int(ts.size),
        sphere_samples=sphere_samples,
        delta=delta,
        h=h,
    )
