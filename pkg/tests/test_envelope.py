"""Max-modulus profiles, three-circles convexity, hull decision procedure."""

import math

import numpy as np
import pytest

import logweight as lw
from logweight.construction import ConstructionParams


class TestMaxModulus:
    def test_monomial_exact(self):
        for n in (1, 5, 12):
            f = lambda z, n=n: z**n
            for r in (0.1, 0.5, 0.9):
                assert lw.max_modulus(f, r, 64) == pytest.approx(
                    n * math.log(r), rel=1e-14)

    def test_quadratic_near_boundary(self):
        f = lambda z: z**2 + 1.0
        val = lw.max_modulus(f, 0.999999, 4096)
        assert math.exp(val) == pytest.approx(2.0, abs=1e-5)

    def test_constant(self):
        f = lambda z: np.full_like(np.asarray(z), 3.0 - 4.0j)
        for r in (0.1, 0.7):
            assert lw.max_modulus(f, r, 64) == pytest.approx(math.log(5.0))

    def test_monotone_in_radius(self):
        # maximum principle at grid resolution
        coeffs = lw.random_polynomials(1, 20, seed=5)[0]
        f = lw.polynomial_callable(coeffs)
        rs = np.linspace(0.05, 0.95, 40)
        vals = [lw.max_modulus(f, float(r), 512) for r in rs]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_angle_floor(self):
        with pytest.raises(ValueError):
            lw.max_modulus(lambda z: z, 0.5, 8)

    def test_adaptive_converges(self):
        f = lambda z: z**5 + 1.0
        val, used = lw.max_modulus_adaptive(f, 0.5)
        dense = lw.max_modulus(f, 0.5, 1 << 16)
        assert val == pytest.approx(dense, abs=1e-8)


class TestHadamard:
    def test_single_polynomial_dense_oracle(self):
        f = lambda z: z**5 + 1.0
        r_grid = np.geomspace(0.1, 0.9, 32)
        rep = lw.hadamard_check([f], r_grid, theta_count=4096)
        assert rep.passed

    def test_constant_function(self):
        f = lambda z: np.full_like(np.asarray(z), 2.0 + 1.0j)
        rep = lw.hadamard_check([f], np.geomspace(0.1, 0.9, 16), theta_count=64)
        assert rep.passed
        assert abs(rep.min_second_diff) < 1e-12

    def test_random_polynomial_sample(self):
        polys = lw.random_polynomials(25, 30, seed=7)
        fs = [lw.polynomial_callable(c) for c in polys]
        rep = lw.hadamard_check(fs, np.geomspace(0.05, 0.95, 64))
        assert rep.passed
        assert rep.min_second_diff >= -1e-7

    def test_vanishing_at_origin_rejected(self):
        f = lambda z: z
        with pytest.raises(ValueError):
            lw.hadamard_check([f], np.geomspace(0.1, 0.9, 16), theta_count=64)

    def test_grid_must_be_log_uniform(self):
        f = lambda z: z + 1.0
        with pytest.raises(ValueError):
            lw.hadamard_check([f], np.linspace(0.1, 0.9, 16), theta_count=64)


class TestEnvelope:
    def test_convex_family_zero_gap(self):
        w = lw.make_weight("ramey_ullrich")
        res = lw.log_convex_envelope(w, np.linspace(-2.0, -0.005, 2001))
        assert res.equivalent
        assert res.gap <= 1e-9

    def test_bump_gap_equals_height(self):
        # height-3 bump at x* = -1; the grid steps by 0.01 so x* is a
        # sample and the hull bridges the bump support. The measured gap
        # is the height minus the chord sag, well inside 1e-3.
        w = lw.make_weight("perturbed_bump")  # (3.0, -1.0, 0.02)
        res = lw.log_convex_envelope(w, np.linspace(-2.0, -0.01, 200))
        assert 2.999 <= res.gap <= 3.001
        assert res.equivalent  # 3 < 50
        assert res.gap_witness == pytest.approx(-1.0, abs=1e-9)

    def test_unbounded_sawtooth_not_equivalent(self):
        w = lw.make_weight("perturbed_unbounded_sawtooth")
        res = lw.log_convex_envelope(w, np.linspace(-2.0, -0.005, 2001))
        assert res.gap > 10.0
        assert not res.equivalent

    def test_hull_idempotent(self):
        w = lw.make_weight("perturbed_bump")
        grid = np.linspace(-2.0, -0.01, 400)
        res = lw.log_convex_envelope(w, grid)
        hull_w = lw.hull_weight(res)
        res2 = lw.log_convex_envelope(hull_w, grid)
        assert res2.gap <= 1e-12

    def test_hull_slopes_nondecreasing(self):
        w = lw.make_weight("perturbed_unbounded_sawtooth")
        res = lw.log_convex_envelope(w, np.linspace(-2.0, -0.01, 1001))
        knots = res.hull_knots
        slopes = [(y1 - y0) / (x1 - x0)
                  for (x0, y0), (x1, y1) in zip(knots, knots[1:])]
        assert all(b >= a for a, b in zip(slopes, slopes[1:]))

    def test_hull_below_samples(self):
        w = lw.make_weight("perturbed_sawtooth")
        grid = np.linspace(-2.0, -0.05, 501)
        res = lw.log_convex_envelope(w, grid)
        hull_vals = res.hull_value(grid)
        f_vals = np.array([w.big_f(float(x)) for x in grid])
        assert np.all(f_vals - hull_vals >= -1e-12)

    def test_grid_validation(self):
        w = lw.make_weight("ramey_ullrich")
        with pytest.raises(ValueError):
            lw.log_convex_envelope(w, [-1.0, -0.5])
        with pytest.raises(ValueError):
            lw.log_convex_envelope(w, [-1.0, -1.2, -0.5])


class TestEquivalenceConstants:
    def test_identical(self):
        u = np.array([1.0, 2.0, 3.0])
        res = lw.equivalence_constants(u, u)
        assert res.c1 == pytest.approx(1.0) and res.c2 == pytest.approx(1.0)
        assert not res.unbounded

    def test_constant_multiple(self):
        u = np.array([1.0, 2.0, 3.0])
        res = lw.equivalence_constants(u, 3.0 * u)
        assert res.c1 == pytest.approx(3.0, rel=1e-14)
        assert res.c2 == pytest.approx(3.0, rel=1e-14)

    def test_unbounded_flag(self):
        u = np.array([1.0, 1.0])
        v = np.array([1.0, math.exp(60.0)])
        assert lw.equivalence_constants(u, v, cap_log=50.0).unbounded

    def test_positive_required(self):
        with pytest.raises(ValueError):
            lw.equivalence_constants([1.0, -1.0], [1.0, 1.0])

    def test_log_inputs(self):
        res = lw.equivalence_constants([0.0, 0.0], [2.0, 5.0], log_inputs=True)
        assert res.log_c1 == 2.0 and res.log_c2 == 5.0


class TestRegularizationPathway:
    def test_hull_fed_construction_degrades_by_at_most_gap(self):
        # A mild bump (height 1/2) spoils convexity; the hull removes it.
        # Building from the strictified hull and sandwiching against the
        # original weight costs at most the gap on the lower side and the
        # strictifier on the upper side.
        wb = lw.make_weight("perturbed_bump", [0.5, -1.0, 0.02])
        grid = -np.geomspace(2.0, 1e-5, 2001)
        env = lw.log_convex_envelope(wb, grid)
        assert env.gap <= 0.5 + 1e-6
        hull_w = lw.hull_weight(env, strictify=0.05)
        state = lw.run_construction(
            hull_w, ConstructionParams(x0=math.log(0.95), h=2.0, t_stop=0.999))
        pair = lw.split_parity(state)
        t_grid = np.linspace(0.9501, min(pair.t_last, 0.998), 400)
        rep = lw.sandwich_check(pair, wb, t_grid, theta_count=64)
        assert rep.lower_margin >= -(env.gap + 0.2)
        assert rep.upper_margin >= -0.06
