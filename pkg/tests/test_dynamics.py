import math

import numpy as np
import pytest

from per1lab import dynamics
from per1lab.angles import RationalAngle, zero_preimage_angles
from per1lab.errors import DegenerateParameter, WindowTooLarge

SQRT3 = math.sqrt(3.0)


def test_map_fixes_origin_with_unit_multiplier():
    for a in (0.3, 2.0, -1.5 + 0.7j, 3j):
        assert dynamics.evaluate(a, 0.0) == 0.0
        assert dynamics.derivative(a, 0.0) == 1.0


class TestCriticalPoints:
    def test_double_root_at_sqrt3(self):
        cp = dynamics.critical_points(SQRT3)
        assert cp.c_plus == cp.c_minus
        assert abs(cp.c_plus - (-SQRT3 / 3.0)) < 1e-15
        with pytest.raises(DegenerateParameter):
            dynamics.critical_points(SQRT3, require_distinct=True)

    def test_a_equals_two(self):
        cp = dynamics.critical_points(2.0)
        assert abs(cp.c_plus - (-1.0 / 3.0)) < 1e-14
        assert abs(cp.c_minus - (-1.0)) < 1e-14

    def test_a_equals_minus_two(self):
        cp = dynamics.critical_points(-2.0)
        assert abs(cp.c_plus - (1.0 / 3.0)) < 1e-14
        assert abs(cp.c_minus - 1.0) < 1e-14

    def test_vieta_and_residual_random(self):
        rng = np.random.default_rng(7)
        n = 10000
        a = rng.uniform(-4, 4, n) + 1j * rng.uniform(-4, 4, n)
        # keep away from the segment [-sqrt3, sqrt3]
        a = a[np.abs(a.imag) > 1e-3]
        for aa in a[:2000]:
            cp = dynamics.critical_points(aa)
            for c in (cp.c_plus, cp.c_minus):
                assert abs(dynamics.derivative(aa, c)) < 1e-11
            assert abs(cp.c_plus + cp.c_minus + 2 * aa / 3) < 1e-12 * max(1, abs(aa))
            assert abs(cp.c_plus * cp.c_minus - 1.0 / 3.0) < 1e-12 * max(1, abs(aa))

    def test_branch_continuity_on_circle(self):
        n = 10000
        prev = None
        for k in range(n + 1):
            a = 2.0 * np.exp(2j * np.pi * k / n)
            c = dynamics.critical_points(a).c_plus
            if prev is not None:
                assert abs(c - prev) < 1e-2
            prev = c

    def test_oddness(self):
        for a in (2.3 + 0.4j, -1.1 + 2j, 0.5 - 3j, 4.0):
            cp = dynamics.critical_points(a)
            cm = dynamics.critical_points(-a)
            assert abs(cm.c_plus + cp.c_plus) < 1e-13 * max(1, abs(a))
            assert abs(cm.c_minus + cp.c_minus) < 1e-13 * max(1, abs(a))

    def test_asymptotic_c_minus(self):
        for a in (1e3, 1e3j, -700 + 400j):
            c = dynamics.critical_points(a).c_minus
            assert abs(c / (-2 * a / 3) - 1) < 1e-5

    def test_upper_half_plane_limit_on_cut(self):
        for x in (0.5, -0.5, 1.2, -1.6):
            lim = dynamics.critical_points(x + 1e-12j).c_plus
            val = dynamics.critical_points(x).c_plus
            assert abs(lim - val) < 1e-6
            assert val.imag > 0


class TestCriticalValues:
    def test_a2_free_value_vanishes(self):
        vp, vm = dynamics.critical_values(2.0)
        assert abs(vm) < 1e-14

    def test_double_value_at_sqrt3(self):
        vp, vm = dynamics.critical_values(SQRT3)
        assert abs(vp - vm) < 1e-14
        assert abs(vp - (-SQRT3 / 9.0)) < 1e-14

    def test_asymptotics(self):
        for a in (1e3, 1e3 * 1j, 1e3 * np.exp(0.7j)):
            _, vm = dynamics.critical_values(a)
            assert abs(27.0 * vm / (4.0 * a ** 3) - 1.0) < 1e-5


class TestEscape:
    def test_immediate_escape(self):
        v = dynamics.escape_classify(10.0, 100.0, 10)
        assert v.escaped and v.n == 1

    def test_fixed_point_bounded(self):
        assert not dynamics.escape_classify(1.0, 0.0, 500).escaped

    def test_free_critical_escapes_at_a4(self):
        c = dynamics.critical_points(4.0).c_minus
        v = dynamics.escape_classify(4.0, c, 200)
        assert v.escaped and v.n <= 200

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            small = dynamics.escape_classify(a, z, 30)
            big = dynamics.escape_classify(a, z, 1000)
            if small.escaped:
                assert big.escaped and big.n == small.n


class TestGreen:
    def test_bounded_orbit_zero(self):
        assert dynamics.green_function(1.0, 0.0) == 0.0

    def test_leading_order(self):
        g = dynamics.green_function(10.0, 100.0, tol=1e-12)
        assert abs(g - math.log(100.0)) < 0.1

    def test_functional_equation(self):
        rng = np.random.default_rng(11)
        tol = 1e-12
        for _ in range(50):
            a = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            z = complex(rng.uniform(5, 40), rng.uniform(-20, 20))
            g = dynamics.green_function(a, z, tol=tol)
            gf = dynamics.green_function(a, dynamics.evaluate(a, z), tol=tol)
            if g > 0:
                assert abs(gf - 3 * g) < 3 * tol + 1e-12


class TestMisiurewicz:
    def test_depth0_exactly_pm2(self):
        roots = dynamics.solve_misiurewicz_parabolic(0, ((-3, -3), (3, 3)))
        assert len(roots) == 2
        assert abs(roots[0] - (-2)) < 1e-12
        assert abs(roots[1] - 2) < 1e-12

    def test_depth1_residuals(self):
        roots = dynamics.solve_misiurewicz_parabolic(1)
        assert roots, "no depth-1 parameters found"
        for a in roots:
            c, zn, zn1 = dynamics._orbit_residuals(a, 1)
            assert abs(zn1) < 1e-10
            assert abs(zn) > 1e-4

    def test_depth1_matches_independent_resultant_oracle(self):
        # oracle: sympy resultant of f^2(c) against the critical equation
        sympy = pytest.importorskip("sympy")
        a, c = sympy.symbols("a c")
        f = lambda z: z ** 3 + a * z ** 2 + z
        res = sympy.resultant(sympy.expand(f(f(c))), 3 * c ** 2 + 2 * a * c + 1, c)
        oracle = sorted((complex(r) for r in sympy.Poly(res, a).nroots(n=20)),
                        key=lambda z: (round(z.real, 8), round(z.imag, 8)))
        # drop the depth-0 roots +-2
        oracle = [r for r in oracle if min(abs(r - 2), abs(r + 2)) > 1e-8]
        roots = dynamics.solve_misiurewicz_parabolic(1)
        assert len(roots) == len(oracle) == 6
        for r, o in zip(roots, oracle):
            assert abs(r - o) < 1e-9

    def test_depth1_s_quadrant_root_frozen_value(self):
        # frozen from the resultant oracle above
        a1 = 1.798214764766901 + 0.6012821769956594j
        roots = dynamics.solve_misiurewicz_parabolic(1)
        assert min(abs(r - a1) for r in roots) < 1e-9

    def test_window_filter_and_budget(self):
        roots = dynamics.solve_misiurewicz_parabolic(1, ((0.0, 0.0), (3.0, 3.0)))
        assert all(r.real >= -1e-12 and r.imag >= -1e-12 for r in roots)
        with pytest.raises(WindowTooLarge):
            dynamics.solve_misiurewicz_parabolic(7)

    def test_capture_centers_depth0_special_solutions(self):
        # v_minus(a) = c_plus(a) has exactly four solutions +-s0, +-conj(s0)
        sols = dynamics.solve_capture_centers(0)
        assert len(sols) == 4
        s_quad = [z for z in sols if z.real > 0 and z.imag > 0]
        assert len(s_quad) == 1
        s0 = s_quad[0]
        mirror = {(-1, -1), (1, -1), (-1, 1), (1, 1)}
        got = {(int(np.sign(z.real)), int(np.sign(z.imag))) for z in sols}
        assert got == mirror
        cp = dynamics.critical_points(s0)
        assert abs(dynamics.evaluate(s0, cp.c_minus) - cp.c_plus) < 1e-10


class TestRationalAngle:
    def test_reduction_and_maps(self):
        t = RationalAngle(2, 6)
        assert (t.num, t.den) == (1, 3)
        assert t.triple() == RationalAngle(0, 1)
        assert RationalAngle(1, 7).double() == RationalAngle(2, 7)
        assert -RationalAngle(1, 3) == RationalAngle(2, 3)

    def test_tripling_exactness_random(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            num = int(rng.integers(0, 1000))
            den = int(rng.integers(1, 1000))
            t = RationalAngle(num, den)
            assert t.triple() == RationalAngle(3 * num, den)
            assert t.double() == RationalAngle(2 * num, den)

    def test_zero_preimages(self):
        angles = zero_preimage_angles(2)
        assert len(angles) == 9
        assert all(t.triple().triple() == RationalAngle(0, 1) for t in angles)
