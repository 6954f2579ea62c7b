import cmath
import json
import math

import numpy as np
import pytest

from per1lab import boettcher, dynamics
from per1lab.angles import RationalAngle
from per1lab.errors import NotEscaping, NotInHInfinity

A1_DEPTH1 = 1.798214764766901 + 0.6012821769956594j  # S-quadrant depth-1 root


class TestBoettcherFunction:
    def test_normalization_at_infinity(self):
        z = 1e6
        assert abs(boettcher.boettcher(1.0, z) / z - 1.0) < 1e-5

    def test_functional_equation_random(self):
        rng = np.random.default_rng(2)
        a = 2.0 + 1.0j
        worst = 0.0
        for _ in range(100):
            z = complex(rng.uniform(10, 100), rng.uniform(-50, 50))
            phi = boettcher.boettcher(a, z)
            phif = boettcher.boettcher(a, dynamics.evaluate(a, z))
            worst = max(worst, abs(phif - phi ** 3) / abs(phi ** 3))
        assert worst < 1e-9

    def test_matches_green_function(self):
        rng = np.random.default_rng(3)
        for a in (1.0, 2.0 + 1.0j, 3.0j):
            for _ in range(20):
                z = complex(rng.uniform(8, 60), rng.uniform(-30, 30))
                g = dynamics.green_function(a, z, tol=1e-13)
                assert abs(math.log(abs(boettcher.boettcher(a, z))) - g) < 1e-9

    def test_not_escaping(self):
        with pytest.raises(NotEscaping):
            boettcher.boettcher(1.0, -0.05)


class TestPhiInfty:
    def test_asymptotic(self):
        for a, tol in ((1000.0, 1e-3), (1000.0j, 1e-3), (100.0, 1e-2)):
            v = boettcher.phi_infty(a)
            assert abs(v / (4.0 * a ** 3 / 27.0) - 1.0) < tol

    def test_degree_three_winding(self):
        assert boettcher.phi_infty_winding(50.0, samples=360) == 3

    def test_real_positive_at_a4(self):
        v = boettcher.phi_infty(4.0)
        assert abs(v.imag) < 1e-12
        assert v.real > 1.0

    def test_not_in_h_infinity(self):
        with pytest.raises(NotInHInfinity):
            boettcher.phi_infty(1.0)


class TestDynamicalRays:
    def test_angle0_at_a2_real_decreasing_to_zero(self):
        tr = boettcher.trace_dynamical_ray(2.0, RationalAngle(0, 1), log_r_min=1e-10)
        pts = [s.point for s in tr.samples]
        assert all(abs(p.imag) < 1e-10 for p in pts)
        assert all(p.real > 0 for p in pts)
        rs = [s.potential for s in tr.samples]
        assert all(x > y for x, y in zip(rs, rs[1:]))
        assert tr.landing.landed
        assert abs(tr.landing.point) < 5e-3

    def test_wake_parameter_both_rays_land_at_zero(self):
        for num, den in ((0, 1), (1, 2)):
            tr = boettcher.trace_dynamical_ray(2.0j, RationalAngle(num, den),
                                               log_r_min=1e-12)
            assert tr.landing.landed
            assert abs(tr.landing.point) < 5e-3

    def test_triple_cover_consistency(self):
        # point at potential r^3 on the 3t-ray equals f(point at r on t-ray)
        a = 2.0 + 1.0j
        t = RationalAngle(1, 9)
        tr = boettcher.trace_dynamical_ray(a, t, r_min=1.05, r_start=50.0)
        tr3 = boettcher.trace_dynamical_ray(a, t.triple(), r_min=1.05, r_start=200.0)
        worst = 1.0
        for s in tr.samples[:12]:
            target_r = s.potential ** 3
            img = dynamics.evaluate(a, s.point)
            best = min(abs(p.point - img) + abs(p.potential - target_r)
                       for p in tr3.samples)
            # compare against the exactly-solved point at that potential
            zt, _ = boettcher._dyn_ray_newton(
                a, 3.0 * math.log(s.potential), t.triple().turns(), img,
                boettcher._comfort_log_potential(a))
            assert zt is not None
            worst = min(worst, 1.0)
            assert abs(zt - img) < 1e-8

    def test_jsonl_records(self):
        tr = boettcher.trace_dynamical_ray(2.0, RationalAngle(0, 1), r_min=1.5,
                                           r_start=8.0)
        recs = list(tr.records())
        assert all(json.dumps(r) for r in recs)
        assert recs[-1]["landing"] in ("landed", "crashed", "truncated")
        body = recs[:-1]
        assert all(set(r) == {"angle_num", "angle_den", "quadrant", "r", "re", "im"}
                   for r in body)
        rs = [r["r"] for r in body]
        assert all(x > y for x, y in zip(rs, rs[1:]))


class TestParameterRays:
    def test_angle0_S_real_and_lands_at_2(self):
        tr = boettcher.trace_parameter_ray("S", RationalAngle(0, 1), log_r_min=1e-9)
        assert all(abs(s.point.imag) < 1e-10 for s in tr.samples)
        assert tr.landing.point is not None
        assert abs(tr.landing.point - 2.0) < 1e-3

    def test_angle_half_S_lands_near_zero(self):
        tr = boettcher.trace_parameter_ray("S", RationalAngle(1, 2), r_min=1 + 1e-6)
        assert tr.landing.point is not None
        assert abs(tr.landing.point) < 5e-2

    def test_angle_third_S_lands_at_depth1_root(self):
        tr = boettcher.trace_parameter_ray("S", RationalAngle(1, 3), log_r_min=1e-9)
        assert tr.landing.point is not None
        assert abs(tr.landing.point - A1_DEPTH1) < 1e-3

    def test_seed_quadrants(self):
        # t = 1/8 has branches in S, iS, -S but none in -iS
        for q, quadrant_sign in (("S", (1, 1)), ("iS", (-1, 1)), ("-S", (-1, -1))):
            seed = boettcher.parameter_ray_seed(q, RationalAngle(1, 8))
            sx = 1 if seed.real >= 0 else -1
            sy = 1 if seed.imag >= 0 else -1
            assert (sx, sy) == quadrant_sign
        from per1lab.errors import SeedEscapedQuadrant
        with pytest.raises(SeedEscapedQuadrant):
            boettcher.parameter_ray_seed("-iS", RationalAngle(1, 8))

    def test_angle0_shared_boundary_seeds(self):
        # the angle-0 branches sit on the S/-iS boundary and in iS, -S
        for q in ("S", "iS", "-S", "-iS"):
            boettcher.parameter_ray_seed(q, RationalAngle(0, 1))


class TestEquipotentials:
    def test_dynamical_level_matches_green(self):
        a = 1.0
        pts = boettcher.equipotential_dynamical(a, 2.0, n_samples=64)
        for z in pts[::8]:
            g = dynamics.green_function(a, complex(z), tol=1e-12)
            assert abs(g - math.log(2.0)) < 1e-8

    def test_dynamical_pushforward_is_cubed_level(self):
        a = 1.0
        r = 1.7
        pts = boettcher.equipotential_dynamical(a, r, n_samples=96)
        for z in pts[::12]:
            g = dynamics.green_function(a, dynamics.evaluate(a, complex(z)), tol=1e-12)
            assert abs(g - 3.0 * math.log(r)) < 3e-8

    def test_parameter_curve_conjugation_symmetric(self):
        pts = boettcher.equipotential_parameter(2.0, n_samples=180)
        conj = np.conj(pts)
        for z in conj[::15]:
            assert np.min(np.abs(pts - z)) < 0.08

    def test_parameter_curve_closes(self):
        pts = boettcher.equipotential_parameter(3.0, n_samples=240)
        assert abs(pts[0] - pts[-1]) < 1e-6
