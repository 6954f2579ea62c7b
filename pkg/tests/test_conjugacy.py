import math

import numpy as np
import pytest

from per1lab import conjugacy, dynamics, model
from per1lab.angles import RationalAngle
from per1lab.fatou import FatouCoordinate

SQRT3 = math.sqrt(3.0)


def s0_solution():
    sols = dynamics.solve_capture_centers(0)
    return next(z for z in sols if z.real > 0 and z.imag > 0)


class TestLift:
    def test_lift_of_vplus_is_quarter(self):
        for a in (1.0, 1.9, 0.8 + 0.4j):
            ctx = conjugacy.LiftContext(a)
            lifted = conjugacy.lift_orbit(ctx, ctx.fc.v_plus)
            assert abs(lifted.value - 0.25) < 1e-6

    def test_semiconjugacy_on_petal_reaching_samples(self):
        a = 1.0
        ctx = conjugacy.LiftContext(a)
        rng = np.random.default_rng(12)
        count = 0
        for _ in range(40):
            z = ctx.fc.v_plus + complex(rng.uniform(-0.2, 0.2),
                                        rng.uniform(-0.2, 0.2))
            try:
                l1 = conjugacy.lift_to_model(a, z, ctx=ctx)
                l2 = conjugacy.lift_to_model(a, dynamics.evaluate(a, z), ctx=ctx)
            except Exception:
                continue
            assert abs(model.QuadraticModel.apply(l1.value) - l2.value) < 1e-6
            count += 1
        assert count > 25

    def test_real_adjacent_lift_real_with_no_side_labels(self):
        a = 1.9
        ctx = conjugacy.LiftContext(a)
        lifted = conjugacy.lift_orbit(ctx, ctx.fc.v_minus)
        assert abs(lifted.value.imag) < 1e-8
        assert set(lifted.labels) <= {"P", "Q"}


class TestPhiAdjacent:
    def test_at_sqrt3_value_quarter(self):
        assert abs(conjugacy.phi_adjacent(SQRT3) - 0.25) < 1e-6

    def test_real_interval_lands_in_image_petal(self):
        mdl = model.shared_model()
        for a in (1.78, 1.85, 1.95):
            v = conjugacy.phi_adjacent(a)
            assert abs(v.imag) < 1e-8
            w = mdl.fatou(v)
            assert w.real > 1.0

    def test_at_s0_value_zero(self):
        s0 = s0_solution()
        v = conjugacy.phi_adjacent(s0)
        assert abs(v) < 1e-6

    def test_mirror_symmetry(self):
        assert abs(conjugacy.phi_adjacent(-1.9) - conjugacy.phi_adjacent(1.9)) < 1e-9

    def test_real_segment_of_I_maps_to_level_one(self):
        # on (0, sqrt3] the free value sits on the image-petal boundary level
        mdl = model.shared_model()
        for a in (1.0, 1.4):
            v = conjugacy.phi_adjacent(a)
            w = mdl.fatou(v)
            assert abs(w.real - 1.0) < 1e-6


class TestPhiCapture:
    def test_value_zero_at_center(self):
        centers = dynamics.solve_capture_centers(1)
        c = next(z for z in centers if z.real > 0 and z.imag > 0)
        assert abs(conjugacy.phi_capture(c, 1)) < 1e-6

    def test_semiconjugacy_near_center(self):
        centers = dynamics.solve_capture_centers(1)
        c = next(z for z in centers if z.real > 0 and z.imag > 0)
        a = c + 0.004 + 0.003j
        val = conjugacy.phi_capture(a, 1)
        ctx = conjugacy.LiftContext(a)
        z = ctx.fc.c_minus
        for _ in range(3):
            z = dynamics.evaluate(a, z)
        nxt = conjugacy.lift_to_model(a, z, ctx=ctx)
        assert abs(model.QuadraticModel.apply(val) - nxt.value) < 1e-6

    def test_local_lipschitz_continuity(self):
        centers = dynamics.solve_capture_centers(1)
        c = next(z for z in centers if z.real > 0 and z.imag > 0)
        h = 2e-3
        v1 = conjugacy.phi_capture(c + h, 1)
        v2 = conjugacy.phi_capture(c + h + h * 1j, 1)
        assert abs(v1 - v2) < 10 * abs(h * 1j) * 50  # loose local bound


class TestGamma:
    def test_endpoints_approach_sqrt3_and_2(self):
        curve = conjugacy.gamma_curve(samples=96)
        assert abs(curve[0] - SQRT3) < 5e-3
        assert abs(curve[-1] - 2.0) < 5e-3
        assert all(z.imag > -1e-9 for z in curve)

    def test_gamma_values_on_petal_boundary_level(self):
        curve = conjugacy.gamma_curve(samples=24, y_min=0.05, y_max=10.0)
        mdl = model.shared_model()
        for a in curve[::6]:
            v = conjugacy.phi_adjacent(complex(a))
            assert abs(mdl.fatou(v).real - 1.0) < 1e-6


class TestDynamicalInternalRay:
    def test_forward_invariance_outside_H0(self):
        # a beyond the wing tip: the basin is degree 2, full conjugacy
        a = 2.05 + 0.45j
        links = conjugacy.dynamical_internal_ray(a, RationalAngle(1, 3),
                                                 n_links=4, samples_per_link=40)
        for j in range(len(links) - 1):
            img = links[j + 1]
            for _ in range(2):
                img = img * (1.0 + img * (a + img))
            assert np.max(np.abs(img - links[j])) < 1e-6

    def test_conjugacy_consistency_with_model(self):
        # the transfer intertwines the Fatou coordinates of f_a and of the
        # model (both single-valued on the full basins)
        a = 2.05 + 0.45j
        links = conjugacy.dynamical_internal_ray(a, RationalAngle(1, 3),
                                                 n_links=3, samples_per_link=30)
        mlinks = model.model_internal_ray(RationalAngle(1, 3), n_links=3,
                                          samples_per_link=30)
        ctx = conjugacy.LiftContext(a)
        mdl = model.shared_model()
        checked = 0
        for dl, ml in zip(links, mlinks):
            for i in range(0, len(dl), 7):
                za = mdl.fatou(complex(ml[i]))
                zb = ctx.fc(complex(dl[i]))
                assert abs(za - zb) < 1e-4
                checked += 1
        assert checked >= 12

    def test_real_symmetric_parameter_conjugation(self):
        a = 1.9
        links = conjugacy.dynamical_internal_ray(a, RationalAngle(1, 3),
                                                 n_links=3, samples_per_link=30)
        neg = conjugacy.dynamical_internal_ray(a, RationalAngle(2, 3),
                                               n_links=3, samples_per_link=30)
        for p, q in zip(links, neg):
            assert np.max(np.abs(np.conj(p) - q)) < 1e-7
