import math

import numpy as np
import pytest

from per1lab import dynamics
from per1lab.errors import NotApplicable, NotInBasin
from per1lab.fatou import (CaptureVerdict, FatouCoordinate, GridPolicy,
                           capture_depth, i_invariant)

SQRT3 = math.sqrt(3.0)


@pytest.fixture(scope="module")
def fc1():
    return FatouCoordinate(1.0)


def basin_samples(fc, n, rng):
    """Random points in the basin near the critical-value orbit."""
    out = []
    base = fc.v_plus
    while len(out) < n:
        z = base + complex(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25))
        try:
            fc(z)
        except NotInBasin:
            continue
        out.append(z)
    return out


class TestAbel:
    def test_defining_equation_at_vplus(self, fc1):
        z = fc1.v_plus
        fz = dynamics.evaluate(1.0, z)
        assert abs(fc1(fz) - fc1(z) - 1.0) < 1e-9

    def test_normalization(self, fc1):
        assert abs(fc1(fc1.v_plus) - 1.0) < 1e-6

    def test_drift_constant(self, fc1):
        assert abs(fc1.drift - (1.0 - 1.0 / 1.0 ** 2)) < 1e-15
        fc = FatouCoordinate(2.0 + 1.0j)
        a = 2.0 + 1.0j
        assert abs(fc.drift - (1.0 - 1.0 / a ** 2)) < 1e-15

    def test_budget_independence(self):
        fc_lo = FatouCoordinate(1.0)
        from per1lab.parabolic import BudgetPolicy
        fc_hi = FatouCoordinate(1.0, BudgetPolicy(budget=200000, defect_tol=1e-15))
        z = fc_lo.v_plus + 0.05 + 0.02j
        assert abs(fc_lo(z) - fc_hi(z)) < 1e-9

    @pytest.mark.parametrize("a", [1.0, 0.8 + 0.4j])
    def test_abel_residual_batch(self, a):
        rng = np.random.default_rng(42)
        fc = FatouCoordinate(a)
        pts = np.array(basin_samples(fc, 1000, rng))
        fpts = pts * (1.0 + pts * (a + pts))
        w1 = fc.batch(pts)
        w2 = fc.batch(fpts)
        ok = ~(np.isnan(w1) | np.isnan(w2))
        assert ok.mean() > 0.99
        assert np.nanmax(np.abs(w2[ok] - w1[ok] - 1.0)) < 1e-8


class TestPetal:
    def test_round_trip_100_points(self, fc1):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            w = complex(rng.uniform(0.05, 5.0), rng.uniform(-5.0, 5.0))
            z = fc1.petal_inverse(w)
            worst = max(worst, abs(fc1(z) - w))
        assert worst < 1e-7

    def test_inverse_at_zero_is_critical_point(self, fc1):
        assert abs(fc1.petal_inverse(0.0) - fc1.c_plus) < 1e-5

    def test_equivariance(self, fc1):
        rng = np.random.default_rng(1)
        for _ in range(30):
            w = complex(rng.uniform(0.2, 4.0), rng.uniform(-4.0, 4.0))
            lhs = dynamics.evaluate(1.0, fc1.petal_inverse(w))
            rhs = fc1.petal_inverse(w + 1.0)
            assert abs(lhs - rhs) < 1e-7

    def test_in_maximal_petal(self, fc1):
        assert fc1.in_maximal_petal(fc1.v_plus)
        assert not fc1.in_maximal_petal(fc1.c_plus)   # boundary: Re fatou = 0
        assert not fc1.in_maximal_petal(10.0)          # far outside the basin


class TestCapture:
    def test_adjacent_at_1(self):
        assert capture_depth(1.0).kind == "adjacent"

    def test_escape_at_4(self):
        assert capture_depth(4.0).kind == "escape"

    def test_adjacent_on_real_interval(self):
        for a in (0.5, 1.2, 1.7):
            assert capture_depth(a).kind == "adjacent"

    def test_capture_at_depth1_center(self):
        centers = dynamics.solve_capture_centers(1)
        cands = [z for z in centers if z.real > 0 and z.imag > 0]
        assert cands
        # classify each S-quadrant depth-1 center; at a center the verdict
        # is exactly Capture(1)
        hits = 0
        for a in cands:
            v = capture_depth(a, max_depth=4)
            if v.kind == "capture" and v.depth == 1:
                hits += 1
        assert hits >= 1

    def test_stability_under_refinement(self):
        coarse = GridPolicy(base_cells=96, levels=2)
        fine = GridPolicy(base_cells=192, levels=2)
        for a in (1.0, 4.0, 0.8 + 0.4j):
            v1 = capture_depth(a, grid=coarse)
            v2 = capture_depth(a, grid=fine)
            if v1.kind != "undetermined":
                assert (v1.kind, v1.depth) == (v2.kind, v2.depth)


class TestIInvariant:
    def test_zero_at_sqrt3(self):
        assert i_invariant(SQRT3).value < 1e-8

    def test_positive_with_real_diagnostic_at_1(self):
        r = i_invariant(1.0)
        assert r.value > 0
        assert abs(r.re_diagnostic) < 1e-6

    def test_monotone_toward_sqrt3(self):
        vals = [i_invariant(a).value for a in (0.3, 0.6, 0.9, 1.2, 1.5)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
        assert vals[-1] > 0

    def test_conjugation_symmetry(self):
        # unordered pair of Fatou images is conjugated under a -> conj(a)
        for a in (0.7, 1.3):
            assert abs(i_invariant(a).value - i_invariant(np.conj(a)).value) < 1e-9

    def test_not_applicable_for_escaping_orbit(self):
        with pytest.raises(NotApplicable):
            i_invariant(4.0)
