import cmath
import math

import numpy as np
import pytest

from per1lab import model
from per1lab.angles import RationalAngle

M = model.shared_model()
PERIOD2 = ((-1 + 2j) / 2, (-1 - 2j) / 2)   # roots of z^2 + z + 5/4


class TestModelFatou:
    def test_normalization_chain(self):
        assert abs(M.fatou(0.25) - 1.0) < 1e-7
        z = 0.25
        for n in range(2, 11):
            z = model.QuadraticModel.apply(z)
            assert abs(M.fatou(z) - n) < 1e-6

    def test_petal_inverse_at_zero_is_critical_point(self):
        assert abs(M.petal_inverse(0.0)) < 1e-6

    def test_round_trip(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            w = complex(rng.uniform(0.05, 5), rng.uniform(-5, 5))
            assert abs(M.fatou(M.petal_inverse(w)) - w) < 1e-7

    def test_pull_branches(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            z = complex(rng.uniform(-0.45, 0.2), rng.uniform(-0.4, 0.4))
            up = M.pull_up(z)
            dn = M.pull_down(z)
            assert up.imag >= 0 and dn.imag <= 0
            assert abs(model.QuadraticModel.apply(up) - z) < 1e-12
            assert abs(up + dn) < 1e-15


class TestEquipotentials:
    def test_E0_is_level_one(self):
        curve = model.equipotential_zero(samples=128)
        for z in curve[::16]:
            w = M.fatou(complex(z))
            assert abs(w.real - 1.0) < 1e-8

    def test_pullback_maps_onto_previous(self):
        curves1 = model.model_equipotential(1, samples=128)
        curve0 = model.equipotential_zero(samples=128)
        for c in curves1:
            for z in c[::16]:
                img = model.QuadraticModel.apply(complex(z))
                assert np.min(np.abs(curve0 - img)) < 1e-5

    def test_E1_closes_through_critical_point(self):
        curves1 = model.model_equipotential(1, samples=256)
        assert len(curves1) == 2
        allpts = np.concatenate(curves1)
        # passes through the critical point 0 and is (as a set) symmetric
        assert np.min(np.abs(allpts)) < 2e-2
        for z in allpts[::32]:
            assert np.min(np.abs(allpts + z)) < 1e-9  # exact central symmetry


class TestInternalRay:
    def test_generator_parse(self):
        assert model.internal_ray_generator(RationalAngle(1, 3)) == (2, 1)
        assert model.internal_ray_generator(RationalAngle(2, 3)) == (2, -1)
        assert model.internal_ray_generator(RationalAngle(1, 7)) == (3, 1)
        with pytest.raises(ValueError):
            model.internal_ray_generator(RationalAngle(1, 5))

    def test_forward_invariance(self):
        links = model.model_internal_ray(RationalAngle(1, 3), n_links=6,
                                         samples_per_link=80)
        for j in range(len(links) - 1):
            img = np.array([model.QuadraticModel.apply(
                model.QuadraticModel.apply(z)) for z in links[j + 1]])
            assert np.max(np.abs(img - links[j])) < 1e-6

    def test_links_connect(self):
        links = model.model_internal_ray(RationalAngle(1, 3), n_links=5,
                                         samples_per_link=60)
        for j in range(len(links) - 1):
            assert abs(links[j][-1] - links[j + 1][0]) < 1e-6

    def test_tail_converges_to_period2(self):
        z = model.internal_ray_tail_limit(RationalAngle(1, 3))
        assert min(abs(z - p) for p in PERIOD2) < 1e-3
        # record which one the template selects: the upper point
        assert abs(z - PERIOD2[0]) < 1e-3

    def test_negative_angle_is_mirror(self):
        pos = model.model_internal_ray(RationalAngle(1, 3), n_links=3,
                                       samples_per_link=40)
        neg = model.model_internal_ray(RationalAngle(2, 3), n_links=3,
                                       samples_per_link=40)
        for p, q in zip(pos, neg):
            assert np.max(np.abs(np.conj(p) - q)) < 1e-12

    def test_cycle_curves_disjoint_outside_petal(self):
        links = model.model_internal_ray(RationalAngle(1, 3), n_links=8,
                                         samples_per_link=60)
        ray = np.concatenate(links)
        image = np.array([model.QuadraticModel.apply(z) for z in ray])
        # drop points inside the image petal (Re fatou > 1 sheet) and near
        # the common tail limit before measuring separation
        keep_r, keep_i = [], []
        lobe = M.petal_lobe()
        tail = model.internal_ray_tail_limit(RationalAngle(1, 3))
        tail2 = model.QuadraticModel.apply(tail)
        for z in ray:
            if abs(z - tail) > 5e-2 and not model.point_in_polygon(z, lobe):
                keep_r.append(z)
        for z in image:
            if abs(z - tail2) > 5e-2 and not model.point_in_polygon(z, lobe):
                keep_i.append(z)
        d = min(abs(p - q) for p in keep_r[::3] for q in keep_i[::3])
        assert d > 1e-9


class TestRegions:
    def test_petal_lobe_contains_real_segment(self):
        lobe = M.petal_lobe()
        assert model.point_in_polygon(0.3 + 0j, lobe)
        assert model.point_in_polygon(0.45 + 0j, lobe)
        assert not model.point_in_polygon(-0.3 + 0j, lobe)
        assert not model.point_in_polygon(0.6j, lobe)

    def test_mirror_lobe(self):
        lobe = M.mirror_lobe()
        assert model.point_in_polygon(-0.3 + 0j, lobe)
        assert not model.point_in_polygon(0.3 + 0j, lobe)
