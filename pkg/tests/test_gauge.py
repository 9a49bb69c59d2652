import numpy as np
import pytest

from magkepler.gauge import (
    SIGMA_POTENTIAL,
    curvature,
    curvature_pairing,
    dirac_string_margin,
    force_field,
    gauge_sample,
    lemma_residuals,
    potential,
)
from magkepler.liealg import SkewMatrix, generator, random_on_orbit

from helpers import random_point


def e_n(n):
    out = np.zeros(n)
    out[-1] = 1.0
    return out


class TestStringMargin:
    def test_axis_points(self):
        assert dirac_string_margin(e_n(3)) == 2.0
        assert dirac_string_margin(-e_n(3)) == 0.0
        assert dirac_string_margin(np.array([1.0, 0.0, 0.0])) == 1.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            dirac_string_margin(np.zeros(5))

    def test_scale_free(self):
        rng = np.random.default_rng(3)
        x = random_point(5, rng)
        assert abs(dirac_string_margin(x)
                   - dirac_string_margin(7.5 * x)) < 1e-14


class TestPotential:
    def test_vanishes_on_positive_axis(self):
        for k in (1, 2):
            comps = potential(e_n(2 * k + 1), k)
            for a in comps:
                assert np.array_equal(a.matrix, np.zeros((2 * k, 2 * k)))

    def test_unit_transverse_point(self):
        comps = potential(np.array([1.0, 0.0, 0.0]), 1)
        assert np.array_equal(comps[0].matrix, np.zeros((2, 2)))
        assert np.array_equal(comps[2].matrix, np.zeros((2, 2)))
        assert np.allclose(comps[1].matrix,
                           SIGMA_POTENTIAL * generator(1, 2, 1).matrix)

    def test_degree_minus_one(self):
        comps1 = potential(np.array([1.0, 0.0, 0.0]), 1)
        comps2 = potential(np.array([2.0, 0.0, 0.0]), 1)
        assert np.allclose(comps2[1].matrix, 0.5 * comps1[1].matrix)
        rng = np.random.default_rng(31)
        x = random_point(5, rng)
        lam = 1.7
        for a, b in zip(potential(x, 2), potential(lam * x, 2)):
            assert np.allclose(b.matrix, a.matrix / lam, atol=1e-14)

    def test_last_component_always_zero(self):
        rng = np.random.default_rng(33)
        for k in (1, 2, 3):
            comps = potential(random_point(2 * k + 1, rng), k)
            assert np.array_equal(comps[-1].matrix, np.zeros((2 * k, 2 * k)))

    def test_string_proximity_rejected(self):
        with pytest.raises(ValueError):
            potential(np.array([1e-9, 0.0, -1.0]), 1)


class TestCurvature:
    def test_at_positive_axis(self):
        f = curvature(e_n(3), 1)
        zero = np.zeros((2, 2))
        assert np.array_equal(f[2][0].matrix, zero)
        assert np.array_equal(f[2][1].matrix, zero)
        # F_{12} at e_n reduces to the bare generator with the global sign
        assert np.allclose(f[0][1].matrix,
                           SIGMA_POTENTIAL * generator(1, 2, 1).matrix)

    def test_antisymmetry(self):
        rng = np.random.default_rng(35)
        for k in (1, 2):
            n = 2 * k + 1
            f = curvature(random_point(n, rng), k)
            for i in range(n):
                for j in range(n):
                    assert np.allclose(f[i][j].matrix, -f[j][i].matrix,
                                       atol=0.0)

    def test_degree_minus_two(self):
        rng = np.random.default_rng(37)
        x = random_point(5, rng)
        lam = 2.0
        fa = curvature(x, 2)
        fb = curvature(lam * x, 2)
        for i in range(5):
            for j in range(5):
                assert np.allclose(fb[i][j].matrix, fa[i][j].matrix / lam**2,
                                   atol=1e-14)

    def test_gauge_sample_bundles_both(self):
        x = np.array([0.3, -0.2, 0.5, 0.1, 0.9])
        sample = gauge_sample(x, 2)
        assert np.array_equal(sample.point, x)
        assert len(sample.potential) == 5
        assert len(sample.curvature) == 5


class TestForceField:
    def test_radial_velocity_gives_zero(self):
        rng = np.random.default_rng(41)
        for k in (1, 2, 3):
            x = random_point(2 * k + 1, rng)
            xi = random_on_orbit(1.3, k, rng)
            w = force_field(x, 2.5 * x, xi)
            assert np.linalg.norm(w) < 1e-12

    def test_matches_monopole_cross_product(self):
        rng = np.random.default_rng(43)
        mu = 0.8
        xi = SkewMatrix(1, mu * generator(1, 2, 1).matrix)
        for _ in range(10):
            x = random_point(3, rng)
            v = rng.normal(size=3)
            w = force_field(x, v, xi)
            expected = -mu * np.cross(v, x) / np.linalg.norm(x) ** 3
            assert np.linalg.norm(w - expected) < 1e-12

    def test_zero_charge(self):
        rng = np.random.default_rng(47)
        x = random_point(5, rng)
        w = force_field(x, rng.normal(size=5), SkewMatrix.zero(2))
        assert np.array_equal(w, np.zeros(5))

    def test_orthogonality(self):
        rng = np.random.default_rng(53)
        for k in (1, 2, 3):
            x = random_point(2 * k + 1, rng)
            v = rng.normal(size=2 * k + 1)
            xi = random_on_orbit(2.0, k, rng)
            w = force_field(x, v, xi)
            scale = np.linalg.norm(w) * max(np.linalg.norm(x),
                                            np.linalg.norm(v), 1.0)
            assert abs(w @ x) <= 1e-12 * max(scale, 1.0)
            assert abs(w @ v) <= 1e-10 * max(scale, 1.0)

    def test_pairing_matrix_antisymmetric(self):
        rng = np.random.default_rng(59)
        x = random_point(7, rng)
        g = curvature_pairing(x, random_on_orbit(1.0, 3, rng))
        assert np.allclose(g, -g.T, atol=0.0)


class TestLemmaResiduals:
    def test_identities_hold(self):
        rng = np.random.default_rng(61)
        for k in (1, 2, 3):
            for mu in (0.5, 2.0):
                x = random_point(2 * k + 1, rng)
                xi = random_on_orbit(mu, k, rng)
                v = rng.normal(size=2 * k + 1)
                res = lemma_residuals(x, xi, v, mu, h_values=(1e-3, 1e-4))
                assert res.radial_potential < 1e-10
                assert res.radial_curvature < 1e-10
                assert res.quadratic < 1e-10
                assert res.pairing_normsq < 1e-10
                assert res.force_normsq < 1e-10
                assert 1.8 < res.covariant_order < 2.2

    def test_zero_charge_residuals_exact(self):
        rng = np.random.default_rng(67)
        x = random_point(5, rng)
        res = lemma_residuals(x, SkewMatrix.zero(2), rng.normal(size=5), 0.0,
                              h_values=())
        assert res.quadratic == 0.0
        assert res.pairing_normsq == 0.0
        assert res.force_normsq == 0.0
        assert res.radial_potential < 1e-12
        assert res.radial_curvature < 1e-12

    def test_finite_difference_decreases_with_h(self):
        rng = np.random.default_rng(71)
        x = random_point(5, rng)
        xi = random_on_orbit(1.0, 2, rng)
        res = lemma_residuals(x, xi, rng.normal(size=5), 1.0,
                              h_values=(1e-3, 1e-4))
        assert res.covariant[1e-4] < res.covariant[1e-3]

    def test_string_guard(self):
        xi = SkewMatrix.zero(1)
        with pytest.raises(ValueError):
            lemma_residuals(np.array([0.0, 1e-8, -2.0]), xi,
                            np.ones(3), 0.0)
