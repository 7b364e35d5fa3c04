import math

import numpy as np
import pytest
from scipy import stats

from mollmc.mollifier import Mollifier, density, grad_density, grad_l1_norm, sample

from conftest import gl_tensor


class TestDensity:
    def test_peak_d1(self):
        # oracle: int_{-1}^{1} (1-x^2)^3 dx = 32/35 by polynomial quadrature
        poly_int = gl_interval_poly()
        assert abs(poly_int - 32.0 / 35.0) < 1e-14
        assert density(0.0, Mollifier(1, 1.0)) == pytest.approx(35.0 / 32.0, abs=1e-12)

    def test_boundary_and_outside(self):
        m = Mollifier(1, 1.0)
        assert density(1.0, m) == 0.0
        assert density(2.0, m) == 0.0
        assert density(-1.0, m) == 0.0

    def test_rescaling_identity(self, rng):
        m_half = Mollifier(2, 0.5)
        m_unit = Mollifier(2, 1.0)
        pts = rng.uniform(-0.5, 0.5, size=(50, 2))
        lhs = density(pts, m_half)
        rhs = 0.5 ** (-2) * density(pts / 0.5, m_unit)
        assert np.allclose(lhs, rhs, rtol=1e-13)

    def test_non_finite_input_rejected(self):
        m = Mollifier(1, 1.0)
        with pytest.raises(ValueError):
            density(math.nan, m)
        with pytest.raises(ValueError):
            grad_density(math.inf, m)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_normalization_quadrature(self, d):
        m = Mollifier(d, 1.0)
        nodes = {1: 220, 2: 150, 3: 110}[d]
        val = gl_tensor(lambda p: density(p, m), d, nodes)
        assert abs(val - 1.0) < 1e-6


class TestGradient:
    def test_zero_at_boundary_and_origin(self):
        m = Mollifier(1, 1.0)
        assert grad_density(1.0, m)[0] == 0.0
        assert grad_density(0.0, m)[0] == 0.0

    def test_value_at_half(self):
        # closed form 35/32 * (-6) * (1 - 0.25)^2 * 0.5
        got = grad_density(0.5, Mollifier(1, 1.0))[0]
        assert got == pytest.approx(-1.845703125, abs=1e-12)
        # independent route: central finite difference of the density
        m = Mollifier(1, 1.0)
        h = 1e-6
        fd = (density(0.5 + h, m) - density(0.5 - h, m)) / (2 * h)
        assert got == pytest.approx(fd, abs=1e-7)

    def test_matches_finite_differences(self, rng):
        m = Mollifier(3, 0.9)
        pts = rng.uniform(-0.5, 0.5, size=(100, 3))
        h = 1e-6
        for x in pts:
            g = grad_density(x, m)
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fd = (density(x + e, m) - density(x - e, m)) / (2 * h)
                assert abs(g[j] - fd) < 1e-6

    def test_continuous_across_support_boundary(self):
        m = Mollifier(2, 0.8)
        e = np.array([0.6, 0.8])
        inner = np.linalg.norm(grad_density((1 - 1e-9) * m.radius * e, m))
        outer = np.linalg.norm(grad_density((1 + 1e-9) * m.radius * e, m))
        assert abs(inner - outer) < 1e-8


class TestGradL1Norm:
    def test_closed_form_values(self):
        assert grad_l1_norm(1) == pytest.approx(105.0 / 48.0, abs=1e-15)
        assert grad_l1_norm(2) == pytest.approx(384.0 / 105.0, rel=1e-15)

    @pytest.mark.parametrize("d,nodes", [(1, 4000), (2, 150), (3, 110)])
    def test_quadrature_matches(self, d, nodes):
        m = Mollifier(d, 1.0)
        val = gl_tensor(lambda p: np.linalg.norm(grad_density(p, m), axis=1), d, nodes)
        assert abs(val - grad_l1_norm(d)) < 1e-4

    def test_bounds_up_to_100(self):
        for d in range(1, 101):
            assert d <= grad_l1_norm(d) <= d + 4

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            grad_l1_norm(0)


class TestSampler:
    def test_support(self, rng):
        m = Mollifier(3, 0.7)
        z = sample(m, rng, size=20_000)
        assert np.all(np.linalg.norm(z, axis=1) <= m.radius)

    def test_deterministic_given_seed(self):
        m = Mollifier(4, 1.0)
        a = sample(m, np.random.default_rng(99), size=1000)
        b = sample(m, np.random.default_rng(99), size=1000)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("d", [1, 3, 10])
    def test_second_moment(self, d):
        z = sample(Mollifier(d, 1.0), np.random.default_rng(500 + d), size=100_000)
        sq = np.sum(z * z, axis=1)
        se = sq.std(ddof=1) / math.sqrt(len(sq))
        assert abs(sq.mean() - d / (d + 8)) <= 3 * se

    def test_squared_radius_is_beta(self):
        # the squared radius of a unit draw has the Beta(d/2, 4) law; the
        # regularized incomplete beta function is the CDF oracle
        z = sample(Mollifier(1, 1.0), np.random.default_rng(7), size=100_000)
        res = stats.kstest(np.sum(z * z, axis=1), "beta", args=(0.5, 4.0))
        assert res.pvalue >= 0.01

    def test_single_draw_shape(self, rng):
        z = sample(Mollifier(5, 1.0), rng)
        assert z.shape == (5,)


def gl_interval_poly():
    x, w = np.polynomial.legendre.leggauss(16)
    return float(np.sum(w * (1 - x**2) ** 3))


class TestValidation:
    def test_bad_dim(self):
        with pytest.raises(ValueError):
            Mollifier(0, 1.0)

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            Mollifier(1, 0.0)
        with pytest.raises(ValueError):
            Mollifier(1, 1.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            density(np.array([1.0, 2.0, 3.0]), Mollifier(2, 1.0))
