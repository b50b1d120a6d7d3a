from django.test import SimpleTestCase
import numpy as np
import pytest

from ..services.kernels import MaternParams, matern, matern_gram


class TestMatern(SimpleTestCase):

    def test_value_at_zero_distance(self):
        params = MaternParams(nu=2.5, sigma=0.3, length=0.2)
        assert matern([0.1, 0.2], [0.1, 0.2], params) == pytest.approx(0.09, rel=1e-14)

    def test_half_smoothness_is_exponential(self):
        params = MaternParams(nu=0.5, sigma=1.0, length=0.4)
        for r in (1e-3, 0.1, 0.5, 2.0):
            assert abs(matern([0.0], [r], params) - np.exp(-r / 0.4)) <= 1e-10

    def test_three_halves_closed_form(self):
        params = MaternParams(nu=1.5, sigma=2.0, length=0.3)
        for r in (0.05, 0.3, 1.0):
            s = np.sqrt(3.0) * r / 0.3
            assert abs(matern([r], [0.0], params) - 4.0 * (1.0 + s) * np.exp(-s)) <= 1e-10

    def test_large_smoothness_approaches_squared_exponential(self):
        params = MaternParams(nu=100.0, sigma=1.0, length=0.25)
        value = matern([0.0, 0.0], [0.25, 0.0], params)
        assert value == pytest.approx(np.exp(-0.5), rel=0.01)

    def test_gram_is_positive_semidefinite(self):
        points = np.random.default_rng(5).uniform(size=(50, 2))
        params = MaternParams(nu=1.5, sigma=0.5, length=0.2)
        gram = matern_gram(points, params=params)
        assert np.allclose(gram, gram.T)
        assert np.linalg.eigvalsh(gram).min() >= -1e-8 * params.sigma ** 2

    def test_invariant_under_rigid_motions(self):
        rng = np.random.default_rng(8)
        points = rng.uniform(size=(20, 2))
        angle = rng.uniform(0.0, 2.0 * np.pi)
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = points @ rotation.T + rng.uniform(size=2)
        params = MaternParams(nu=1.5, sigma=1.0, length=0.3)
        assert np.allclose(matern_gram(points, params=params), matern_gram(moved, params=params),
                           rtol=0.0, atol=1e-12)

    def test_zero_amplitude(self):
        params = MaternParams(nu=1.5, sigma=0.0, length=0.3)
        assert not matern_gram(np.eye(2), params=params).any()

    def test_rejects_invalid_parameters(self):
        with pytest.raises(ValueError):
            MaternParams(nu=0.0)
        with pytest.raises(ValueError):
            MaternParams(length=-1.0)
