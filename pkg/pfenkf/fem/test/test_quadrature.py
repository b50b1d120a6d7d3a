from django.test import SimpleTestCase
import numpy as np
import pytest

from ..services.quadrature import quadrature_rule


class TestQuadratureRule(SimpleTestCase):

    def test_line_weights_sum_to_reference_length(self):
        rule = quadrature_rule(1)
        assert rule.n_points == 2
        assert np.isclose(rule.weights.sum(), 1.0)

    def test_triangle_weights_sum_to_reference_area(self):
        rule = quadrature_rule(2)
        assert rule.n_points == 3
        assert np.isclose(rule.weights.sum(), 0.5)

    def test_line_rule_is_exact_for_cubics(self):
        rule = quadrature_rule(1)
        x = rule.points[:, 0]
        for power in range(4):
            assert np.isclose(np.dot(rule.weights, x ** power), 1.0 / (power + 1))

    def test_triangle_rule_is_exact_for_quadratics(self):
        rule = quadrature_rule(2)
        x, y = rule.points[:, 0], rule.points[:, 1]
        # integrals of monomials over the reference triangle
        assert np.isclose(np.dot(rule.weights, x), 1.0 / 6.0)
        assert np.isclose(np.dot(rule.weights, x * y), 1.0 / 24.0)
        assert np.isclose(np.dot(rule.weights, y ** 2), 1.0 / 12.0)

    def test_unknown_rule_raises(self):
        with pytest.raises(ValueError):
            quadrature_rule(2, order=5)
        with pytest.raises(ValueError):
            quadrature_rule(3)
