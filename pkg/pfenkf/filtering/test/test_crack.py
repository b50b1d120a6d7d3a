from django.test import SimpleTestCase
import numpy as np

from pfenkf.fracture.services.state import FieldState
from pfenkf.fracture.test.factories import RodDiscretizationFactory, SensDiscretizationFactory
from ..services.crack import crack_path_2d, crack_position_1d, crack_position_estimate, crack_summary


class TestRodCrackPosition(SimpleTestCase):

    def setUp(self):
        self.disc = RodDiscretizationFactory(mesh__n_elements=100)
        self.x = self.disc.quadrature_points[..., 0]

    def test_centroid_of_a_symmetric_bump(self):
        phi = np.clip(1.0 - np.abs(self.x - 0.3) / 0.1, 0.0, 1.0)
        assert abs(crack_position_1d(phi, self.disc) - 0.3) <= 0.02

    def test_no_crack(self):
        assert crack_position_1d(np.zeros_like(self.x), self.disc) is None
        assert crack_position_1d(np.full_like(self.x, 0.5), self.disc) is None

    def test_member_dispatch(self):
        phi = np.clip(1.0 - np.abs(self.x + 0.4) / 0.1, 0.0, 1.0)
        member = FieldState.initial(self.disc, phi_floor=phi)
        assert crack_position_estimate(member, self.disc) == crack_summary(member, self.disc)
        assert abs(crack_summary(member, self.disc) + 0.4) <= 0.02


class TestSensCrackPath(SimpleTestCase):

    def setUp(self):
        self.disc = SensDiscretizationFactory()
        self.points = self.disc.quadrature_points

    def test_ridge_of_a_horizontal_band(self):
        phi = np.exp(-(self.points[..., 1] - 0.4) ** 2 / 0.002) * (self.points[..., 0] > 0.5)
        path = crack_path_2d(phi, self.disc)
        assert path.shape[1] == 2
        assert np.all(np.diff(path[:, 0]) > 0)
        assert np.all(np.abs(path[:, 1] - 0.4) <= 0.1)
        member = FieldState.initial(self.disc, phi_floor=phi)
        assert abs(crack_summary(member, self.disc) - 0.4) <= 0.1

    def test_damage_left_of_the_tip_is_ignored(self):
        phi = (self.points[..., 0] < 0.4).astype(float)
        assert crack_path_2d(phi, self.disc) is None
        assert crack_summary(FieldState.initial(self.disc, phi_floor=phi), self.disc) is None
