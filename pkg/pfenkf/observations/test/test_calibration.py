from django.test import SimpleTestCase
import numpy as np

from ..services.calibration import calibrate_hyperparameters
from ..services.kernels import MaternParams
from ..services.truth import DataBatch
from .factories import ObservationModelFactory, linear_displacement


class TestCalibration(SimpleTestCase):

    def setUp(self):
        self.truth_kernel = MaternParams(nu=1.5, sigma=1e-2, length=0.3)
        self.obs = ObservationModelFactory(n_sensors=30, sigma_e=1e-3,
                                           kernel=MaternParams(sigma=2e-2, length=0.6))
        mesh = self.obs.mesh
        self.mean = np.concatenate([linear_displacement(mesh, [[0.01]]), np.zeros(mesh.n_nodes)])
        self.rng = np.random.default_rng(77)

    def batch(self, discrepancy, n_obs=200):
        C_delta = self.obs.with_kernel(self.truth_kernel).discrepancy_covariance if discrepancy else None
        clean = self.obs.predict(self.mean)
        observations = clean + self.obs.sigma_e * self.rng.standard_normal((n_obs, self.obs.n_channels))
        if C_delta is not None:
            observations += self.rng.multivariate_normal(np.zeros(self.obs.n_channels), C_delta, size=n_obs)
        return DataBatch(step=1, observations=observations)

    def test_recovers_known_hyperparameters(self):
        result = calibrate_hyperparameters(self.batch(True), self.obs, self.mean)
        assert abs(result.params.sigma / 1e-2 - 1.0) <= 0.2
        assert abs(result.params.length / 0.3 - 1.0) <= 0.3
        assert result.params.nu == 1.5
        assert result.objective <= result.initial_objective

    def test_data_without_discrepancy_drive_sigma_to_the_noise_scale(self):
        result = calibrate_hyperparameters(self.batch(False), self.obs, self.mean, prior_log_std=None)
        assert result.params.sigma <= 10.0 * self.obs.sigma_e
        assert result.objective <= result.initial_objective

    def test_never_ends_above_the_initial_objective(self):
        result = calibrate_hyperparameters(self.batch(True, n_obs=3), self.obs, self.mean, max_iterations=1)
        assert result.objective <= result.initial_objective
        assert result.iterations <= 1
