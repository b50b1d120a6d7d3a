from django.test import SimpleTestCase
import numpy as np
import pytest

from pfenkf.ensemble.services.localization import LocalizationSpec
from pfenkf.ensemble.services.statistics import ensemble_mean
from pfenkf.ensemble.test.factories import random_ensemble
from pfenkf.exceptions import ObservationError
from pfenkf.fracture.test.factories import RodDiscretizationFactory
from pfenkf.observations.services.truth import DataBatch
from pfenkf.observations.test.factories import ObservationModelFactory
from ..services.analysis import (covariance_terms, data_misfit, innovation_covariance, kalman_update,
                                 localization_matrices)
from .factories import DenseObservationFactory, vector_ensemble


def textbook_update(matrix, observations, obs):
    C = np.cov(matrix)
    n_obs = len(observations)
    G = obs.rho ** 2 * n_obs * obs.H @ C @ obs.H.T + obs.discrepancy_covariance + obs.noise_covariance
    innovations = observations.sum(axis=0)[:, None] - obs.rho * n_obs * obs.H @ matrix
    return matrix + C @ obs.H.T @ np.linalg.inv(G) @ innovations


class TestKalmanUpdate(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(101)
        self.matrix = self.rng.standard_normal((10, 8))
        self.ensemble = vector_ensemble(self.matrix)
        self.obs = DenseObservationFactory(seed=3)

    def test_matches_dense_textbook_formula(self):
        batch = DataBatch(step=1, observations=self.rng.standard_normal((2, 3)))
        obs = DenseObservationFactory(seed=5, rho=0.8)
        expected = textbook_update(self.matrix, batch.observations, obs)
        updated = kalman_update(self.ensemble, batch, obs).stacked()
        assert np.allclose(updated, expected, rtol=1e-10, atol=1e-12)

    def test_zero_spread_leaves_members_unchanged(self):
        same = vector_ensemble(np.repeat(self.matrix[:, :1], 4, axis=1))
        batch = DataBatch(step=1, observations=self.rng.standard_normal((1, 3)))
        assert np.array_equal(kalman_update(same, batch, self.obs).stacked(), same.stacked())

    def test_repeated_observations_equal_the_scaled_single_observation_form(self):
        y = self.rng.standard_normal(3)
        batch = DataBatch(step=1, observations=np.tile(y, (3, 1)))
        C = np.cov(self.matrix)
        H = self.obs.H
        R = self.obs.discrepancy_covariance + self.obs.noise_covariance
        gain_solve = np.linalg.solve(H @ C @ H.T + R / 3.0, y[:, None] - H @ self.matrix)
        expected = self.matrix + C @ H.T @ gain_solve
        assert np.allclose(kalman_update(self.ensemble, batch, self.obs).stacked(), expected,
                           rtol=1e-10, atol=1e-12)

    def test_update_minimizes_the_member_objective(self):
        matrix = self.rng.standard_normal((6, 20))
        ensemble = vector_ensemble(matrix)
        obs = DenseObservationFactory(seed=8, n_state=6)
        batch = DataBatch(step=1, observations=self.rng.standard_normal((2, 3)))
        C_inv = np.linalg.inv(np.cov(matrix))
        R_inv = np.linalg.inv(obs.discrepancy_covariance + obs.noise_covariance)
        forecast = matrix[:, 0]

        def objective(a):
            data = sum((y - obs.H @ a) @ R_inv @ (y - obs.H @ a) for y in batch.observations)
            return 0.5 * (a - forecast) @ C_inv @ (a - forecast) + 0.5 * data

        update = kalman_update(ensemble, batch, obs).stacked()[:, 0]
        best = objective(update)
        for _ in range(100):
            assert best <= objective(update + 1e-3 * self.rng.standard_normal(6))

    def test_misfit_does_not_increase(self):
        batch = DataBatch(step=1, observations=self.rng.standard_normal((4, 3)))
        _, HCHt = covariance_terms(self.ensemble, self.obs)
        G = innovation_covariance(HCHt, self.obs, batch.n_obs)
        analysed = kalman_update(self.ensemble, batch, self.obs)
        assert data_misfit(analysed, batch, self.obs, G) <= data_misfit(self.ensemble, batch, self.obs, G)

    def test_dimension_mismatch(self):
        with pytest.raises(ObservationError):
            kalman_update(self.ensemble, DataBatch(step=1, observations=np.zeros((1, 4))), self.obs)
        with pytest.raises(ObservationError):
            kalman_update(vector_ensemble(self.matrix[:7]), DataBatch(step=1, observations=np.zeros((1, 3))),
                          self.obs)


class TestLinearGaussianToy(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(2024)
        factor = rng.standard_normal((6, 6))
        self.prior_mean = np.arange(1.0, 7.0)
        self.prior_cov = 0.1 * factor @ factor.T + 0.05 * np.eye(6)
        self.obs = DenseObservationFactory(seed=12, n_channels=2, n_state=6)
        self.y = self.obs.H @ self.prior_mean + rng.standard_normal(2)
        members = rng.multivariate_normal(self.prior_mean, self.prior_cov, size=10 ** 4).T
        self.ensemble = vector_ensemble(members)
        self.analysed = kalman_update(self.ensemble, DataBatch(step=1, observations=[self.y]), self.obs)

    def test_posterior_mean_matches_gaussian_conditioning(self):
        H, S = self.obs.H, self.prior_cov
        R = self.obs.discrepancy_covariance + self.obs.noise_covariance
        exact = self.prior_mean + S @ H.T @ np.linalg.solve(H @ S @ H.T + R, self.y - H @ self.prior_mean)
        mean = ensemble_mean(self.analysed)
        assert np.linalg.norm(mean - exact) <= 0.02 * np.linalg.norm(exact)

    def test_analysis_reduces_the_spread_of_the_observed_quantities(self):
        before = (self.obs.H @ self.ensemble.stacked()).std(axis=1)
        after = (self.obs.H @ self.analysed.stacked()).std(axis=1)
        assert np.all(after <= before + 1e-10)


class TestLocalizedUpdate(SimpleTestCase):

    def setUp(self):
        self.disc = RodDiscretizationFactory()
        self.ensemble = random_ensemble(self.disc, 6, seed=6)
        self.obs = ObservationModelFactory(mesh=self.disc.mesh, sensors=[[0.0]])
        self.batch = DataBatch(step=1, observations=[[0.3]])

    def test_short_taper_confines_the_update_to_the_sensor(self):
        taper = localization_matrices(LocalizationSpec(1e-3), self.disc.mesh.dof_locations,
                                      self.obs.channel_locations)
        change = kalman_update(self.ensemble, self.batch, self.obs, taper).stacked() - self.ensemble.stacked()
        moved = np.flatnonzero(np.any(change != 0.0, axis=1))
        assert set(moved) <= {self.disc.mesh.u_dof(10), self.disc.mesh.d_dof(10)}
        assert self.disc.mesh.u_dof(10) in moved

    def test_long_taper_is_the_plain_update(self):
        taper = localization_matrices(LocalizationSpec(1e6), self.disc.mesh.dof_locations,
                                      self.obs.channel_locations)
        assert np.allclose(kalman_update(self.ensemble, self.batch, self.obs, taper).stacked(),
                           kalman_update(self.ensemble, self.batch, self.obs).stacked(),
                           rtol=1e-9, atol=1e-12)
