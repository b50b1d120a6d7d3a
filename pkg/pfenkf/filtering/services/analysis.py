"""
The Kalman shift of every member,

    a_i <- a_i + C H^T G^-1 (sum_j y_j - rho n_obs H a_i),
    G = rho**2 n_obs H C H^T + C_delta + C_e,

with the ensemble covariance C only ever used through its anomaly factor.
All members see the same observations. Phase fields are left untouched.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from pfenkf.ensemble.services.statistics import ensemble_anomalies
from pfenkf.exceptions import ObservationError
from pfenkf.observations.services.likelihood import factorize_spd

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DenseObservation:
    """Observation model given directly by its matrices."""
    H: np.ndarray
    rho: float
    discrepancy_covariance: np.ndarray
    noise_covariance: np.ndarray

    @property
    def n_channels(self):
        return self.H.shape[0]

    def check_observations(self, observations):
        observations = np.atleast_2d(np.asarray(observations, dtype=float))
        if observations.shape[1] != self.n_channels:
            raise ObservationError(
                f"observations have {observations.shape[1]} channels, H has {self.n_channels}"
            )
        return observations


def localization_matrices(spec, state_locations, channel_locations):
    """Schur taper of C H^T (state x channel) and of H C H^T (channel x channel)."""
    return spec.taper(state_locations, channel_locations), spec.taper(channel_locations, channel_locations)


def covariance_terms(ensemble, obs, taper=None):
    """(C H^T, H C H^T) from the anomalies, optionally tapered."""
    A = ensemble_anomalies(ensemble)
    HA = np.asarray(obs.H @ A)
    CHt = A @ HA.T
    HCHt = HA @ HA.T
    if taper is not None:
        state_taper, channel_taper = taper
        CHt = CHt * state_taper
        HCHt = HCHt * channel_taper
    return CHt, HCHt


def innovation_covariance(HCHt, obs, n_obs):
    return obs.rho ** 2 * n_obs * HCHt + obs.discrepancy_covariance + obs.noise_covariance


def kalman_update(ensemble, batch, obs, taper=None):
    """Analysis ensemble for the observations of `batch`; inflation must already be applied."""
    observations = obs.check_observations(batch.observations)
    n_obs = len(observations)
    matrix = ensemble.stacked()
    if matrix.shape[0] != obs.H.shape[1]:
        raise ObservationError(f"state has {matrix.shape[0]} entries, H expects {obs.H.shape[1]}")
    CHt, HCHt = covariance_terms(ensemble, obs, taper)
    factor = factorize_spd(innovation_covariance(HCHt, obs, n_obs), 'G')
    innovations = observations.sum(axis=0)[:, None] - obs.rho * n_obs * np.asarray(obs.H @ matrix)
    analysis = matrix + CHt @ cho_solve(factor, innovations)
    logger.debug("Kalman update of %d members with %d observations of %d channels",
                 matrix.shape[1], n_obs, observations.shape[1])
    return ensemble.with_stacked(analysis)


def member_misfits(ensemble, batch, obs, covariance):
    """Per active member, the norm of mean(y) - rho H a weighted by the inverse of `covariance`."""
    factor = factorize_spd(covariance, 'G')
    residuals = obs.check_observations(batch.observations).mean(axis=0)[:, None] \
        - obs.rho * np.asarray(obs.H @ ensemble.stacked())
    return np.sqrt(np.sum(residuals * cho_solve(factor, residuals), axis=0))


def data_misfit(ensemble, batch, obs, covariance):
    return float(member_misfits(ensemble, batch, obs, covariance).mean())
