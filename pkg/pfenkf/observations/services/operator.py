"""
Observation operator and the covariances of the data model

    y = rho * H a + delta + e,    delta ~ N(0, C_delta),  e ~ N(0, sigma_e**2 I).

Sensors measure displacements only. Channels are ordered sensor-major:
channel `s * dim + c` is component `c` at sensor `s`.
"""
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from pfenkf.exceptions import ObservationError
from pfenkf.fem.services.basis import basis_matrix
from pfenkf.fem.services.mesh import SLIT_HEIGHT, SLIT_TIP

from .kernels import MaternParams, matern_gram


def build_observation_matrix(mesh, sensors):
    """Sparse (n_sensors * dim, n_dofs) matrix; every d-DOF column is empty."""
    sensors = np.asarray(sensors, dtype=float).reshape(-1, mesh.dimension)
    basis = basis_matrix(mesh, sensors).tocoo()
    dim = mesh.dimension
    rows = np.concatenate([basis.row * dim + c for c in range(dim)])
    cols = np.concatenate([basis.col * dim + c for c in range(dim)])
    data = np.tile(basis.data, dim)
    return sp.csr_matrix((data, (rows, cols)), shape=(len(sensors) * dim, mesh.n_dofs))


def sensor_layout(mesh, n_sensors):
    """
    Default sensor positions: equispaced interior points in 1D, a regular
    grid over the unit square in 2D with points on the slit moved above it.
    """
    if n_sensors < 1:
        raise ObservationError("at least one sensor is needed")
    lower, upper = mesh.bounding_box
    if mesh.dimension == 1:
        x = lower[0] + (upper[0] - lower[0]) * np.arange(1, n_sensors + 1) / (n_sensors + 1)
        return x.reshape(-1, 1)
    k = int(np.ceil(np.sqrt(n_sensors)))
    ticks = (np.arange(k) + 0.5) / k
    xx, yy = np.meshgrid(lower[0] + (upper[0] - lower[0]) * ticks, lower[1] + (upper[1] - lower[1]) * ticks)
    points = np.column_stack([xx.ravel(), yy.ravel()])[:n_sensors]
    on_slit = np.isclose(points[:, 1], SLIT_HEIGHT) & (points[:, 0] <= SLIT_TIP)
    points[on_slit, 1] += 0.25 / k
    return points


@dataclass(frozen=True, eq=False)
class ObservationModel:
    mesh: object
    sensors: np.ndarray
    sigma_e: float
    kernel: MaternParams = MaternParams()
    rho: float = 1.0

    def __post_init__(self):
        sensors = np.array(self.sensors, dtype=float).reshape(-1, self.mesh.dimension)
        sensors.setflags(write=False)
        object.__setattr__(self, 'sensors', sensors)
        if self.sigma_e <= 0:
            raise ValueError("sensor noise must be positive")

    @property
    def n_sensors(self):
        return len(self.sensors)

    @property
    def n_channels(self):
        return self.n_sensors * self.mesh.dimension

    @property
    def channel_locations(self):
        return np.repeat(self.sensors, self.mesh.dimension, axis=0)

    @property
    def channels(self):
        """(sensor_id, component) of every channel."""
        dim = self.mesh.dimension
        return [(s, c) for s in range(self.n_sensors) for c in range(dim)]

    @cached_property
    def H(self):
        return build_observation_matrix(self.mesh, self.sensors)

    @property
    def discrepancy_covariance(self):
        """Matern Gram matrix over the sensors, repeated independently for each component."""
        return np.kron(matern_gram(self.sensors, params=self.kernel), np.eye(self.mesh.dimension))

    @property
    def noise_covariance(self):
        return self.sigma_e ** 2 * np.eye(self.n_channels)

    def predict(self, vector):
        """rho * H a for one stacked vector or for the columns of a matrix."""
        vector = np.asarray(vector)
        if vector.shape[0] != self.H.shape[1]:
            raise ObservationError(f"state has {vector.shape[0]} entries, H expects {self.H.shape[1]}")
        return self.rho * (self.H @ vector)

    def with_kernel(self, kernel):
        return replace(self, kernel=kernel)

    def check_observations(self, observations):
        observations = np.atleast_2d(np.asarray(observations, dtype=float))
        if observations.shape[1] != self.n_channels:
            raise ObservationError(
                f"observations have {observations.shape[1]} channels, the sensors give {self.n_channels}"
            )
        return observations
