"""
Random initial damage.

Every member starts undeformed with its uncertainty carried by the phase
field floor: a Gaussian bump (the damage nucleus in 1D, a pore in 2D) whose
position and magnitude are drawn from the prior. Member i of a run with
master seed s draws from `numpy.random.default_rng([s, i])`, so the
ensemble does not depend on the order members are created in.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pfenkf.exceptions import PriorSamplingError
from pfenkf.fracture.services.state import FieldState

from .state import EnsembleState

logger = logging.getLogger(__name__)

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class Nucleus:
    center: Tuple[float, ...]
    magnitude: float
    width: float

    def field(self, points):
        """Bump value at `points` of shape (..., dim)."""
        points = np.asarray(points, dtype=float)
        offset = points - np.asarray(self.center)
        return self.magnitude * np.exp(-0.5 * np.sum(offset ** 2, axis=-1) / self.width ** 2)

    def floor(self, disc):
        return np.clip(self.field(disc.quadrature_points), 0.0, 1.0)

    def nodal(self, disc):
        return np.clip(self.field(disc.mesh.nodes), 0.0, 1.0)

    def initial_state(self, disc):
        """Undeformed state with the floor and the micromorphic field both seeded by the bump."""
        return FieldState.initial(disc, phi_floor=self.floor(disc), a_d=self.nodal(disc))


@dataclass(frozen=True)
class PriorSpec1D:
    center_mean: float = -0.25
    center_std: float = 0.12
    magnitude_low: float = 0.73
    magnitude_high: float = 0.76
    width: float = 0.05
    domain: Tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.magnitude_low <= self.magnitude_high < 1.0:
            raise ValueError("nucleus magnitudes must lie in (0, 1)")
        if self.center_std < 0 or self.width <= 0:
            raise ValueError("center std must be non-negative and width positive")

    def draw(self, rng):
        center = rng.normal(self.center_mean, self.center_std)
        magnitude = rng.uniform(self.magnitude_low, self.magnitude_high)
        return Nucleus(center=(float(center),), magnitude=float(magnitude), width=self.width)

    def admissible(self, nucleus):
        return self.domain[0] < nucleus.center[0] < self.domain[1]


@dataclass(frozen=True)
class PriorSpec2D:
    """
    Pore center X = x_shift + x_scale * Beta(a, b), Y likewise, expressed in
    coordinates whose origin sits at `offset` in the mesh frame.
    """
    x_shift: float = 0.51
    x_scale: float = 0.11
    y_shift: float = -0.11
    y_scale: float = 0.13
    beta_a: float = 8.0
    beta_b: float = 8.0
    offset: Tuple[float, float] = (0.0, 0.5)
    width: float = 0.03
    magnitude: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.magnitude < 1.0:
            raise ValueError("pore magnitude must lie in (0, 1)")
        if self.width <= 0 or self.beta_a <= 0 or self.beta_b <= 0:
            raise ValueError("pore width and Beta shapes must be positive")

    def draw(self, rng):
        x = self.x_shift + self.x_scale * rng.beta(self.beta_a, self.beta_b)
        y = self.y_shift + self.y_scale * rng.beta(self.beta_a, self.beta_b)
        center = (float(x + self.offset[0]), float(y + self.offset[1]))
        return Nucleus(center=center, magnitude=self.magnitude, width=self.width)

    def admissible(self, nucleus):
        x, y = nucleus.center
        return 0.0 < x < 1.0 and 0.0 < y < 1.0


def member_rng(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def draw_nucleus(spec, rng):
    for _ in range(MAX_RESAMPLES):
        nucleus = spec.draw(rng)
        if spec.admissible(nucleus):
            return nucleus
    raise PriorSamplingError(f"no admissible nucleus after {MAX_RESAMPLES} draws")


def sample_nuclei(spec, n_ens, seed):
    return [draw_nucleus(spec, member_rng(seed, index)) for index in range(n_ens)]


def sample_prior(spec, disc, n_ens, seed):
    """Ensemble of `n_ens` undeformed members with sampled damage floors."""
    if n_ens < 2:
        raise PriorSamplingError("an ensemble needs at least two members")
    members = [nucleus.initial_state(disc) for nucleus in sample_nuclei(spec, n_ens, seed)]
    logger.info("Sampled %d prior members (seed %d)", n_ens, seed)
    return EnsembleState(members=members, seeds=[(seed, i) for i in range(n_ens)])
