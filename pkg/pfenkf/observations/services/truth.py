"""
Synthetic ground truth and the measurements drawn from it.

The truth is a single deterministic run on a finer mesh that shares no
interior nodes with the filter mesh, started from a fixed nucleus instead
of a prior draw.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from pfenkf.ensemble.services.prior import Nucleus
from pfenkf.exceptions import ObservationError
from pfenkf.fem.services.basis import basis_matrix
from pfenkf.fem.services.discretization import Discretization
from pfenkf.fem.services.mesh import build_mesh_1d, build_mesh_sens
from pfenkf.fracture.services.assembly import reaction_force
from pfenkf.fracture.services.boundary import boundary_conditions
from pfenkf.fracture.services.solver import run_load_path
from pfenkf.fracture.services.state import FieldState

logger = logging.getLogger(__name__)

TRUTH_SHIFT_1D = 0.25
TRUTH_REFINEMENT_2D = 2.0 / 3.0


def truth_mesh_1d(n_elements, domain=(-1.0, 1.0)):
    """Twice as many elements as the filter mesh, interior nodes moved off the regular grid."""
    return build_mesh_1d(2 * n_elements, domain, interior_shift=TRUTH_SHIFT_1D, name='rod-truth')


def truth_mesh_sens(h_coarse, h_fine, refine_band=None):
    return build_mesh_sens(h_coarse, h_fine * TRUTH_REFINEMENT_2D, refine_band,
                           diagonal='left', name='sens-truth')


def truth_nucleus(dimension, width):
    if dimension == 1:
        return Nucleus(center=(0.57,), magnitude=0.7, width=width)
    return Nucleus(center=(0.56, 0.45), magnitude=0.75, width=width)


@dataclass(frozen=True, eq=False)
class DataBatch:
    """`observations` holds one row per repeated measurement, one column per channel."""
    step: int
    observations: np.ndarray

    def __post_init__(self):
        observations = np.array(self.observations, dtype=float)
        if observations.ndim != 2 or not observations.size:
            raise ObservationError("a data batch needs a non-empty (n_obs, n_channels) array")
        observations.setflags(write=False)
        object.__setattr__(self, 'observations', observations)

    @property
    def n_obs(self):
        return self.observations.shape[0]

    @property
    def n_channels(self):
        return self.observations.shape[1]

    @property
    def total(self):
        return self.observations.sum(axis=0)

    @property
    def mean(self):
        return self.observations.mean(axis=0)


@dataclass
class GroundTruth:
    disc: Discretization
    params: object
    nucleus: Nucleus
    states: Dict[int, FieldState] = field(default_factory=dict)
    forces: List[tuple] = field(default_factory=list)

    @property
    def mesh(self):
        return self.disc.mesh

    @property
    def last_step(self):
        return max(self.states) if self.states else 0

    def state(self, step):
        try:
            return self.states[step]
        except KeyError:
            raise ObservationError(f"the ground truth was not solved up to step {step}")

    def displacement_at(self, sensors, step):
        """Truth displacement interpolated at `sensors`, flattened sensor-major."""
        dim = self.mesh.dimension
        sensors = np.asarray(sensors, dtype=float).reshape(-1, dim)
        u = self.state(step).a_u.reshape(self.mesh.n_nodes, dim)
        return np.asarray(basis_matrix(self.mesh, sensors) @ u).ravel()

    def force(self, step):
        for entry in self.forces:
            if entry[0] == step:
                return entry[2]
        raise ObservationError(f"no truth reaction force for step {step}")


def solve_ground_truth(mesh, params, nucleus, schedule, settings, n_steps=None,
                       keep_steps: Optional[set] = None):
    """
    Deterministic trajectory from the fixed `nucleus`; the states of
    `keep_steps` (all steps when None) and every reaction force are stored.
    """
    disc = Discretization(mesh)
    bcs = boundary_conditions(mesh)
    truth = GroundTruth(disc=disc, params=params, nucleus=nucleus)
    state = nucleus.initial_state(disc)

    def record(current):
        if keep_steps is None or current.step in keep_steps:
            truth.states[current.step] = current
        truth.forces.append((current.step, current.u_D, reaction_force(current, disc, params, bcs)))
        if current.step % 50 == 0:
            logger.info("Ground truth reached step %d (u_D = %.4e)", current.step, current.u_D)

    record(state)
    run_load_path(state, disc, params, settings, bcs, schedule, n_steps=n_steps, callback=record)
    return truth


def generate_data(truth, sensors, rho, sigma_e, n_obs, seed, step):
    """
    `n_obs` noisy measurements of the truth at `step`; the noise stream
    depends on (seed, step) only.
    """
    if n_obs < 1:
        raise ObservationError("n_obs must be at least 1")
    values = rho * truth.displacement_at(sensors, step)
    rng = np.random.default_rng([int(seed), int(step)])
    noise = rng.standard_normal((n_obs, len(values)))
    return DataBatch(step=step, observations=values[None, :] + sigma_e * noise)
