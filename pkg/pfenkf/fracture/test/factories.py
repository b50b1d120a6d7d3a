import factory
import numpy as np

from pfenkf.fem.services.discretization import Discretization
from pfenkf.fem.test.factories import RodMeshFactory, SensMeshFactory
from ..services.boundary import LoadSchedule
from ..services.solver import NewtonSettings
from ..services.state import FieldState


class RodDiscretizationFactory(factory.Factory):

    class Meta:
        model = Discretization

    mesh = factory.SubFactory(RodMeshFactory)


class SensDiscretizationFactory(factory.Factory):

    class Meta:
        model = Discretization

    mesh = factory.SubFactory(SensMeshFactory)


class NewtonSettingsFactory(factory.Factory):

    class Meta:
        model = NewtonSettings

    tolerance = 1e-10
    max_iterations = 25


class LoadScheduleFactory(factory.Factory):

    class Meta:
        model = LoadSchedule

    n_steps = 10
    segments = factory.LazyFunction(lambda: [(1, 1e-3)])


def displaced_state(disc, rng, strain=0.01, noise=1e-4, d_level=0.3):
    """A state whose micromorphic field equals its own extrapolation reference."""
    mesh = disc.mesh
    a_u = strain * np.repeat(mesh.nodes[:, 0], mesh.dimension) + noise * rng.standard_normal(disc.n_u)
    a_d = d_level + 0.1 * np.sin(3.0 * mesh.nodes[:, 0])
    phi = np.zeros((disc.n_elements, disc.n_qp))
    return FieldState(a_u=a_u, a_d=a_d, phi_q=phi, phi_q_prev=phi, a_d_prev=a_d, a_d_prev2=a_d)
