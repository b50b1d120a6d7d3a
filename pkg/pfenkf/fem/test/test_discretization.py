from django.test import SimpleTestCase
import numpy as np

from ..services.discretization import Discretization
from .factories import RodMeshFactory, SensMeshFactory


class TestDiscretization(SimpleTestCase):

    def test_weights_integrate_the_domain(self):
        assert np.isclose(Discretization(RodMeshFactory()).weights.sum(), 2.0)
        assert np.isclose(Discretization(SensMeshFactory()).weights.sum(), 1.0)

    def test_linear_displacement_gives_uniform_strain(self):
        mesh = SensMeshFactory()
        disc = Discretization(mesh)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        a_u = np.zeros(mesh.n_u_dofs)
        a_u[0::2] = 1e-3 * x + 2e-3 * y
        a_u[1::2] = -4e-3 * y
        expected = np.array([1e-3, -4e-3, 2e-3])
        assert np.allclose(disc.strains(a_u), expected)

    def test_rod_strain_and_gradient(self):
        mesh = RodMeshFactory(n_elements=5, interior_shift=0.2)
        disc = Discretization(mesh)
        a_u = 0.01 * (mesh.nodes[:, 0] + 1.0)
        assert np.allclose(disc.strains(a_u), 0.01)
        assert np.allclose(disc.gradients(a_u), 0.01)

    def test_quadrature_points_lie_in_their_element(self):
        mesh = SensMeshFactory()
        disc = Discretization(mesh)
        centroids = mesh.nodes[mesh.elements].mean(axis=1)
        assert np.allclose(disc.quadrature_points.mean(axis=1), centroids)

    def test_interpolation_of_constant_field(self):
        disc = Discretization(SensMeshFactory())
        assert np.allclose(disc.interpolate(np.full(disc.n_d, 0.3)), 0.3)
        assert np.isclose(disc.integrate(disc.interpolate(np.full(disc.n_d, 0.3))), 0.3)

    def test_dof_numbering(self):
        mesh = SensMeshFactory()
        disc = Discretization(mesh)
        assert disc.n_dofs == 3 * mesh.n_nodes
        element = mesh.elements[7]
        assert list(disc.u_dofs[7]) == [2 * element[0], 2 * element[0] + 1, 2 * element[1],
                                        2 * element[1] + 1, 2 * element[2], 2 * element[2] + 1]
        assert list(disc.d_dofs[7]) == list(mesh.n_u_dofs + element)
        rows, cols = disc.sparsity
        assert len(rows) == mesh.n_elements * 81
