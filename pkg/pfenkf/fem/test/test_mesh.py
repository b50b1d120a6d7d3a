from django.test import SimpleTestCase
import numpy as np
import pytest

from pfenkf.exceptions import MeshError
from ..services.discretization import Discretization
from ..services.mesh import Mesh, build_mesh_1d, build_mesh_sens
from .factories import RodMeshFactory, SensMeshFactory


class TestRodMesh(SimpleTestCase):

    def test_counts_and_boundaries(self):
        mesh = RodMeshFactory(n_elements=10)
        assert mesh.n_nodes == 11
        assert mesh.n_elements == 10
        assert mesh.n_dofs == 22
        assert list(mesh.boundaries['left']) == [0]
        assert list(mesh.boundaries['right']) == [10]
        assert np.allclose(mesh.element_measures, 0.2)

    def test_interior_shift_moves_only_interior_nodes(self):
        plain = RodMeshFactory(n_elements=10)
        shifted = RodMeshFactory(n_elements=10, interior_shift=0.2)
        assert shifted.nodes[0, 0] == -1.0
        assert shifted.nodes[-1, 0] == 1.0
        assert not np.any(np.isclose(shifted.nodes[1:-1, 0], plain.nodes[1:-1, 0]))
        assert np.all(shifted.element_measures > 0)

    def test_arrays_are_read_only(self):
        mesh = RodMeshFactory()
        with pytest.raises(ValueError):
            mesh.nodes[0, 0] = 5.0

    def test_rejects_inverted_elements(self):
        with pytest.raises(MeshError):
            Mesh(dimension=1, nodes=[[0.0], [1.0]], elements=[[1, 0]])

    def test_rejects_out_of_range_ids(self):
        with pytest.raises(MeshError):
            Mesh(dimension=1, nodes=[[0.0], [1.0]], elements=[[0, 2]])

    def test_rejects_boundary_set_off_its_side(self):
        with pytest.raises(MeshError):
            Mesh(dimension=1, nodes=[[0.0], [1.0]], elements=[[0, 1]], boundaries={'left': [1]})

    def test_two_elements(self):
        assert list(build_mesh_1d(2).nodes[:, 0]) == [-1.0, 0.0, 1.0]
        with pytest.raises(MeshError):
            build_mesh_1d(1)

    def test_rejects_bad_shift(self):
        with pytest.raises(MeshError):
            build_mesh_1d(10, interior_shift=0.5)


class TestSensMesh(SimpleTestCase):

    def setUp(self):
        self.mesh = SensMeshFactory()

    def test_grid_and_slit_copies(self):
        # 8 x 9 grid plus copies of the two slit nodes left of the tip
        assert self.mesh.n_nodes == 74
        assert len(self.mesh.slit_pairs) == 2
        lower, upper = self.mesh.slit_pairs.T
        assert np.allclose(self.mesh.nodes[lower], self.mesh.nodes[upper])
        assert np.allclose(self.mesh.nodes[lower, 1], 0.5)
        assert np.all(self.mesh.nodes[lower, 0] < 0.5)

    def test_area_is_unit_square(self):
        assert np.all(self.mesh.element_measures > 0)
        assert np.isclose(self.mesh.element_measures.sum(), 1.0)

    def test_no_element_spans_the_slit(self):
        lower, upper = self.mesh.slit_pairs.T
        touches_lower = np.isin(self.mesh.elements, lower).any(axis=1)
        touches_upper = np.isin(self.mesh.elements, upper).any(axis=1)
        assert not np.any(touches_lower & touches_upper)
        assert touches_lower.any() and touches_upper.any()

    def test_boundary_sets(self):
        nodes = self.mesh.nodes
        assert np.allclose(nodes[self.mesh.boundaries['top'], 1], 1.0)
        assert np.allclose(nodes[self.mesh.boundaries['bottom'], 1], 0.0)
        # both faces of the slit mouth sit on the left edge
        assert len(self.mesh.boundaries['left']) == 10

    def test_refinement_band_uses_fine_spacing(self):
        mesh = build_mesh_sens(0.1, 0.015)
        centroids = mesh.nodes[mesh.elements].mean(axis=1)
        in_band = (centroids[:, 0] > 0.5) & (centroids[:, 1] < 0.6)
        h = np.sqrt(2.0 * mesh.element_measures)
        assert np.all(h[in_band] <= 0.015 + 1e-12)
        assert 4000 <= mesh.n_dofs <= 8000

    def test_opening_above_the_slit_is_strain_free_away_from_the_tip(self):
        mesh = self.mesh
        disc = Discretization(mesh)
        nodes = mesh.nodes
        lifted = set(mesh.slit_pairs[:, 1])
        lifted.update(np.flatnonzero((nodes[:, 1] > 0.5 + 1e-12) & (nodes[:, 0] < 0.5 - 1e-12)))
        a_u = np.zeros(mesh.n_u_dofs)
        for node in lifted:
            a_u[mesh.u_dof(node, 1)] = 0.01
        strains = disc.strains(a_u)
        left_of_tip = nodes[mesh.elements, 0].max(axis=1) < 0.5 - 1e-12
        assert left_of_tip.any()
        assert np.allclose(strains[left_of_tip], 0.0, atol=1e-12)

    def test_variant_meshes_share_no_interior_nodes(self):
        filter_mesh = build_mesh_sens(0.25, 0.1, diagonal='right')
        truth_mesh = build_mesh_sens(0.25, 0.1 * 2.0 / 3.0, diagonal='left')

        def band_nodes(mesh):
            inside = (mesh.nodes[:, 0] > 0.5 + 1e-9) & (mesh.nodes[:, 0] < 1.0 - 1e-9) \
                & (mesh.nodes[:, 1] > 1e-9) & (mesh.nodes[:, 1] < 0.5 - 1e-9)
            return {tuple(np.round(p, 9)) for p in mesh.nodes[inside]}

        assert band_nodes(filter_mesh)
        assert not band_nodes(filter_mesh) & band_nodes(truth_mesh)

    def test_rejects_unknown_diagonal(self):
        with pytest.raises(MeshError):
            build_mesh_sens(0.25, 0.1, diagonal='cross')
