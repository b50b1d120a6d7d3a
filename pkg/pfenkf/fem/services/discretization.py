from functools import cached_property

import numpy as np

from .mesh import Mesh
from .quadrature import QuadratureRule, quadrature_rule


class Discretization:
    """
    Per-element kinematics of a mesh under a quadrature rule.

    Everything that depends only on geometry is computed once: shape
    function gradients, strain-displacement matrices, quadrature weights
    scaled by the element measure and the physical quadrature points.
    DOF numbering follows the mesh: displacement component c of node i is
    `i * dim + c`, the micromorphic value of node i is `n_u + i`.
    """

    def __init__(self, mesh: Mesh, quadrature: QuadratureRule = None):
        self.mesh = mesh
        self.quadrature = quadrature or quadrature_rule(mesh.dimension)
        self.dimension = mesh.dimension
        self.nodes_per_element = mesh.nodes_per_element
        self.n_voigt = 1 if self.dimension == 1 else 3
        self.n_u = mesh.n_u_dofs
        self.n_d = mesh.n_nodes
        self.n_dofs = mesh.n_dofs

    @property
    def n_elements(self):
        return self.mesh.n_elements

    @property
    def n_qp(self):
        return self.quadrature.n_points

    @cached_property
    def shape_values(self):
        """(n_qp, npe) linear basis values at the reference quadrature points."""
        xi = self.quadrature.points
        return np.column_stack([1.0 - xi.sum(axis=1), xi])

    @cached_property
    def measures(self):
        return self.mesh.element_measures

    @cached_property
    def weights(self):
        """(n_el, n_qp) physical quadrature weights."""
        scale = self.measures / self.quadrature.reference_measure
        return scale[:, None] * self.quadrature.weights[None, :]

    @cached_property
    def shape_gradients(self):
        """(n_el, npe, dim) constant gradients of the nodal basis."""
        p = self.mesh.nodes[self.mesh.elements]
        if self.dimension == 1:
            h = p[:, 1, 0] - p[:, 0, 0]
            return np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
        jac = np.stack([p[:, 1, :] - p[:, 0, :], p[:, 2, :] - p[:, 0, :]], axis=2)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return np.einsum('kr,erd->ekd', ref, np.linalg.inv(jac))

    @cached_property
    def strain_matrices(self):
        """(n_el, n_voigt, npe * dim) strain-displacement matrices."""
        grads = self.shape_gradients
        if self.dimension == 1:
            return grads.transpose(0, 2, 1).copy()
        n_el, npe = grads.shape[0], self.nodes_per_element
        B = np.zeros((n_el, 3, 2 * npe))
        B[:, 0, 0::2] = grads[:, :, 0]
        B[:, 1, 1::2] = grads[:, :, 1]
        B[:, 2, 0::2] = grads[:, :, 1]
        B[:, 2, 1::2] = grads[:, :, 0]
        return B

    @cached_property
    def quadrature_points(self):
        """(n_el, n_qp, dim) physical coordinates of the quadrature points."""
        p = self.mesh.nodes[self.mesh.elements]
        return np.einsum('qk,ekd->eqd', self.shape_values, p)

    @cached_property
    def laplacian_matrices(self):
        """(n_el, npe, npe) element integrals of grad N_k . grad N_l."""
        grads = self.shape_gradients
        return self.measures[:, None, None] * np.einsum('ekd,eld->ekl', grads, grads)

    @cached_property
    def mass_matrices(self):
        """(n_el, npe, npe) element integrals of N_k N_l under the quadrature rule."""
        N = self.shape_values
        return np.einsum('eq,qk,ql->ekl', self.weights, N, N)

    @cached_property
    def u_dofs(self):
        elements = self.mesh.elements
        dim = self.dimension
        return (elements[:, :, None] * dim + np.arange(dim)).reshape(len(elements), -1)

    @cached_property
    def d_dofs(self):
        return self.n_u + self.mesh.elements

    @cached_property
    def element_dofs(self):
        """Coupled element DOF list: displacement block then micromorphic block."""
        return np.hstack([self.u_dofs, self.d_dofs])

    @cached_property
    def sparsity(self):
        """Row and column indices of the coupled element matrices in COO order."""
        dofs = self.element_dofs
        n = dofs.shape[1]
        rows = np.repeat(dofs, n, axis=1).ravel()
        cols = np.tile(dofs, (1, n)).ravel()
        return rows, cols

    def strains(self, a_u):
        """(n_el, n_voigt) constant element strains."""
        return np.einsum('evk,ek->ev', self.strain_matrices, np.asarray(a_u)[self.u_dofs])

    def interpolate(self, nodal):
        """(n_el, n_qp) values of a nodal scalar field at the quadrature points."""
        return np.einsum('qk,ek->eq', self.shape_values, np.asarray(nodal)[self.mesh.elements])

    def gradients(self, nodal):
        """(n_el, dim) constant gradients of a nodal scalar field."""
        return np.einsum('ekd,ek->ed', self.shape_gradients, np.asarray(nodal)[self.mesh.elements])

    def integrate(self, values_q):
        """Integral over the domain of a quadrature-point field."""
        return float(np.sum(self.weights * values_q))

    def __repr__(self):
        return f"Discretization({self.mesh.name!r}, n_elements={self.n_elements}, n_dofs={self.n_dofs})"
