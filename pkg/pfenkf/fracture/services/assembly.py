"""
Residual, tangent and energy of the coupled displacement / micromorphic system.

The phase field is not an unknown: it is recovered at every quadrature
point from the local closed-form update, driven by the current strain and
a micromorphic reference value `d_ref`. During load stepping `d_ref` is
the extrapolated micromorphic field, so the phase field depends on the
displacement only and the d-u coupling block of the tangent vanishes.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from pfenkf.exceptions import AssemblyError
from pfenkf.fem.services.elasticity import voigt_split

from .at2 import C_W, at2_functions, degradation, local_phase_update_with_derivatives

logger = logging.getLogger(__name__)


class PhaseEvaluation(NamedTuple):
    psi_pos: np.ndarray
    psi_neg: np.ndarray
    stress_pos: np.ndarray
    stress_neg: np.ndarray
    tangent_pos: np.ndarray
    tangent_neg: np.ndarray
    phi: np.ndarray
    dphi_dpsi: np.ndarray
    g: np.ndarray
    dg: np.ndarray


def evaluate_phase(a_u, d_ref, phi_floor, disc, params, length_scale=None, phase=None):
    """
    Element energies and stresses plus the quadrature-point phase field they imply.

    A given `phase` is used as is, with zero sensitivity to the strain.
    """
    split = voigt_split(disc.strains(a_u), params, disc.dimension)
    if phase is None:
        d_ref_q = disc.interpolate(d_ref)
        phi, dphi_dpsi, _ = local_phase_update_with_derivatives(
            split.psi_pos[:, None], d_ref_q, phi_floor, params, length_scale
        )
    else:
        phi = np.asarray(phase, dtype=float)
        dphi_dpsi = np.zeros_like(phi)
    g, dg = degradation(phi, params.residual_stiffness)
    return PhaseEvaluation(
        psi_pos=split.psi_pos, psi_neg=split.psi_neg,
        stress_pos=split.stress_pos, stress_neg=split.stress_neg,
        tangent_pos=split.tangent_pos, tangent_neg=split.tangent_neg,
        phi=phi, dphi_dpsi=dphi_dpsi, g=g, dg=dg,
    )


def phase_field(a_u, d_ref, phi_floor, disc, params, length_scale=None):
    return evaluate_phase(a_u, d_ref, phi_floor, disc, params, length_scale).phi


def _check_finite(element_values):
    bad = ~np.all(np.isfinite(element_values.reshape(len(element_values), -1)), axis=1)
    if np.any(bad):
        raise AssemblyError(np.argmax(bad))


def _scatter(disc, element_vectors):
    dofs = disc.element_dofs
    return np.bincount(dofs.ravel(), weights=element_vectors.ravel(), minlength=disc.n_dofs)


def _displacement_forces(disc, stress_pos, stress_neg, g):
    weights = disc.weights
    effective = stress_pos * (weights * g).sum(axis=1)[:, None] + stress_neg * weights.sum(axis=1)[:, None]
    return np.einsum('evk,ev->ek', disc.strain_matrices, effective)


def _micromorphic_forces(disc, a_d, phi, params, length_scale):
    coefficient = 2.0 * params.Gc * length_scale / C_W
    a_d_e = np.asarray(a_d)[disc.mesh.elements]
    gap = phi - disc.interpolate(a_d)
    return (
        coefficient * np.einsum('ekl,el->ek', disc.laplacian_matrices, a_d_e)
        - params.alpha * np.einsum('eq,qk->ek', disc.weights * gap, disc.shape_values)
    )


def coupled_system(a_u, a_d, d_ref, phi_floor, disc, params, length_scale=None, tangent=True, phase=None):
    """
    Full residual vector and (optionally) the sparse tangent over all DOFs.

    With `phase` the phase field is frozen and the two blocks decouple.
    Returns (residual, tangent or None, phase evaluation).
    """
    ell = params.ell if length_scale is None else length_scale
    ev = evaluate_phase(a_u, d_ref, phi_floor, disc, params, ell, phase)

    r_u = _displacement_forces(disc, ev.stress_pos, ev.stress_neg, ev.g)
    r_d = _micromorphic_forces(disc, a_d, ev.phi, params, ell)
    element_residuals = np.hstack([r_u, r_d])
    _check_finite(element_residuals)
    residual = _scatter(disc, element_residuals)
    if not tangent:
        return residual, None, ev

    weights = disc.weights
    B = disc.strain_matrices
    N = disc.shape_values
    n_eu = B.shape[2]
    npe = disc.nodes_per_element

    w_total = weights.sum(axis=1)[:, None, None]
    w_g = (weights * ev.g).sum(axis=1)[:, None, None]
    w_coupling = (weights * ev.dg * ev.dphi_dpsi).sum(axis=1)[:, None, None]
    material = (
        w_g * ev.tangent_pos + w_total * ev.tangent_neg
        + w_coupling * np.einsum('ev,ew->evw', ev.stress_pos, ev.stress_pos)
    )
    k_uu = np.einsum('evi,evw,ewj->eij', B, material, B)

    coefficient = 2.0 * params.Gc * ell / C_W
    k_dd = coefficient * disc.laplacian_matrices + params.alpha * disc.mass_matrices

    sigma_B = np.einsum('ev,evj->ej', ev.stress_pos, B)
    n_weighted = np.einsum('eq,qk->ek', weights * ev.dphi_dpsi, N)
    k_du = -params.alpha * np.einsum('ek,ej->ekj', n_weighted, sigma_B)

    element_matrices = np.zeros((disc.n_elements, n_eu + npe, n_eu + npe))
    element_matrices[:, :n_eu, :n_eu] = k_uu
    element_matrices[:, n_eu:, n_eu:] = k_dd
    element_matrices[:, n_eu:, :n_eu] = k_du
    _check_finite(element_matrices)

    rows, cols = disc.sparsity
    matrix = sp.csr_matrix((element_matrices.ravel(), (rows, cols)), shape=(disc.n_dofs, disc.n_dofs))
    return residual, matrix, ev


def _resolve(state, phi_floor, d_ref):
    floor = state.phi_q_prev if phi_floor is None else phi_floor
    reference = state.extrapolated_micromorphic() if d_ref is None else d_ref
    return floor, reference


def assemble_residual(state, disc, params, *, phi_floor=None, length_scale=None, d_ref=None, bcs=None):
    """
    Displacement and micromorphic residuals (R_u, R_d) at `state`.

    The irreversibility floor defaults to the state's previous phase field
    and `d_ref` to the extrapolated micromorphic field. With `bcs` the rows
    of constrained displacement DOFs are dropped.
    """
    floor, reference = _resolve(state, phi_floor, d_ref)
    residual, _, _ = coupled_system(state.a_u, state.a_d, reference, floor, disc, params, length_scale,
                                    tangent=False)
    r_u, r_d = residual[:disc.n_u], residual[disc.n_u:]
    if bcs is not None:
        r_u = np.delete(r_u, bcs.dofs)
    return r_u, r_d


def assemble_tangent(state, disc, params, *, phi_floor=None, length_scale=None, d_ref=None, bcs=None):
    """Sparse consistent tangent; with `bcs` restricted to the free DOFs."""
    floor, reference = _resolve(state, phi_floor, d_ref)
    _, matrix, _ = coupled_system(state.a_u, state.a_d, reference, floor, disc, params, length_scale)
    if bcs is not None:
        free = bcs.free_dofs(disc.n_dofs)
        matrix = matrix[free][:, free]
    return matrix


def discrete_energy(state, disc, params, *, phi_floor=None, length_scale=None, d_ref=None):
    """Total potential whose gradient the residual is, for fixed floor and `d_ref`."""
    ell = params.ell if length_scale is None else length_scale
    floor, reference = _resolve(state, phi_floor, d_ref)
    ev = evaluate_phase(state.a_u, reference, floor, disc, params, ell)
    d_q = disc.interpolate(state.a_d)
    grad_d = disc.gradients(state.a_d)
    w = at2_functions(ev.phi).w
    density = (
        ev.g * ev.psi_pos[:, None] + ev.psi_neg[:, None]
        + params.Gc / (C_W * ell) * w
        + 0.5 * params.alpha * (ev.phi - d_q) ** 2
    )
    gradient_term = params.Gc * ell / C_W * np.sum(disc.measures * np.sum(grad_d ** 2, axis=1))
    return disc.integrate(density) + float(gradient_term)


def internal_force(a_u, phi_q, disc, params):
    """Displacement residual for a given quadrature-point phase field."""
    split = voigt_split(disc.strains(a_u), params, disc.dimension)
    g, _ = degradation(phi_q, params.residual_stiffness)
    r_u = _displacement_forces(disc, split.stress_pos, split.stress_neg, g)
    return np.bincount(disc.u_dofs.ravel(), weights=r_u.ravel(), minlength=disc.n_u)


def reaction_force(state, disc, params, bcs, phi_q: Optional[np.ndarray] = None):
    """Sum of reactions over the loaded DOFs using the stored phase field."""
    phi = state.phi_q if phi_q is None else phi_q
    return float(internal_force(state.a_u, phi, disc, params)[bcs.loaded_dofs].sum())
