"""AT2 constitutive functions and the closed-form local phase-field update."""
from typing import NamedTuple

import numpy as np

C_W = 2.0


class AT2Values(NamedTuple):
    g: np.ndarray
    dg: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    c_w: float


def at2_functions(phi):
    """Degradation g = (1 - phi)^2, crack density w = phi^2 and their derivatives."""
    phi = np.asarray(phi, dtype=float)
    return AT2Values(g=(1.0 - phi) ** 2, dg=-2.0 * (1.0 - phi), w=phi ** 2, dw=2.0 * phi, c_w=C_W)


def degradation(phi, residual_stiffness=0.0):
    """Degradation with a residual stiffness k: (1 - k) g(phi) + k."""
    values = at2_functions(phi)
    k = residual_stiffness
    return (1.0 - k) * values.g + k, (1.0 - k) * values.dg


def local_phase_update(psi_pos, d, phi_floor, params, length_scale=None):
    """
    Phase field minimizing the local energy for a given tensile energy,
    micromorphic value and irreversibility floor.
    """
    phi, _, _ = local_phase_update_with_derivatives(psi_pos, d, phi_floor, params, length_scale)
    return phi


def local_phase_update_with_derivatives(psi_pos, d, phi_floor, params, length_scale=None):
    """
    As `local_phase_update`, also returning d(phi)/d(psi_pos) and d(phi)/d(d).

    Both derivatives vanish where the floor or the upper bound is active.
    """
    ell = params.ell if length_scale is None else length_scale
    alpha = params.alpha
    psi_pos = np.asarray(psi_pos, dtype=float)
    d = np.asarray(d, dtype=float)
    denominator = 2.0 * psi_pos + alpha + params.Gc / ell
    raw = (2.0 * psi_pos + alpha * d) / denominator
    phi = np.minimum(np.maximum(raw, phi_floor), 1.0)
    free = (raw > phi_floor) & (raw < 1.0)
    dphi_dpsi = np.where(free, 2.0 * (1.0 - raw) / denominator, 0.0)
    dphi_dd = np.where(free, alpha / denominator, 0.0)
    return phi, dphi_dpsi, dphi_dd


def extrapolate_micromorphic(a_d_prev, a_d_prev2, dt, dt_prev):
    """
    Linear extrapolation of the micromorphic field to the current step.

    Falls back to the previous value when no history is available.
    """
    if a_d_prev2 is None or dt_prev is None or dt_prev <= 0.0:
        return np.array(a_d_prev, dtype=float)
    return a_d_prev + (dt / dt_prev) * (a_d_prev - a_d_prev2)
