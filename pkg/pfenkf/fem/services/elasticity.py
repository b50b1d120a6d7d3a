"""
Small-strain linear elasticity with a tension/compression energy split.

In 2D the volumetric part uses the in-plane trace and the in-plane bulk
modulus K = lambda + mu, so that Psi+ + Psi- always equals the plane
elastic energy. Strains and stresses travel in Voigt form
[exx, eyy, gxy] / [sxx, syy, sxy] inside the assembly; the tensor
entry point below converts to and from that form.
"""
from dataclasses import dataclass

import numpy as np

KINEMATICS = ('plane_strain', 'plane_stress')

_M = np.array([1.0, 1.0, 0.0])
_MM = np.outer(_M, _M)
_DEV = np.diag([1.0, 1.0, 0.5]) - 0.5 * _MM


@dataclass(frozen=True)
class MaterialParams:
    E: float
    nu: float
    Gc: float
    ell: float
    beta: float = 100.0
    residual_stiffness: float = 1e-8
    kinematics: str = 'plane_strain'

    def __post_init__(self):
        if self.E <= 0 or self.Gc <= 0 or self.ell <= 0 or self.beta <= 0:
            raise ValueError("E, Gc, ell and beta must be positive")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5)")
        if not 0.0 <= self.residual_stiffness < 1.0:
            raise ValueError("residual stiffness must lie in [0, 1)")
        if self.kinematics not in KINEMATICS:
            raise ValueError(f"kinematics must be one of {KINEMATICS}")

    @property
    def alpha(self):
        """Micromorphic penalty."""
        return self.beta * self.Gc / self.ell

    @property
    def mu(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def plane_lambda(self):
        if self.kinematics == 'plane_stress':
            return 2.0 * self.lam * self.mu / (self.lam + 2.0 * self.mu)
        return self.lam

    @property
    def plane_bulk_modulus(self):
        return self.plane_lambda + self.mu

    @property
    def bulk_modulus(self):
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))


@dataclass(frozen=True)
class StrainSplit:
    psi_pos: np.ndarray
    psi_neg: np.ndarray
    stress_pos: np.ndarray
    stress_neg: np.ndarray


@dataclass(frozen=True)
class VoigtSplit:
    psi_pos: np.ndarray
    psi_neg: np.ndarray
    stress_pos: np.ndarray
    stress_neg: np.ndarray
    tangent_pos: np.ndarray
    tangent_neg: np.ndarray


def voigt_split(strain, params: MaterialParams, dimension):
    """Split energies, stresses and tangents for a stack of Voigt strains of shape (..., n_voigt)."""
    strain = np.asarray(strain, dtype=float)
    if dimension == 1:
        e = strain[..., 0]
        zeros = np.zeros_like(e)
        stiffness = np.full(e.shape + (1, 1), params.E)
        return VoigtSplit(
            psi_pos=0.5 * params.E * e ** 2,
            psi_neg=zeros,
            stress_pos=params.E * strain,
            stress_neg=np.zeros_like(strain),
            tangent_pos=stiffness,
            tangent_neg=np.zeros_like(stiffness),
        )

    K = params.plane_bulk_modulus
    mu = params.mu
    trace = strain[..., 0] + strain[..., 1]
    trace_pos = np.maximum(trace, 0.0)
    trace_neg = np.maximum(-trace, 0.0)
    dev = np.stack([strain[..., 0] - 0.5 * trace,
                    strain[..., 1] - 0.5 * trace, 0.5 * strain[..., 2]], axis=-1)
    dev_norm2 = dev[..., 0] ** 2 + dev[..., 1] ** 2 + 2.0 * dev[..., 2] ** 2

    stress_pos = K * trace_pos[..., None] * _M + 2.0 * mu * dev
    stress_neg = -K * trace_neg[..., None] * _M
    heaviside_pos = (trace > 0.0).astype(float)[..., None, None]
    heaviside_neg = (trace < 0.0).astype(float)[..., None, None]
    return VoigtSplit(
        psi_pos=0.5 * K * trace_pos ** 2 + mu * dev_norm2,
        psi_neg=0.5 * K * trace_neg ** 2,
        stress_pos=stress_pos,
        stress_neg=stress_neg,
        tangent_pos=K * heaviside_pos * _MM + 2.0 * mu * _DEV,
        tangent_neg=K * heaviside_neg * _MM,
    )


def _tensor_to_voigt(strain):
    if strain.shape[-1] == 1:
        return strain[..., 0]
    return np.stack([strain[..., 0, 0], strain[..., 1, 1], strain[..., 0, 1] + strain[..., 1, 0]], axis=-1)


def _voigt_stress_to_tensor(stress, dimension):
    if dimension == 1:
        return stress[..., None]
    row0 = np.stack([stress[..., 0], stress[..., 2]], axis=-1)
    row1 = np.stack([stress[..., 2], stress[..., 1]], axis=-1)
    return np.stack([row0, row1], axis=-2)


def strain_energy_split(strain, params: MaterialParams):
    """Tension/compression split of a symmetric strain tensor stack of shape (..., d, d)."""
    strain = np.asarray(strain, dtype=float)
    dimension = strain.shape[-1]
    split = voigt_split(_tensor_to_voigt(strain), params, dimension)
    return StrainSplit(
        psi_pos=split.psi_pos,
        psi_neg=split.psi_neg,
        stress_pos=_voigt_stress_to_tensor(split.stress_pos, dimension),
        stress_neg=_voigt_stress_to_tensor(split.stress_neg, dimension),
    )


def elastic_energy_density(strain, params: MaterialParams):
    """Undamaged energy 0.5 eps:C:eps of a tensor stack."""
    strain = np.asarray(strain, dtype=float)
    if strain.shape[-1] == 1:
        return 0.5 * params.E * strain[..., 0, 0] ** 2
    trace = strain[..., 0, 0] + strain[..., 1, 1]
    return 0.5 * params.plane_lambda * trace ** 2 + params.mu * np.einsum('...ij,...ij->...', strain, strain)
