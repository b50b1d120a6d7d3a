"""
Projection of an analysed member back onto the phase-field model.

Without irreversibility floor, the micromorphic field is first solved at
the enlarged scale L for the analysed displacement, the displacement is
then re-equilibrated against it, and the fields are brought back to the
model scale ell through a short staggered loop. Every micromorphic solve
keeps the previous iterate as reference of the local phase update, which
makes it a single linear solve.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from pfenkf.exceptions import AssemblyError, NewtonConvergenceError, RegularizationError
from pfenkf.fracture.services.assembly import phase_field
from pfenkf.fracture.services.solver import newton_iterate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegularizationSettings:
    length: float
    n_stagger: int = 4
    proximal_weight: float = 0.0

    def __post_init__(self):
        if self.n_stagger < 1:
            raise ValueError("n_stagger must be at least 1")
        if self.length <= 0:
            raise ValueError("regularization length must be positive")
        if self.proximal_weight < 0:
            raise ValueError("proximal weight must not be negative")


@dataclass
class RegularizationTrace:
    stages: List[Tuple[str, int, float]] = field(default_factory=list)
    retried: bool = False

    @property
    def iterations(self):
        return sum(iterations for _, iterations, _ in self.stages)

    @property
    def max_residual(self):
        return max((norm for _, _, norm in self.stages), default=0.0)


def micromorphic_mass(disc):
    """Consistent mass matrix of the micromorphic block, embedded in the full DOF space."""
    dofs = disc.d_dofs
    n = dofs.shape[1]
    rows = np.repeat(dofs, n, axis=1).ravel()
    cols = np.tile(dofs, (1, n)).ravel()
    return sp.csr_matrix((disc.mass_matrices.ravel(), (rows, cols)), shape=(disc.n_dofs, disc.n_dofs))


def _staggered(member, disc, params, newton, bcs, settings, n_stagger, trace):
    zero_floor = np.zeros_like(member.phi_q)
    a_u, a_d = np.array(member.a_u), np.array(member.a_d)

    def solve(stage, unknowns, length, d_ref, proximal=None):
        try:
            u, d, newton_trace = newton_iterate(a_u, a_d, d_ref, zero_floor, disc, params, newton, bcs,
                                                member.u_D, length, unknowns, proximal=proximal, stage=stage)
        except (NewtonConvergenceError, AssemblyError) as error:
            raise RegularizationError(stage, error)
        trace.stages.append((stage, newton_trace.iterations, newton_trace.residual_norms[-1]))
        logger.debug("Regularization stage %s: %d iteration(s)", stage, newton_trace.iterations)
        return u, d

    proximal = None
    if settings.proximal_weight > 0:
        proximal = (settings.proximal_weight * micromorphic_mass(disc), np.concatenate([a_u, a_d]))
    a_u, a_d = solve('d-L', 'd', settings.length, a_d, proximal)
    a_u, a_d = solve('u-L', 'u', settings.length, a_d)
    a_u, a_d = solve('d-ell', 'd', params.ell, a_d)
    for k in range(n_stagger):
        a_u, a_d = solve(f'u-ell-{k + 1}', 'u', params.ell, a_d)
        a_u, a_d = solve(f'd-ell-{k + 1}', 'd', params.ell, a_d)

    phi = phase_field(a_u, a_d, zero_floor, disc, params)
    phi = np.clip(np.maximum(phi, member.phi_q_prev), 0.0, 1.0)
    regularized = replace(member, a_u=a_u, a_d=a_d, phi_q=phi)
    return regularized.reset_history()


def regularize_member_traced(member, disc, params, newton, bcs, settings):
    """
    As `regularize_member`, also returning the per-stage iteration counts.

    A failed sub-solve is retried once from the analysed state with twice
    the staggered passes; a second failure raises RegularizationError.
    """
    if settings.length <= params.ell:
        raise ValueError(f"regularization length {settings.length} must exceed ell = {params.ell}")
    trace = RegularizationTrace()
    try:
        return _staggered(member, disc, params, newton, bcs, settings, settings.n_stagger, trace), trace
    except RegularizationError as error:
        logger.warning("Regularization failed at stage %s, retrying with %d staggered passes",
                       error.stage, 2 * settings.n_stagger)
    trace = RegularizationTrace(retried=True)
    return _staggered(member, disc, params, newton, bcs, settings, 2 * settings.n_stagger, trace), trace


def regularize_member(member, disc, params, newton, bcs, settings):
    """Member on the phase-field model manifold with 0 <= phi <= 1 and its damage history kept."""
    return regularize_member_traced(member, disc, params, newton, bcs, settings)[0]
