"""
Newton iterations and load stepping for one forward model.

Dirichlet values are imposed on the iterate and the linearized system is
solved on the free DOFs only. A load step whose Newton solve fails is
retried with the increment split into 2, 4, ... equal substeps; when every
cut fails, the full increment is solved by the staggered scheme, which
follows the abrupt loss of stiffness at a crack step.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import scipy.sparse.linalg as spla

from pfenkf.exceptions import AssemblyError, LoadStepError, NewtonConvergenceError

from .assembly import coupled_system, phase_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NewtonSettings:
    tolerance: float = 1e-8
    relative_tolerance: float = 1e-10
    max_iterations: int = 25
    line_search: bool = False
    max_cuts: int = 4
    # 0 disables the staggered fallback
    stagger_max_iterations: int = 2000
    stagger_tolerance: float = 1e-6


@dataclass
class NewtonTrace:
    residual_norms: List[float] = field(default_factory=list)

    @property
    def iterations(self):
        """Linear solves performed (the first entry is the initial residual)."""
        return max(len(self.residual_norms) - 1, 0)


def newton_iterate(a_u, a_d, d_ref, phi_floor, disc, params, settings, bcs, u_D,
                   length_scale=None, unknowns='all', proximal=None, stage=None, phase=None):
    """
    Solve R(a) = 0 for the unknowns in the `unknowns` block ('all', 'u' or 'd').

    `proximal` is an optional (matrix, target) pair adding
    matrix @ (a - target) to the residual and `matrix` to the tangent.
    `phase` freezes the quadrature-point phase field.
    Returns (a_u, a_d, trace).
    """
    vector = np.concatenate([a_u, a_d]).astype(float)
    vector[bcs.dofs] = bcs.values(u_D)
    free = bcs.free_dofs(disc.n_dofs, unknowns, disc.n_u)
    trace = NewtonTrace()

    def evaluate(candidate, tangent):
        residual, matrix, _ = coupled_system(
            candidate[:disc.n_u], candidate[disc.n_u:], d_ref, phi_floor, disc, params, length_scale, tangent,
            phase,
        )
        if proximal is not None:
            operator, target = proximal
            residual = residual + operator @ (candidate - target)
            if matrix is not None:
                matrix = matrix + operator
        return residual, matrix

    residual, matrix = evaluate(vector, True)
    first_norm = None
    for iteration in range(settings.max_iterations + 1):
        norm = float(np.linalg.norm(residual[free]))
        trace.residual_norms.append(norm)
        if first_norm is None:
            first_norm = norm
        if not np.isfinite(norm):
            raise NewtonConvergenceError(norm, trace.residual_norms, stage)
        if norm <= settings.tolerance or (iteration > 0 and norm <= settings.relative_tolerance * first_norm):
            break
        if iteration == settings.max_iterations:
            raise NewtonConvergenceError(norm, trace.residual_norms, stage)

        reduced = matrix[free][:, free].tocsc()
        try:
            step = spla.spsolve(reduced, -residual[free])
        except RuntimeError:
            raise NewtonConvergenceError(norm, trace.residual_norms, stage)
        if not np.all(np.isfinite(step)):
            raise NewtonConvergenceError(norm, trace.residual_norms, stage)

        scale = 1.0
        candidate = vector.copy()
        candidate[free] += step
        if settings.line_search:
            for _ in range(6):
                trial_residual, _ = evaluate(candidate, False)
                if np.linalg.norm(trial_residual[free]) < norm:
                    break
                scale *= 0.5
                candidate = vector.copy()
                candidate[free] += scale * step
        vector = candidate
        residual, matrix = evaluate(vector, True)

    logger.debug("Newton %s converged in %d iterations (|R| = %.3e)",
                 stage or unknowns, trace.iterations, trace.residual_norms[-1])
    return vector[:disc.n_u], vector[disc.n_u:], trace


def newton_solve(state, disc, params, settings, bcs, *, phi_floor=None, d_ref=None, length_scale=None,
                 unknowns='all', stage=None):
    """
    Converge `state` at its load level and recompute its phase field.

    Defaults: floor = state.phi_q_prev, d_ref = extrapolated micromorphic field.
    """
    floor = state.phi_q_prev if phi_floor is None else phi_floor
    reference = state.extrapolated_micromorphic() if d_ref is None else d_ref
    a_u, a_d, _ = newton_iterate(state.a_u, state.a_d, reference, floor, disc, params, settings, bcs,
                                 state.u_D, length_scale, unknowns, stage=stage)
    phi = phase_field(a_u, reference, floor, disc, params, length_scale)
    return replace(state, a_u=a_u, a_d=a_d, phi_q=phi)


def staggered_solve(state, disc, params, settings, bcs, stage='staggered'):
    """
    Converge `state` by alternating (u, d) solves with the phase field frozen
    and local phase-field updates, until the largest change of the phase
    field is below `settings.stagger_tolerance`.

    Uses the same floor and extrapolated reference as `newton_solve`, so a
    converged result is a solution of the same discrete problem.
    """
    floor = state.phi_q_prev
    reference = state.extrapolated_micromorphic()
    a_u, a_d = state.a_u, state.a_d
    phi = np.maximum(state.phi_q, floor)
    changes = []
    for _ in range(settings.stagger_max_iterations):
        a_u, a_d, _ = newton_iterate(a_u, a_d, reference, floor, disc, params, settings, bcs, state.u_D,
                                     stage=stage, phase=phi)
        updated = phase_field(a_u, reference, floor, disc, params)
        changes.append(float(np.max(np.abs(updated - phi))))
        phi = updated
        if changes[-1] <= settings.stagger_tolerance:
            logger.debug("Staggered solve converged in %d iterations", len(changes))
            return replace(state, a_u=a_u, a_d=a_d, phi_q=phi)
    raise NewtonConvergenceError(changes[-1] if changes else np.inf, changes, stage)


def _converged(current, previous, du):
    return replace(current, du=du, du_prev=previous.du, phi_q_prev=previous.phi_q,
                   a_d_prev=previous.a_d, a_d_prev2=previous.a_d_prev)


def advance(state, disc, params, settings, bcs, du):
    """
    Apply one load increment `du` and return the converged state of the next step.

    The increment is cut into 2**k substeps (k <= settings.max_cuts) when
    Newton fails, then solved by `staggered_solve`; LoadStepError is raised
    when every attempt fails.
    """
    step = state.step + 1
    last_error: Optional[Exception] = None
    for cut in range(settings.max_cuts + 1):
        n_sub = 2 ** cut
        try:
            current = state
            for _ in range(n_sub):
                current = newton_solve(current.trial(du / n_sub, step=step), disc, params, settings, bcs)
            if cut:
                logger.info("Load step %d converged after %d cut(s)", step, cut)
            return _converged(current, state, du)
        except (NewtonConvergenceError, AssemblyError) as error:
            last_error = error
            logger.warning("Load step %d failed with %d substep(s): %s", step, n_sub, error)

    if settings.stagger_max_iterations > 0:
        try:
            current = staggered_solve(state.trial(du, step=step), disc, params, settings, bcs)
            logger.info("Load step %d converged with the staggered scheme", step)
            return _converged(current, state, du)
        except (NewtonConvergenceError, AssemblyError) as error:
            last_error = error
            logger.warning("Load step %d failed with the staggered scheme: %s", step, error)
    raise LoadStepError(step, last_error)


def run_load_path(state, disc, params, settings, bcs, schedule, n_steps=None, callback=None):
    """Advance through `schedule`; `callback(state)` is called after every converged step."""
    last = schedule.n_steps if n_steps is None else n_steps
    while state.step < last:
        state = advance(state, disc, params, settings, bcs, schedule.increment(state.step + 1))
        if callback is not None:
            callback(state)
    return state
