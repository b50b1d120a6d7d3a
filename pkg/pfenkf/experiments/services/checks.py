"""
The invariant suite behind `manage.py validate`.

Each check returns a CheckResult with the measured value and the
tolerance it was held to. `tangent_hook(matrix, disc)` replaces the
assembled tangent before it is compared with finite differences, which is
how a corrupted tangent is injected in tests.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from pfenkf.ensemble.services.localization import localization_taper
from pfenkf.ensemble.services.prior import Nucleus
from pfenkf.ensemble.services.state import EnsembleState
from pfenkf.ensemble.services.statistics import ensemble_anomalies, ensemble_mean, inflate
from pfenkf.fem.services.discretization import Discretization
from pfenkf.fem.services.mesh import build_mesh_1d, build_mesh_sens
from pfenkf.filtering.services.analysis import DenseObservation, kalman_update
from pfenkf.filtering.services.crack import crack_position_1d
from pfenkf.filtering.services.regularization import RegularizationSettings, regularize_member_traced
from pfenkf.fracture.services.assembly import assemble_residual, assemble_tangent, discrete_energy
from pfenkf.fracture.services.at2 import local_phase_update
from pfenkf.fracture.services.boundary import boundary_conditions
from pfenkf.fracture.services.solver import NewtonSettings, advance
from pfenkf.fracture.services.state import FieldState
from pfenkf.observations.services.kernels import MaternParams, matern_gram, matern_of_distance
from pfenkf.observations.services.truth import DataBatch

from .runners import linear_toy_posterior

logger = logging.getLogger(__name__)

N_RANDOM_STATES = 10
N_PHASE_SAMPLES = 10 ** 5
FD_TOLERANCE = 1e-5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ''

    def as_dict(self):
        return {'name': self.name, 'passed': self.passed, 'value': self.value, 'tolerance': self.tolerance,
                'detail': self.detail}


def _result(name, value, tolerance, detail=''):
    value = float(value)
    passed = bool(value <= tolerance)
    log = logger.info if passed else logger.error
    log("Check %s: %s (%.3e against %.3e) %s", name, 'pass' if passed else 'FAIL', value, tolerance, detail)
    return CheckResult(name=name, passed=passed, value=value, tolerance=float(tolerance), detail=detail)


def unit_params(params):
    """Nondimensional material for the derivative checks, keeping Poisson ratio and kinematics."""
    return replace(params, E=1.0, Gc=1.0, ell=0.05, residual_stiffness=0.0)


def random_state(disc, rng):
    """Stretched state with noise and a micromorphic field inside (0, 1), away from the phase clamps."""
    mesh = disc.mesh
    strain = rng.uniform(0.005, 0.02)
    a_u = strain * np.repeat(mesh.nodes[:, 0], mesh.dimension) + 1e-4 * rng.standard_normal(disc.n_u)
    a_d = rng.uniform(0.2, 0.4) + 0.1 * np.sin(rng.uniform(1.0, 5.0) * mesh.nodes[:, 0])
    phi = np.zeros((disc.n_elements, disc.n_qp))
    return FieldState(a_u=a_u, a_d=a_d, phi_q=phi, phi_q_prev=phi, a_d_prev=a_d, a_d_prev2=a_d)


def check_meshes():
    return {'1d': Discretization(build_mesh_1d(50)), '2d': Discretization(build_mesh_sens(0.2, 0.08))}


def _full_residual(state, disc, params):
    return np.concatenate(assemble_residual(state, disc, params))


def gradient_check(disc, params, rng, h=1e-6):
    """Worst relative gap between directional derivatives of the energy and residual projections."""
    worst = 0.0
    for _ in range(N_RANDOM_STATES):
        state = random_state(disc, rng)
        direction = rng.standard_normal(disc.n_dofs)
        base = state.stacked
        plus = discrete_energy(state.with_stacked(base + h * direction), disc, params)
        minus = discrete_energy(state.with_stacked(base - h * direction), disc, params)
        exact = _full_residual(state, disc, params) @ direction
        worst = max(worst, abs((plus - minus) / (2 * h) - exact) / max(abs(exact), 1e-12))
    return worst


def tangent_check(disc, params, rng, tangent_hook: Optional[Callable] = None, h=1e-7):
    """Worst relative gap between tangent-vector products and central residual differences."""
    worst = 0.0
    for _ in range(N_RANDOM_STATES):
        state = random_state(disc, rng)
        matrix = assemble_tangent(state, disc, params)
        if tangent_hook is not None:
            matrix = tangent_hook(matrix, disc)
        direction = rng.standard_normal(disc.n_dofs)
        base = state.stacked
        fd = (_full_residual(state.with_stacked(base + h * direction), disc, params)
              - _full_residual(state.with_stacked(base - h * direction), disc, params)) / (2 * h)
        worst = max(worst, np.linalg.norm(matrix @ direction - fd) / max(np.linalg.norm(fd), 1e-12))
    return worst


def phase_update_violations(params, rng, n=N_PHASE_SAMPLES):
    psi = 10.0 ** rng.uniform(-6.0, 6.0, n)
    d = rng.uniform(0.0, 1.0, n)
    floor = rng.uniform(0.0, 1.0, n)
    phi = local_phase_update(psi, d, floor, params)
    raw = (2.0 * psi + params.alpha * d) / (2.0 * psi + params.alpha + params.Gc / params.ell)
    violations = (phi < floor) | (phi > 1.0)
    violations |= local_phase_update(1.1 * psi, d, floor, params) < phi
    violations |= local_phase_update(psi, np.minimum(d + 0.01, 1.0), floor, params) < phi
    violations |= (raw < floor) & (phi != floor)
    return int(violations.sum())


def gain_oracle_error(rng, n_state=8, n_channels=3, n_ens=6, n_obs=2, rho=1.3):
    """Relative gap between the ensemble Kalman shift and the dense textbook formula."""
    matrix = rng.standard_normal((n_state, n_ens))
    H = rng.standard_normal((n_channels, n_state))
    C_delta = matern_gram(rng.uniform(0.0, 1.0, n_channels), params=MaternParams(sigma=0.2, length=0.3))
    C_e = 0.05 * np.eye(n_channels)
    obs = DenseObservation(H=H, rho=rho, discrepancy_covariance=C_delta, noise_covariance=C_e)
    y = rng.standard_normal((n_obs, n_channels))
    ensemble = EnsembleState.from_vectors(matrix)
    updated = kalman_update(ensemble, DataBatch(step=1, observations=y), obs).stacked()

    C = np.cov(matrix)
    G = rho ** 2 * n_obs * H @ C @ H.T + C_delta + C_e
    expected = matrix + C @ H.T @ np.linalg.inv(G) @ (y.sum(axis=0)[:, None] - rho * n_obs * H @ matrix)
    return np.abs(updated - expected).max() / np.abs(expected).max()


def inflation_errors(rng, r=1.05):
    ensemble = EnsembleState.from_vectors(rng.standard_normal((12, 7)))
    inflated = inflate(ensemble, r)
    mean_error = np.abs(ensemble_mean(inflated) - ensemble_mean(ensemble)).max()
    before = ensemble_anomalies(ensemble)
    after = ensemble_anomalies(inflated)
    covariance_error = np.abs(after @ after.T - r ** 2 * before @ before.T).max()
    return mean_error, covariance_error


def tapered_min_eigenvalue(rng, n_state=50, n_ens=8, length=0.2):
    locations = np.sort(rng.uniform(0.0, 1.0, n_state))
    A = ensemble_anomalies(EnsembleState.from_vectors(rng.standard_normal((n_state, n_ens))))
    tapered = (A @ A.T) * localization_taper(locations, locations, length)
    return float(np.linalg.eigvalsh(tapered).min())


def matern_errors(rng):
    r = np.linspace(0.0, 2.0, 41)
    exponential = MaternParams(nu=0.5, sigma=0.7, length=0.3)
    closed = np.abs(matern_of_distance(r, exponential) - 0.49 * np.exp(-r / 0.3)).max()
    smooth = MaternParams(nu=100.0, sigma=1.0, length=0.3)
    limit = abs(matern_of_distance(np.array([0.3]), smooth)[0] - np.exp(-0.5)) / np.exp(-0.5)
    params = MaternParams(nu=1.5, sigma=0.5, length=0.2)
    gram = matern_gram(rng.uniform(0.0, 1.0, (50, 2)), params=params)
    min_eigenvalue = np.linalg.eigvalsh(gram).min() / params.sigma ** 2
    return closed, limit, min_eigenvalue


def regularization_errors(params, newton):
    """
    Noisy analysis of a stretched rod and a cracked rod through the
    regularization: (worst negative phase field, worst sub-solve residual,
    crack displacement in elements).
    """
    disc = Discretization(build_mesh_1d(50))
    bcs = boundary_conditions(disc.mesh)
    x = disc.mesh.nodes[:, 0]
    h = 2.0 / 50
    settings = RegularizationSettings(length=4.0 * params.ell)
    state = FieldState.initial(disc)
    for _ in range(3):
        state = advance(state, disc, params, newton, bcs, 1e-3)

    noisy = replace(state, a_u=state.a_u + 2e-4 * np.sin(40.0 * x), a_d=-0.05 * np.abs(np.sin(7.0 * x)))
    projected, trace = regularize_member_traced(noisy, disc, params, newton, bcs, settings)

    floor = Nucleus(center=(0.3,), magnitude=1.0, width=0.05).floor(disc)
    cracked = replace(state, a_u=np.where(x > 0.3, state.u_D, 0.0),
                      a_d=np.exp(-0.5 * (x - 0.3) ** 2 / 0.05 ** 2), phi_q=floor, phi_q_prev=floor)
    repaired, crack_trace = regularize_member_traced(cracked, disc, params, newton, bcs,
                                                     replace(settings, n_stagger=1))
    position = crack_position_1d(repaired.phi_q, disc)
    shift = np.inf if position is None else abs(position - 0.3) / h
    negative = max(0.0, -min(projected.phi_q.min(), repaired.phi_q.min()))
    return negative, max(trace.max_residual, crack_trace.max_residual), shift


def run_checks(params, seed=0, tangent_hook: Optional[Callable] = None):
    """Run the whole suite; `params` supplies the Poisson ratio, kinematics and penalty factor."""
    rng = np.random.default_rng([int(seed), 1])
    derivative_params = unit_params(params)
    results = []
    for label, disc in check_meshes().items():
        detail = f'{N_RANDOM_STATES} states, {disc.n_elements} elements'
        results.append(_result(f'gradient_{label}', gradient_check(disc, derivative_params, rng),
                               FD_TOLERANCE, detail))
        results.append(_result(f'tangent_{label}', tangent_check(disc, derivative_params, rng, tangent_hook),
                               FD_TOLERANCE, detail))

    results.append(_result('local_phase_update', phase_update_violations(derivative_params, rng), 0,
                           f'{N_PHASE_SAMPLES} random inputs'))
    results.append(_result('kalman_gain_oracle', gain_oracle_error(rng), 1e-10))

    toy = linear_toy_posterior(6, 2, 0.1, 10 ** 4, seed)
    results.append(_result('linear_toy_mean', toy.relative_error, 0.02, '10000 members'))
    widened = np.max(toy.observed_spread_posterior - toy.observed_spread_prior)
    results.append(_result('linear_toy_spread', widened, 1e-10, 'posterior minus prior std of H a'))

    mean_error, covariance_error = inflation_errors(rng)
    results.append(_result('inflation_mean', mean_error, 1e-14))
    results.append(_result('inflation_covariance', covariance_error, 1e-12))
    results.append(_result('taper_psd', -tapered_min_eigenvalue(rng), 1e-8, 'negated smallest eigenvalue'))

    closed, limit, min_eigenvalue = matern_errors(rng)
    results.append(_result('matern_exponential', closed, 1e-10))
    results.append(_result('matern_squared_exponential_limit', limit, 0.01))
    results.append(_result('matern_psd', -min_eigenvalue, 1e-8, 'negated smallest eigenvalue over sigma^2'))

    newton = NewtonSettings(tolerance=1e-10)
    negative, residual, shift = regularization_errors(replace(params, E=1.0, Gc=1.0, ell=0.05), newton)
    results.append(_result('regularization_bounds', negative, 0.0, 'most negative phase field'))
    results.append(_result('regularization_residual', residual, 1e-8, 'largest sub-solve residual'))
    results.append(_result('regularization_crack_position', shift, 2.0, 'crack shift in elements'))
    return results
