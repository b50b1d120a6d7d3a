"""
Calibration of the model-discrepancy hyperparameters.

The smoothness nu stays fixed; sigma and the correlation length are
optimized in log space with L-BFGS-B on the negative batch log-likelihood,
optionally plus independent log-normal priors centered on the initial
values (a MAP estimate).
"""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from pfenkf.exceptions import CovarianceNotPositiveDefinite

from .likelihood import log_likelihood

logger = logging.getLogger(__name__)

LOG_BOUNDS = ((np.log(1e-12), np.log(1e6)), (np.log(1e-6), np.log(1e6)))


@dataclass(frozen=True)
class CalibrationResult:
    params: object
    objective: float
    initial_objective: float
    converged: bool
    iterations: int
    message: str


def calibrate_hyperparameters(batch, obs, mean, *, C_a_factor=None, init=None, prior_log_std=1.0,
                              max_iterations=200):
    """
    Fit (sigma, length) of `obs.kernel` to the observations of `batch`.

    `mean` is the state the observations are compared with and `C_a_factor`
    an optional factor of its covariance. Non-convergence is reported in the
    result, never raised.
    """
    init = obs.kernel if init is None else init
    observations = obs.check_observations(batch.observations)
    anchor = np.log([max(init.sigma, 1e-12), init.length])

    def objective(theta):
        kernel = replace(init, sigma=float(np.exp(theta[0])), length=float(np.exp(theta[1])))
        candidate = obs.with_kernel(kernel)
        try:
            value = -log_likelihood(observations, obs.H, obs.rho, mean, candidate.discrepancy_covariance,
                                    obs.noise_covariance, C_a_factor=C_a_factor)
        except CovarianceNotPositiveDefinite:
            return np.inf
        if prior_log_std is not None:
            value += 0.5 * np.sum((theta - anchor) ** 2) / prior_log_std ** 2
        return value

    initial_objective = objective(anchor)
    result = minimize(objective, anchor, method='L-BFGS-B', bounds=LOG_BOUNDS,
                      options={'maxiter': max_iterations})
    best = result.x if result.fun <= initial_objective else anchor
    params = replace(init, sigma=float(np.exp(best[0])), length=float(np.exp(best[1])))
    outcome = CalibrationResult(
        params=params,
        objective=float(min(result.fun, initial_objective)),
        initial_objective=float(initial_objective),
        converged=bool(result.success),
        iterations=int(result.nit),
        message=str(result.message),
    )
    if outcome.converged:
        logger.info("Calibrated discrepancy kernel: sigma=%.4e, length=%.4e (objective %.6e)",
                    params.sigma, params.length, outcome.objective)
    else:
        logger.warning("Hyperparameter calibration did not converge after %d iterations: %s",
                       outcome.iterations, outcome.message)
    return outcome
