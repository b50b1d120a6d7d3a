"""
Marginal log-likelihood of the data model.

With a ~ N(mean, C_a) the observations are Gaussian with mean rho * H mean
and covariance G = rho**2 H C_a H^T + C_delta + C_e. A batch of
observations is scored as the sum of the single-observation values.
"""
import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, ldl

from pfenkf.exceptions import CovarianceNotPositiveDefinite

logger = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)


def smallest_pivot(matrix):
    """Smallest eigenvalue of the block diagonal factor of an LDL^T decomposition."""
    _, block_diagonal, _ = ldl(matrix, lower=True)
    return float(np.linalg.eigvalsh(block_diagonal).min())


def factorize_spd(matrix, what='G'):
    """Cholesky factor of a symmetric positive definite matrix, for `cho_solve`."""
    matrix = 0.5 * (matrix + matrix.T)
    try:
        factor = cho_factor(matrix, lower=True)
    except LinAlgError:
        raise CovarianceNotPositiveDefinite(smallest_pivot(matrix), what)
    if not np.all(np.diag(factor[0]) > 0):
        raise CovarianceNotPositiveDefinite(smallest_pivot(matrix), what)
    return factor


def log_determinant(factor):
    return 2.0 * float(np.sum(np.log(np.diag(factor[0]))))


def projected_covariance(H, C_a=None, C_a_factor=None):
    """H C_a H^T from the covariance itself or from a factor A with C_a = A A^T."""
    if C_a_factor is not None:
        HA = np.asarray(H @ C_a_factor)
        return HA @ HA.T
    if C_a is not None:
        HC = np.asarray(H @ C_a)
        return np.asarray(H @ HC.T)
    return 0.0


def data_covariance(H, rho, C_delta, C_e, *, C_a=None, C_a_factor=None, n_obs=1):
    """G = rho**2 n_obs H C_a H^T + C_delta + C_e."""
    return rho ** 2 * n_obs * projected_covariance(H, C_a, C_a_factor) + C_delta + C_e


def log_likelihood(y, H, rho, mean, C_delta, C_e, *, C_a=None, C_a_factor=None):
    """
    Log-density of one observation vector `y`, or the summed log-densities of
    the rows of a (n_obs, n_channels) batch.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    G = data_covariance(H, rho, C_delta, C_e, C_a=C_a, C_a_factor=C_a_factor)
    factor = factorize_spd(np.atleast_2d(G))
    residuals = y - rho * np.asarray(H @ mean)
    quadratic = np.sum(residuals.T * cho_solve(factor, residuals.T))
    n_obs, n_channels = y.shape
    return float(-0.5 * quadratic - 0.5 * n_obs * (log_determinant(factor) + n_channels * LOG_2PI))
