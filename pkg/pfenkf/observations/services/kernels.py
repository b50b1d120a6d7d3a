from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln, kve


@dataclass(frozen=True)
class MaternParams:
    """Model-discrepancy kernel: smoothness `nu`, amplitude `sigma` and correlation `length`."""
    nu: float = 1.5
    sigma: float = 1e-3
    length: float = 0.1

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("Matern smoothness must be positive")
        if self.sigma < 0:
            raise ValueError("Matern amplitude must not be negative")
        if self.length <= 0:
            raise ValueError("Matern length must be positive")


def matern_of_distance(r, params):
    r = np.asarray(r, dtype=float)
    nu = params.nu
    scaled = np.sqrt(2.0 * nu) * r / params.length
    value = np.full(r.shape, params.sigma ** 2)
    positive = scaled > 0
    s = scaled[positive]
    # K_nu(s) = kve(nu, s) * exp(-s), evaluated in log space
    log_value = (1.0 - nu) * np.log(2.0) - gammaln(nu) + nu * np.log(s) + np.log(kve(nu, s)) - s
    value[positive] = params.sigma ** 2 * np.exp(log_value)
    return value


def matern(x, x_prime, params):
    """Covariance between two points; sigma**2 at zero distance."""
    r = np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)))
    return float(matern_of_distance(r, params))


def matern_gram(points_a, points_b=None, params=None):
    a = np.asarray(points_a, dtype=float)
    a = a.reshape(len(a), -1)
    b = a if points_b is None else np.asarray(points_b, dtype=float).reshape(len(points_b), -1)
    gram = matern_of_distance(cdist(a, b), params)
    if points_b is None:
        gram = 0.5 * (gram + gram.T)
    return gram
