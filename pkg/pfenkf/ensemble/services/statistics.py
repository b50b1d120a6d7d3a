import numpy as np

from pfenkf.exceptions import EnsembleError


def ensemble_mean(ensemble):
    """Mean of the stacked (a_u, a_d) vectors over the active members."""
    return ensemble.stacked().mean(axis=1)


def ensemble_anomalies(ensemble):
    """
    Factor A with columns (a_i - mean) / sqrt(n - 1), so that C = A A^T.

    The covariance itself is never formed.
    """
    matrix = ensemble.stacked()
    n = matrix.shape[1]
    if n < 2:
        raise EnsembleError("anomalies need at least two active members")
    return (matrix - matrix.mean(axis=1, keepdims=True)) / np.sqrt(n - 1)


def inflate(ensemble, r):
    """Scale every member's deviation from the mean by `r`; phase fields are not touched."""
    if r < 1.0:
        raise EnsembleError(f"inflation factor must be >= 1, got {r}")
    if r == 1.0:
        return ensemble
    matrix = ensemble.stacked()
    mean = matrix.mean(axis=1, keepdims=True)
    return ensemble.with_stacked(mean + r * (matrix - mean))


def spread(values):
    """Sample standard deviation over members, ignoring missing entries."""
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if len(values) < 2:
        return float('nan')
    return float(np.std(values, ddof=1))
