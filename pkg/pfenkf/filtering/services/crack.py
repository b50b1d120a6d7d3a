import numpy as np

from pfenkf.fem.services.mesh import SLIT_TIP

CRACK_THRESHOLD = 0.5


def crack_position_1d(phi_q, disc, threshold=CRACK_THRESHOLD):
    """Phase-field weighted centroid of the quadrature points above `threshold`, None without a crack."""
    phi = np.asarray(phi_q)
    cracked = phi > threshold
    if not cracked.any():
        return None
    x = disc.quadrature_points[..., 0]
    weights = phi[cracked] * disc.weights[cracked]
    return float(np.sum(weights * x[cracked]) / np.sum(weights))


def crack_path_2d(phi_q, disc, n_columns=None, threshold=CRACK_THRESHOLD):
    """
    Ridge of the phase field right of the slit tip: in every column of
    quadrature points the one with the largest phase field, kept when it
    exceeds `threshold`. Returns an (n, 2) polyline ordered in x, or None.
    """
    phi = np.asarray(phi_q).ravel()
    points = disc.quadrature_points.reshape(-1, 2)
    band = points[:, 0] >= SLIT_TIP
    if not np.any(band & (phi > threshold)):
        return None
    if n_columns is None:
        h = np.sqrt(2.0 * disc.mesh.element_measures.min())
        n_columns = max(1, int(round((1.0 - SLIT_TIP) / h)))
    edges = np.linspace(SLIT_TIP, 1.0, n_columns + 1)
    column = np.clip(np.searchsorted(edges, points[:, 0], side='right') - 1, 0, n_columns - 1)
    path = []
    for c in range(n_columns):
        candidates = np.flatnonzero(band & (column == c))
        if not len(candidates):
            continue
        best = candidates[np.argmax(phi[candidates])]
        if phi[best] > threshold:
            path.append(points[best])
    return np.array(path) if path else None


def crack_position_estimate(member, disc):
    """Crack centroid in 1D, ridge polyline in 2D."""
    if disc.dimension == 1:
        return crack_position_1d(member.phi_q, disc)
    return crack_path_2d(member.phi_q, disc)


def crack_summary(member, disc):
    """Scalar crack descriptor: the centroid in 1D, the mean ridge height in 2D."""
    estimate = crack_position_estimate(member, disc)
    if estimate is None or disc.dimension == 1:
        return estimate
    return float(np.mean(estimate[:, 1]))
