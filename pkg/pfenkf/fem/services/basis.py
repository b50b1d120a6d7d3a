import numpy as np
import scipy.sparse as sp

from pfenkf.exceptions import SensorOutsideMeshError

INSIDE_TOL = 1e-10
_CHUNK = 64


def _barycentric_1d(mesh, points):
    x = mesh.nodes[:, 0]
    left, right = mesh.elements[:, 0], mesh.elements[:, 1]
    order = np.argsort(x[left])
    starts = x[left][order]
    p = points[:, 0]
    slot = np.clip(np.searchsorted(starts, p, side='right') - 1, 0, len(order) - 1)
    element = order[slot]
    x0, x1 = x[left[element]], x[right[element]]
    t = (p - x0) / (x1 - x0)
    coords = np.column_stack([1.0 - t, t])
    outside = (t < -INSIDE_TOL) | (t > 1.0 + INSIDE_TOL)
    return element, coords, outside


def _barycentric_2d(mesh, points):
    p = mesh.nodes[mesh.elements]
    origin = p[:, 0, :]
    jac = np.stack([p[:, 1, :] - origin, p[:, 2, :] - origin], axis=2)
    inv_jac = np.linalg.inv(jac)

    element = np.empty(len(points), dtype=np.int64)
    coords = np.empty((len(points), 3))
    outside = np.zeros(len(points), dtype=bool)
    for start in range(0, len(points), _CHUNK):
        chunk = points[start:start + _CHUNK]
        rel = chunk[:, None, :] - origin[None, :, :]
        local = np.einsum('eij,pej->pei', inv_jac, rel)
        lam = np.concatenate([1.0 - local.sum(axis=2, keepdims=True), local], axis=2)
        worst = lam.min(axis=2)
        # most interior candidate wins ties on shared edges
        best = np.argmax(worst, axis=1)
        rows = np.arange(len(chunk))
        element[start:start + _CHUNK] = best
        coords[start:start + _CHUNK] = lam[rows, best]
        outside[start:start + _CHUNK] = worst[rows, best] < -INSIDE_TOL
    return element, coords, outside


def locate_points(mesh, points):
    """
    Containing element and barycentric coordinates of each point.

    Raises SensorOutsideMeshError for the first point outside the mesh.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if mesh.dimension == 1:
        points = points.reshape(-1, 1)
        element, coords, outside = _barycentric_1d(mesh, points)
    else:
        element, coords, outside = _barycentric_2d(mesh, points)
    if np.any(outside):
        raise SensorOutsideMeshError(points[np.argmax(outside)])
    return element, np.clip(coords, 0.0, 1.0)


def basis_matrix(mesh, points):
    """Sparse (n_points x n_nodes) matrix of nodal basis values at `points`."""
    element, coords = locate_points(mesh, points)
    n_points = len(element)
    rows = np.repeat(np.arange(n_points), mesh.nodes_per_element)
    cols = mesh.elements[element].ravel()
    return sp.csr_matrix((coords.ravel(), (rows, cols)), shape=(n_points, mesh.n_nodes))


def eval_basis(mesh, point):
    """Values of all nodal basis functions at one point, as a sparse row."""
    return basis_matrix(mesh, np.atleast_2d(point))
