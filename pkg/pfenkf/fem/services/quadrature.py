from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Points in reference coordinates and their weights.

    The reference line is [0, 1] (measure 1); the reference triangle has
    vertices (0, 0), (1, 0), (0, 1) (measure 1/2).
    """
    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        for array in (self.points, self.weights):
            array.setflags(write=False)

    @property
    def n_points(self):
        return len(self.weights)

    @property
    def reference_measure(self):
        return 1.0 if self.points.shape[1] == 1 else 0.5


def _gauss_line(n_points):
    xi, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureRule(
        points=(0.5 * (xi + 1.0)).reshape(-1, 1),
        weights=0.5 * w,
        degree=2 * n_points - 1,
    )


def _triangle(order):
    if order == 1:
        return QuadratureRule(points=np.array([[1.0 / 3.0, 1.0 / 3.0]]), weights=np.array([0.5]), degree=1)
    if order == 2:
        points = np.array([[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]])
        return QuadratureRule(points=points, weights=np.full(3, 1.0 / 6.0), degree=2)
    raise ValueError(f"no triangle rule of order {order}")


def quadrature_rule(dimension, order=2):
    """Gauss rule of the given order on the reference element of `dimension`."""
    if dimension == 1:
        return _gauss_line(order)
    if dimension == 2:
        return _triangle(order)
    raise ValueError(f"unsupported dimension {dimension}")
