import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from pfenkf.exceptions import MeshError

logger = logging.getLogger(__name__)

COORD_TOL = 1e-12

# Geometry of the single-edge-notched specimen on the unit square
SLIT_HEIGHT = 0.5
SLIT_TIP = 0.5


@dataclass(frozen=True)
class RefineBand:
    x_min: float = 0.5
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 0.6


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Simplex mesh with named boundary node sets.

    `slit_pairs` holds (lower, upper) node ids that share coordinates but
    belong to opposite faces of a traction-free slit. It is empty when the
    domain has no slit.
    """
    dimension: int
    nodes: np.ndarray
    elements: np.ndarray
    boundaries: Dict[str, np.ndarray] = field(default_factory=dict)
    slit_pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=int))
    name: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'nodes', np.array(self.nodes, dtype=float).reshape(-1, self.dimension))
        object.__setattr__(self, 'elements', np.array(self.elements, dtype=np.int64))
        object.__setattr__(self, 'slit_pairs', np.array(self.slit_pairs, dtype=np.int64).reshape(-1, 2))
        object.__setattr__(
            self, 'boundaries',
            {key: np.array(ids, dtype=np.int64) for key, ids in self.boundaries.items()}
        )
        self.validate()
        for array in (self.nodes, self.elements, self.slit_pairs, *self.boundaries.values()):
            array.setflags(write=False)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def nodes_per_element(self):
        return self.dimension + 1

    @property
    def n_u_dofs(self):
        return self.n_nodes * self.dimension

    @property
    def n_dofs(self):
        """Total number of unknowns: displacement components plus one micromorphic value per node."""
        return self.n_nodes * (self.dimension + 1)

    @cached_property
    def element_measures(self):
        return _signed_measures(self.nodes, self.elements)

    @cached_property
    def dof_locations(self):
        """Coordinates of every DOF, displacement block first."""
        u_locations = np.repeat(self.nodes, self.dimension, axis=0)
        return np.vstack([u_locations, self.nodes])

    def u_dof(self, node, component=0):
        return node * self.dimension + component

    def d_dof(self, node):
        return self.n_u_dofs + node

    @property
    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def validate(self):
        if self.dimension not in (1, 2):
            raise MeshError(f"unsupported dimension {self.dimension}")
        if self.elements.ndim != 2 or self.elements.shape[1] != self.dimension + 1:
            raise MeshError("elements must list dimension + 1 node ids each")
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= self.n_nodes):
            raise MeshError("element references a node id out of range")

        measures = _signed_measures(self.nodes, self.elements)
        if np.any(measures <= 0.0):
            bad = int(np.argmin(measures))
            raise MeshError(f"element {bad} has non-positive measure {measures[bad]:.3e}")

        lower, upper = self.bounding_box
        axis_of = {'left': (0, lower[0]), 'right': (0, upper[0])}
        if self.dimension == 2:
            axis_of.update({'bottom': (1, lower[1]), 'top': (1, upper[1])})
        for key, ids in self.boundaries.items():
            if ids.size and (ids.min() < 0 or ids.max() >= self.n_nodes):
                raise MeshError(f"boundary '{key}' references a node id out of range")
            if key in axis_of:
                axis, value = axis_of[key]
                expected = np.flatnonzero(np.abs(self.nodes[:, axis] - value) <= COORD_TOL)
                if not np.array_equal(np.sort(ids), expected):
                    raise MeshError(f"boundary '{key}' does not match the nodes on that side")

        for lower_id, upper_id in self.slit_pairs:
            same = np.allclose(self.nodes[lower_id], self.nodes[upper_id], atol=COORD_TOL)
            if lower_id == upper_id or not same:
                raise MeshError(f"slit pair ({lower_id}, {upper_id}) is not a coincident node pair")
        if len(self.slit_pairs):
            touches_lower = np.isin(self.elements, self.slit_pairs[:, 0]).any(axis=1)
            touches_upper = np.isin(self.elements, self.slit_pairs[:, 1]).any(axis=1)
            if np.any(touches_lower & touches_upper):
                raise MeshError("an element connects both faces of the slit")


def _signed_measures(nodes, elements):
    if nodes.shape[1] == 1:
        x = nodes[elements, 0]
        return x[:, 1] - x[:, 0]
    p = nodes[elements]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )


def build_mesh_1d(n_elements, domain=(-1.0, 1.0), interior_shift=0.0, name='rod'):
    """
    Uniform mesh of the bar `domain` with `n_elements` linear elements.

    `interior_shift` moves every interior node by that fraction of the
    element size (alternating sign) so that two meshes of the same bar do
    not share interior nodes.
    """
    if n_elements < 2:
        raise MeshError("a 1D mesh needs at least two elements")
    if abs(interior_shift) >= 0.5:
        raise MeshError("interior_shift must stay below half an element")
    x = np.linspace(domain[0], domain[1], n_elements + 1)
    if interior_shift:
        h = (domain[1] - domain[0]) / n_elements
        signs = np.where(np.arange(n_elements + 1) % 2 == 0, 1.0, -1.0)
        x[1:-1] += interior_shift * h * signs[1:-1]
    elements = np.column_stack([np.arange(n_elements), np.arange(1, n_elements + 1)])
    return Mesh(
        dimension=1,
        nodes=x.reshape(-1, 1),
        elements=elements,
        boundaries={'left': [0], 'right': [n_elements]},
        name=name,
    )


def _graded_axis(breakpoints, fine_range, h_fine, h_coarse):
    coordinates = [breakpoints[0]]
    for start, stop in zip(breakpoints[:-1], breakpoints[1:]):
        inside = fine_range[0] - COORD_TOL <= start and stop <= fine_range[1] + COORD_TOL
        h = h_fine if inside else h_coarse
        n = max(1, math.ceil((stop - start) / h - 1e-9))
        coordinates.extend(np.linspace(start, stop, n + 1)[1:])
    return np.array(coordinates)


def build_mesh_sens(h_coarse, h_fine, refine_band: Optional[RefineBand] = None,
                    diagonal='right', name='sens'):
    """
    Triangulated unit square with a horizontal slit from (0, 0.5) to (0.5, 0.5).

    The grid spacing is `h_fine` inside `refine_band` and `h_coarse`
    elsewhere. Each rectangular cell is split along its `diagonal`
    ('right' joins lower-left to upper-right, 'left' the other pair), so
    two meshes built with different diagonals and spacings share no
    interior node sets. Nodes on the slit (tip excluded) are duplicated and
    elements above the slit use the copies.
    """
    if not 0.0 < h_fine <= h_coarse:
        raise MeshError("expected 0 < h_fine <= h_coarse")
    if diagonal not in ('right', 'left'):
        raise MeshError(f"unknown diagonal '{diagonal}'")
    band = refine_band or RefineBand()

    x_breaks = sorted({0.0, 1.0, SLIT_TIP, band.x_min, band.x_max})
    y_breaks = sorted({0.0, 1.0, SLIT_HEIGHT, band.y_min, band.y_max})
    xs = _graded_axis(x_breaks, (band.x_min, band.x_max), h_fine, h_coarse)
    ys = _graded_axis(y_breaks, (band.y_min, band.y_max), h_fine, h_coarse)
    nx, ny = len(xs), len(ys)

    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    node_id = np.arange(nx * ny).reshape(ny, nx)

    a = node_id[:-1, :-1].ravel()
    b = node_id[:-1, 1:].ravel()
    c = node_id[1:, 1:].ravel()
    d = node_id[1:, :-1].ravel()
    if diagonal == 'right':
        triangles = np.vstack([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    else:
        triangles = np.vstack([np.column_stack([a, b, d]), np.column_stack([b, c, d])])

    # Duplicate the slit faces
    row = int(np.argmin(np.abs(ys - SLIT_HEIGHT)))
    slit_lower = node_id[row, xs < SLIT_TIP - COORD_TOL]
    slit_upper = np.arange(nx * ny, nx * ny + len(slit_lower))
    nodes = np.vstack([nodes, nodes[slit_lower]])

    centroid_y = nodes[triangles, 1].mean(axis=1)
    above = centroid_y > SLIT_HEIGHT
    remap = np.arange(len(nodes))
    remap[slit_lower] = slit_upper
    triangles[above] = remap[triangles[above]]

    def on_side(axis, value):
        return np.flatnonzero(np.abs(nodes[:, axis] - value) <= COORD_TOL)

    mesh = Mesh(
        dimension=2,
        nodes=nodes,
        elements=triangles,
        boundaries={
            'left': on_side(0, 0.0),
            'right': on_side(0, 1.0),
            'bottom': on_side(1, 0.0),
            'top': on_side(1, 1.0),
        },
        slit_pairs=np.column_stack([slit_lower, slit_upper]),
        name=name,
    )
    logger.debug("Built %s mesh: %d nodes, %d elements", name, mesh.n_nodes, mesh.n_elements)
    return mesh
