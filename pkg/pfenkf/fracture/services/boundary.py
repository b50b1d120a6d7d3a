from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class DirichletConditions:
    """
    Prescribed displacement DOFs.

    The value of DOF `dofs[i]` at load level u_D is `unit_values[i] * u_D`.
    `loaded_dofs` are the DOFs whose reactions sum to the reported force.
    """
    dofs: np.ndarray
    unit_values: np.ndarray
    loaded_dofs: np.ndarray

    def __post_init__(self):
        dofs, index = np.unique(np.asarray(self.dofs, dtype=np.int64), return_index=True)
        object.__setattr__(self, 'dofs', dofs)
        object.__setattr__(self, 'unit_values', np.asarray(self.unit_values, dtype=float)[index])
        object.__setattr__(self, 'loaded_dofs', np.asarray(self.loaded_dofs, dtype=np.int64))

    def values(self, u_D):
        return self.unit_values * u_D

    def free_dofs(self, n_dofs, unknowns='all', n_u=None):
        """Unconstrained DOFs; `unknowns` restricts to the 'u' or 'd' block."""
        mask = np.ones(n_dofs, dtype=bool)
        mask[self.dofs] = False
        if unknowns == 'u':
            mask[n_u:] = False
        elif unknowns == 'd':
            mask[:n_u] = False
        return np.flatnonzero(mask)


def rod_conditions(mesh):
    """Bar fixed at the left end and pulled at the right end."""
    left = mesh.u_dof(mesh.boundaries['left'][0])
    right = mesh.u_dof(mesh.boundaries['right'][0])
    return DirichletConditions(dofs=[left, right], unit_values=[0.0, 1.0], loaded_dofs=[right])


def sens_conditions(mesh):
    """
    Shear loading of the notched square: bottom clamped, top moved in x,
    vertical displacement suppressed on the top, left and right edges.
    """
    bottom = mesh.boundaries['bottom']
    top = mesh.boundaries['top']
    sides = np.concatenate([mesh.boundaries['left'], mesh.boundaries['right']])

    dofs = [mesh.u_dof(bottom, 0), mesh.u_dof(bottom, 1), mesh.u_dof(sides, 1),
            mesh.u_dof(top, 1), mesh.u_dof(top, 0)]
    values = [np.zeros(len(bottom)), np.zeros(len(bottom)), np.zeros(len(sides)),
              np.zeros(len(top)), np.ones(len(top))]
    # corner DOFs appear twice with equal values
    return DirichletConditions(dofs=np.concatenate(dofs), unit_values=np.concatenate(values),
                               loaded_dofs=mesh.u_dof(top, 0))


def boundary_conditions(mesh):
    return rod_conditions(mesh) if mesh.dimension == 1 else sens_conditions(mesh)


@dataclass(frozen=True)
class LoadSchedule:
    """
    Piecewise constant displacement increments.

    `segments` lists (first_step, increment) pairs in increasing step order;
    each increment applies from its first step until the next segment.
    """
    n_steps: int
    segments: List[Tuple[int, float]] = field(default_factory=lambda: [(1, 1e-4)])

    def __post_init__(self):
        if self.n_steps < 0:
            raise ValueError("n_steps must not be negative")
        if not self.segments or self.segments[0][0] != 1:
            raise ValueError("the first load segment must start at step 1")
        starts = [start for start, _ in self.segments]
        if starts != sorted(set(starts)):
            raise ValueError("load segments must start at increasing steps")
        if any(du <= 0 for _, du in self.segments):
            raise ValueError("load increments must be positive")

    def increment(self, step):
        du = self.segments[0][1]
        for start, value in self.segments:
            if step >= start:
                du = value
        return du

    def displacement(self, step):
        return float(sum(self.increment(k) for k in range(1, step + 1)))
