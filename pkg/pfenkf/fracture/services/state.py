from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .at2 import extrapolate_micromorphic


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FieldState:
    """
    Unknowns and history of one forward model at one load step.

    `phi_q` is the converged quadrature-point phase field and `phi_q_prev`
    the irreversibility floor it was computed against. `a_d_prev` and
    `a_d_prev2` are the micromorphic fields of the two preceding steps,
    `du` and `du_prev` the matching load increments (the pseudo time step).
    """
    a_u: np.ndarray
    a_d: np.ndarray
    phi_q: np.ndarray
    phi_q_prev: np.ndarray
    a_d_prev: np.ndarray
    a_d_prev2: np.ndarray
    step: int = 0
    u_D: float = 0.0
    du: float = 0.0
    du_prev: float = 0.0

    def __post_init__(self):
        for name in ('a_u', 'a_d', 'phi_q', 'phi_q_prev', 'a_d_prev', 'a_d_prev2'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def initial(cls, disc, phi_floor: Optional[np.ndarray] = None, a_d=None):
        """Undeformed state at step 0; `phi_floor` seeds the phase field (e.g. a nucleus)."""
        if phi_floor is None:
            phi = np.zeros((disc.n_elements, disc.n_qp))
        else:
            phi = np.asarray(phi_floor, dtype=float)
        a_d = np.zeros(disc.n_d) if a_d is None else a_d
        return cls(
            a_u=np.zeros(disc.n_u),
            a_d=a_d,
            phi_q=phi,
            phi_q_prev=phi,
            a_d_prev=a_d,
            a_d_prev2=a_d,
        )

    @property
    def n_u(self):
        return len(self.a_u)

    @property
    def stacked(self):
        return np.concatenate([self.a_u, self.a_d])

    def with_stacked(self, vector, **changes):
        vector = np.asarray(vector)
        return replace(self, a_u=vector[:self.n_u], a_d=vector[self.n_u:], **changes)

    def extrapolated_micromorphic(self):
        """Micromorphic field predicted for this step from the two preceding ones."""
        if self.step < 2:
            return np.array(self.a_d_prev)
        return extrapolate_micromorphic(self.a_d_prev, self.a_d_prev2, self.du, self.du_prev)

    def trial(self, du, step=None):
        """Starting point of the next load step: history shifted, current unknowns as initial guess."""
        return replace(
            self,
            phi_q_prev=self.phi_q,
            a_d_prev=self.a_d,
            a_d_prev2=self.a_d_prev,
            step=self.step + 1 if step is None else step,
            u_D=self.u_D + du,
            du=du,
            du_prev=self.du,
        )

    def reset_history(self):
        """Drop the micromorphic history so the next step does not extrapolate across an update."""
        return replace(self, a_d_prev=self.a_d, a_d_prev2=self.a_d, du_prev=0.0)
