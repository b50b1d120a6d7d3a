from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from pfenkf.exceptions import EnsembleError
from pfenkf.fracture.services.state import FieldState


@dataclass(frozen=True, eq=False)
class EnsembleState:
    """
    Members of the ensemble at a common load step.

    `seeds` records the (master seed, member index) pair each member was
    drawn from. Failed members keep their last converged state and are
    left out of every statistic.
    """
    members: Tuple[FieldState, ...]
    seeds: Tuple[Tuple[int, int], ...]
    failed: Tuple[bool, ...] = None

    def __post_init__(self):
        object.__setattr__(self, 'members', tuple(self.members))
        object.__setattr__(self, 'seeds', tuple(tuple(int(v) for v in s) for s in self.seeds))
        failed = (False,) * len(self.members) if self.failed is None else tuple(bool(f) for f in self.failed)
        object.__setattr__(self, 'failed', failed)
        if len(self.members) < 2:
            raise EnsembleError("an ensemble needs at least two members")
        if not len(self.seeds) == len(self.failed) == len(self.members):
            raise EnsembleError("seed and failure records must match the member count")
        steps = {m.step for m, f in zip(self.members, self.failed) if not f}
        if len(steps) > 1:
            raise EnsembleError(f"members are at different steps: {sorted(steps)}")

    @classmethod
    def from_vectors(cls, matrix, seed=0):
        """Members carrying the columns of `matrix` as plain state vectors (no mesh behind them)."""
        phi = np.zeros((1, 1))
        empty = np.zeros(0)
        members = [FieldState(a_u=np.array(column), a_d=empty, phi_q=phi, phi_q_prev=phi,
                              a_d_prev=empty, a_d_prev2=empty)
                   for column in np.asarray(matrix, dtype=float).T]
        return cls(members=members, seeds=[(seed, i) for i in range(len(members))])

    @property
    def n_ens(self):
        return len(self.members)

    @property
    def step(self):
        active = self.active_members
        return active[0].step if active else self.members[0].step

    @property
    def active(self):
        return np.flatnonzero(~np.asarray(self.failed))

    @property
    def active_members(self):
        return [self.members[i] for i in self.active]

    @property
    def n_failed(self):
        return int(sum(self.failed))

    def stacked(self):
        """(M, n_active) matrix of stacked (a_u, a_d) columns of the active members."""
        return np.column_stack([m.stacked for m in self.active_members])

    def with_stacked(self, matrix):
        """New ensemble whose active members take the columns of `matrix`."""
        members = list(self.members)
        for column, index in enumerate(self.active):
            members[index] = members[index].with_stacked(matrix[:, column])
        return replace(self, members=tuple(members))

    def map_active(self, function):
        members = list(self.members)
        for index in self.active:
            members[index] = function(members[index])
        return replace(self, members=tuple(members))
