"""Per-step, per-member analysis diagnostics and their CSV form."""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from pfenkf.ensemble.services.statistics import spread

COLUMNS = ['step', 'member', 'pre_misfit', 'post_misfit', 'crack_position_pre', 'crack_position_post',
           'reaction_force_pre', 'reaction_force_post', 'regularization_iterations', 'retried', 'failed']


@dataclass
class MemberRecord:
    member: int
    pre_misfit: float
    post_misfit: float
    crack_position_pre: Optional[float]
    crack_position_post: Optional[float]
    reaction_force_pre: float
    reaction_force_post: float
    regularization_iterations: int = 0
    retried: bool = False
    failed: bool = False


@dataclass
class AnalysisRecord:
    step: int
    members: List[MemberRecord] = field(default_factory=list)
    kalman_misfit_post: float = float('nan')

    def _values(self, name):
        return [getattr(m, name) for m in self.members if not m.failed]

    @property
    def misfit_pre(self):
        return float(np.mean(self._values('pre_misfit')))

    @property
    def misfit_post(self):
        return float(np.mean(self._values('post_misfit')))

    @property
    def crack_spread_pre(self):
        return spread(self._values('crack_position_pre'))

    @property
    def crack_spread_post(self):
        return spread(self._values('crack_position_post'))

    @property
    def force_spread_pre(self):
        return spread(self._values('reaction_force_pre'))

    @property
    def force_spread_post(self):
        return spread(self._values('reaction_force_post'))

    def crack_mean_post(self):
        values = [v for v in self._values('crack_position_post') if v is not None]
        return float(np.mean(values)) if values else None


@dataclass
class AnalysisReport:
    records: List[AnalysisRecord] = field(default_factory=list)

    def add(self, record):
        if any(r.step == record.step for r in self.records):
            raise ValueError(f"step {record.step} already has an analysis record")
        self.records.append(record)

    def record(self, step):
        return next(r for r in self.records if r.step == step)

    @property
    def steps(self):
        return [r.step for r in self.records]

    def to_frame(self):
        rows = [dict(step=r.step, **vars(m)) for r in self.records for m in r.members]
        return pd.DataFrame(rows, columns=COLUMNS)

    def summary_frame(self):
        return pd.DataFrame([{
            'step': r.step,
            'misfit_pre': r.misfit_pre,
            'misfit_post': r.misfit_post,
            'crack_spread_pre': r.crack_spread_pre,
            'crack_spread_post': r.crack_spread_post,
            'force_spread_pre': r.force_spread_pre,
            'force_spread_post': r.force_spread_post,
        } for r in self.records])
