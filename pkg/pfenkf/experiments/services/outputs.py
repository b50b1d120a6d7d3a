"""
Text artifacts of the experiments. Every CSV opens with a
`# config_hash <hash>` line followed by the column header.
"""
import logging
import os

import numpy as np
import pandas as pd

from pfenkf.observations.services.data_io import write_csv

logger = logging.getLogger(__name__)


def prepare_directory(*parts):
    path = os.path.join(*parts)
    os.makedirs(path, exist_ok=True)
    return path


def write_reaction_forces(forces, path, config_hash=''):
    """Single trajectory of (step, u_D, force) entries."""
    rows = [(int(s), float(u), float(f)) for s, u, f in forces]
    frame = pd.DataFrame(rows, columns=['step', 'u_D', 'force'])
    write_csv(frame, path, config_hash)
    return frame


def force_frame(runs):
    """Long table (run, step, u_D, member, force) of ensemble trajectories keyed by run label."""
    rows = []
    for label, forces in runs.items():
        for step, u_D, values in forces:
            rows.append(pd.DataFrame({
                'run': label,
                'step': int(step),
                'u_D': float(u_D),
                'member': np.arange(len(values)),
                'force': np.asarray(values, dtype=float),
            }))
    return pd.concat(rows, ignore_index=True)


def write_ensemble_forces(runs, path, config_hash=''):
    frame = force_frame(runs)
    write_csv(frame, path, config_hash)
    return frame


def force_statistics_frame(runs, truth_forces=None):
    """Per run and step: mean and sample std over the members that have not failed, and the truth force."""
    truth = {int(s): float(f) for s, _, f in truth_forces or ()}
    frame = force_frame(runs).dropna(subset=['force'])
    stats = frame.groupby(['run', 'step'], sort=True).agg(
        u_D=('u_D', 'first'), mean=('force', 'mean'), std=('force', 'std'), n_members=('force', 'size')
    ).reset_index()
    stats['truth'] = stats['step'].map(truth).astype(float)
    return stats


def write_force_statistics(runs, path, truth_forces=None, config_hash=''):
    frame = force_statistics_frame(runs, truth_forces)
    write_csv(frame, path, config_hash)
    return frame


def write_peak_forces(peaks, path, config_hash=''):
    """`peaks` maps a run label to the per-member maximum force over the trajectory."""
    frame = pd.DataFrame({'member': np.arange(len(next(iter(peaks.values()))))})
    for label, values in peaks.items():
        frame[f'peak_force_{label}'] = np.asarray(values, dtype=float)
    write_csv(frame, path, config_hash)
    return frame


def write_force_histogram(runs, step, path, config_hash=''):
    """Member forces of every run at `step`, the source data of a with/without-analysis histogram."""
    frame = force_frame(runs)
    frame = frame[frame['step'] == step][['run', 'member', 'force']].reset_index(drop=True)
    write_csv(frame, path, config_hash)
    return frame


def write_report(report, directory, config_hash=''):
    write_csv(report.to_frame(), os.path.join(directory, 'analysis_report.csv'), config_hash)
    write_csv(report.summary_frame(), os.path.join(directory, 'analysis_summary.csv'), config_hash)


def write_table(rows, columns, path, config_hash=''):
    frame = pd.DataFrame(rows, columns=columns)
    write_csv(frame, path, config_hash)
    return frame
