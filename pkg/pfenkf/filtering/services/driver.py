"""
The filter loop: forecast every member step by step and, at the analysis
steps, inflate, apply the Kalman shift and regularize each member back
onto the phase-field model before the forecast resumes from it.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from pfenkf.ensemble.services.checkpoint import (checkpoint_dir, read_checkpoint, read_manifest,
                                                write_checkpoint)
from pfenkf.ensemble.services.forecast import FAILURE_THRESHOLD, check_failures, forecast_step, map_members
from pfenkf.ensemble.services.localization import LocalizationSpec
from pfenkf.ensemble.services.statistics import ensemble_anomalies, ensemble_mean, inflate
from pfenkf.exceptions import RegularizationError
from pfenkf.fracture.services.assembly import reaction_force
from pfenkf.observations.services.calibration import calibrate_hyperparameters
from pfenkf.observations.services.kernels import MaternParams

from .analysis import (covariance_terms, innovation_covariance, kalman_update, localization_matrices,
                       member_misfits)
from .crack import crack_summary
from .regularization import RegularizationSettings, regularize_member_traced
from .report import AnalysisRecord, AnalysisReport, MemberRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterConfig:
    n_ens: int
    regularization: RegularizationSettings
    analysis_steps: Tuple[int, ...] = ()
    inflation: float = 1.0
    localization: Optional[LocalizationSpec] = None
    recalibrate: bool = False
    calibration_prior_std: Optional[float] = 1.0
    failure_threshold: float = FAILURE_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, 'analysis_steps', tuple(sorted(set(int(s) for s in self.analysis_steps))))
        if self.n_ens < 2:
            raise ValueError("the filter needs at least two members")
        if self.inflation < 1.0:
            raise ValueError("inflation factor must be >= 1")
        if self.analysis_steps and self.analysis_steps[0] < 1:
            raise ValueError("analysis steps start at 1")


@dataclass
class FilterResult:
    ensemble: object
    report: AnalysisReport
    forces: List[Tuple[int, float, np.ndarray]] = field(default_factory=list)
    snapshots: Dict[Tuple[int, str], object] = field(default_factory=dict)
    observation_model: object = None

    def force_matrix(self):
        """(n_steps + 1, n_ens) reaction forces; NaN once a member has failed."""
        return np.vstack([f for _, _, f in self.forces])

    def peak_forces(self):
        return np.nanmax(self.force_matrix(), axis=0)

    def force_statistics(self, step):
        for s, _, f in self.forces:
            if s == step:
                values = f[np.isfinite(f)]
                return float(values.mean()), float(values.std(ddof=1))
        raise KeyError(step)


def ensemble_forces(ensemble, disc, params, bcs):
    forces = np.full(ensemble.n_ens, np.nan)
    for index in ensemble.active:
        forces[index] = reaction_force(ensemble.members[index], disc, params, bcs)
    return forces


def _regularize(member, disc, params, newton, bcs, settings):
    try:
        regularized, trace = regularize_member_traced(member, disc, params, newton, bcs, settings)
        return regularized, trace, None
    except RegularizationError as error:
        return member, None, str(error)


def analysis_step(ensemble, batch, obs, config, disc, params, newton, bcs, n_jobs=1):
    """
    One analysis of `ensemble` with the observations of `batch`.

    Returns the regularized ensemble, its analysis record and the
    observation model used (recalibrated when the configuration asks).
    """
    step = ensemble.step
    if config.recalibrate:
        calibration = calibrate_hyperparameters(batch, obs, ensemble_mean(ensemble),
                                                C_a_factor=ensemble_anomalies(ensemble),
                                                prior_log_std=config.calibration_prior_std)
        obs = obs.with_kernel(calibration.params)

    forecast = ensemble
    inflated = inflate(forecast, config.inflation)
    taper = None
    if config.localization is not None:
        taper = localization_matrices(config.localization, disc.mesh.dof_locations, obs.channel_locations)
    _, HCHt = covariance_terms(inflated, obs, taper)
    G = innovation_covariance(HCHt, obs, batch.n_obs)
    pre = member_misfits(forecast, batch, obs, G)

    analysed = kalman_update(inflated, batch, obs, taper)
    inflated_misfit = member_misfits(inflated, batch, obs, G).mean()
    kalman_post = member_misfits(analysed, batch, obs, G)
    if kalman_post.mean() > inflated_misfit * (1.0 + 1e-10):
        logger.warning("Kalman update at step %d increased the data misfit (%.4e -> %.4e)",
                       step, inflated_misfit, kalman_post.mean())

    outcomes = map_members(_regularize, analysed, (disc, params, newton, bcs, config.regularization), n_jobs)
    indices = list(outcomes)
    members = list(analysed.members)
    failed = list(analysed.failed)
    traces = {}
    for index, (member, trace, error) in outcomes.items():
        if error is None:
            members[index] = member
            traces[index] = trace
        else:
            members[index] = forecast.members[index]
            failed[index] = True
            logger.warning("Member %d could not be regularized at step %d: %s", index, step, error)
    regularized = type(analysed)(members=members, seeds=analysed.seeds, failed=failed)
    check_failures(regularized, config.failure_threshold)

    post = dict(zip(regularized.active, member_misfits(regularized, batch, obs, G)))
    record = AnalysisRecord(step=step, kalman_misfit_post=float(kalman_post.mean()))
    for position, index in enumerate(indices):
        before, after = forecast.members[index], regularized.members[index]
        trace = traces.get(index)
        record.members.append(MemberRecord(
            member=int(index),
            pre_misfit=float(pre[position]),
            post_misfit=float(post.get(index, np.nan)),
            crack_position_pre=crack_summary(before, disc),
            crack_position_post=crack_summary(after, disc),
            reaction_force_pre=reaction_force(before, disc, params, bcs),
            reaction_force_post=reaction_force(after, disc, params, bcs),
            regularization_iterations=trace.iterations if trace else 0,
            retried=bool(trace and trace.retried),
            failed=failed[index],
        ))
    logger.info("Analysis at step %d: misfit %.4e -> %.4e, crack spread %.4e -> %.4e, "
                "force spread %.4e -> %.4e", step, record.misfit_pre, record.misfit_post,
                record.crack_spread_pre, record.crack_spread_post,
                record.force_spread_pre, record.force_spread_post)
    return regularized, record, obs


def resume_point(directory, disc, obs, config_hash=None):
    """
    Ensemble, observation model and stage label ('forecast' or 'analysis')
    stored in the checkpoint `directory`.
    """
    manifest = read_manifest(directory)
    ensemble = read_checkpoint(directory, disc, config_hash)
    if obs is not None and manifest.get('kernel'):
        obs = obs.with_kernel(MaternParams(**manifest['kernel']))
    stage = manifest.get('stage', 'analysis')
    logger.info("Resuming from the %s ensemble of step %d (%s)", stage, ensemble.step, directory)
    return ensemble, obs, stage


def run_filter(config, disc, params, newton, bcs, schedule, ensemble, obs, data_source: Callable,
               *, n_steps=None, checkpoint_root=None, config_hash='', n_jobs=1, resume_from=None):
    """
    Propagate `ensemble` through `schedule`, analysing at `config.analysis_steps`
    with the batches returned by `data_source(step)`.

    With `resume_from` the run restarts from that checkpoint instead of
    `ensemble`; a forecast checkpoint of an analysis step is analysed first.
    The resumed part of a serial run is bit-identical to the uninterrupted run.
    """
    last = schedule.n_steps if n_steps is None else n_steps
    result = FilterResult(ensemble=ensemble, report=AnalysisReport(), observation_model=obs)

    def save(current, label, model):
        if not checkpoint_root:
            return
        metadata = {'stage': label}
        if model is not None:
            metadata['kernel'] = asdict(model.kernel)
        write_checkpoint(current, disc, checkpoint_dir(checkpoint_root, current.step, label), config_hash,
                         metadata)

    def assimilate(current, model):
        step = current.step
        result.snapshots[(step, 'forecast')] = current
        save(current, 'forecast', model)
        current, record, model = analysis_step(current, data_source(step), model, config, disc, params,
                                               newton, bcs, n_jobs)
        result.report.add(record)
        result.snapshots[(step, 'analysis')] = current
        save(current, 'analysis', model)
        return current, model

    def record_forces(current):
        u_D = current.active_members[0].u_D
        result.forces.append((current.step, u_D, ensemble_forces(current, disc, params, bcs)))
        return u_D

    if resume_from is not None:
        ensemble, obs, stage = resume_point(resume_from, disc, obs, config_hash or None)
        if stage == 'forecast' and ensemble.step in config.analysis_steps:
            ensemble, obs = assimilate(ensemble, obs)
    record_forces(ensemble)

    while ensemble.step < last:
        du = schedule.increment(ensemble.step + 1)
        ensemble = forecast_step(ensemble, disc, params, newton, bcs, du, n_jobs, config.failure_threshold)
        step = ensemble.step
        if step in config.analysis_steps:
            ensemble, obs = assimilate(ensemble, obs)
        u_D = record_forces(ensemble)
        if step % 10 == 0:
            logger.info("Filter reached step %d (u_D = %.4e)", step, u_D)

    result.ensemble = ensemble
    result.observation_model = obs
    return result


def sensor_study(forecast, observation_models, data_for, config, disc, params, newton, bcs, n_jobs=1):
    """
    Repeat one analysis of `forecast` with every observation model of
    `observation_models` (keyed by sensor count); returns the posterior
    crack-position spread per key.
    """
    spreads = {}
    for key, obs in observation_models.items():
        _, record, _ = analysis_step(forecast, data_for(obs), obs, config, disc, params, newton, bcs, n_jobs)
        spreads[key] = record.crack_spread_post
        logger.info("Sensor study: %s sensors give a crack spread of %.4e", key, spreads[key])
    return spreads
