"""
The experiments behind the management commands. Every runner takes a
validated ExperimentConfig and an output directory and returns what it
computed, so the commands only format summaries.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as sla

from pfenkf.ensemble.services.checkpoint import MANIFEST
from pfenkf.ensemble.services.prior import sample_prior
from pfenkf.ensemble.services.state import EnsembleState
from pfenkf.ensemble.services.statistics import ensemble_anomalies, ensemble_mean
from pfenkf.exceptions import ExperimentConfigError
from pfenkf.fem.services.discretization import Discretization
from pfenkf.fem.services.mesh_io import write_mesh
from pfenkf.filtering.services.analysis import DenseObservation, kalman_update
from pfenkf.filtering.services.driver import FilterResult, run_filter, sensor_study
from pfenkf.fracture.services.boundary import boundary_conditions
from pfenkf.fracture.services.field_io import write_field_dump
from pfenkf.observations.services.calibration import calibrate_hyperparameters
from pfenkf.observations.services.data_io import (read_hyperparameters, read_observations, read_sensors,
                                                  write_hyperparameters, write_observations, write_sensors)
from pfenkf.observations.services.kernels import MaternParams, matern_gram
from pfenkf.observations.services.operator import ObservationModel, sensor_layout
from pfenkf.observations.services.truth import DataBatch, generate_data, solve_ground_truth, truth_nucleus

from .outputs import (prepare_directory, write_ensemble_forces, write_force_histogram, write_force_statistics,
                      write_peak_forces, write_reaction_forces, write_report, write_table)

logger = logging.getLogger(__name__)

# Prior of the linear toy: Matern(3/2) correlated state around a smooth mean
TOY_KERNEL = MaternParams(nu=1.5, sigma=1.0, length=0.3)
TOY_JITTER = 1e-6


@dataclass(frozen=True, eq=False)
class Problem:
    disc: Discretization
    params: object
    newton: object
    bcs: object
    schedule: object


@dataclass
class FilterExperiment:
    result: FilterResult
    baseline: Optional[FilterResult] = None
    truth: object = None
    statistics: object = None
    extrapolation_step: Optional[int] = None
    sensor_study: List[tuple] = field(default_factory=list)


@dataclass
class LinearToyResult:
    prior_mean: np.ndarray
    analytic_mean: np.ndarray
    analytic_std: np.ndarray
    ensemble_mean: np.ndarray
    ensemble_std: np.ndarray
    observed_spread_prior: np.ndarray
    observed_spread_posterior: np.ndarray

    @property
    def relative_error(self):
        error = np.linalg.norm(self.ensemble_mean - self.analytic_mean)
        return float(error / np.linalg.norm(self.analytic_mean))


def _require_phase_field(config, command):
    if config.experiment_id == 'linear-toy':
        message = f"'{command}' needs the rod1d or sens2d experiment."
        raise ExperimentConfigError({'experiment': {'id': [message]}})


def build_problem(config):
    mesh = config.filter_mesh()
    return Problem(disc=Discretization(mesh), params=config.material_params(),
                   newton=config.newton_settings(), bcs=boundary_conditions(mesh), schedule=config.schedule())


def sensor_locations(config, mesh):
    data = config.section('data_model')
    if data['sensors_file']:
        return read_sensors(data['sensors_file'])
    return sensor_layout(mesh, data['n_sensors'])


def observation_model(config, mesh, sensors=None):
    data = config.section('data_model')
    kernel = config.kernel()
    if data['hyperparameter_file']:
        kernel, _ = read_hyperparameters(data['hyperparameter_file'])
    if sensors is None:
        sensors = sensor_locations(config, mesh)
    return ObservationModel(mesh=mesh, sensors=sensors, sigma_e=data['sigma_e'], kernel=kernel,
                            rho=data['rho'])


def solve_truth(config, n_steps=None, keep_steps=None):
    nucleus = truth_nucleus(config.dimension, config.nucleus_width())
    return solve_ground_truth(config.truth_mesh(), config.material_params(), nucleus, config.schedule(),
                              config.newton_settings(), n_steps=n_steps, keep_steps=keep_steps)


def measure(config, truth, sensors, steps, stream=0):
    data = config.section('data_model')
    return {step: generate_data(truth, sensors, data['rho'], data['sigma_e'], data['n_obs'],
                                config.data_seed + stream, step)
            for step in steps}


def recorded_data(config, steps):
    """Batches of the configured data file; every step of `steps` must be present."""
    data = config.section('data_model')
    batches = read_observations(data['data_file'], config.dimension)
    missing = [step for step in steps if step not in batches]
    if missing:
        raise ExperimentConfigError({'data_model': {'data_file': [f"No observations for steps {missing}."]}})
    return batches


def run_truth(config, out):
    """Ground-truth trajectory: mesh, field dumps at the analysis steps and the last step, reaction forces."""
    _require_phase_field(config, 'truth')
    steps = set(config.analysis_steps) | {config.n_steps}
    truth = solve_truth(config, keep_steps=steps)
    directory = prepare_directory(out, 'truth')
    config_hash = config.config_hash
    write_mesh(truth.mesh, os.path.join(directory, 'mesh.txt'))
    for step in sorted(steps):
        write_field_dump(truth.state(step), truth.disc, os.path.join(directory, f'field_{step:05d}.txt'),
                         extra={'config_hash': config_hash})
    write_reaction_forces(truth.forces, os.path.join(directory, 'reaction_forces.csv'), config_hash)
    return truth


def run_generate_data(config, out):
    """Sensor layout and noisy measurements of the truth at every analysis step, or the last step."""
    _require_phase_field(config, 'generate_data')
    steps = config.analysis_steps or (config.n_steps,)
    sensors = sensor_locations(config, config.filter_mesh())
    truth = solve_truth(config, n_steps=max(steps), keep_steps=set(steps))
    batches = measure(config, truth, sensors, steps)
    directory = prepare_directory(out, 'data')
    config_hash = config.config_hash
    write_sensors(sensors, os.path.join(directory, 'sensors.csv'), config_hash)
    write_observations([batches[step] for step in steps], os.path.join(directory, 'observations.csv'),
                       config.dimension, config_hash)
    write_reaction_forces(truth.forces, os.path.join(directory, 'truth_reaction_forces.csv'), config_hash)
    return batches


def forecast_to(config, problem, step, n_jobs=1):
    """The prior ensemble propagated to `step` without analyses."""
    ensemble = sample_prior(config.prior_spec(), problem.disc, config.section('stochastic_ensemble')['n_ens'],
                            config.seed)
    result = run_filter(config.filter_config(analysis_steps=()), problem.disc, problem.params, problem.newton,
                        problem.bcs, problem.schedule, ensemble, None, None, n_steps=step, n_jobs=n_jobs)
    return result.ensemble


def run_calibrate(config, out, n_jobs=1):
    """Fit the discrepancy kernel to the data of the first analysis step against the forecast ensemble."""
    _require_phase_field(config, 'calibrate')
    if not config.analysis_steps:
        raise ExperimentConfigError(
            {'enkf_filter': {'analysis_steps': ["Calibration uses the first analysis step; none is set."]}}
        )
    step = config.analysis_steps[0]
    problem = build_problem(config)
    obs = observation_model(config, problem.disc.mesh)
    if config.section('data_model')['data_file']:
        batch = recorded_data(config, [step])[step]
    else:
        truth = solve_truth(config, n_steps=step, keep_steps={step})
        batch = measure(config, truth, obs.sensors, [step])[step]

    forecast = forecast_to(config, problem, step, n_jobs)
    prior_std = config.section('data_model')['calibration_prior_std']
    result = calibrate_hyperparameters(batch, obs, ensemble_mean(forecast),
                                       C_a_factor=ensemble_anomalies(forecast),
                                       prior_log_std=prior_std if prior_std > 0 else None)
    directory = prepare_directory(out, 'calibration')
    extra = {
        'step': step,
        'objective': result.objective,
        'initial_objective': result.initial_objective,
        'converged': result.converged,
        'iterations': result.iterations,
    }
    write_hyperparameters(result.params, os.path.join(directory, 'hyperparameters.txt'), extra,
                          config.config_hash)
    return result


def run_sensor_sweep(config, problem, forecast, truth, n_jobs=1):
    """Posterior crack spread of the first analysis for every configured sensor count and noise stream."""
    data = config.section('data_model')
    step = forecast.step
    mesh = problem.disc.mesh
    models = {count: observation_model(config, mesh, sensor_layout(mesh, count))
              for count in data['sensor_sweep']}
    rows = []
    for stream in range(data['sweep_seeds']):
        def data_for(obs):
            return measure(config, truth, obs.sensors, [step], stream=stream)[step]

        spreads = sensor_study(forecast, models, data_for, config.filter_config(), problem.disc,
                               problem.params, problem.newton, problem.bcs, n_jobs)
        rows.extend((stream, count, spreads[count]) for count in data['sensor_sweep'])
    return rows


def run_filter_experiment(config, out, n_jobs=1, resume=None):
    """
    Prior sampling, forecast and analyses over the whole schedule; with
    `compare_baseline` the same prior is also propagated without analyses.
    `resume` names a checkpoint directory of an earlier run to restart from.
    """
    if config.experiment_id == 'linear-toy':
        return run_linear_toy(config, out)
    if resume and not os.path.isfile(os.path.join(resume, MANIFEST)):
        raise ExperimentConfigError({'resume': [f"No checkpoint manifest in {resume}."]})
    data = config.section('data_model')
    enkf = config.section('enkf_filter')
    steps = config.analysis_steps
    config_hash = config.config_hash

    problem = build_problem(config)
    obs = observation_model(config, problem.disc.mesh)
    batches = recorded_data(config, steps) if data['data_file'] else {}
    truth = None
    if not data['data_file'] or data['sensor_sweep']:
        truth = solve_truth(config, keep_steps=set(steps))
    if not data['data_file']:
        batches = measure(config, truth, obs.sensors, steps)

    ensemble = sample_prior(config.prior_spec(), problem.disc, config.section('stochastic_ensemble')['n_ens'],
                            config.seed)
    directory = prepare_directory(out, 'filter')
    checkpoints = os.path.join(directory, 'checkpoints') if enkf['checkpoints'] else None
    result = run_filter(config.filter_config(), problem.disc, problem.params, problem.newton, problem.bcs,
                        problem.schedule, ensemble, obs, batches.__getitem__, checkpoint_root=checkpoints,
                        config_hash=config_hash, n_jobs=n_jobs, resume_from=resume)
    experiment = FilterExperiment(result=result, truth=truth)

    runs = {'analysis': result.forces}
    peaks = {'analysis': result.peak_forces()}
    if enkf['compare_baseline']:
        experiment.baseline = run_filter(config.filter_config(analysis_steps=()), problem.disc,
                                         problem.params, problem.newton, problem.bcs, problem.schedule,
                                         ensemble, obs, None, n_jobs=n_jobs)
        runs['baseline'] = experiment.baseline.forces
        peaks['baseline'] = experiment.baseline.peak_forces()

    write_report(result.report, directory, config_hash)
    write_ensemble_forces(runs, os.path.join(directory, 'reaction_forces.csv'), config_hash)
    write_peak_forces(peaks, os.path.join(directory, 'peak_forces.csv'), config_hash)
    experiment.statistics = write_force_statistics(runs, os.path.join(directory, 'force_statistics.csv'),
                                                   truth.forces if truth else None, config_hash)
    if truth is not None:
        write_reaction_forces(truth.forces, os.path.join(directory, 'truth_reaction_forces.csv'), config_hash)
    if steps:
        experiment.extrapolation_step = min(steps[-1] + enkf['extrapolation_offset'], config.n_steps)
        write_force_histogram(runs, experiment.extrapolation_step,
                              os.path.join(directory, 'force_histogram.csv'), config_hash)
    if data['sensor_sweep']:
        forecast = result.snapshots[(steps[0], 'forecast')]
        experiment.sensor_study = run_sensor_sweep(config, problem, forecast, truth, n_jobs)
        write_table(experiment.sensor_study, ['stream', 'n_sensors', 'crack_spread'],
                    os.path.join(directory, 'sensor_study.csv'), config_hash)
    return experiment


def linear_toy_problem(state_size, n_sensors, sigma_e, seed):
    """
    Gaussian prior (mean, covariance), an observation matrix picking
    `n_sensors` state entries and one noisy observation of a prior draw.
    """
    if not 1 <= n_sensors <= state_size:
        message = "The toy observes between 1 and state_size entries."
        raise ExperimentConfigError({'data_model': {'n_sensors': [message]}})
    points = np.linspace(0.0, 1.0, state_size)
    mean = 1.0 + 0.5 * np.sin(2.0 * np.pi * points)
    covariance = matern_gram(points, params=TOY_KERNEL) + TOY_JITTER * np.eye(state_size)
    rng = np.random.default_rng([int(seed), 0])
    truth = mean + np.linalg.cholesky(covariance) @ rng.standard_normal(state_size)
    observed = np.round(np.linspace(0, state_size - 1, n_sensors + 2)[1:-1]).astype(int)
    H = np.zeros((n_sensors, state_size))
    H[np.arange(n_sensors), observed] = 1.0
    y = H @ truth + sigma_e * rng.standard_normal(n_sensors)
    return mean, covariance, H, y


def linear_toy_posterior(state_size, n_sensors, sigma_e, n_ens, seed):
    """Kalman shift of a Gaussian ensemble of the toy next to closed-form conditioning."""
    mean, covariance, H, y = linear_toy_problem(state_size, n_sensors, sigma_e, seed)
    R = sigma_e ** 2 * np.eye(len(y))

    gain = sla.solve(H @ covariance @ H.T + R, H @ covariance, assume_a='pos').T
    analytic_mean = mean + gain @ (y - H @ mean)
    analytic_cov = covariance - gain @ H @ covariance

    rng = np.random.default_rng([int(seed), 1])
    draws = mean[:, None] + np.linalg.cholesky(covariance) @ rng.standard_normal((state_size, n_ens))
    prior = EnsembleState.from_vectors(draws, seed=seed)
    obs = DenseObservation(H=H, rho=1.0, discrepancy_covariance=np.zeros_like(R), noise_covariance=R)
    posterior = kalman_update(prior, DataBatch(step=1, observations=y[None, :]), obs).stacked()

    return LinearToyResult(
        prior_mean=mean,
        analytic_mean=analytic_mean,
        analytic_std=np.sqrt(np.diag(analytic_cov)),
        ensemble_mean=posterior.mean(axis=1),
        ensemble_std=posterior.std(axis=1, ddof=1),
        observed_spread_prior=(H @ draws).std(axis=1, ddof=1),
        observed_spread_posterior=(H @ posterior).std(axis=1, ddof=1),
    )


def run_linear_toy(config, out):
    data = config.section('data_model')
    state_size = config.section('fem_core')['state_size']
    n_ens = config.section('stochastic_ensemble')['n_ens']
    result = linear_toy_posterior(state_size, data['n_sensors'], data['sigma_e'], n_ens, config.seed)
    directory = prepare_directory(out, 'linear_toy')
    rows = zip(range(state_size), result.prior_mean, result.analytic_mean, result.ensemble_mean,
               result.analytic_std, result.ensemble_std)
    columns = ['index', 'prior_mean', 'analytic_mean', 'ensemble_mean', 'analytic_std', 'ensemble_std']
    write_table(list(rows), columns, os.path.join(directory, 'posterior.csv'), config.config_hash)
    logger.info("Linear toy: relative error of the posterior mean %.3e with %d members",
                result.relative_error, n_ens)
    return result
