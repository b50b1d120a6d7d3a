"""
CSV files of the data model.

Every file starts with a `# config_hash <hash>` comment line followed by a
header row. Observations are stored long-form (step, obs_index, sensor_id,
component, value); sensor layouts as (sensor_id, x[, y]). Calibrated
hyperparameters go to a `key = value` text file.
"""
import logging

import numpy as np
import pandas as pd

from pfenkf.exceptions import ObservationError

from .kernels import MaternParams
from .truth import DataBatch

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
OBSERVATION_COLUMNS = ['step', 'obs_index', 'sensor_id', 'component', 'value']
COORDINATES = ['x', 'y']


def write_csv(frame, path, config_hash=''):
    with open(path, 'w', newline='') as handle:
        handle.write(f'# config_hash {config_hash}\n')
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info("Wrote %s", path)


def read_config_hash(path):
    with open(path) as handle:
        first = handle.readline().strip()
    if not first.startswith('# config_hash'):
        raise ObservationError(f"{path} carries no config hash line")
    return first[len('# config_hash'):].strip()


def read_csv(path, columns):
    frame = pd.read_csv(path, comment='#')
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ObservationError(f"{path} lacks columns {missing}")
    return frame


def write_observations(batches, path, dimension, config_hash=''):
    rows = []
    for batch in batches:
        n_sensors = batch.n_channels // dimension
        obs_index, sensor_id, component = np.meshgrid(
            np.arange(batch.n_obs), np.arange(n_sensors), np.arange(dimension), indexing='ij'
        )
        rows.append(pd.DataFrame({
            'step': batch.step,
            'obs_index': obs_index.ravel(),
            'sensor_id': sensor_id.ravel(),
            'component': component.ravel(),
            'value': batch.observations.ravel(),
        }))
    write_csv(pd.concat(rows, ignore_index=True)[OBSERVATION_COLUMNS], path, config_hash)


def read_observations(path, dimension):
    """Batches keyed by step."""
    frame = read_csv(path, OBSERVATION_COLUMNS)
    batches = {}
    for step, group in frame.groupby('step', sort=True):
        group = group.sort_values(['obs_index', 'sensor_id', 'component'])
        n_obs = group['obs_index'].nunique()
        n_channels = group['sensor_id'].nunique() * dimension
        if len(group) != n_obs * n_channels:
            raise ObservationError(f"step {step} in {path} has an incomplete observation table")
        batches[int(step)] = DataBatch(step=int(step),
                                       observations=group['value'].to_numpy().reshape(n_obs, n_channels))
    return batches


def write_sensors(sensors, path, config_hash=''):
    sensors = np.atleast_2d(np.asarray(sensors, dtype=float))
    frame = pd.DataFrame(sensors, columns=COORDINATES[:sensors.shape[1]])
    frame.insert(0, 'sensor_id', np.arange(len(sensors)))
    write_csv(frame, path, config_hash)


def read_sensors(path):
    frame = read_csv(path, ['sensor_id', 'x']).sort_values('sensor_id')
    columns = [c for c in COORDINATES if c in frame.columns]
    return frame[columns].to_numpy(dtype=float)


def write_hyperparameters(params, path, extra=None, config_hash=''):
    values = {'config_hash': config_hash, 'nu': params.nu, 'sigma': params.sigma, 'length': params.length}
    values.update(extra or {})
    with open(path, 'w') as handle:
        for key, value in values.items():
            text = FLOAT_FORMAT % value if isinstance(value, float) else str(value)
            handle.write(f'{key} = {text}\n')
    logger.info("Wrote %s", path)


def read_hyperparameters(path):
    """Kernel parameters and the remaining entries of a hyperparameter file as strings."""
    values = {}
    with open(path) as handle:
        for line in handle:
            if '=' in line:
                key, value = line.split('=', 1)
                values[key.strip()] = value.strip()
    try:
        params = MaternParams(nu=float(values.pop('nu')), sigma=float(values.pop('sigma')),
                              length=float(values.pop('length')))
    except KeyError as error:
        raise ObservationError(f"{path} lacks the hyperparameter {error}")
    return params, values
