"""
Ensemble checkpoints: one directory per step holding a field dump per
member and a `manifest.json` with the step, member seeds, failure flags,
the configuration hash of the run that wrote it and any metadata the
filter adds (stage label, discrepancy kernel).
"""
import json
import logging
import os

from pfenkf.exceptions import EnsembleError
from pfenkf.fracture.services.field_io import read_field_dump, write_field_dump

from .state import EnsembleState

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'


def checkpoint_dir(root, step, label='forecast'):
    return os.path.join(root, f'step_{step:05d}_{label}')


def write_checkpoint(ensemble, disc, directory, config_hash='', metadata=None):
    os.makedirs(directory, exist_ok=True)
    files = []
    for index, member in enumerate(ensemble.members):
        name = f'member_{index:04d}.txt'
        write_field_dump(member, disc, os.path.join(directory, name), extra={'config_hash': config_hash})
        files.append(name)
    manifest = {
        'step': int(ensemble.step),
        'n_ens': ensemble.n_ens,
        'seeds': [list(s) for s in ensemble.seeds],
        'failed': list(ensemble.failed),
        'config_hash': config_hash,
        'files': files,
    }
    manifest.update(metadata or {})
    with open(os.path.join(directory, MANIFEST), 'w') as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write('\n')
    logger.info("Wrote checkpoint of step %d to %s", ensemble.step, directory)
    return directory


def read_manifest(directory):
    path = os.path.join(directory, MANIFEST)
    if not os.path.exists(path):
        raise EnsembleError(f"no checkpoint manifest in {directory}")
    with open(path) as handle:
        return json.load(handle)


def read_checkpoint(directory, disc, config_hash=None):
    """Load an ensemble; with `config_hash` given, refuse checkpoints of another configuration."""
    manifest = read_manifest(directory)
    if config_hash is not None and manifest['config_hash'] != config_hash:
        raise EnsembleError(f"checkpoint {directory} belongs to configuration {manifest['config_hash']}")
    members = [read_field_dump(os.path.join(directory, name), disc) for name in manifest['files']]
    return EnsembleState(members=members, seeds=manifest['seeds'], failed=manifest['failed'])
