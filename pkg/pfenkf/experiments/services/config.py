"""
Experiment configuration: an INI preset, optionally overlaid by a user
file, validated by the section serializers and frozen.

Relative file paths in the user file are taken relative to that file.
"""
import configparser
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from django.conf import settings

from pfenkf.ensemble.services.localization import LocalizationSpec
from pfenkf.ensemble.services.prior import PriorSpec1D, PriorSpec2D
from pfenkf.exceptions import ExperimentConfigError
from pfenkf.fem.services.elasticity import MaterialParams
from pfenkf.fem.services.mesh import RefineBand, build_mesh_1d, build_mesh_sens
from pfenkf.fem.services.mesh_io import read_mesh
from pfenkf.filtering.services.driver import FilterConfig
from pfenkf.filtering.services.regularization import RegularizationSettings
from pfenkf.fracture.services.boundary import LoadSchedule
from pfenkf.fracture.services.solver import NewtonSettings
from pfenkf.observations.services.kernels import MaternParams
from pfenkf.observations.services.truth import truth_mesh_1d, truth_mesh_sens

from ..serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)

SECTIONS = ('experiment', 'fem_core', 'fracture_model', 'stochastic_ensemble', 'data_model', 'enkf_filter')
VARIANTS = ('desk', 'paper')
FILE_KEYS = {'fem_core': ('mesh_file',), 'data_model': ('sensors_file', 'data_file', 'hyperparameter_file')}

# Stream index of the measurement noise; member draws use their index
DATA_STREAM = 0xDA7A


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Validated experiment settings, one dict per INI section."""
    variant: str
    values: dict
    output_dir: Optional[str] = None
    sources: tuple = field(default_factory=tuple)

    @property
    def experiment_id(self):
        return self.values['experiment']['id']

    @property
    def seed(self):
        return self.values['experiment']['seed']

    @property
    def n_steps(self):
        return self.values['experiment']['n_steps']

    @property
    def dimension(self):
        return 2 if self.experiment_id == 'sens2d' else 1

    @property
    def config_hash(self):
        """SHA-256 of the canonical JSON of the settings; the output directory is not part of it."""
        values = {name: dict(section) for name, section in self.values.items()}
        values['experiment'].pop('output_dir', None)
        text = json.dumps(values, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    @property
    def data_seed(self):
        return int(np.random.SeedSequence([self.seed, DATA_STREAM]).generate_state(1)[0])

    @property
    def analysis_steps(self):
        return tuple(sorted(set(self.values['enkf_filter']['analysis_steps'])))

    def section(self, name):
        return self.values[name]

    def material_params(self):
        fracture = self.values['fracture_model']
        return MaterialParams(E=fracture['E'], nu=fracture['nu'], Gc=fracture['Gc'], ell=fracture['ell'],
                              beta=fracture['beta'], residual_stiffness=fracture['residual_stiffness'],
                              kinematics=fracture['kinematics'])

    def newton_settings(self):
        fracture = self.values['fracture_model']
        return NewtonSettings(tolerance=fracture['newton_tolerance'],
                              relative_tolerance=fracture['newton_relative_tolerance'],
                              max_iterations=fracture['newton_max_iterations'],
                              line_search=fracture['line_search'], max_cuts=fracture['max_cuts'],
                              stagger_max_iterations=fracture['stagger_max_iterations'],
                              stagger_tolerance=fracture['stagger_tolerance'])

    def schedule(self):
        experiment = self.values['experiment']
        return LoadSchedule(n_steps=experiment['n_steps'],
                            segments=[tuple(segment) for segment in experiment['load_segments']])

    def refine_band(self):
        return RefineBand(*self.values['fem_core']['refine_band'])

    def filter_mesh(self):
        fem = self.values['fem_core']
        if fem['mesh_file']:
            return read_mesh(fem['mesh_file'])
        if self.dimension == 1:
            return build_mesh_1d(fem['n_elements'])
        return build_mesh_sens(fem['h_coarse'], fem['h_fine'], self.refine_band())

    def truth_mesh(self):
        fem = self.values['fem_core']
        if self.dimension == 1:
            return truth_mesh_1d(fem['n_elements'])
        return truth_mesh_sens(fem['h_coarse'], fem['h_fine'], self.refine_band())

    def prior_spec(self):
        ensemble = self.values['stochastic_ensemble']
        width = ensemble.get('nucleus_width')
        if self.dimension == 1:
            spec = PriorSpec1D(center_mean=ensemble['center_mean'], center_std=ensemble['center_std'],
                               magnitude_low=ensemble['magnitude_low'],
                               magnitude_high=ensemble['magnitude_high'])
        else:
            spec = PriorSpec2D(x_shift=ensemble['x_shift'], x_scale=ensemble['x_scale'],
                               y_shift=ensemble['y_shift'], y_scale=ensemble['y_scale'],
                               beta_a=ensemble['beta_a'], beta_b=ensemble['beta_b'],
                               magnitude=ensemble['pore_magnitude'])
        return spec if width is None else replace(spec, width=width)

    def nucleus_width(self):
        return self.prior_spec().width

    def kernel(self):
        data = self.values['data_model']
        return MaternParams(nu=data['nu'], sigma=data['sigma'], length=data['length'])

    def localization(self):
        length = self.values['stochastic_ensemble']['localization_length']
        return LocalizationSpec(length=length) if length > 0 else None

    def regularization_settings(self):
        enkf = self.values['enkf_filter']
        return RegularizationSettings(length=enkf['regularization_length'], n_stagger=enkf['n_stagger'],
                                      proximal_weight=enkf['proximal_weight'])

    def filter_config(self, analysis_steps=None):
        ensemble = self.values['stochastic_ensemble']
        enkf = self.values['enkf_filter']
        prior_std = self.values['data_model']['calibration_prior_std']
        return FilterConfig(
            n_ens=ensemble['n_ens'],
            regularization=self.regularization_settings(),
            analysis_steps=self.analysis_steps if analysis_steps is None else analysis_steps,
            inflation=ensemble['inflation'],
            localization=self.localization(),
            recalibrate=enkf['recalibrate'],
            calibration_prior_std=prior_std if prior_std > 0 else None,
            failure_threshold=ensemble['failure_threshold'],
        )

    def output_directory(self):
        if self.output_dir:
            return self.output_dir
        if self.values['experiment']['output_dir']:
            return self.values['experiment']['output_dir']
        name = f'{self.experiment_id}-{self.variant}-{self.config_hash[:12]}'
        return os.path.join(settings.PFENKF_OUTPUT_ROOT, name)


def preset_path(experiment_id, variant, preset_dir=None):
    directory = preset_dir or settings.PFENKF_PRESET_DIR
    return os.path.join(directory, f'{experiment_id}-{variant}.ini')


def _parser():
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    # E and Gc are case sensitive
    parser.optionxform = str
    return parser


def _read_user_file(path):
    if not os.path.isfile(path):
        raise ExperimentConfigError({'config': [f"File '{path}' does not exist."]})
    parser = _parser()
    try:
        parser.read(path)
    except configparser.Error as error:
        raise ExperimentConfigError({'config': [str(error)]})
    base = os.path.dirname(os.path.abspath(path))
    for section, keys in FILE_KEYS.items():
        for key in keys:
            if parser.has_option(section, key):
                value = parser.get(section, key)
                if value and not os.path.isabs(value):
                    parser.set(section, key, os.path.join(base, value))
    return parser


def _unknown_entries(data):
    errors = {}
    serializer = ExperimentConfigSerializer()
    for name, section in data.items():
        if name not in SECTIONS:
            errors[name] = ["Unknown section."]
            continue
        unknown = sorted(set(section) - set(serializer.fields[name].fields))
        if unknown:
            errors[name] = {key: ["Unknown key."] for key in unknown}
    return errors


def _plain(value):
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def load_experiment_config(config_path=None, variant='desk', experiment=None, seed=None, output_dir=None,
                           preset_dir=None):
    """
    Read the `variant` preset of the experiment (taken from `experiment`,
    the user file or 'rod1d', in that order), overlay the user file and
    validate. Every problem is reported together in ExperimentConfigError.
    """
    if variant not in VARIANTS:
        raise ExperimentConfigError({'preset': [f"Expected one of {VARIANTS}."]})
    user = _read_user_file(config_path) if config_path else None
    experiment_id = experiment or (user.get('experiment', 'id', fallback=None) if user else None) or 'rod1d'
    preset = preset_path(experiment_id, variant, preset_dir)
    if not os.path.isfile(preset):
        raise ExperimentConfigError({'preset': [f"No {variant} preset for experiment '{experiment_id}'."]})

    parser = _parser()
    parser.read(preset)
    if user is not None:
        parser.read_dict(user)
    data = {name: dict(parser[name]) for name in parser.sections()}
    for name in SECTIONS:
        data.setdefault(name, {})
    data['experiment']['id'] = experiment_id
    if seed is not None:
        data['experiment']['seed'] = str(seed)

    errors = _unknown_entries(data)
    if errors:
        raise ExperimentConfigError(errors)
    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ExperimentConfigError(serializer.errors)

    sources = (preset,) + ((os.path.abspath(config_path),) if config_path else ())
    config = ExperimentConfig(variant=variant, values=_plain(serializer.validated_data),
                              output_dir=output_dir, sources=sources)
    logger.info("Loaded %s (%s) configuration %s", experiment_id, variant, config.config_hash[:12])
    return config
