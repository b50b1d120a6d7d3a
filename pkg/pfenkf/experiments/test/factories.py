import os

import factory

from ..services.config import load_experiment_config


def write_ini(directory, sections, name='experiment.ini'):
    """INI file from a {section: {key: value}} dict; returns its path."""
    path = os.path.join(directory, name)
    with open(path, 'w') as handle:
        for section, values in sections.items():
            handle.write(f'[{section}]\n')
            for key, value in values.items():
                handle.write(f'{key} = {value}\n')
            handle.write('\n')
    return path


class ExperimentConfigFactory(factory.Factory):

    class Meta:
        model = load_experiment_config

    config_path = None
    variant = 'desk'
    experiment = 'rod1d'
    seed = factory.Faker('pyint', min_value=0, max_value=10000)
    output_dir = None


def section_data(**sections):
    """Raw serializer input with an `experiment` section and the given overrides."""
    data = {'experiment': {'id': 'rod1d', 'n_steps': '10'}, 'fem_core': {}, 'fracture_model': {},
            'stochastic_ensemble': {}, 'data_model': {}, 'enkf_filter': {}}
    for name, values in sections.items():
        data[name].update(values)
    return data


def small_rod_sections(**overrides):
    """A rod run small enough for the test suite."""
    sections = {
        'experiment': {'id': 'rod1d', 'seed': 3, 'n_steps': 4, 'load_segments': '1:1e-3'},
        'fem_core': {'n_elements': 20},
        'fracture_model': {'E': 1.0, 'Gc': 1.0, 'ell': 0.05, 'nu': 0.0},
        'stochastic_ensemble': {'n_ens': 4},
        'data_model': {'n_sensors': 5, 'sigma_e': 1e-4, 'n_obs': 5},
        'enkf_filter': {'analysis_steps': 2, 'compare_baseline': 'true', 'extrapolation_offset': 1},
    }
    for name, values in overrides.items():
        sections.setdefault(name, {}).update(values)
    return sections
