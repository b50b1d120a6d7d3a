import os
import tempfile

from django.test import SimpleTestCase
import pytest

from pfenkf.exceptions import ExperimentConfigError
from ..services.config import load_experiment_config
from .factories import ExperimentConfigFactory, write_ini


class TestPresets(SimpleTestCase):

    def test_rod_desk_preset(self):
        config = ExperimentConfigFactory(seed=None)
        assert config.experiment_id == 'rod1d'
        assert config.dimension == 1
        assert config.seed == 2024
        assert config.analysis_steps == (82, 92, 102)
        params = config.material_params()
        assert (params.E, params.nu, params.Gc, params.ell) == (210000.0, 0.3, 2.7, 0.025)
        assert abs(config.regularization_settings().length - 0.1) < 1e-15
        assert config.localization() is None
        assert config.filter_mesh().n_elements == 200
        newton = config.newton_settings()
        assert (newton.stagger_max_iterations, newton.stagger_tolerance) == (2000, 1e-6)

    def test_sens_paper_preset(self):
        config = ExperimentConfigFactory(experiment='sens2d', variant='paper')
        assert config.dimension == 2
        assert config.analysis_steps == (381, 485)
        schedule = config.schedule()
        assert schedule.increment(70) == 1e-4
        assert schedule.increment(71) == 1e-5
        filter_config = config.filter_config()
        assert filter_config.n_ens == 100
        assert filter_config.inflation == 1.05
        assert filter_config.localization.length == 0.45

    def test_linear_toy_presets(self):
        desk = ExperimentConfigFactory(experiment='linear-toy')
        paper = ExperimentConfigFactory(experiment='linear-toy', variant='paper')
        assert desk.section('fem_core')['state_size'] == 6
        assert desk.section('stochastic_ensemble')['n_ens'] == 10000
        assert paper.section('stochastic_ensemble')['n_ens'] == 100000

    def test_every_preset_loads(self):
        for experiment in ('rod1d', 'sens2d', 'linear-toy'):
            for variant in ('desk', 'paper'):
                config = load_experiment_config(variant=variant, experiment=experiment)
                assert config.variant == variant
                assert len(config.sources) == 1

    def test_unknown_variant(self):
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(variant='huge')
        assert 'preset' in error.value.errors


class TestUserFile(SimpleTestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = self.directory.name

    def tearDown(self):
        self.directory.cleanup()

    def test_user_file_overrides_the_preset(self):
        path = write_ini(self.root, {'experiment': {'id': 'sens2d'}, 'stochastic_ensemble': {'n_ens': 7}})
        config = load_experiment_config(path)
        assert config.experiment_id == 'sens2d'
        assert config.section('stochastic_ensemble')['n_ens'] == 7
        assert config.material_params().ell == 0.015
        assert config.sources[-1] == os.path.abspath(path)

    def test_experiment_flag_wins_over_the_file(self):
        path = write_ini(self.root, {'experiment': {'id': 'sens2d'}})
        assert load_experiment_config(path, experiment='rod1d').experiment_id == 'rod1d'

    def test_unknown_key(self):
        path = write_ini(self.root, {'fracture_model': {'youngs_modulus': 1.0}})
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(path)
        assert 'youngs_modulus' in error.value.errors['fracture_model']

    def test_unknown_section(self):
        path = write_ini(self.root, {'solver': {'tolerance': 1.0}})
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(path)
        assert 'solver' in error.value.errors

    def test_missing_file(self):
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(os.path.join(self.root, 'absent.ini'))
        assert 'config' in error.value.errors

    def test_invalid_value(self):
        path = write_ini(self.root, {'stochastic_ensemble': {'n_ens': 'many'}})
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(path)
        assert 'n_ens' in error.value.errors['stochastic_ensemble']

    def test_relative_file_keys(self):
        with open(os.path.join(self.root, 'sensors.csv'), 'w') as handle:
            handle.write('# config_hash x\nsensor_id,x\n0,0.5\n')
        path = write_ini(self.root, {'data_model': {'sensors_file': 'sensors.csv'}})
        config = load_experiment_config(path)
        assert config.section('data_model')['sensors_file'] == os.path.join(self.root, 'sensors.csv')

    def test_missing_data_file(self):
        path = write_ini(self.root, {'data_model': {'data_file': 'observations.csv'}})
        with pytest.raises(ExperimentConfigError) as error:
            load_experiment_config(path)
        assert 'data_file' in error.value.errors['data_model']


class TestConfigHash(SimpleTestCase):

    def test_hash_is_stable(self):
        a = ExperimentConfigFactory(seed=5)
        b = ExperimentConfigFactory(seed=5)
        assert a.config_hash == b.config_hash
        assert len(a.config_hash) == 64

    def test_hash_follows_the_settings(self):
        assert ExperimentConfigFactory(seed=5).config_hash != ExperimentConfigFactory(seed=6).config_hash
        paper = ExperimentConfigFactory(seed=5, variant='paper')
        assert ExperimentConfigFactory(seed=5).config_hash != paper.config_hash

    def test_output_directory_is_not_hashed(self):
        a = ExperimentConfigFactory(seed=5, output_dir='/tmp/a')
        b = ExperimentConfigFactory(seed=5, output_dir='/tmp/b')
        assert a.config_hash == b.config_hash
        assert a.output_directory() == '/tmp/a'

    def test_default_output_directory(self):
        config = ExperimentConfigFactory(seed=5)
        with self.settings(PFENKF_OUTPUT_ROOT='/data/runs'):
            assert config.output_directory() == f'/data/runs/rod1d-desk-{config.config_hash[:12]}'

    def test_data_seed(self):
        config = ExperimentConfigFactory(seed=5)
        assert config.data_seed == ExperimentConfigFactory(seed=5).data_seed
        assert config.data_seed != ExperimentConfigFactory(seed=6).data_seed
        assert isinstance(config.data_seed, int)
