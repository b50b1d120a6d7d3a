import tempfile

from django.test import SimpleTestCase

from ..serializers import ExperimentConfigSerializer, ExperimentSectionSerializer
from .factories import section_data


class TestExperimentSectionSerializer(SimpleTestCase):

    def test_load_segments_are_parsed(self):
        serializer = ExperimentSectionSerializer(data={'id': 'sens2d', 'n_steps': '100',
                                                       'load_segments': '1:1e-4, 71:1e-5'})
        assert serializer.is_valid(), serializer.errors
        assert serializer.validated_data['load_segments'] == [[1, 1e-4], [71, 1e-5]]

    def test_default_load_segment(self):
        serializer = ExperimentSectionSerializer(data={'id': 'rod1d', 'n_steps': '5'})
        assert serializer.is_valid(), serializer.errors
        assert serializer.validated_data['load_segments'] == [[1, 1e-4]]
        assert serializer.validated_data['seed'] == 2024

    def test_malformed_segments(self):
        for text in ('1-1e-4', '1:fast', '', '71:1e-5', '1:1e-4, 1:1e-5', '1:-1e-4'):
            data = {'id': 'rod1d', 'n_steps': '5', 'load_segments': text}
            serializer = ExperimentSectionSerializer(data=data)
            assert not serializer.is_valid(), text
            assert 'load_segments' in serializer.errors

    def test_unknown_experiment(self):
        serializer = ExperimentSectionSerializer(data={'id': 'beam3d', 'n_steps': '5'})
        assert not serializer.is_valid()
        assert 'id' in serializer.errors


class TestExperimentConfigSerializer(SimpleTestCase):

    def test_regularization_length_defaults_to_four_ell(self):
        serializer = ExperimentConfigSerializer(data=section_data(fracture_model={'ell': '0.015'}))
        assert serializer.is_valid(), serializer.errors
        assert abs(serializer.validated_data['enkf_filter']['regularization_length'] - 0.06) < 1e-15

    def test_regularization_length_must_exceed_ell(self):
        data = section_data(enkf_filter={'regularization_length': '0.02'})
        serializer = ExperimentConfigSerializer(data=data)
        assert not serializer.is_valid()
        assert 'regularization_length' in serializer.errors['enkf_filter']

    def test_analysis_steps_within_the_run(self):
        serializer = ExperimentConfigSerializer(data=section_data(enkf_filter={'analysis_steps': '4, 11'}))
        assert not serializer.is_valid()
        assert 'analysis_steps' in serializer.errors['enkf_filter']

    def test_list_values(self):
        data = section_data(enkf_filter={'analysis_steps': '4, 8'}, data_model={'sensor_sweep': '5, 15'},
                            fem_core={'refine_band': '0.4, 1.0, 0.0, 0.5'})
        serializer = ExperimentConfigSerializer(data=data)
        assert serializer.is_valid(), serializer.errors
        assert serializer.validated_data['enkf_filter']['analysis_steps'] == [4, 8]
        assert serializer.validated_data['data_model']['sensor_sweep'] == [5, 15]
        assert serializer.validated_data['fem_core']['refine_band'] == [0.4, 1.0, 0.0, 0.5]

    def test_sensor_sweep_needs_an_analysis_step(self):
        serializer = ExperimentConfigSerializer(data=section_data(data_model={'sensor_sweep': '5'}))
        assert not serializer.is_valid()
        assert 'sensor_sweep' in serializer.errors['data_model']

    def test_data_file_needs_sensors(self):
        with tempfile.NamedTemporaryFile(suffix='.csv') as handle:
            serializer = ExperimentConfigSerializer(data=section_data(data_model={'data_file': handle.name}))
            assert not serializer.is_valid()
        assert 'sensors_file' in serializer.errors['data_model']

    def test_missing_file(self):
        data = section_data(fem_core={'mesh_file': '/nonexistent/mesh.txt'})
        serializer = ExperimentConfigSerializer(data=data)
        assert not serializer.is_valid()
        assert 'mesh_file' in serializer.errors['fem_core']

    def test_material_ranges(self):
        serializer = ExperimentConfigSerializer(data=section_data(fracture_model={'Gc': '0', 'nu': '0.7'}))
        assert not serializer.is_valid()
        assert 'nu' in serializer.errors['fracture_model']

    def test_magnitude_ordering(self):
        data = section_data(stochastic_ensemble={'magnitude_low': '0.8', 'magnitude_high': '0.7'})
        serializer = ExperimentConfigSerializer(data=data)
        assert not serializer.is_valid()
        assert 'magnitude_low' in serializer.errors['stochastic_ensemble']
