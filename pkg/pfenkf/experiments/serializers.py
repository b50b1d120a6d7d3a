import os

from rest_framework import serializers

EXPERIMENTS = ('rod1d', 'sens2d', 'linear-toy')


class CommaSeparatedListField(serializers.ListField):
    """A ListField that also accepts the comma separated form used in INI files."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)

    def to_representation(self, data):
        return ', '.join(str(item) for item in data)


class LoadSegmentsField(serializers.Field):
    """`first_step:increment` pairs, e.g. `1:1e-4, 71:1e-5`."""
    default_error_messages = {
        'invalid': 'Expected comma separated first_step:increment pairs.',
    }

    def to_internal_value(self, data):
        if not isinstance(data, str):
            self.fail('invalid')
        segments = []
        for item in filter(None, (part.strip() for part in data.split(','))):
            try:
                start, increment = item.split(':')
                segments.append([int(start), float(increment)])
            except ValueError:
                self.fail('invalid')
        if not segments:
            self.fail('invalid')
        return segments

    def to_representation(self, value):
        return ', '.join(f'{start}:{increment!r}' for start, increment in value)


def validate_existing_file(path):
    if path and not os.path.isfile(path):
        raise serializers.ValidationError(f"File '{path}' does not exist.")
    return path


class ExperimentSectionSerializer(serializers.Serializer):
    id = serializers.ChoiceField(choices=EXPERIMENTS, help_text="Which experiment to run")
    seed = serializers.IntegerField(min_value=0, default=2024, help_text="Master seed of every random stream")
    n_steps = serializers.IntegerField(min_value=0, help_text="Pseudo-time steps to run")
    load_segments = LoadSegmentsField(
        default=lambda: [[1, 1e-4]], help_text="Displacement increment (mm) per step from the given step on"
    )
    output_dir = serializers.CharField(required=False, allow_blank=True, default='')

    def validate_load_segments(self, value):
        starts = [start for start, _ in value]
        if starts[0] != 1 or starts != sorted(set(starts)):
            raise serializers.ValidationError("Segments must start at step 1 and at increasing steps.")
        if any(increment <= 0 for _, increment in value):
            raise serializers.ValidationError("Load increments must be positive.")
        return value


class FemCoreSerializer(serializers.Serializer):
    n_elements = serializers.IntegerField(min_value=2, default=200, help_text="Rod elements")
    h_coarse = serializers.FloatField(min_value=0.0, default=0.1,
                                      help_text="SENS element size (mm) away from the crack")
    h_fine = serializers.FloatField(min_value=0.0, default=0.025,
                                    help_text="SENS element size (mm) in the band")
    refine_band = CommaSeparatedListField(
        child=serializers.FloatField(), min_length=4, max_length=4, default=lambda: [0.5, 1.0, 0.0, 0.6],
        help_text="x_min, x_max, y_min, y_max of the refined region"
    )
    mesh_file = serializers.CharField(required=False, allow_blank=True, default='',
                                      validators=[validate_existing_file],
                                      help_text="Filter mesh to read instead of generating one")
    state_size = serializers.IntegerField(min_value=2, default=6,
                                          help_text="State dimension of the linear toy")

    def validate(self, data):
        if data['h_fine'] <= 0 or data['h_fine'] > data['h_coarse']:
            raise serializers.ValidationError({'h_fine': "Expected 0 < h_fine <= h_coarse."})
        return data


class FractureModelSerializer(serializers.Serializer):
    E = serializers.FloatField(default=210000.0, help_text="Young's modulus (N/mm^2)")
    nu = serializers.FloatField(min_value=0.0, max_value=0.499999, default=0.3)
    Gc = serializers.FloatField(default=2.7, help_text="Fracture energy (N/mm)")
    ell = serializers.FloatField(default=0.025, help_text="Phase-field length scale (mm)")
    beta = serializers.FloatField(default=100.0,
                                  help_text="Micromorphic penalty factor, alpha = beta Gc / ell")
    residual_stiffness = serializers.FloatField(min_value=0.0, max_value=0.5, default=1e-8)
    kinematics = serializers.ChoiceField(choices=('plane_strain', 'plane_stress'), default='plane_strain')
    newton_tolerance = serializers.FloatField(default=1e-8)
    newton_relative_tolerance = serializers.FloatField(min_value=0.0, default=1e-10)
    newton_max_iterations = serializers.IntegerField(min_value=1, default=25)
    line_search = serializers.BooleanField(default=False)
    max_cuts = serializers.IntegerField(min_value=0, default=4)
    stagger_max_iterations = serializers.IntegerField(
        min_value=0, default=2000, help_text="Staggered fallback iterations, 0 disables it")
    stagger_tolerance = serializers.FloatField(default=1e-6)

    def validate(self, data):
        errors = {name: "Must be positive." for name in ('E', 'Gc', 'ell', 'beta', 'newton_tolerance',
                                                           'stagger_tolerance')
                  if data[name] <= 0}
        if errors:
            raise serializers.ValidationError(errors)
        return data


class StochasticEnsembleSerializer(serializers.Serializer):
    n_ens = serializers.IntegerField(min_value=2, default=20)
    center_mean = serializers.FloatField(default=-0.25, help_text="Rod nucleus position mean (mm)")
    center_std = serializers.FloatField(min_value=0.0, default=0.12)
    magnitude_low = serializers.FloatField(default=0.73)
    magnitude_high = serializers.FloatField(default=0.76)
    x_shift = serializers.FloatField(default=0.51, help_text="Pore X = x_shift + x_scale Beta(a, b)")
    x_scale = serializers.FloatField(default=0.11)
    y_shift = serializers.FloatField(default=-0.11, help_text="Pore Y relative to the slit height")
    y_scale = serializers.FloatField(default=0.13)
    beta_a = serializers.FloatField(default=8.0)
    beta_b = serializers.FloatField(default=8.0)
    pore_magnitude = serializers.FloatField(default=0.75)
    nucleus_width = serializers.FloatField(required=False, help_text="Bump standard deviation (mm)")
    inflation = serializers.FloatField(min_value=1.0, default=1.0)
    localization_length = serializers.FloatField(min_value=0.0, default=0.0,
                                                 help_text="0 switches tapering off")
    failure_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.1)

    def validate(self, data):
        if not 0.0 < data['magnitude_low'] <= data['magnitude_high'] < 1.0:
            raise serializers.ValidationError(
                {'magnitude_low': "Expected 0 < magnitude_low <= magnitude_high < 1."}
            )
        if not 0.0 < data['pore_magnitude'] < 1.0:
            raise serializers.ValidationError({'pore_magnitude': "Expected a value in (0, 1)."})
        if data['beta_a'] <= 0 or data['beta_b'] <= 0:
            raise serializers.ValidationError({'beta_a': "Beta shapes must be positive."})
        if data.get('nucleus_width') is not None and data['nucleus_width'] <= 0:
            raise serializers.ValidationError({'nucleus_width': "Must be positive."})
        return data


class DataModelSerializer(serializers.Serializer):
    n_sensors = serializers.IntegerField(min_value=1, default=25)
    sensors_file = serializers.CharField(required=False, allow_blank=True, default='',
                                         validators=[validate_existing_file])
    data_file = serializers.CharField(required=False, allow_blank=True, default='',
                                      validators=[validate_existing_file],
                                      help_text="Observation CSV; generated from the ground truth when empty")
    hyperparameter_file = serializers.CharField(required=False, allow_blank=True, default='',
                                                validators=[validate_existing_file])
    sigma_e = serializers.FloatField(default=4e-4, help_text="Sensor noise standard deviation (mm)")
    n_obs = serializers.IntegerField(min_value=1, default=20)
    rho = serializers.FloatField(default=1.0)
    nu = serializers.FloatField(default=1.5, help_text="Matern smoothness, fixed during calibration")
    sigma = serializers.FloatField(min_value=0.0, default=1e-3)
    length = serializers.FloatField(default=0.1)
    calibration_prior_std = serializers.FloatField(
        min_value=0.0, default=1.0, help_text="Log-normal prior std; 0 for plain maximum likelihood"
    )
    sensor_sweep = CommaSeparatedListField(child=serializers.IntegerField(min_value=1), default=list)
    sweep_seeds = serializers.IntegerField(min_value=1, default=1)

    def validate(self, data):
        errors = {name: "Must be positive." for name in ('sigma_e', 'nu', 'length') if data[name] <= 0}
        if data['data_file'] and not data['sensors_file']:
            errors['sensors_file'] = "A data file needs the sensor layout it was measured with."
        if errors:
            raise serializers.ValidationError(errors)
        return data


class EnkfFilterSerializer(serializers.Serializer):
    analysis_steps = CommaSeparatedListField(child=serializers.IntegerField(min_value=1), default=list)
    regularization_length = serializers.FloatField(required=False, help_text="L in mm; 4 ell when omitted")
    n_stagger = serializers.IntegerField(min_value=1, default=4)
    proximal_weight = serializers.FloatField(min_value=0.0, default=0.0)
    recalibrate = serializers.BooleanField(default=False)
    compare_baseline = serializers.BooleanField(default=False)
    extrapolation_offset = serializers.IntegerField(min_value=0, default=30)
    checkpoints = serializers.BooleanField(default=True)


class ExperimentConfigSerializer(serializers.Serializer):
    experiment = ExperimentSectionSerializer()
    fem_core = FemCoreSerializer()
    fracture_model = FractureModelSerializer()
    stochastic_ensemble = StochasticEnsembleSerializer()
    data_model = DataModelSerializer()
    enkf_filter = EnkfFilterSerializer()

    def validate(self, data):
        ell = data['fracture_model']['ell']
        enkf = data['enkf_filter']
        if enkf.get('regularization_length') is None:
            enkf['regularization_length'] = 4.0 * ell
        if enkf['regularization_length'] <= ell:
            raise serializers.ValidationError(
                {'enkf_filter': {'regularization_length': "L must exceed ell."}}
            )
        n_steps = data['experiment']['n_steps']
        late = [step for step in enkf['analysis_steps'] if step > n_steps]
        if late:
            raise serializers.ValidationError(
                {'enkf_filter': {'analysis_steps': f"Steps {late} lie beyond n_steps = {n_steps}."}}
            )
        if data['data_model']['sensor_sweep'] and not enkf['analysis_steps']:
            raise serializers.ValidationError(
                {'data_model': {'sensor_sweep': "A sensor sweep repeats the first analysis step."}}
            )
        return data
