import json
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from pfenkf.exceptions import ExperimentConfigError, PfenkfError

from ..serializers import EXPERIMENTS
from ..services.config import VARIANTS, load_experiment_config

logger = logging.getLogger(__name__)

CHECK_FAILURE = 1
CONFIG_ERROR = 2
SOLVER_FAILURE = 3


class ExperimentCommand(BaseCommand):
    """
    Shared flags and error translation of the experiment commands:
    configuration problems exit with 2, numerical failures with 3.
    """
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--config', help="INI file layered on top of the preset")
        parser.add_argument('--preset', choices=VARIANTS, default='desk', help="Preset variant to start from")
        parser.add_argument('--experiment', choices=EXPERIMENTS,
                            help="Experiment id; defaults to the one named in --config, else rod1d")
        parser.add_argument('--seed', type=int, help="Override the master seed")
        parser.add_argument('--parallel', type=int, default=settings.PFENKF_PARALLEL,
                            help="Worker processes for the ensemble sections (1 = serial)")
        parser.add_argument('--out', help="Output directory")

    def handle(self, *args, **options):
        try:
            config = load_experiment_config(options['config'], options['preset'], options['experiment'],
                                            options['seed'], options['out'])
            out = config.output_directory()
            self.stdout.write(f"{config.experiment_id} ({config.variant}), config hash {config.config_hash}")
            self.execute_experiment(config, out, options)
        except ExperimentConfigError as error:
            raise CommandError(f"Invalid configuration: {json.dumps(error.errors, default=str)}",
                               returncode=CONFIG_ERROR)
        except PfenkfError as error:
            logger.error("Run aborted: %s", error)
            raise CommandError(f"Solver failure: {error}", returncode=SOLVER_FAILURE)

    def execute_experiment(self, config, out, options):
        raise NotImplementedError('subclasses of ExperimentCommand must provide execute_experiment()')
