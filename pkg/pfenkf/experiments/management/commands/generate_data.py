import os

from ...services.runners import run_generate_data
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Measure the ground truth at the analysis steps; writes the sensor layout and the observation CSV."

    def execute_experiment(self, config, out, options):
        batches = run_generate_data(config, out)
        for step, batch in sorted(batches.items()):
            self.stdout.write(f"step {step}: {batch.n_obs} observations of {batch.n_channels} channels")
        self.stdout.write(self.style.SUCCESS(f"Data written to {os.path.join(out, 'data')}"))
