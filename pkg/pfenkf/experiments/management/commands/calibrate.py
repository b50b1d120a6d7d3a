import os

from ...services.runners import run_calibrate
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Fit the Matern discrepancy hyperparameters (sigma, length) at the first analysis step."

    def execute_experiment(self, config, out, options):
        result = run_calibrate(config, out, n_jobs=options['parallel'])
        params = result.params
        message = (f"sigma = {params.sigma:.6g}, length = {params.length:.6g}, nu = {params.nu:g}; "
                   f"objective {result.initial_objective:.6g} -> {result.objective:.6g}")
        if result.converged:
            self.stdout.write(self.style.SUCCESS(message))
        else:
            self.stdout.write(self.style.WARNING(f"{message} (not converged: {result.message})"))
        path = os.path.join(out, 'calibration', 'hyperparameters.txt')
        self.stdout.write(f"Hyperparameters written to {path}")
