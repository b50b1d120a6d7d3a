import os

from ...services.runners import run_filter_experiment
from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = ("Run the ensemble Kalman filter with regularization over the load schedule; writes checkpoints, "
            "the analysis report and the reaction-force ensembles.")

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--resume', help="Checkpoint directory of an earlier run to restart from")

    def execute_experiment(self, config, out, options):
        outcome = run_filter_experiment(config, out, n_jobs=options['parallel'], resume=options['resume'])
        if config.experiment_id == 'linear-toy':
            self.stdout.write(self.style.SUCCESS(
                f"Posterior mean relative error {outcome.relative_error:.3e} "
                f"({os.path.join(out, 'linear_toy', 'posterior.csv')})"
            ))
            return

        for record in outcome.result.report.records:
            self.stdout.write(
                f"step {record.step}: misfit {record.misfit_pre:.4g} -> {record.misfit_post:.4g}, "
                f"crack spread {record.crack_spread_pre:.4g} -> {record.crack_spread_post:.4g}, "
                f"force spread {record.force_spread_pre:.4g} -> {record.force_spread_post:.4g}"
            )
        ensemble = outcome.result.ensemble
        if ensemble.n_failed:
            self.stdout.write(self.style.WARNING(f"{ensemble.n_failed} of {ensemble.n_ens} members failed"))
        self.stdout.write(self.style.SUCCESS(f"Filter outputs written to {os.path.join(out, 'filter')}"))
