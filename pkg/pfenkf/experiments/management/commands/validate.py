import json
import os

from django.core.management.base import CommandError

from ...services.checks import run_checks
from ...services.outputs import prepare_directory, write_table
from ..base import CHECK_FAILURE, ExperimentCommand


class Command(ExperimentCommand):
    help = "Run the invariant suite (derivative checks, oracles, PSD checks); prints one JSON line per check."
    stealth_options = ('tangent_hook',)

    def execute_experiment(self, config, out, options):
        results = run_checks(config.material_params(), config.seed, tangent_hook=options.get('tangent_hook'))
        for result in results:
            self.stdout.write(json.dumps(result.as_dict(), sort_keys=True))
        rows = [(r.name, r.passed, r.value, r.tolerance, r.detail) for r in results]
        write_table(rows, ['check', 'passed', 'value', 'tolerance', 'detail'],
                    os.path.join(prepare_directory(out), 'validation.csv'), config.config_hash)

        failed = [r.name for r in results if not r.passed]
        if failed:
            raise CommandError(f"{len(failed)} check(s) failed: {', '.join(failed)}",
                               returncode=CHECK_FAILURE)
        self.stdout.write(self.style.SUCCESS(f"All {len(results)} checks passed"))
