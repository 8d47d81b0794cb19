from django.core.management.base import BaseCommand, CommandError

from cellular.exceptions import ConfigError
from cellular.services import export, scenario, sweep

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class Command(BaseCommand):
    help = "Evaluate a scenario file and write one CSV per requested metric."

    def add_arguments(self, parser):
        parser.add_argument("config", help="Path to the scenario file")
        parser.add_argument("--output-dir", help="Override output.dir from the scenario")
        parser.add_argument("--threads", type=int, help="Worker threads (capped by SG_MIMO_THREADS)")
        parser.add_argument("--progress", action="store_true", help="Show a progress bar")

    def handle(self, *args, **options):
        try:
            cfg = scenario.load(options["config"])
        except ConfigError as e:
            raise CommandError(f"{options['config']}: {e}", returncode=EXIT_CONFIG)
        if options.get("output_dir"):
            cfg = scenario.with_output_dir(cfg, options["output_dir"])

        results = sweep.run_sweep(cfg, threads=options.get("threads"), progress=options.get("progress", False))
        for path in export.write_outputs(cfg, results):
            self.stdout.write(f"wrote {path}")

        failed = sweep.failed_rows(results)
        if failed:
            raise CommandError(f"{failed} value(s) did not meet the quadrature tolerance; see the diagnostics column",
                               returncode=EXIT_NUMERIC)
        self.stdout.write(self.style.SUCCESS(f"{len(cfg.metrics)} metric file(s) written to {cfg.output_dir}"))
