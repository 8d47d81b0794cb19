from django.core.management.base import BaseCommand, CommandError

from cellular.exceptions import ConfigError
from cellular.services import scenario, sweep


class Command(BaseCommand):
    help = "Parse and check a scenario file without evaluating it."

    def add_arguments(self, parser):
        parser.add_argument("config", help="Path to the scenario file")

    def handle(self, *args, **options):
        try:
            cfg = scenario.load(options["config"])
        except ConfigError as e:
            raise CommandError(f"{options['config']}: {e}", returncode=2)

        points = sweep.build_points(cfg)
        self.stdout.write(f"schemes: {', '.join(e.label for e in cfg.schemes)}")
        self.stdout.write(f"metrics: {', '.join(cfg.metrics)}")
        self.stdout.write(f"grid points: {len(points)}")
        if cfg.simulate:
            self.stdout.write(f"simulation: {cfg.n_trials} trials per point, seed {cfg.seed}, "
                              f"{cfg.interferer_mode.value} interferers")
        self.stdout.write(self.style.SUCCESS("scenario is valid"))
