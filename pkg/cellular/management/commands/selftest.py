import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

from django.core.management.base import BaseCommand, CommandError

from cellular.services import metrics
from cellular.services.interference import LtQuery, NetworkModel, joint_lt_interference, lt_interference
from cellular.services.schemes import GammaParams, Simo
from cellular.simulator.drivers import SimScenario, estimate_metric


@dataclass
class Check:
    name: str
    run: Callable[[], Tuple[float, float]]
    tolerance: float
    simulated: bool = False


def _siso_outage_closed_form(theta: float) -> float:
    root = math.sqrt(theta)
    return 1.0 - 1.0 / (1.0 + root * (math.pi / 2.0 - math.atan(1.0 / root)))


def _outage_at(theta_db: float):
    def run():
        net = NetworkModel(1e-5)
        theta = 10.0 ** (theta_db / 10.0)
        return metrics.outage(net, GammaParams(1, 1, 1), theta).value, _siso_outage_closed_form(theta)
    return run


def _joint_reduction():
    net = NetworkModel(1e-5, p=0.6)
    value, _ok = joint_lt_interference(net, 150.0, 2e8, 0.0, 2, 3)
    return value, lt_interference(net, LtQuery(2e8, 150.0, 2))


def _siso_rate():
    return metrics.ergodic_rate(NetworkModel(1e-5), GammaParams(1, 1, 1)).value, 1.48899


def _simo_oracle():
    net = NetworkModel(1e-5)
    analytic = metrics.outage(net, GammaParams(3, 1, 1), 1.0).value
    est = estimate_metric(SimScenario("outage", Simo(3), net, theta=1.0), 5000, rng_seed=7)
    return est.mean, analytic


CHECKS: List[Check] = [
    Check("SISO outage at 0 dB vs closed form", _outage_at(0.0), 1e-6),
    Check("SISO outage at 10 dB vs closed form", _outage_at(10.0), 1e-6),
    Check("joint LT with z2 = 0 equals the single-slot LT", _joint_reduction, 1e-7),
    Check("SISO ergodic rate (nats)", _siso_rate, 0.005 * 1.48899),
    Check("SIMO(Nr=3) outage vs Monte Carlo", _simo_oracle, 0.03, simulated=True),
]


class Command(BaseCommand):
    help = "Run the quick analytic-vs-oracle consistency suite."

    def add_arguments(self, parser):
        parser.add_argument("--skip-sim", action="store_true", help="Leave out the Monte-Carlo checks")

    def handle(self, *args, **options):
        failures = 0
        for check in CHECKS:
            if check.simulated and options.get("skip_sim"):
                self.stdout.write(f"SKIP  {check.name}")
                continue
            got, expected = check.run()
            ok = abs(got - expected) <= check.tolerance
            failures += not ok
            line = f"{'PASS' if ok else 'FAIL'}  {check.name}: {got:.9g} vs {expected:.9g}"
            self.stdout.write(self.style.SUCCESS(line) if ok else self.style.ERROR(line))
        if failures:
            raise CommandError(f"{failures} self-check(s) failed", returncode=3)
        self.stdout.write(self.style.SUCCESS("all self-checks passed"))
