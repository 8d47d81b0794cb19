from celery import shared_task
from celery.utils.log import get_task_logger

from .exceptions import ConfigError
from .services import export, scenario, sweep

logger = get_task_logger(__name__)


@shared_task(bind=True, max_retries=3)
def run_scenario_task(self, config_text, output_dir=None):
    """Evaluate a scenario given as text; returns the written CSV paths."""
    try:
        cfg = scenario.parse_text(config_text)
    except ConfigError as e:
        # parse errors are final
        logger.error("Rejected scenario: %s", e)
        raise
    if output_dir:
        cfg = scenario.with_output_dir(cfg, output_dir)

    try:
        results = sweep.run_sweep(cfg)
        paths = export.write_outputs(cfg, results)
    except OSError as e:
        raise self.retry(countdown=30, exc=e)

    failed = sweep.failed_rows(results)
    if failed:
        logger.warning("%d value(s) carry quadrature diagnostics", failed)
    return paths


@shared_task(bind=True, max_retries=3)
def evaluate_point_task(self, config_text, index):
    """Evaluate sweep point ``index`` of a scenario and return its CSV row."""
    cfg = scenario.parse_text(config_text)
    points = sweep.build_points(cfg)
    if not 0 <= index < len(points):
        logger.error("Sweep point %s out of range (%d points)", index, len(points))
        return None
    try:
        return sweep.evaluate_point(points[index], cfg)
    except OSError as e:
        raise self.retry(countdown=30, exc=e)
