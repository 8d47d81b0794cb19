"""
CSV emission: comma separated, header row, LF line endings, ``%.9g`` numbers.

Scenario CSVs start with the provenance header of the scenario that
produced them (see scenario.parse_provenance).
"""

import logging
import os
from typing import Dict, List, Optional, Sequence

import pandas as pd

from cellular.services.scenario import ScenarioConfig, provenance_header

logger = logging.getLogger(__name__)


def write_rows(rows: Sequence[Dict[str, object]], path: str, precision: int = 9,
               header: Optional[str] = None) -> str:
    frame = pd.DataFrame(list(rows))
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write(header)
        frame.to_csv(fh, index=False, float_format=f"%.{precision}g", lineterminator="\n")
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def metric_path(cfg: ScenarioConfig, metric: str) -> str:
    return os.path.join(cfg.output_dir, f"{metric}.csv")


def write_outputs(cfg: ScenarioConfig, results: Dict[str, List[Dict[str, object]]]) -> List[str]:
    """One CSV per requested metric, in the order the scenario lists them."""
    header = provenance_header(cfg)
    return [
        write_rows(results[metric], metric_path(cfg, metric), cfg.precision, header)
        for metric in cfg.metrics
    ]
