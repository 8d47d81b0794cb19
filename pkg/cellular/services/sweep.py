"""
Sweep evaluation for scenario runs.

A scenario expands into grid points (metric x scheme x modulation x sweep
value). Points are evaluated on a thread pool; rows come back in sweep
order whatever the completion order.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

from tqdm import tqdm

from cellular.conf import setting
from cellular.exceptions import InvalidParameterError
from cellular.services import metrics
from cellular.services.interference import NetworkModel
from cellular.services.scenario import ScenarioConfig, SchemeEntry, network_at_snr
from cellular.services.schemes import Modulation, SmMimo
from cellular.simulator.drivers import SimEstimate, SimScenario, estimate_metric

logger = logging.getLogger(__name__)


def max_threads() -> int:
    return max(1, int(setting("SG_MIMO_THREADS", os.cpu_count() or 1)))


@dataclass(frozen=True)
class SweepPoint:
    index: int
    metric: str
    entry: SchemeEntry
    net: NetworkModel
    mod: Optional[Modulation] = None
    axis: Optional[str] = None
    x_written: Optional[float] = None
    x: Optional[float] = None
    compare_mode: Optional[str] = None


def build_points(cfg: ScenarioConfig) -> List[SweepPoint]:
    points: List[SweepPoint] = []

    def add(**kwargs):
        points.append(SweepPoint(index=len(points), **kwargs))

    for metric in cfg.metrics:
        for entry in cfg.schemes:
            if metric in ("asep", "throughput"):
                for mod in cfg.mods:
                    if cfg.snr is None:
                        add(metric=metric, entry=entry, net=cfg.net, mod=mod)
                        continue
                    for written, snr in cfg.snr.points():
                        add(metric=metric, entry=entry, net=network_at_snr(cfg.net, snr), mod=mod,
                            axis=f"snr_{cfg.snr.unit}", x_written=written, x=snr)
            elif metric == "rate":
                if cfg.snr is None:
                    add(metric=metric, entry=entry, net=cfg.net)
                    continue
                for written, snr in cfg.snr.points():
                    add(metric=metric, entry=entry, net=network_at_snr(cfg.net, snr),
                        axis=f"snr_{cfg.snr.unit}", x_written=written, x=snr)
            elif metric == "coverage_retx":
                for mode in cfg.retx_compare:
                    for written, theta in cfg.theta.points():
                        add(metric=metric, entry=entry, net=cfg.net, axis=f"theta_{cfg.theta.unit}",
                            x_written=written, x=theta, compare_mode=mode)
            else:
                for written, theta in cfg.theta.points():
                    add(metric=metric, entry=entry, net=cfg.net, axis=f"theta_{cfg.theta.unit}",
                        x_written=written, x=theta)
    return points


# ---------------------------------------------------------------------------
# Per-point evaluation
# ---------------------------------------------------------------------------

def _asep(point: SweepPoint, cfg: ScenarioConfig) -> metrics.MetricResult:
    scheme = point.entry.scheme
    if isinstance(scheme, SmMimo):
        return metrics.asep_sm(point.net, scheme, point.mod)
    return metrics.asep(point.net, scheme.gamma_params(), point.mod, cfg.asep_method)


def _rate_factor(cfg: ScenarioConfig, point: SweepPoint) -> float:
    gp = point.entry.scheme.gamma_params()
    return (gp.cell_streams if cfg.rate_per_cell else 1) / (math.log(2.0) if cfg.rate_bits else 1.0)


def _throughput_factor(cfg: ScenarioConfig, point: SweepPoint) -> float:
    gp = point.entry.scheme.gamma_params()
    return point.mod.bits * (gp.cell_streams if cfg.rate_per_cell else 1)


def rate_unit(cfg: ScenarioConfig, metric: str) -> Optional[str]:
    """Unit written next to rate and throughput values, e.g. ``bits/s/Hz per cell``."""
    if metric == "rate":
        base = "bits/s/Hz" if cfg.rate_bits else "nats/s/Hz"
    elif metric == "throughput":
        base = "bits/symbol"
    else:
        return None
    return f"{base} per {'cell' if cfg.rate_per_cell else 'stream'}"


def analytic_value(point: SweepPoint, cfg: ScenarioConfig) -> metrics.MetricResult:
    gp = point.entry.scheme.gamma_params()
    if point.metric == "asep":
        return _asep(point, cfg)
    if point.metric == "throughput":
        res = _asep(point, cfg)
        if cfg.rate_per_cell:
            value = metrics.cell_throughput(res.value, point.mod, gp)
        else:
            value = metrics.throughput(res.value, point.mod)
        return metrics.MetricResult(value, _throughput_factor(cfg, point) * res.err_estimate,
                                    res.exactness, res.diagnostics, res.failed)
    if point.metric == "outage":
        return metrics.outage(point.net, gp, point.x)
    if point.metric == "coverage":
        return metrics.coverage(point.net, gp, point.x)
    if point.metric == "rate":
        return metrics.ergodic_rate(point.net, gp, per_cell=cfg.rate_per_cell, bits=cfg.rate_bits)
    slot2 = (cfg.retx_slot2 or point.entry).scheme.gamma_params()
    retx = metrics.RetxConfig(gp, slot2, point.x, point.net)
    return metrics.coverage_retx(retx, point.compare_mode)


def simulated_value(point: SweepPoint, cfg: ScenarioConfig) -> Optional[SimEstimate]:
    """Monte-Carlo counterpart of the point, or None when the oracle has none."""
    if point.metric == "coverage_retx" and point.compare_mode != "correlated":
        return None
    kind = {
        "asep": "asep",
        "throughput": "asep",
        "outage": "outage",
        "coverage": "outage",
        "rate": "rate",
        "coverage_retx": "joint-coverage",
    }[point.metric]
    slot2 = (cfg.retx_slot2 or point.entry).scheme if point.metric == "coverage_retx" else None
    dump = os.path.join(cfg.dump_dir, f"{point.metric}-{point.index:04d}.csv") if cfg.dump_dir else None
    try:
        scenario = SimScenario(
            metric=kind,
            scheme=point.entry.scheme,
            net=point.net,
            theta=point.x if kind in ("outage", "joint-coverage") else None,
            mod=point.mod,
            interferer_mode=cfg.interferer_mode,
            scheme2=slot2,
        )
        est = estimate_metric(scenario, cfg.n_trials, cfg.seed, dump_path=dump)
    except InvalidParameterError as e:
        logger.warning("no simulation for %s %s: %s", point.metric, point.entry.label, e)
        return None

    if point.metric == "coverage":
        return SimEstimate(1.0 - est.mean, est.half_width_95, est.n_samples)
    if point.metric == "rate":
        k = _rate_factor(cfg, point)
        return SimEstimate(k * est.mean, k * est.half_width_95, est.n_samples)
    if point.metric == "throughput":
        k = _throughput_factor(cfg, point)
        return SimEstimate(k * (1.0 - est.mean), k * est.half_width_95, est.n_samples)
    return est


def evaluate_point(point: SweepPoint, cfg: ScenarioConfig) -> Dict[str, object]:
    res = analytic_value(point, cfg)
    row: Dict[str, object] = {"scheme": point.entry.label}
    if point.mod is not None:
        row["M"] = point.mod.M
    if point.compare_mode is not None:
        row["compare_mode"] = point.compare_mode
    if point.axis is not None:
        row[point.axis] = point.x_written
    row.update(
        value=res.value,
        err_estimate=res.err_estimate,
        exactness=res.exactness.value,
        failed=res.failed,
        diagnostics="; ".join(res.diagnostics),
    )
    unit = rate_unit(cfg, point.metric)
    if unit:
        row["unit"] = unit
    if cfg.simulate:
        est = simulated_value(point, cfg)
        row.update(
            sim_mean=est.mean if est else math.nan,
            sim_ci=est.half_width_95 if est else math.nan,
            abs_dev=abs(est.mean - res.value) if est else math.nan,
        )
    return row


def run_sweep(cfg: ScenarioConfig, threads: Optional[int] = None,
              progress: bool = False) -> Dict[str, List[Dict[str, object]]]:
    """Evaluate every grid point of ``cfg``; rows grouped per metric in sweep order."""
    points = build_points(cfg)
    workers = min(threads or max_threads(), max_threads(), max(1, len(points)))
    logger.info("evaluating %d sweep points on %d thread(s)", len(points), workers)

    def job(point):
        return evaluate_point(point, cfg)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(tqdm(pool.map(job, points), total=len(points), disable=not progress, desc="sweep"))

    results: Dict[str, List[Dict[str, object]]] = {m: [] for m in cfg.metrics}
    for point, row in zip(points, rows):
        results[point.metric].append(row)
    return results


def failed_rows(results: Dict[str, List[Dict[str, object]]]) -> int:
    return sum(1 for rows in results.values() for row in rows if row.get("failed"))
