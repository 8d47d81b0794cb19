"""
Batch drivers for the Monte-Carlo oracle.

Trials are split into fixed-size chunks; chunk c always draws from the
Philox stream (seed, c), so an estimate does not depend on how many
workers evaluated it.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from cellular.exceptions import InvalidParameterError
from cellular.services.interference import NetworkModel
from cellular.services.schemes import MimoScheme, Modulation, SmMimo
from cellular.simulator.deployment import Deployment, draw_deployment
from cellular.simulator.detection import (
    InterfererMode,
    detect_ml,
    detect_symbol,
    pairwise_error,
)
from cellular.simulator.rng import RngLike, as_rng, make_rng
from cellular.simulator.transceivers import ChannelDraw, transceiver_for

logger = logging.getLogger(__name__)

CHUNK_TRIALS = 1000
MIN_TRIALS = 1000
METRICS = ("outage", "asep", "rate", "joint-coverage", "pep")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    half_width_95: float
    n_samples: int

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "SimEstimate":
        arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
        n = len(arr)
        if n == 0:
            raise InvalidParameterError("no samples")
        half = 1.96 * float(np.std(arr, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
        return cls(float(np.mean(arr)), half, n)

    @property
    def std_error(self) -> float:
        return self.half_width_95 / 1.96

    def covers(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(value - self.mean) <= sigmas * self.std_error


def sinr_sample(dep: Deployment, ch: ChannelDraw, scheme: MimoScheme, net: NetworkModel, stream: int = 0) -> float:
    return transceiver_for(scheme).sinr(dep, ch, net, stream)


def two_slot_coverage(scheme1: MimoScheme, scheme2: MimoScheme, net: NetworkModel, theta: float,
                      n_trials: int, rng: RngLike, dep: Optional[Deployment] = None,
                      stream: int = 0) -> Tuple[SimEstimate, SimEstimate, SimEstimate]:
    """Empirical P(SIR1 > theta), P(SIR2 > theta) and P(both).

    Each trial keeps one BS layout for both slots and redraws fading and
    activity per slot; with ``dep`` given the layout is fixed for all trials.
    """
    if n_trials < MIN_TRIALS:
        raise InvalidParameterError(f"need at least {MIN_TRIALS} trials, got {n_trials}")
    gen = as_rng(rng)
    tx1, tx2 = transceiver_for(scheme1), transceiver_for(scheme2)
    first = np.empty(n_trials, dtype=bool)
    second = np.empty(n_trials, dtype=bool)
    for t in range(n_trials):
        layout = dep if dep is not None else draw_deployment(net, gen)
        first[t] = tx1.sinr(layout, tx1.draw_slot(layout, net, gen), net, stream) > theta
        second[t] = tx2.sinr(layout, tx2.draw_slot(layout, net, gen), net, stream) > theta
    return (
        SimEstimate.from_samples(first),
        SimEstimate.from_samples(second),
        SimEstimate.from_samples(first & second),
    )


# ---------------------------------------------------------------------------
# Scenario estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimScenario:
    metric: str
    scheme: MimoScheme
    net: NetworkModel
    theta: Optional[float] = None
    mod: Optional[Modulation] = None
    interferer_mode: InterfererMode = InterfererMode.GAUSSIAN
    scheme2: Optional[MimoScheme] = None
    stream: int = 0
    radius: Optional[float] = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise InvalidParameterError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.metric in ("outage", "joint-coverage") and not (self.theta and self.theta > 0):
            raise InvalidParameterError(f"{self.metric} needs a positive theta")
        if self.metric in ("asep", "pep") and self.mod is None:
            raise InvalidParameterError(f"{self.metric} needs a modulation")
        if self.metric == "pep" and not isinstance(self.scheme, SmMimo):
            raise InvalidParameterError("pairwise error is defined for spatial multiplexing")


def nearest_pair(mod: Modulation, nt: int, stream: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Two transmit vectors at the minimum distance, differing in ``stream`` only."""
    points = mod.constellation()
    sent = np.full(nt, points[0])
    dist = np.abs(points - points[0])
    dist[0] = np.inf
    other = sent.copy()
    other[stream] = points[int(np.argmin(dist))]
    return sent, other


def _run_chunk(scenario: SimScenario, seed: int, chunk: int, n: int) -> np.ndarray:
    """Rows of (r0, sir, outcome) for one chunk of trials."""
    rng = make_rng(seed, chunk)
    net = scenario.net
    tx = transceiver_for(scenario.scheme)
    tx2 = transceiver_for(scenario.scheme2 or scenario.scheme)
    pair = nearest_pair(scenario.mod, scenario.scheme.Nt, scenario.stream) if scenario.metric == "pep" else None
    rows = np.empty((n, 3))
    for t in range(n):
        dep = draw_deployment(net, rng, scenario.radius)
        ch = tx.draw_slot(dep, net, rng)
        sir = tx.sinr(dep, ch, net, scenario.stream)
        if scenario.metric == "outage":
            outcome = float(sir < scenario.theta)
        elif scenario.metric == "rate":
            outcome = math.log1p(sir)
        elif scenario.metric == "asep":
            if isinstance(scenario.scheme, SmMimo):
                ok = detect_ml(dep, ch, scenario.scheme, net, scenario.mod, scenario.interferer_mode, rng, scenario.stream)
            else:
                ok = detect_symbol(dep, ch, tx, net, scenario.mod, scenario.interferer_mode, rng, scenario.stream)
            outcome = 0.0 if ok else 1.0
        elif scenario.metric == "pep":
            outcome = float(pairwise_error(dep, ch, net, scenario.mod, pair[0], pair[1], scenario.interferer_mode, rng))
        else:
            sir2 = tx2.sinr(dep, tx2.draw_slot(dep, net, rng), net, scenario.stream)
            outcome = float(sir > scenario.theta or sir2 > scenario.theta)
        rows[t] = (dep.r0, sir, outcome)
    return rows


def _chunks(n_trials: int) -> List[Tuple[int, int]]:
    full, rest = divmod(n_trials, CHUNK_TRIALS)
    sizes = [CHUNK_TRIALS] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def estimate_metric(scenario: SimScenario, n_trials: int, rng_seed: int, dump_path: Optional[str] = None,
                    workers: int = 1, progress: bool = False) -> SimEstimate:
    """i.i.d. drops of ``scenario``; deterministic in ``rng_seed`` for any ``workers``."""
    if n_trials < MIN_TRIALS:
        raise InvalidParameterError(f"need at least {MIN_TRIALS} trials, got {n_trials}")
    chunks = _chunks(n_trials)
    logger.info("simulating %s for %s: %d trials in %d chunks (seed %d)",
                scenario.metric, type(scenario.scheme).__name__, n_trials, len(chunks), rng_seed)

    def job(item):
        index, size = item
        return _run_chunk(scenario, rng_seed, index, size)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(job, chunks), total=len(chunks), disable=not progress, desc="trials"))
    else:
        results = [job(item) for item in tqdm(chunks, disable=not progress, desc="trials")]
    rows = np.vstack(results)
    if dump_path:
        write_trial_dump(rows, dump_path)
    return SimEstimate.from_samples(rows[:, 2])


def write_trial_dump(rows: np.ndarray, path: str):
    with np.errstate(divide="ignore"):
        sir_db = 10.0 * np.log10(rows[:, 1])
    frame = pd.DataFrame({
        "trial": np.arange(len(rows)),
        "r0": rows[:, 0],
        "sir_db": sir_db,
        "outcome": rows[:, 2],
    })
    frame.to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
    logger.info("wrote %d trial rows to %s", len(frame), path)
