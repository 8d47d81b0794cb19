"""
PPP base-station drops around the typical user at the origin.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special as sp_special

from cellular.conf import setting
from cellular.exceptions import InvalidParameterError
from cellular.services.interference import NetworkModel
from cellular.simulator.rng import RngLike, as_rng

logger = logging.getLogger(__name__)

MAX_REDRAWS = 1000


def truncation_radius(net: NetworkModel, tol: Optional[float] = None) -> float:
    """Disk radius outside of which the mean interference is below ``tol`` of the total.

    Given r0 the mean interference beyond R is a fraction (r0 / R)^(eta - 2)
    of the mean total; averaging r0^(eta - 2) over the serving-distance PDF
    gives Gamma(eta/2) / (pi lambda_b)^(eta/2 - 1). The disk is never smaller
    than ten mean serving distances.
    """
    tol = float(tol if tol is not None else setting("SG_MIMO_TRUNCATION_TOL", 1e-3))
    if not 0 < tol < 1:
        raise InvalidParameterError("truncation tolerance must lie in (0, 1)")
    tail = (sp_special.gamma(net.eta / 2.0) / tol) ** (1.0 / (net.eta - 2.0)) * net.distance_scale
    return max(10.0 * net.mean_serving_distance, tail)


def truncation_tail_fraction(net: NetworkModel, radius: float) -> float:
    """Expected share of the mean interference coming from beyond ``radius``."""
    return sp_special.gamma(net.eta / 2.0) * (net.distance_scale / radius) ** (net.eta - 2.0)


@dataclass
class Deployment:
    bs_positions: np.ndarray
    serving_index: int
    r0: float
    radius: float

    @property
    def n_bs(self) -> int:
        return len(self.bs_positions)

    @property
    def interferer_distances(self) -> np.ndarray:
        d = np.hypot(self.bs_positions[:, 0], self.bs_positions[:, 1])
        return np.delete(d, self.serving_index)

    @property
    def n_interferers(self) -> int:
        return self.n_bs - 1


def draw_deployment(net: NetworkModel, rng: RngLike, radius: Optional[float] = None) -> Deployment:
    """Homogeneous PPP in a disk; draws without any BS are redrawn."""
    gen = as_rng(rng)
    radius = radius or truncation_radius(net)
    mean = net.lambda_b * math.pi * radius ** 2
    for _ in range(MAX_REDRAWS):
        n = int(gen.poisson(mean))
        if n > 0:
            break
    else:
        raise InvalidParameterError(f"no BS in {MAX_REDRAWS} draws; disk too small for lambda_b")
    r = radius * np.sqrt(gen.random(n))
    phi = 2.0 * math.pi * gen.random(n)
    positions = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    serving = int(np.argmin(r))
    return Deployment(positions, serving, float(r[serving]), radius)


def draw_activity(dep: Deployment, p: float, rng: np.random.Generator) -> np.ndarray:
    """Per-interferer activity for one slot; the serving BS is always active."""
    if p >= 1.0:
        return np.ones(dep.n_interferers, dtype=bool)
    return rng.random(dep.n_interferers) < p
