"""
Symbol detection: per-stream ML slicing and exhaustive joint ML for spatial multiplexing.
"""

import enum
import itertools
import logging
from typing import Union

import numpy as np

from cellular.exceptions import ConfigurationTooLargeError, InvalidParameterError
from cellular.services.interference import NetworkModel
from cellular.services.schemes import MimoScheme, Modulation, SmMimo
from cellular.simulator.deployment import Deployment
from cellular.simulator.rng import complex_normal
from cellular.simulator.transceivers import ChannelDraw, Transceiver, transceiver_for

logger = logging.getLogger(__name__)

MAX_ML_ANTENNAS = 2
MAX_ML_ORDER = 16


class InterfererMode(enum.Enum):
    TRUE_QAM = "trueqam"
    GAUSSIAN = "gaussian"


def interferer_symbols(mode: InterfererMode, mod: Modulation, shape, rng: np.random.Generator) -> np.ndarray:
    if InterfererMode(mode) is InterfererMode.GAUSSIAN:
        return complex_normal(rng, shape)
    return rng.choice(mod.constellation(), size=shape)


def nearest_point(z: complex, points: np.ndarray) -> int:
    return int(np.argmin(np.abs(points - z)))


def detect_symbol(dep: Deployment, ch: ChannelDraw, scheme: Union[MimoScheme, Transceiver], net: NetworkModel,
                  mod: Modulation, interferer_mode: InterfererMode, rng: np.random.Generator,
                  stream: int = 0) -> bool:
    """Send one uniform QAM symbol on ``stream`` and slice it; True when recovered."""
    tx = scheme if isinstance(scheme, Transceiver) else transceiver_for(scheme)
    if isinstance(tx.scheme, SmMimo):
        raise InvalidParameterError("spatial multiplexing is detected jointly, use detect_ml")
    points = mod.constellation()
    sent = int(rng.integers(len(points)))
    others = interferer_symbols(interferer_mode, mod, (dep.n_interferers, tx.interferer_width), rng)
    z, amp = tx.received(dep, ch, net, stream, points[sent], others, rng)
    if amp == 0.0:
        return False
    return nearest_point(z / amp, points) == sent


def candidate_vectors(mod: Modulation, nt: int) -> np.ndarray:
    """All M^Nt transmit vectors, shape (M^Nt, Nt)."""
    points = mod.constellation()
    return np.array(list(itertools.product(points, repeat=nt)), dtype=complex)


def _check_ml_size(scheme: SmMimo, mod: Modulation):
    if scheme.Nt > MAX_ML_ANTENNAS or mod.M > MAX_ML_ORDER:
        raise ConfigurationTooLargeError(
            f"joint ML over {mod.M}^{scheme.Nt} hypotheses; limited to Nt <= {MAX_ML_ANTENNAS}, M <= {MAX_ML_ORDER}"
        )


def _observe(dep, ch, net, sent_vector, mode, mod, rng):
    delta = np.sqrt(net.power * dep.r0 ** (-net.eta))
    y = delta * (ch.H_o @ sent_vector)
    if dep.n_interferers:
        nt = ch.H_i.shape[2]
        amps = np.sqrt(net.power * dep.interferer_distances ** (-net.eta)) * ch.active
        s_i = interferer_symbols(mode, mod, (dep.n_interferers, nt), rng)
        y = y + np.einsum("n,nrt,nt->r", amps, ch.H_i, s_i)
    if net.n0 > 0.0:
        y = y + np.sqrt(net.n0) * complex_normal(rng, y.shape)
    return y, delta


def detect_ml(dep: Deployment, ch: ChannelDraw, scheme: SmMimo, net: NetworkModel, mod: Modulation,
              interferer_mode: InterfererMode, rng: np.random.Generator, stream: int = 0) -> bool:
    """Exhaustive joint ML; True when the symbol of ``stream`` is recovered."""
    _check_ml_size(scheme, mod)
    candidates = candidate_vectors(mod, scheme.Nt)
    sent = int(rng.integers(len(candidates)))
    y, delta = _observe(dep, ch, net, candidates[sent], interferer_mode, mod, rng)
    metric = np.sum(np.abs(y[None, :] - delta * candidates @ ch.H_o.T) ** 2, axis=1)
    decided = int(np.argmin(metric))
    return candidates[decided, stream] == candidates[sent, stream]


def pairwise_error(dep: Deployment, ch: ChannelDraw, net: NetworkModel, mod: Modulation,
                   sent: np.ndarray, other: np.ndarray, interferer_mode: InterfererMode,
                   rng: np.random.Generator) -> bool:
    """True when ``other`` is closer to the observation than the transmitted ``sent`` vector."""
    y, delta = _observe(dep, ch, net, sent, interferer_mode, mod, rng)
    d_sent = np.sum(np.abs(y - delta * ch.H_o @ sent) ** 2)
    d_other = np.sum(np.abs(y - delta * ch.H_o @ other) ** 2)
    return bool(d_other < d_sent)
