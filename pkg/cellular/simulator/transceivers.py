"""
Per-scheme precoding and combining for the Monte-Carlo oracle.

Every scheme reduces a stream to the post-processed scalar

    z = sqrt(P r0^-eta) a s_l + sum_i sqrt(P r_i^-eta) b_i . s_i + n,   n ~ CN(0, N0),

with a unit-norm combiner; a transceiver only has to say how a channel
draw maps to ``a`` and the rows ``b_i``. SINR evaluation and symbol
detection on top of that are shared in the base class.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional, Type

import numpy as np

from cellular.exceptions import InvalidParameterError
from cellular.services.interference import NetworkModel
from cellular.services.schemes import (
    Miso,
    MimoScheme,
    Ostbc,
    Sdma,
    Simo,
    Siso,
    SmMimo,
    ZfRx,
)
from cellular.simulator.deployment import Deployment, draw_activity
from cellular.simulator.rng import complex_normal

logger = logging.getLogger(__name__)


@dataclass
class ChannelDraw:
    """One slot of fading: intended channel, interferer channels and activity."""

    H_o: np.ndarray
    H_i: np.ndarray
    active: np.ndarray
    H_tilde: Optional[np.ndarray] = None


@dataclass
class StreamLink:
    """Post-combining view of one stream: a and the b_i rows (one row per interferer)."""

    a: complex
    coeffs: np.ndarray

    @property
    def gain(self) -> float:
        return float(abs(self.a) ** 2)

    @property
    def interferer_gains(self) -> np.ndarray:
        return np.sum(np.abs(self.coeffs) ** 2, axis=1)


@dataclass
class _Received:
    signal_amp: float
    interferer_amps: np.ndarray = field(default_factory=lambda: np.zeros(0))


class Transceiver(ABC):
    """Shared per-stream SINR and detection flow.

    Subclasses implement `draw_channels()` and `link()`; `interferer_width`
    is the number of symbols each interfering BS superimposes.
    """

    def __init__(self, scheme: MimoScheme):
        self.scheme = scheme
        self.gp = scheme.gamma_params()

    @property
    def streams(self) -> int:
        return self.gp.L

    @property
    @abstractmethod
    def interferer_width(self) -> int:
        ...

    @abstractmethod
    def draw_channels(self, n_interferers: int, rng: np.random.Generator) -> ChannelDraw:
        ...

    @abstractmethod
    def link(self, ch: ChannelDraw, stream: int) -> StreamLink:
        ...

    def draw_slot(self, dep: Deployment, net: NetworkModel, rng: np.random.Generator) -> ChannelDraw:
        ch = self.draw_channels(dep.n_interferers, rng)
        ch.active = draw_activity(dep, net.p, rng)
        return ch

    def _check_stream(self, stream: int):
        if not 0 <= stream < self.streams:
            raise InvalidParameterError(f"stream {stream} outside [0, {self.streams})")

    def _amplitudes(self, dep: Deployment, net: NetworkModel, ch: ChannelDraw) -> _Received:
        d = dep.interferer_distances
        amps = np.sqrt(net.power * d ** (-net.eta)) * ch.active
        return _Received(float(np.sqrt(net.power * dep.r0 ** (-net.eta))), amps)

    def sinr(self, dep: Deployment, ch: ChannelDraw, net: NetworkModel, stream: int = 0) -> float:
        self._check_stream(stream)
        lk = self.link(ch, stream)
        rx = self._amplitudes(dep, net, ch)
        signal = rx.signal_amp ** 2 * lk.gain
        interference = float(np.dot(rx.interferer_amps ** 2, lk.interferer_gains))
        noise = interference + net.n0
        if noise == 0.0:
            return float("inf")
        return signal / noise

    def received(self, dep: Deployment, ch: ChannelDraw, net: NetworkModel, stream: int,
                 symbol: complex, interferer_symbols: np.ndarray, rng: np.random.Generator):
        """Combined scalar z and the intended amplitude sqrt(P r0^-eta) |a|."""
        self._check_stream(stream)
        lk = self.link(ch, stream)
        rx = self._amplitudes(dep, net, ch)
        # rotate the combiner so the intended coefficient is real
        phase = np.conj(lk.a) / abs(lk.a) if lk.a != 0 else 1.0
        amp = rx.signal_amp * abs(lk.a)
        z = amp * symbol
        if len(interferer_symbols):
            z += phase * np.sum(rx.interferer_amps * np.sum(lk.coeffs * interferer_symbols, axis=1))
        if net.n0 > 0.0:
            z += np.sqrt(net.n0) * complex_normal(rng, ())
        return complex(z), amp


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------

class MrcTransceiver(Transceiver):
    """Single stream from a single antenna, maximum-ratio combined over Nr (SISO, SIMO)."""

    def __init__(self, scheme):
        super().__init__(scheme)
        self.nr = getattr(scheme, "Nr", 1)

    @property
    def interferer_width(self) -> int:
        return 1

    def draw_channels(self, n_interferers, rng):
        return ChannelDraw(
            H_o=complex_normal(rng, (self.nr, 1)),
            H_i=complex_normal(rng, (n_interferers, self.nr, 1)),
            active=np.ones(n_interferers, dtype=bool),
        )

    def link(self, ch, stream):
        h = ch.H_o[:, 0]
        norm = np.linalg.norm(h)
        w = np.conj(h) / norm
        return StreamLink(norm, np.einsum("r,nrk->nk", w, ch.H_i))


class ZfReceiver(Transceiver):
    """Nt spatially multiplexed streams separated by a zero-forcing receiver."""

    def __init__(self, scheme: ZfRx):
        super().__init__(scheme)
        self.nt, self.nr = scheme.Nt, scheme.Nr

    @property
    def interferer_width(self) -> int:
        return self.nt

    def draw_channels(self, n_interferers, rng):
        return ChannelDraw(
            H_o=complex_normal(rng, (self.nr, self.nt)),
            H_i=complex_normal(rng, (n_interferers, self.nr, self.nt)),
            active=np.ones(n_interferers, dtype=bool),
        )

    def link(self, ch, stream):
        w = np.linalg.pinv(ch.H_o)[stream]
        norm = np.linalg.norm(w)
        # (H^H H)^-1_ll = |w_l|^2
        return StreamLink(1.0 / norm, np.einsum("r,nrk->nk", w / norm, ch.H_i))


class ZfPrecoder(Transceiver):
    """K single-antenna users served by normalized pseudo-inverse precoding (SDMA, MISO)."""

    def __init__(self, scheme):
        super().__init__(scheme)
        self.nt = scheme.Nt
        self.k = getattr(scheme, "K", 1)

    @property
    def streams(self) -> int:
        return self.k

    @property
    def interferer_width(self) -> int:
        return self.k

    def draw_channels(self, n_interferers, rng):
        return ChannelDraw(
            H_o=complex_normal(rng, (self.k, self.nt)),
            H_i=complex_normal(rng, (n_interferers, 1, self.nt)),
            active=np.ones(n_interferers, dtype=bool),
            H_tilde=complex_normal(rng, (n_interferers, self.k, self.nt)),
        )

    @staticmethod
    def precoders(H: np.ndarray) -> np.ndarray:
        """Unit-norm pseudo-inverse columns, shape (..., Nt, K)."""
        V = np.linalg.pinv(H)
        return V / np.linalg.norm(V, axis=-2, keepdims=True)

    def link(self, ch, stream):
        V = self.precoders(ch.H_o)
        a = ch.H_o[stream] @ V[:, stream]
        if len(ch.H_i):
            coeffs = np.einsum("nt,ntk->nk", ch.H_i[:, 0, :], self.precoders(ch.H_tilde))
        else:
            coeffs = np.zeros((0, self.k), dtype=complex)
        return StreamLink(a, coeffs)


class AlamoutiTransceiver(Transceiver):
    """2 x Nr Alamouti code, combined on its two-slot equivalent channel."""

    def __init__(self, scheme: Ostbc):
        if (scheme.Nt, scheme.Ns, scheme.T) != (2, 2, 2):
            raise InvalidParameterError("only the 2-antenna Alamouti code is simulated (Nt = Ns = T = 2)")
        super().__init__(scheme)
        self.nr = scheme.Nr

    @property
    def streams(self) -> int:
        return 2

    @property
    def interferer_width(self) -> int:
        return 2

    def draw_channels(self, n_interferers, rng):
        return ChannelDraw(
            H_o=complex_normal(rng, (self.nr, 2)),
            H_i=complex_normal(rng, (n_interferers, self.nr, 2)),
            active=np.ones(n_interferers, dtype=bool),
        )

    @staticmethod
    def equivalent(H: np.ndarray) -> np.ndarray:
        """Stack slot 1 with the conjugated slot 2: rows [h1, h2] and [h2*, -h1*]."""
        second = np.stack((np.conj(H[..., 1]), -np.conj(H[..., 0])), axis=-1)
        return np.concatenate((H, second), axis=-2)

    def link(self, ch, stream):
        q = self.equivalent(ch.H_o)[:, stream]
        norm = np.linalg.norm(q)
        w = np.conj(q) / norm
        return StreamLink(norm, np.einsum("r,nrk->nk", w, self.equivalent(ch.H_i)))


class SpatialMultiplexing(Transceiver):
    """Uncoded spatial multiplexing; the per-stream link is the column-l matched filter.

    Symbols are detected jointly (see detection.detect_ml); the link here
    feeds SIR statistics only and leaves out the other intra-cell streams.
    """

    def __init__(self, scheme: SmMimo):
        super().__init__(scheme)
        self.nt, self.nr = scheme.Nt, scheme.Nr

    @property
    def interferer_width(self) -> int:
        return self.nt

    def draw_channels(self, n_interferers, rng):
        return ChannelDraw(
            H_o=complex_normal(rng, (self.nr, self.nt)),
            H_i=complex_normal(rng, (n_interferers, self.nr, self.nt)),
            active=np.ones(n_interferers, dtype=bool),
        )

    def link(self, ch, stream):
        h = ch.H_o[:, stream]
        norm = np.linalg.norm(h)
        return StreamLink(norm, np.einsum("r,nrk->nk", np.conj(h) / norm, ch.H_i))


TRANSCEIVERS: Dict[Type, Type[Transceiver]] = {
    Siso: MrcTransceiver,
    Simo: MrcTransceiver,
    Miso: ZfPrecoder,
    Sdma: ZfPrecoder,
    ZfRx: ZfReceiver,
    Ostbc: AlamoutiTransceiver,
    SmMimo: SpatialMultiplexing,
}


def transceiver_for(scheme: MimoScheme) -> Transceiver:
    cls = TRANSCEIVERS.get(type(scheme))
    if cls is None:
        raise InvalidParameterError(f"no transceiver for {type(scheme).__name__}")
    return cls(scheme)
