"""
MIMO schemes, their SISO-equivalent gamma parameters, and QAM constants.
"""

import enum
import math
from dataclasses import dataclass
from typing import Dict, Tuple, Type, Union

import numpy as np

from cellular.exceptions import (
    InvalidParameterError,
    InvariantViolationError,
    UnrealizableSchemeError,
)


class Exactness(enum.Enum):
    EXACT = "exact"
    APPROXIMATE = "approximate"


@dataclass(frozen=True)
class GammaParams:
    """Equivalent-SISO link: Gamma(m_o, 1) intended gain, Gamma(m_i, 1) per interferer.

    ``cell_streams`` counts the independently coded streams a cell delivers
    per channel use; it differs from ``L`` only for space-time coding, where
    the ``L`` transmitted symbols of a block carry one coded stream.
    """

    m_o: int
    m_i: int
    L: int
    exactness: Exactness = Exactness.EXACT
    cell_streams: int = 0

    def __post_init__(self):
        for name in ("m_o", "m_i", "L"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvariantViolationError(f"{name} must be a positive integer, got {value}")
        if self.cell_streams == 0:
            object.__setattr__(self, "cell_streams", self.L)

    @property
    def ratio(self) -> float:
        return self.m_o / self.m_i


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------

def _require(condition: bool, message: str):
    if not condition:
        raise InvariantViolationError(message)


def _counts(**counts):
    for name, value in counts.items():
        _require(isinstance(value, (int, np.integer)) and value >= 1, f"{name} must be an integer >= 1, got {value!r}")


@dataclass(frozen=True)
class Siso:
    tag = "siso"

    def gamma_params(self) -> GammaParams:
        return GammaParams(1, 1, 1)

    def antennas(self) -> Dict[str, int]:
        return {}


@dataclass(frozen=True)
class Simo:
    Nr: int
    tag = "simo"

    def __post_init__(self):
        _counts(Nr=self.Nr)

    def gamma_params(self) -> GammaParams:
        return GammaParams(self.Nr, 1, 1)

    def antennas(self):
        return {"Nr": self.Nr}


@dataclass(frozen=True)
class Miso:
    Nt: int
    tag = "miso"

    def __post_init__(self):
        _counts(Nt=self.Nt)

    def gamma_params(self) -> GammaParams:
        # single-user special case of SDMA
        return Sdma(self.Nt, 1).gamma_params()

    def antennas(self):
        return {"Nt": self.Nt}


@dataclass(frozen=True)
class Ostbc:
    Nt: int
    Nr: int
    Ns: int
    T: int
    tag = "ostbc"

    def __post_init__(self):
        _counts(Nt=self.Nt, Nr=self.Nr, Ns=self.Ns, T=self.T)
        _require(self.Ns <= self.Nt, "OSTBC needs Ns <= Nt")
        _require(self.T >= self.Ns, "OSTBC needs T >= Ns")

    @property
    def code_rate(self) -> float:
        return self.Ns / self.T

    def gamma_params(self) -> GammaParams:
        return GammaParams(self.Ns * self.Nr, self.Ns, self.Ns, cell_streams=1)

    def antennas(self):
        return {"Nt": self.Nt, "Nr": self.Nr, "Ns": self.Ns, "T": self.T}


@dataclass(frozen=True)
class ZfRx:
    Nt: int
    Nr: int
    tag = "zfrx"

    def __post_init__(self):
        _counts(Nt=self.Nt, Nr=self.Nr)
        _require(self.Nr >= self.Nt, "ZF receiver needs Nr >= Nt")

    def gamma_params(self) -> GammaParams:
        return GammaParams(self.Nr - self.Nt + 1, self.Nt, self.Nt)

    def antennas(self):
        return {"Nt": self.Nt, "Nr": self.Nr}


@dataclass(frozen=True)
class Sdma:
    Nt: int
    K: int
    tag = "sdma"

    def __post_init__(self):
        _counts(Nt=self.Nt, K=self.K)
        _require(self.Nt >= self.K, "SDMA needs Nt >= K")

    def gamma_params(self) -> GammaParams:
        exactness = Exactness.EXACT if self.K == 1 else Exactness.APPROXIMATE
        return GammaParams(self.Nt - self.K + 1, self.K, self.K, exactness)

    def antennas(self):
        return {"Nt": self.Nt, "K": self.K}


@dataclass(frozen=True)
class SmMimo:
    Nt: int
    Nr: int
    tag = "smmimo"

    def __post_init__(self):
        _counts(Nt=self.Nt, Nr=self.Nr)
        _require(self.Nr >= self.Nt, "SM-MIMO needs Nr >= Nt")

    def gamma_params(self) -> GammaParams:
        return GammaParams(self.Nr, self.Nt, self.Nt, Exactness.APPROXIMATE)

    def antennas(self):
        return {"Nt": self.Nt, "Nr": self.Nr}


MimoScheme = Union[Siso, Simo, Miso, Ostbc, ZfRx, Sdma, SmMimo]

SCHEMES: Dict[str, Type] = {cls.tag: cls for cls in (Siso, Simo, Miso, Ostbc, ZfRx, Sdma, SmMimo)}


def gamma_params(scheme: MimoScheme) -> GammaParams:
    return scheme.gamma_params()


def parse_scheme(tag: str, **counts) -> MimoScheme:
    """Build a scheme from a CLI tag; unused antenna fields are ignored."""
    cls = SCHEMES.get(str(tag).strip().lower())
    if cls is None:
        raise InvalidParameterError(f"unknown scheme {tag!r}; expected one of {', '.join(SCHEMES)}")
    if cls is Ostbc:
        counts.setdefault("Ns", counts.get("Nt"))
        counts.setdefault("T", counts.get("Ns"))
    fields = cls.__dataclass_fields__
    kwargs = {}
    for name in fields:
        if counts.get(name) is None:
            raise InvariantViolationError(f"scheme {cls.tag} needs {name}")
        kwargs[name] = int(counts[name])
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# Modulation
# ---------------------------------------------------------------------------

QAM_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class Modulation:
    M: int
    w1: float
    w2: float
    beta: float
    d_min: float
    n_dmin: int

    @property
    def bits(self) -> int:
        return int(math.log2(self.M))

    @property
    def mean_neighbours(self) -> float:
        """Nearest neighbours per constellation point, averaged over the points."""
        return 2.0 * self.n_dmin / self.M

    def constellation(self) -> np.ndarray:
        return qam_constellation(self.M)


def qam_constellation(M: int) -> np.ndarray:
    """Square M-QAM points normalized to unit average energy."""
    side = int(round(math.sqrt(M)))
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    points = (levels[:, None] + 1j * levels[None, :]).ravel()
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def qam(M: int) -> Modulation:
    if M not in QAM_ORDERS:
        raise InvalidParameterError(f"M must be one of {QAM_ORDERS}, got {M}")
    root = math.sqrt(M)
    points = qam_constellation(M)
    dist = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(dist, np.inf)
    d_min = float(dist.min())
    # unordered pairs at the minimum distance
    n_dmin = int(np.count_nonzero(np.isclose(dist, d_min))) // 2
    return Modulation(
        M=M,
        w1=2.0 * (root - 1.0) / root,
        w2=-(((root - 1.0) / root) ** 2),
        beta=3.0 / (2.0 * (M - 1)),
        d_min=d_min,
        n_dmin=n_dmin,
    )


def antenna_cost_for_extra_users(K: int, c: float) -> int:
    """Transmit antennas per BS needed to serve K users at fixed m_o/m_i = c."""
    if K < 1 or c <= 0:
        raise InvalidParameterError("need K >= 1 and c > 0")
    # guard against 3.0000000000000004-style ceilings
    return int(math.ceil(K * (c + 1.0) - 1.0 - 1e-12))


def realize_counts(tag: str, m_o: int, m_i: int) -> Tuple[str, Dict[str, int]]:
    """Invert the gamma-parameter table; used by the design module."""
    tag = tag.lower()
    if tag == "siso":
        if (m_o, m_i) != (1, 1):
            raise UnrealizableSchemeError("SISO only realizes (1, 1)")
        return tag, {}
    if tag in ("simo", "miso"):
        if m_i != 1:
            raise UnrealizableSchemeError(f"{tag.upper()} is single-stream, m_i must be 1")
        return tag, ({"Nr": m_o} if tag == "simo" else {"Nt": m_o})
    if tag == "ostbc":
        if m_o % m_i:
            raise UnrealizableSchemeError("OSTBC needs m_o divisible by m_i")
        return tag, {"Nt": m_i, "Nr": m_o // m_i, "Ns": m_i, "T": m_i}
    if tag == "zfrx":
        return tag, {"Nt": m_i, "Nr": m_o + m_i - 1}
    if tag == "sdma":
        return tag, {"Nt": m_o + m_i - 1, "K": m_i}
    if tag == "smmimo":
        if m_o < m_i:
            raise UnrealizableSchemeError("SM-MIMO needs Nr >= Nt, i.e. m_o >= m_i")
        return tag, {"Nt": m_i, "Nr": m_o}
    raise InvalidParameterError(f"unknown scheme {tag!r}")
