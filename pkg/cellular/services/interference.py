"""
Laplace transforms of the aggregate interference seen by the typical user.

The single-slot transform has the closed form

    L(z | r0) = exp(-pi lambda r0^2 [2F1(-d, m_i; 1-d; -z P r0^-eta) - 1]),  d = 2/eta,

while the two-slot joint transform is evaluated from its radial PGFL
integral. Both are also available as jets (single slot) and bijets
(two slots) of their exponents, which is what the derivative sums of
outage and retransmission coverage consume.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from cellular.conf import setting
from cellular.exceptions import InvalidParameterError
from cellular.services.specfun import (
    BiJet,
    Jet,
    QuadResult,
    QuadratureSpec,
    binomial_coeffs,
    default_quadrature,
    gauss_2f1,
    integrate,
    integrate_vec,
    jet_lift,
)

logger = logging.getLogger(__name__)

PER_KM2 = 1e-6


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((float(dbm) - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def max_jet_order() -> int:
    return int(setting("SG_MIMO_MAX_JET_ORDER", 32))


@dataclass(frozen=True)
class NetworkModel:
    """PPP network: BS intensity (per m^2), activity, path loss, per-antenna power, noise."""

    lambda_b: float
    p: float = 1.0
    eta: float = 4.0
    power: float = 1.0
    n0: float = 0.0

    def __post_init__(self):
        if not self.lambda_b > 0:
            raise InvalidParameterError("lambda_b must be positive")
        if not 0 < self.p <= 1:
            raise InvalidParameterError("activity factor p must lie in (0, 1]")
        if not self.eta > 2:
            raise InvalidParameterError("path-loss exponent must exceed 2")
        if not self.power > 0:
            raise InvalidParameterError("transmit power must be positive")
        if not self.n0 >= 0:
            raise InvalidParameterError("noise power must be non-negative")

    @classmethod
    def from_units(cls, lambda_per_km2: float = 10.0, p: float = 1.0, eta: float = 4.0,
                   power_dbm: float = 30.0, n0_dbm: Optional[float] = -90.0) -> "NetworkModel":
        n0 = 0.0 if n0_dbm is None else dbm_to_watts(n0_dbm)
        return cls(lambda_per_km2 * PER_KM2, p, eta, dbm_to_watts(power_dbm), n0)

    @property
    def intensity(self) -> float:
        """Intensity of the active interferers, p * lambda_b."""
        return self.p * self.lambda_b

    @property
    def delta(self) -> float:
        return 2.0 / self.eta

    @property
    def mean_serving_distance(self) -> float:
        return 0.5 / math.sqrt(self.lambda_b)

    @property
    def distance_scale(self) -> float:
        """1/sqrt(pi lambda_b): natural length of the serving-distance PDF."""
        return 1.0 / math.sqrt(math.pi * self.lambda_b)

    def serving_pdf(self, r):
        return 2.0 * math.pi * self.lambda_b * r * np.exp(-math.pi * self.lambda_b * r * r)

    def with_(self, **changes) -> "NetworkModel":
        data = dict(lambda_b=self.lambda_b, p=self.p, eta=self.eta, power=self.power, n0=self.n0)
        data.update(changes)
        return NetworkModel(**data)


@dataclass(frozen=True)
class LtQuery:
    z: float
    r0: float
    m_i: int

    def __post_init__(self):
        if not (math.isfinite(self.z) and self.z >= 0):
            raise InvalidParameterError("LT argument z must be finite and >= 0")
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise InvalidParameterError("serving distance must be positive")
        if int(self.m_i) != self.m_i or self.m_i < 1:
            raise InvalidParameterError("m_i must be a positive integer")


# ---------------------------------------------------------------------------
# Single slot
# ---------------------------------------------------------------------------

def pgfl_hyp(net: NetworkModel, m_i: int, y: float) -> float:
    """2F1(-d, m_i; 1-d; -y): the hypergeometric factor at normalized argument y."""
    d = net.delta
    return gauss_2f1(-d, m_i, 1.0 - d, -y)


def lt_interference(net: NetworkModel, q: LtQuery) -> float:
    if q.z == 0.0:
        return 1.0
    y = q.z * net.power * q.r0 ** (-net.eta)
    return math.exp(-math.pi * net.intensity * q.r0 ** 2 * (pgfl_hyp(net, q.m_i, y) - 1.0))


def lt_interference_radial(net: NetworkModel, q: LtQuery, spec: Optional[QuadratureSpec] = None) -> float:
    """The same transform from its PGFL radial integral; used as an oracle."""
    y = q.z * net.power * q.r0 ** (-net.eta)

    def integrand(v):
        return -math.expm1(-q.m_i * math.log1p(y * v ** (-net.eta))) * v

    res = integrate(integrand, 1.0, math.inf, spec)
    return math.exp(-2.0 * math.pi * net.intensity * q.r0 ** 2 * res.value)


def unit_exponent_jet(net: NetworkModel, m_i: int, y0: float, order: int) -> Jet:
    """Jet in the normalized argument y of -pi p [2F1(-d, m_i; 1-d; -y) - 1].

    Multiplying by lambda_b r0^2 gives the log-LT at serving distance r0,
    with y = z P r0^-eta.
    """
    d = net.delta
    hyp = jet_lift("gauss_2f1", -y0, order, a=-d, b=m_i, c=1.0 - d).rescaled(-1.0)
    return Jet((hyp - 1.0).coeffs * (-math.pi * net.p), y0)


def _check_order(order: int):
    if order < 0:
        raise InvalidParameterError("jet order must be non-negative")
    cap = max_jet_order()
    if order > cap:
        raise InvalidParameterError(f"derivative order {order} exceeds the cap of {cap}")


def lt_exponent_jet(net: NetworkModel, q: LtQuery, order: int) -> Jet:
    _check_order(order)
    unit = net.power * q.r0 ** (-net.eta)
    jet = unit_exponent_jet(net, q.m_i, q.z * unit, order).rescaled(unit)
    return Jet(jet.coeffs * (net.lambda_b * q.r0 ** 2), q.z)


def lt_interference_jet(net: NetworkModel, q: LtQuery, order: int) -> Jet:
    """Taylor jet of L(z | r0) about z = q.z."""
    return lt_exponent_jet(net, q, order).exp()


# ---------------------------------------------------------------------------
# Two slots
# ---------------------------------------------------------------------------

def _radial_terms(p, y1, y2, m1, m2, v, eta, orders):
    """Bijet in (y1, y2) of the PGFL integrand h(v) * v."""
    n1, n2 = orders[0] + 1, orders[1] + 1
    g = v ** (-eta)
    l1 = math.log1p(y1 * g)
    l2 = math.log1p(y2 * g)
    h = np.zeros((n1, n2))
    # constant term without cancellation: 1 - A = -expm1(log A)
    h[0, 0] = (p * -math.expm1(-m1 * l1 - m2 * l2)
               + (1.0 - p) * (-math.expm1(-m1 * l1) - math.expm1(-m2 * l2)))
    if n1 > 1 or n2 > 1:
        # y-coefficients of (1 + y g)^-m: C(-m, k) (g / (1 + y g))^k (1 + y g)^-m
        k1 = np.arange(n1)
        k2 = np.arange(n2)
        a1 = binomial_coeffs(-m1, orders[0]) * (g / (1.0 + y1 * g)) ** k1 * math.exp(-m1 * l1)
        a2 = binomial_coeffs(-m2, orders[1]) * (g / (1.0 + y2 * g)) ** k2 * math.exp(-m2 * l2)
        mixed = -p * np.outer(a1, a2)
        mixed[1:, 0] -= (1.0 - p) * a1[1:]
        mixed[0, 1:] -= (1.0 - p) * a2[1:]
        mixed[0, 0] = 0.0
        h += mixed
    return h * v


def unit_joint_exponent_bijet(net: NetworkModel, y1: float, y2: float, m_i1: int, m_i2: int,
                              orders: Tuple[int, int], spec: Optional[QuadratureSpec] = None) -> Tuple[BiJet, bool]:
    """Bijet in normalized (y1, y2) of the joint log-LT per unit lambda_b r0^2.

    Each coefficient is integrated over v = x / r0 in [1, inf) with the
    substitution v = 1 / (1 - t). Coefficients are integrated as
    c[i, j] y1^i y2^j so the shared error norm weighs them alike.
    """
    for o in orders:
        _check_order(o)
    spec = spec or default_quadrature()
    shape = (orders[0] + 1, orders[1] + 1)
    h1 = y1 if y1 > 0 else 1.0
    h2 = y2 if y2 > 0 else 1.0
    weights = np.outer(h1 ** np.arange(shape[0]), h2 ** np.arange(shape[1]))

    def f(v):
        return (_radial_terms(net.p, y1, y2, m_i1, m_i2, v, net.eta, orders) * weights).ravel()

    if shape == (1, 1):
        res = integrate(lambda v: float(f(v)[0]), 1.0, math.inf, spec)
        coeffs, ok = np.array([[res.value]]), res.converged
    else:
        flat, _err, ok = integrate_vec(f, 1.0, math.inf, spec)
        coeffs = flat.reshape(shape) / weights
    return BiJet(coeffs * (-2.0 * math.pi * net.p), (y1, y2)), ok


def joint_exponent_bijet(net: NetworkModel, r0: float, z1: float, z2: float, m_i1: int, m_i2: int,
                         orders: Tuple[int, int], spec: Optional[QuadratureSpec] = None) -> Tuple[BiJet, bool]:
    if r0 <= 0 or z1 < 0 or z2 < 0:
        raise InvalidParameterError("need r0 > 0 and z1, z2 >= 0")
    unit = net.power * r0 ** (-net.eta)
    bj, ok = unit_joint_exponent_bijet(net, z1 * unit, z2 * unit, m_i1, m_i2, orders, spec)
    bj = bj.scaled(unit, unit)
    return BiJet(bj.coeffs * (net.lambda_b * r0 ** 2), (z1, z2)), ok


def joint_lt_interference(net: NetworkModel, r0: float, z1: float, z2: float, m_i1: int, m_i2: int,
                          spec: Optional[QuadratureSpec] = None) -> Tuple[float, bool]:
    """Joint LT E[exp(-z1 I1 - z2 I2) | r0]; returns (value, converged)."""
    if z1 == 0.0 and z2 == 0.0:
        return 1.0, True
    bj, ok = joint_exponent_bijet(net, r0, z1, z2, m_i1, m_i2, (0, 0), spec)
    return math.exp(bj.value), ok


def joint_lt_interference_bijet(net: NetworkModel, r0: float, z1: float, z2: float, m_i1: int, m_i2: int,
                                orders: Tuple[int, int], spec: Optional[QuadratureSpec] = None) -> Tuple[BiJet, bool]:
    """Mixed Taylor coefficients of the joint LT about (z1, z2)."""
    bj, ok = joint_exponent_bijet(net, r0, z1, z2, m_i1, m_i2, orders, spec)
    return bj.exp(), ok


# ---------------------------------------------------------------------------
# Averages over the serving distance
# ---------------------------------------------------------------------------

def average_lt(net: NetworkModel, m_i: int, s: float) -> float:
    """E_r0[L(s r0^eta / P | r0)] in the interference-limited case: 1 / (1 + p(F(-s) - 1))."""
    return 1.0 / (1.0 + net.p * (pgfl_hyp(net, m_i, s) - 1.0))


def serving_average(net: NetworkModel, m_i: int, s: float, include_noise: bool = True,
                    spec: Optional[QuadratureSpec] = None) -> QuadResult:
    """E_r0[exp(-s N0 r0^eta / P) L(s r0^eta / P | r0)].

    The hypergeometric factor does not depend on r0 at this argument, so
    it is evaluated once; with noise the r0-average is integrated against
    the serving-distance PDF, written in u = pi lambda_b r0^2.
    """
    if s == 0.0:
        return QuadResult(1.0, 0.0)
    a = 1.0 + net.p * (pgfl_hyp(net, m_i, s) - 1.0)
    if not include_noise or net.n0 == 0.0:
        return QuadResult(1.0 / a, 0.0)
    c = s * net.n0 / net.power * (math.pi * net.lambda_b) ** (-net.eta / 2.0)
    half_eta = net.eta / 2.0

    def integrand(u):
        return math.exp(-a * u - c * u ** half_eta)

    return integrate(integrand, 0.0, math.inf, spec, scale=1.0 / a)
