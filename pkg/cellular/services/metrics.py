"""
Analytic per-stream metrics of the equivalent-SISO model.

All metrics integrate the interference LT against the serving-distance
PDF. At the evaluation points they need (z x^eta / P) the hypergeometric
argument no longer depends on x, so each metric evaluates it once per
inner argument and the serving-distance average is either closed form or
a one-dimensional integral in u = pi lambda_b x^2.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from scipy import special as sp_special
from scipy import stats

from cellular.conf import setting
from cellular.exceptions import InvalidParameterError, NonFiniteIntegrandError
from cellular.services.interference import (
    NetworkModel,
    average_lt,
    max_jet_order,
    serving_average,
    unit_exponent_jet,
    unit_joint_exponent_bijet,
)
from cellular.services.schemes import Exactness, GammaParams, Modulation, SmMimo
from cellular.services.specfun import (
    BiJet,
    Jet,
    QuadratureSpec,
    QuadResult,
    default_quadrature,
    gaver_stehfest,
    integrate,
    damped_kummer_1f1,
)

logger = logging.getLogger(__name__)


@dataclass
class MetricResult:
    value: float
    err_estimate: float = 0.0
    exactness: Exactness = Exactness.EXACT
    diagnostics: List[str] = field(default_factory=list)
    failed: bool = False

    def __float__(self):
        return float(self.value)


class AsepMethod(enum.Enum):
    EXACT = "exact"
    JENSEN = "jensen"
    AUTO = "auto"


class _Ledger:
    """Collects quadrature outcomes for one metric evaluation."""

    def __init__(self):
        self.err = 0.0
        self.failed = False
        self.diagnostics: List[str] = []

    def add(self, res: QuadResult, label: str, weight: float = 1.0) -> float:
        self.err += abs(weight) * res.err_estimate
        if not res.converged:
            self.failed = True
            self.diagnostics.append(f"{label}: quadrature tolerance not met")
        return res.value

    def note(self, message: str, *args):
        logger.warning(message, *args)
        self.diagnostics.append(message % args if args else message)

    def result(self, value: float, exactness: Exactness) -> MetricResult:
        return MetricResult(float(value), self.err, exactness, self.diagnostics, self.failed)

    def failure(self, message: str, exactness: Exactness) -> MetricResult:
        logger.error("%s", message)
        self.diagnostics.append(message)
        return MetricResult(math.nan, math.inf, exactness, self.diagnostics, True)


def _clamp_unit(value: float) -> float:
    return min(1.0, max(0.0, value))


def _combine(*params: GammaParams) -> Exactness:
    if any(gp.exactness is Exactness.APPROXIMATE for gp in params):
        return Exactness.APPROXIMATE
    return Exactness.EXACT


# ---------------------------------------------------------------------------
# Error probabilities
# ---------------------------------------------------------------------------

def _expected_erfc(net, m_o, m_i, beta, spec, ledger) -> float:
    """E[erfc(sqrt(beta * SINR))] with z = u^2 absorbing the z^-1/2 endpoint."""
    pref = math.exp(sp_special.gammaln(m_o + 0.5) - sp_special.gammaln(m_o)) * 4.0 / math.pi

    def integrand(u):
        z = u * u
        h = ledger.add(serving_average(net, m_i, z / beta, True, spec), "erfc inner average", 0.0)
        return damped_kummer_1f1(m_o - 1, 1.5, z) * h

    return 1.0 - pref * ledger.add(integrate(integrand, 0.0, math.inf, spec), "erfc term", pref)


def _expected_erfc_squared(net, m_o, m_i, beta, spec, ledger) -> float:
    """E[erfc^2(sqrt(beta * SINR))] through the Craig form on [0, pi/4].

    With z = w sin^2(t) the inner integral over z loses its 1/sin^2 kernel:
    1 - (4 m / pi) int_0^{pi/4} int_0^inf H(w sin^2 t) e^-w 1F1(1 - m; 2; w) dw dt.
    """
    pref = 4.0 * m_o / math.pi

    def inner(theta):
        s = math.sin(theta) ** 2

        def integrand(w):
            h = ledger.add(serving_average(net, m_i, w * s / beta, True, spec), "erfc^2 inner average", 0.0)
            return damped_kummer_1f1(m_o - 1, 2.0, w) * h

        return ledger.add(integrate(integrand, 0.0, math.inf, spec), "erfc^2 radial", 0.0)

    return 1.0 - pref * ledger.add(integrate(inner, 0.0, math.pi / 4.0, spec), "erfc^2 angle", pref)


def _resolve_method(method: AsepMethod, m_o: int) -> AsepMethod:
    if method is AsepMethod.AUTO:
        cutoff = int(setting("SG_MIMO_EXACT_ASEP_MAX_MO", 4))
        return AsepMethod.EXACT if m_o <= cutoff else AsepMethod.JENSEN
    return method


def asep(net: NetworkModel, gp: GammaParams, mod: Modulation,
         method: Union[AsepMethod, str] = AsepMethod.AUTO,
         spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """ASEP = w1 E[erfc(sqrt(beta SINR))] + w2 E[erfc^2(sqrt(beta SINR))] under Gaussian signalling."""
    spec = spec or default_quadrature()
    ledger = _Ledger()
    requested = AsepMethod(method)
    resolved = _resolve_method(requested, gp.m_o)
    if requested is AsepMethod.AUTO and resolved is AsepMethod.JENSEN:
        ledger.note("ASEP for m_o=%d uses the Jensen bound on the erfc^2 term", gp.m_o)

    try:
        first = _clamp_unit(_expected_erfc(net, gp.m_o, gp.m_i, mod.beta, spec, ledger))
        if resolved is AsepMethod.EXACT:
            second = _clamp_unit(_expected_erfc_squared(net, gp.m_o, gp.m_i, mod.beta, spec, ledger))
        else:
            second = first * first
    except NonFiniteIntegrandError as e:
        return ledger.failure(f"ASEP for m_o={gp.m_o}, m_i={gp.m_i}: {e}", gp.exactness)
    return ledger.result(mod.w1 * first + mod.w2 * second, gp.exactness)


def apep_sm(net: NetworkModel, scheme: SmMimo, mod: Modulation, e_norm: float,
            spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """Average pairwise error between two SM codewords at distance ``e_norm``: 1/2 E[erfc(sqrt(|e|^2 SINR / 4))]."""
    if not e_norm > 0:
        raise InvalidParameterError("codeword distance must be positive")
    gp = scheme.gamma_params()
    ledger = _Ledger()
    if math.isinf(e_norm):
        return ledger.result(0.0, gp.exactness)
    try:
        first = _expected_erfc(net, gp.m_o, gp.m_i, e_norm ** 2 / 4.0, spec or default_quadrature(), ledger)
    except NonFiniteIntegrandError as e:
        return ledger.failure(f"pairwise error for m_o={gp.m_o}, m_i={gp.m_i}: {e}", gp.exactness)
    return ledger.result(0.5 * _clamp_unit(first), gp.exactness)


def asep_sm(net: NetworkModel, scheme: SmMimo, mod: Modulation,
            spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """Nearest-neighbour ASEP of jointly detected spatial multiplexing.

    The union bound counts the neighbours of an average point, i.e. the
    n_dmin nearest pairs spread over the M points.
    """
    pep = apep_sm(net, scheme, mod, mod.d_min, spec)
    if pep.failed and math.isnan(pep.value):
        return pep
    weight = mod.mean_neighbours
    value = _clamp_unit(weight * pep.value)
    return MetricResult(value, weight * pep.err_estimate, pep.exactness, pep.diagnostics, pep.failed)


# ---------------------------------------------------------------------------
# Outage and coverage
# ---------------------------------------------------------------------------

def _coverage_from_jet(net, gp, theta, spec, ledger) -> float:
    # scaled coefficients c_j (-theta)^j; all but c_0 are positive
    c = unit_exponent_jet(net, gp.m_i, theta, gp.m_o - 1).rescaled(-theta).coeffs
    decay = 1.0 - c[0] / math.pi

    def integrand(u):
        jet = Jet(c * (u / math.pi)).exp()
        return math.exp(-u) * math.fsum(jet.coeffs)

    return ledger.add(integrate(integrand, 0.0, math.inf, spec, scale=1.0 / decay), "coverage")


def _coverage_by_inversion(net, gp, theta, spec, ledger) -> float:
    """P(g > theta I') with I' the distance-normalized interference, via its inverted CDF."""
    ledger.note("derivative order %d exceeds the jet cap; coverage uses Laplace inversion", gp.m_o - 1)

    def transform(s):
        return average_lt(net, gp.m_i, s) / s

    def integrand(t):
        if t <= 0.0:
            return 0.0
        cdf = min(1.0, max(0.0, gaver_stehfest(transform, t / theta)))
        return float(stats.gamma.pdf(t, gp.m_o)) * cdf

    return ledger.add(integrate(integrand, 0.0, math.inf, spec, scale=float(gp.m_o)), "coverage inversion")


def _coverage(net, gp, theta, spec, ledger) -> float:
    if not theta > 0:
        raise InvalidParameterError("SIR threshold must be positive")
    if gp.m_o - 1 > max_jet_order():
        return _coverage_by_inversion(net, gp, theta, spec, ledger)
    return _coverage_from_jet(net, gp, theta, spec, ledger)


def coverage(net: NetworkModel, gp: GammaParams, theta: float,
             spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """Interference-limited P(SIR > theta) for one stream."""
    ledger = _Ledger()
    value = _coverage(net, gp, theta, spec or default_quadrature(), ledger)
    return ledger.result(value, gp.exactness)


def outage(net: NetworkModel, gp: GammaParams, theta: float,
           spec: Optional[QuadratureSpec] = None) -> MetricResult:
    res = coverage(net, gp, theta, spec)
    res.value = 1.0 - res.value
    return res


# ---------------------------------------------------------------------------
# Ergodic rate and throughput
# ---------------------------------------------------------------------------

def ergodic_rate(net: NetworkModel, gp: GammaParams, per_cell: bool = False, bits: bool = False,
                 spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """E[ln(1 + SIR)] per stream, optionally per cell and/or in bits."""
    spec = spec or default_quadrature()
    ledger = _Ledger()
    m_o = gp.m_o

    def integrand(z):
        gain = -math.expm1(-m_o * math.log1p(z)) / z
        return gain * serving_average(net, gp.m_i, z, include_noise=False).value

    value = ledger.add(integrate(integrand, 0.0, math.inf, spec), "rate")
    factor = (gp.cell_streams if per_cell else 1) / (math.log(2.0) if bits else 1.0)
    ledger.err *= factor
    return ledger.result(value * factor, gp.exactness)


def throughput(asep_value: float, mod: Modulation) -> float:
    """Successfully delivered bits per channel use of one stream."""
    if not 0.0 <= asep_value <= 1.0:
        raise InvalidParameterError("ASEP must lie in [0, 1]")
    return mod.bits * (1.0 - asep_value)


def cell_throughput(asep_value: float, mod: Modulation, gp: GammaParams) -> float:
    return gp.cell_streams * throughput(asep_value, mod)


# ---------------------------------------------------------------------------
# Retransmission
# ---------------------------------------------------------------------------

COMPARE_MODES = ("correlated", "independent")


@dataclass(frozen=True)
class RetxConfig:
    """Two transmission attempts from the same serving BS; ``slot2=None`` is a single attempt."""

    slot1: GammaParams
    slot2: Optional[GammaParams]
    theta: float
    net: NetworkModel

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise InvalidParameterError("SIR threshold must be positive and finite")


def _joint_coverage(cfg: RetxConfig, spec, ledger) -> float:
    slot2 = cfg.slot2 or GammaParams(1, 1, 1)
    y2 = cfg.theta if cfg.slot2 is not None else 0.0
    orders = (cfg.slot1.m_o - 1, slot2.m_o - 1 if cfg.slot2 is not None else 0)
    bj, ok = unit_joint_exponent_bijet(cfg.net, cfg.theta, y2, cfg.slot1.m_i, slot2.m_i, orders, spec)
    if not ok:
        ledger.failed = True
        ledger.diagnostics.append("joint exponent: vector quadrature tolerance not met")
    c = bj.scaled(-cfg.theta, -y2).coeffs
    decay = 1.0 - c[0, 0] / math.pi

    def integrand(u):
        return math.exp(-u) * math.fsum(BiJet(c * (u / math.pi)).exp().coeffs.ravel())

    return ledger.add(integrate(integrand, 0.0, math.inf, spec, scale=1.0 / decay), "joint coverage")


def coverage_retx(cfg: RetxConfig, compare_mode: str = "correlated",
                  spec: Optional[QuadratureSpec] = None) -> MetricResult:
    """P(SIR1 > theta) + P(SIR2 > theta) - P(both), with the second attempt seeing the same BS layout.

    ``compare_mode="independent"`` replaces the joint term by the product of
    the marginals, i.e. ignores the temporal interference correlation.
    """
    if compare_mode not in COMPARE_MODES:
        raise InvalidParameterError(f"compare_mode must be one of {COMPARE_MODES}")
    spec = spec or default_quadrature()
    ledger = _Ledger()
    if cfg.slot2 is None:
        return ledger.result(_joint_coverage(cfg, spec, ledger), cfg.slot1.exactness)

    c1 = _coverage(cfg.net, cfg.slot1, cfg.theta, spec, ledger)
    c2 = c1 if cfg.slot2 == cfg.slot1 else _coverage(cfg.net, cfg.slot2, cfg.theta, spec, ledger)
    if compare_mode == "independent":
        joint = c1 * c2
    else:
        joint = _joint_coverage(cfg, spec, ledger)
    return ledger.result(c1 + c2 - joint, _combine(cfg.slot1, cfg.slot2))


def sir_grid(theta_db) -> np.ndarray:
    return 10.0 ** (np.asarray(theta_db, dtype=float) / 10.0)
