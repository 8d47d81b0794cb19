"""
Antenna-configuration design: from a reliability constraint to ranked MIMO setups.

Flow: the constraint fixes the smallest diversity m_o that meets it for
m_i = required streams; each candidate scheme realizes the smallest
admissible m_o at or above it as antenna counts; every realization is
re-evaluated by the metrics module before it is ranked.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from cellular.exceptions import (
    InfeasibleDesignError,
    InvalidParameterError,
    UnrealizableSchemeError,
)
from cellular.services import metrics
from cellular.services.interference import NetworkModel
from cellular.services.schemes import (
    SCHEMES,
    Exactness,
    GammaParams,
    MimoScheme,
    Modulation,
    SmMimo,
    parse_scheme,
    realize_counts,
)
from cellular.services.specfun import QuadratureSpec

logger = logging.getLogger(__name__)

MAX_DIVERSITY = 64


@dataclass(frozen=True)
class MaxAsep:
    epsilon: float
    mod: Modulation

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError("ASEP constraint must lie in (0, 1)")

    def evaluate(self, net: NetworkModel, gp: GammaParams, spec=None) -> metrics.MetricResult:
        return metrics.asep(net, gp, self.mod, metrics.AsepMethod.AUTO, spec)

    def evaluate_scheme(self, net: NetworkModel, scheme: MimoScheme, spec=None) -> metrics.MetricResult:
        """ASEP of a concrete scheme; jointly detected SM uses its nearest-neighbour bound."""
        if isinstance(scheme, SmMimo):
            return metrics.asep_sm(net, scheme, self.mod, spec)
        return self.evaluate(net, scheme.gamma_params(), spec)

    def describe(self) -> str:
        return f"ASEP <= {self.epsilon:g} ({self.mod.M}-QAM)"


@dataclass(frozen=True)
class MaxOutage:
    epsilon: float
    theta: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError("outage constraint must lie in (0, 1)")
        if not self.theta > 0:
            raise InvalidParameterError("SIR threshold must be positive")

    def evaluate(self, net: NetworkModel, gp: GammaParams, spec=None) -> metrics.MetricResult:
        return metrics.outage(net, gp, self.theta, spec)

    def evaluate_scheme(self, net: NetworkModel, scheme: MimoScheme, spec=None) -> metrics.MetricResult:
        return self.evaluate(net, scheme.gamma_params(), spec)

    def describe(self) -> str:
        return f"outage <= {self.epsilon:g} at theta = {10 * math.log10(self.theta):.2f} dB"


Constraint = Union[MaxAsep, MaxOutage]


@dataclass(frozen=True)
class DesignQuery:
    constraint: Constraint
    required_streams: int
    net: NetworkModel
    candidate_schemes: Tuple[str, ...] = tuple(SCHEMES)
    antenna_budget: Optional[Dict[str, int]] = None

    def __post_init__(self):
        if int(self.required_streams) != self.required_streams or self.required_streams < 1:
            raise InvalidParameterError("required_streams must be a positive integer")
        unknown = [t for t in self.candidate_schemes if t not in SCHEMES]
        if unknown:
            raise InvalidParameterError(f"unknown scheme tags: {', '.join(unknown)}")
        for key in (self.antenna_budget or {}):
            if key not in ("Nt", "Nr"):
                raise InvalidParameterError(f"antenna budget keys are Nt and Nr, got {key!r}")


@dataclass
class DesignCandidate:
    tag: str
    m_o: int
    m_i: int
    antennas: Dict[str, int]
    metric_value: float
    cell_rate_bits: float
    exactness: Exactness
    diagnostics: List[str] = field(default_factory=list)

    @property
    def nt(self) -> int:
        return self.antennas.get("Nt", 1)

    @property
    def nr(self) -> int:
        return self.antennas.get("Nr", 1)

    @property
    def total_antennas(self) -> int:
        return self.nt + self.nr

    def rank_key(self):
        return (self.total_antennas, -self.cell_rate_bits, self.exactness is not Exactness.EXACT)


@dataclass
class DesignAnswer:
    query: DesignQuery
    m_o: int
    candidates: List[DesignCandidate]
    rejected: Dict[str, str] = field(default_factory=dict)

    def tags(self) -> List[str]:
        return [c.tag for c in self.candidates]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def min_diversity(net: NetworkModel, m_i: int, constraint: Constraint,
                  max_m_o: int = MAX_DIVERSITY, spec: Optional[QuadratureSpec] = None) -> int:
    """Smallest m_o meeting ``constraint`` at m_i; both metrics decrease in m_o."""
    for m_o in range(1, max_m_o + 1):
        res = constraint.evaluate(net, GammaParams(m_o, m_i, m_i), spec)
        logger.debug("m_o=%d m_i=%d -> %.6g", m_o, m_i, res.value)
        if res.value <= constraint.epsilon:
            return m_o
    raise InfeasibleDesignError(f"{constraint.describe()} not reachable with m_i={m_i} and m_o <= {max_m_o}")


def realize_scheme(scheme_tag: str, m_o: int, m_i: int) -> Dict[str, int]:
    """Antenna counts giving (m_o, m_i) for the scheme."""
    _tag, counts = realize_counts(scheme_tag, m_o, m_i)
    return counts


def _within_budget(counts: Dict[str, int], budget: Optional[Dict[str, int]]) -> bool:
    if not budget:
        return True
    return all(counts.get(key, 1) <= limit for key, limit in budget.items())


def _realize_at_least(tag: str, m_o_min: int, m_i: int, budget) -> Tuple[int, Dict[str, int]]:
    last_error = None
    for m_o in range(m_o_min, MAX_DIVERSITY + 1):
        try:
            counts = realize_scheme(tag, m_o, m_i)
        except UnrealizableSchemeError as e:
            last_error = e
            if tag in ("siso", "simo", "miso"):
                break
            continue
        if not _within_budget(counts, budget):
            # antenna counts only grow with m_o
            raise UnrealizableSchemeError(f"needs {counts}, over the antenna budget {budget}")
        return m_o, counts
    raise last_error or UnrealizableSchemeError(f"{tag} cannot realize m_o >= {m_o_min}")


def select(query: DesignQuery, spec: Optional[QuadratureSpec] = None) -> DesignAnswer:
    """Rank every candidate scheme able to meet the constraint with the required streams."""
    m_i = query.required_streams
    m_o_min = min_diversity(query.net, m_i, query.constraint, spec=spec)
    logger.info("%s needs m_o >= %d at m_i = %d", query.constraint.describe(), m_o_min, m_i)

    candidates: List[DesignCandidate] = []
    rejected: Dict[str, str] = {}
    for tag in query.candidate_schemes:
        try:
            m_o, counts = _realize_at_least(tag, m_o_min, m_i, query.antenna_budget)
        except UnrealizableSchemeError as e:
            rejected[tag] = str(e)
            continue
        scheme = parse_scheme(tag, **counts)
        gp = scheme.gamma_params()
        check = query.constraint.evaluate_scheme(query.net, scheme, spec)
        if check.failed and math.isnan(check.value):
            rejected[tag] = "metric evaluation failed: " + "; ".join(check.diagnostics)
            logger.error("metric evaluation failed for %s %s", tag, counts)
            continue
        if check.value > query.constraint.epsilon:
            rejected[tag] = f"re-evaluated metric {check.value:.6g} violates the constraint"
            logger.error("closed-loop check failed for %s %s", tag, counts)
            continue
        rate = metrics.ergodic_rate(query.net, gp, per_cell=True, bits=True, spec=spec)
        candidates.append(DesignCandidate(
            tag=tag,
            m_o=m_o,
            m_i=m_i,
            antennas=counts,
            metric_value=check.value,
            cell_rate_bits=rate.value,
            exactness=gp.exactness,
            diagnostics=check.diagnostics + rate.diagnostics,
        ))

    if not candidates:
        raise InfeasibleDesignError("no candidate scheme meets the constraint: " +
                                    "; ".join(f"{t}: {r}" for t, r in rejected.items()))
    candidates.sort(key=DesignCandidate.rank_key)
    return DesignAnswer(query, m_o_min, candidates, rejected)


def render_table(answer: DesignAnswer) -> str:
    """Fixed-column text rendering of a ranked answer."""
    header = f"{'rank':>4}  {'scheme':<7} {'m_o':>4} {'m_i':>4} {'Nt':>4} {'Nr':>4} {'metric':>12} {'rate/cell':>10}  exactness"
    lines = [query_line(answer.query), header, "-" * len(header)]
    for i, c in enumerate(answer.candidates, start=1):
        lines.append(
            f"{i:>4}  {c.tag:<7} {c.m_o:>4} {c.m_i:>4} {c.nt:>4} {c.nr:>4} "
            f"{c.metric_value:>12.6g} {c.cell_rate_bits:>10.4f}  {c.exactness.value}"
        )
    for tag, reason in answer.rejected.items():
        lines.append(f"      {tag:<7} rejected: {reason}")
    return "\n".join(lines)


def query_line(query: DesignQuery) -> str:
    return f"# {query.constraint.describe()}, streams = {query.required_streams}"


def as_rows(answer: DesignAnswer) -> List[Dict[str, object]]:
    return [
        {
            "rank": i,
            "scheme": c.tag,
            "m_o": c.m_o,
            "m_i": c.m_i,
            "Nt": c.nt,
            "Nr": c.nr,
            "metric": c.metric_value,
            "cell_rate_bits": c.cell_rate_bits,
            "exactness": c.exactness.value,
        }
        for i, c in enumerate(answer.candidates, start=1)
    ]


def candidate_tags(tags: Optional[Sequence[str]]) -> Tuple[str, ...]:
    if not tags:
        return tuple(SCHEMES)
    return tuple(t.strip().lower() for t in tags if t.strip())
