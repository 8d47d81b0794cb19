"""
Scenario files for the batch front end.

A scenario is a line-oriented text file of ``section.key = value`` pairs.
Quantities carry their unit in the file (``lambda_b = 10 /km2``,
``power = 30 dBm``, ``theta = -10:2:20 dB``) and are converted to linear
SI values once, here. Unknown keys are errors.

Example::

    network.lambda_b = 10 /km2
    network.n0 = -90 dBm
    scheme.use = zfrx Nt=2 Nr=5
    modulation.M = 4
    metric.compute = asep, outage
    metric.theta = -10:5:20 dB
    metric.snr = 0:10:40 dB
    sim.n_trials = 10000
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from cellular.exceptions import ConfigError, InvalidParameterError, InvariantViolationError
from cellular.services.interference import PER_KM2, NetworkModel, dbm_to_watts
from cellular.services.metrics import COMPARE_MODES, AsepMethod
from cellular.services.schemes import MimoScheme, Modulation, parse_scheme, qam
from cellular.simulator.detection import InterfererMode
from cellular.simulator.drivers import MIN_TRIALS

logger = logging.getLogger(__name__)

PROVENANCE_MARK = "# sg-mimo scenario"
METRIC_NAMES = ("asep", "throughput", "outage", "coverage", "rate", "coverage_retx")
MAX_GRID_POINTS = 10_000


@dataclass(frozen=True)
class SchemeEntry:
    label: str
    scheme: MimoScheme


@dataclass(frozen=True)
class Grid:
    """A sweep axis as written (dB or linear) and its linear values."""

    written: Tuple[float, ...]
    linear: Tuple[float, ...]
    unit: str

    def __len__(self):
        return len(self.linear)

    def points(self):
        return zip(self.written, self.linear)


@dataclass(frozen=True)
class ScenarioConfig:
    net: NetworkModel
    schemes: Tuple[SchemeEntry, ...]
    metrics: Tuple[str, ...]
    mods: Tuple[Modulation, ...] = ()
    theta: Optional[Grid] = None
    snr: Optional[Grid] = None
    asep_method: AsepMethod = AsepMethod.AUTO
    rate_bits: bool = False
    rate_per_cell: bool = False
    retx_slot2: Optional[SchemeEntry] = None
    retx_compare: Tuple[str, ...] = ("correlated",)
    n_trials: int = 0
    seed: int = 1
    interferer_mode: InterfererMode = InterfererMode.GAUSSIAN
    dump_dir: Optional[str] = None
    output_dir: str = "."
    precision: int = 9
    lines: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def simulate(self) -> bool:
        return self.n_trials > 0


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _split_unit(text: str) -> Tuple[str, str]:
    parts = text.rsplit(None, 1)
    if len(parts) == 2 and not _is_number(parts[1]):
        return parts[0].strip(), parts[1]
    return text.strip(), ""


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}")
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return value


def _integer(text: str) -> int:
    value = _number(text)
    if int(value) != value:
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _quantity(text: str, units: Dict[str, Callable[[float], float]]) -> float:
    number, unit = _split_unit(text)
    if unit not in units:
        raise ConfigError(f"{text!r} needs one of the units {', '.join(u for u in units if u) or '(none)'}")
    return units[unit](_number(number))


def _grid_values(text: str) -> List[float]:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range must be start:step:stop, got {text!r}")
        start, step, stop = (_number(p) for p in parts)
        if step == 0 or (stop - start) / step < 0:
            raise ConfigError(f"range {text!r} is empty")
        count = int(round((stop - start) / step)) + 1
        if count > MAX_GRID_POINTS:
            raise ConfigError(f"range {text!r} has more than {MAX_GRID_POINTS} points")
        return [round(start + i * step, 12) for i in range(count)]
    values = [_number(v.strip()) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty grid")
    return values


def _grid(text: str) -> Grid:
    body, unit = _split_unit(text)
    written = _grid_values(body)
    if unit == "dB":
        linear = [10.0 ** (v / 10.0) for v in written]
    elif unit == "lin":
        linear = written
        if any(v <= 0 for v in linear):
            raise ConfigError("linear grid values must be positive")
    else:
        raise ConfigError(f"grid {text!r} needs a unit: dB or lin")
    return Grid(tuple(written), tuple(linear), unit)


def _names(text: str, allowed) -> Tuple[str, ...]:
    names = tuple(n.strip().lower() for n in text.split(",") if n.strip())
    unknown = [n for n in names if n not in allowed]
    if unknown:
        raise ConfigError(f"unknown value(s) {', '.join(unknown)}; expected {', '.join(allowed)}")
    return names


def _choice(text: str, allowed) -> str:
    value = text.strip().lower()
    if value not in allowed:
        raise ConfigError(f"expected one of {', '.join(allowed)}, got {text!r}")
    return value


def _scheme(text: str) -> SchemeEntry:
    """``zfrx Nt=2 Nr=5`` -> scheme entry labelled ``zfrx(Nt=2,Nr=5)``."""
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty scheme")
    counts = {}
    for token in tokens[1:]:
        name, sep, value = token.partition("=")
        if not sep:
            raise ConfigError(f"antenna field must look like Nr=3, got {token!r}")
        counts[name] = _integer(value)
    try:
        scheme = parse_scheme(tokens[0], **counts)
    except (InvalidParameterError, InvariantViolationError, TypeError) as e:
        raise ConfigError(str(e))
    fields = ",".join(f"{k}={v}" for k, v in scheme.antennas().items())
    return SchemeEntry(f"{scheme.tag}({fields})" if fields else scheme.tag, scheme)


def _modulations(text: str) -> Tuple[Modulation, ...]:
    try:
        return tuple(qam(_integer(v.strip())) for v in text.split(",") if v.strip())
    except InvalidParameterError as e:
        raise ConfigError(str(e))


_LAMBDA_UNITS = {"/km2": lambda v: v * PER_KM2, "/m2": lambda v: v}
_POWER_UNITS = {"dBm": dbm_to_watts, "W": lambda v: v}

# key -> (field, parser); repeatable keys append
KEYS: Dict[str, Tuple[str, Callable]] = {
    "network.lambda_b": ("lambda_b", lambda t: _quantity(t, _LAMBDA_UNITS)),
    "network.p": ("p", _number),
    "network.eta": ("eta", _number),
    "network.power": ("power", lambda t: _quantity(t, _POWER_UNITS)),
    "network.n0": ("n0", lambda t: 0.0 if t.strip().lower() == "none" else _quantity(t, _POWER_UNITS)),
    "scheme.use": ("schemes", _scheme),
    "modulation.M": ("mods", _modulations),
    "metric.compute": ("metrics", lambda t: _names(t, METRIC_NAMES)),
    "metric.theta": ("theta", _grid),
    "metric.snr": ("snr", _grid),
    "metric.asep_method": ("asep_method", lambda t: AsepMethod(_choice(t, [m.value for m in AsepMethod]))),
    "metric.rate_unit": ("rate_bits", lambda t: _choice(t, ("nats", "bits")) == "bits"),
    "metric.rate_per": ("rate_per_cell", lambda t: _choice(t, ("stream", "cell")) == "cell"),
    "metric.retx_slot2": ("retx_slot2", _scheme),
    "metric.retx_compare": ("retx_compare", lambda t: _names(t, COMPARE_MODES)),
    "sim.n_trials": ("n_trials", _integer),
    "sim.seed": ("seed", _integer),
    "sim.interferer_mode": ("interferer_mode", lambda t: InterfererMode(_choice(t, [m.value for m in InterfererMode]))),
    "sim.dump": ("dump_dir", str.strip),
    "output.dir": ("output_dir", str.strip),
    "output.precision": ("precision", _integer),
}
REPEATABLE = {"scheme.use"}
NETWORK_DEFAULTS = {"lambda_b": 10 * PER_KM2, "p": 1.0, "eta": 4.0, "power": 1.0, "n0": dbm_to_watts(-90.0)}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _strip_comment(line: str) -> str:
    if line.lstrip().startswith("#"):
        return ""
    pos = line.find(" #")
    return line[:pos] if pos >= 0 else line


def parse_text(text: str) -> ScenarioConfig:
    values: Dict[str, object] = {}
    lines: List[str] = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", line_no)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", line_no)
        if key in seen and key not in REPEATABLE:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        seen.add(key)
        name, parser = KEYS[key]
        try:
            parsed = parser(value)
        except ConfigError as e:
            raise ConfigError(str(e), line_no) from e
        if key in REPEATABLE:
            values.setdefault(name, []).append(parsed)
        else:
            values[name] = parsed
        lines.append(f"{key} = {value}")
    return _build(values, tuple(lines))


def _build(values: Dict[str, object], lines: Tuple[str, ...]) -> ScenarioConfig:
    net_fields = {k: values.pop(k, default) for k, default in NETWORK_DEFAULTS.items()}
    try:
        net = NetworkModel(**net_fields)
    except InvalidParameterError as e:
        raise ConfigError(str(e))
    values["schemes"] = tuple(values.get("schemes", ()))
    values.setdefault("metrics", ())
    cfg = ScenarioConfig(net=net, lines=lines, **values)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig):
    """Cross-key checks; raises ConfigError."""
    if not cfg.metrics:
        raise ConfigError("metric.compute lists no metrics")
    if not cfg.schemes:
        raise ConfigError("no scheme.use line")
    needs = set(cfg.metrics)
    if needs & {"asep", "throughput"} and not cfg.mods:
        raise ConfigError("asep and throughput need modulation.M")
    if needs & {"outage", "coverage", "coverage_retx"} and cfg.theta is None:
        raise ConfigError("outage and coverage metrics need metric.theta")
    if cfg.snr is not None and cfg.net.n0 <= 0:
        raise ConfigError("metric.snr sweeps the transmit power against network.n0, which is zero")
    if cfg.simulate and cfg.n_trials < MIN_TRIALS:
        raise ConfigError(f"sim.n_trials must be 0 or at least {MIN_TRIALS}")
    if cfg.n_trials < 0 or cfg.seed < 0:
        raise ConfigError("sim.n_trials and sim.seed must be non-negative")
    if not 1 <= cfg.precision <= 17:
        raise ConfigError("output.precision must lie in [1, 17]")


def load(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")
    cfg = parse_text(text)
    logger.info("loaded %s: %d scheme(s), metrics %s", path, len(cfg.schemes), ", ".join(cfg.metrics))
    return cfg


# ---------------------------------------------------------------------------
# Provenance
# ---------------------------------------------------------------------------

def provenance_header(cfg: ScenarioConfig) -> str:
    return "\n".join([PROVENANCE_MARK] + [f"# {line}" for line in cfg.lines]) + "\n"


def parse_provenance(text: str) -> ScenarioConfig:
    """Rebuild the scenario from the header of an emitted CSV."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != PROVENANCE_MARK:
        raise ConfigError("no provenance header")
    body = []
    for line in lines[1:]:
        if not line.startswith("# "):
            break
        body.append(line[2:])
    return parse_text("\n".join(body))


def with_output_dir(cfg: ScenarioConfig, output_dir: str) -> ScenarioConfig:
    lines = tuple(line for line in cfg.lines if not line.startswith("output.dir ")) + (f"output.dir = {output_dir}",)
    return replace(cfg, output_dir=output_dir, lines=lines)


def network_at_snr(net: NetworkModel, snr: float) -> NetworkModel:
    """Transmit power giving P / N0 = snr at fixed noise."""
    return net.with_(power=net.n0 * snr)
