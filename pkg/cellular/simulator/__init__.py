from cellular.simulator.deployment import Deployment, draw_deployment, truncation_radius
from cellular.simulator.detection import InterfererMode, detect_ml, detect_symbol
from cellular.simulator.drivers import (
    SimEstimate,
    SimScenario,
    estimate_metric,
    sinr_sample,
    two_slot_coverage,
)
from cellular.simulator.rng import make_rng
from cellular.simulator.transceivers import ChannelDraw, Transceiver, transceiver_for

__all__ = [
    "ChannelDraw",
    "Deployment",
    "InterfererMode",
    "SimEstimate",
    "SimScenario",
    "Transceiver",
    "detect_ml",
    "detect_symbol",
    "draw_deployment",
    "estimate_metric",
    "make_rng",
    "sinr_sample",
    "transceiver_for",
    "truncation_radius",
    "two_slot_coverage",
]
