"""Deterministic discrete-time mission simulator."""

from .engine import (
    Phase,
    SimConfig,
    SimState,
    Simulator,
    SimulationFault,
    compare,
    evaluate_condition,
    run,
)
from .filters import apply_filters
from .motion import Kinematics, Progress, routing_motion, start_progress, sweep_length, sweep_waypoints
from .scenario import Obstacle, Opaque, Scenario, ScenarioError, ScriptRule, load_scenario, scenario_from_dict
from .trace import Event, EventKind, Outcome, Sample, Trace, event_sequence

__all__ = [
    "Event", "EventKind", "Kinematics", "Obstacle", "Opaque", "Outcome", "Phase", "Progress", "Sample",
    "Scenario", "ScenarioError", "ScriptRule", "SimConfig", "SimState", "SimulationFault", "Simulator",
    "Trace", "apply_filters", "compare", "evaluate_condition", "event_sequence", "load_scenario",
    "routing_motion", "run", "scenario_from_dict", "start_progress", "sweep_length", "sweep_waypoints",
]
