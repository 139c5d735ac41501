"""Deterministic tick scheduler executing a mission against a scenario."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..model import ActionInstance, Comparator, Condition, EdgeLabel, Mission, Node, NodeKind
from ..registry import Registry, builtin_catalog
from . import vec
from .filters import apply_filters
from .motion import Kinematics, Progress, routing_motion, start_progress
from .scenario import Scenario, ScenarioError, coerce_output, default_output, value_to_json
from .trace import COMPLETED, Event, EventKind, Outcome, Sample, Trace
from .vec import Vec

ABORT_HOME = "abort.fly_home"
ABORT_LAND = "abort.touchdown"
EPS = 1e-9


class Phase(str, Enum):
    RUNNING = "Running"
    ABORTING = "Aborting"
    DONE = "Done"


class SimulationFault(RuntimeError):
    """Internal contract violation; surfaces as an Error outcome."""


@dataclass(frozen=True)
class SimConfig:
    max_sim_time: float = 3600.0
    kinematics: Kinematics = Kinematics()
    max_transitions_per_tick: int = 1000
    battery_idle_cost: float = 0.5
    battery_motion_cost: float = 0.25


@dataclass
class ActiveParallel:
    activated_at: float
    fired: int = 0


@dataclass
class SimState:
    tick: int
    time_s: float
    position: Vec
    velocity: Vec
    battery_fraction: float
    current_node: str
    phase: Phase = Phase.RUNNING
    active_parallels: dict[str, ActiveParallel] = field(default_factory=dict)
    result_store: dict[str, Any] = field(default_factory=dict)
    invocations: dict[str, int] = field(default_factory=dict)
    progress: Progress | None = None


def compare(left, comparator: Comparator, right) -> bool:
    if comparator is Comparator.EQ:
        return left == right
    if comparator is Comparator.NE:
        return left != right
    if isinstance(left, bool) or not isinstance(left, float):
        raise SimulationFault(f"ordering comparison on non-number {left!r}")
    right = float(right)
    if comparator is Comparator.LT:
        return left < right
    if comparator is Comparator.LE:
        return left <= right
    if comparator is Comparator.GT:
        return left > right
    return left >= right


def compute_output(inst: ActionInstance, reg: Registry, s: Scenario, n: int, position: Vec, input_value=None):
    """Output of the n-th invocation of an action: scripted rule first, then the behaviour hook."""
    d = reg.lookup(inst.action_name)
    if d is None:
        raise SimulationFault(f"unknown action '{inst.action_name}'")
    rule = s.scripted(d.name, n, position)
    if rule is not None:
        try:
            return coerce_output(rule.output, d.output_type, d.name, n, position)
        except ScenarioError as exc:
            raise SimulationFault(str(exc)) from exc
    if d.behavior == "threshold":
        return bool(input_value > d.resolved_params(inst)["limit"])
    return default_output(d.output_type, d.name, n, position)


def evaluate_condition(c: Condition, store: dict, reg: Registry, s: Scenario,
                       invoke: Callable[[ActionInstance, Any], Any] | None = None) -> bool:
    """Fold the processing chain over the stored result and compare with the reference value."""
    if c.result_ref not in store:
        raise SimulationFault(f"result '{c.result_ref}' has not been produced")
    if invoke is None:
        counts: dict[str, int] = {}

        def invoke(inst, value):
            counts[inst.action_name] = counts.get(inst.action_name, 0) + 1
            return compute_output(inst, reg, s, counts[inst.action_name], vec.ZERO, value)

    value = store[c.result_ref]
    for proc in c.processing_chain:
        value = invoke(proc, value)
    return compare(value, c.comparator, c.reference_value)


class Simulator:
    def __init__(self, mission: Mission, scenario: Scenario, registry: Registry | None = None,
                 config: SimConfig | None = None):
        self.m = mission
        self.s = scenario
        self.reg = registry if registry is not None else builtin_catalog()
        self.config = config or SimConfig()
        self.kin = self.config.kinematics
        self.trace = Trace()
        self._seq = 0
        self._desired: Vec = vec.ZERO
        self._abort_nodes: dict[str, Node] = {}
        self._abort_reason: str | None = None
        self.state = SimState(0, 0.0, scenario.home, vec.ZERO, 1.0, mission.takeoff.id)
        self._enter(mission.takeoff.id, 0.0)

    # bookkeeping

    def _time(self, tick: int) -> float:
        return round(tick * self.s.tick_s, 9)

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _event(self, t: float, event: EventKind, **payload) -> None:
        self.trace.events.append(Event(self._next_seq(), t, event, payload))

    def _node(self, node_id: str) -> Node:
        if node_id in self._abort_nodes:
            return self._abort_nodes[node_id]
        return self.m.node(node_id)

    def _finish(self, outcome: Outcome) -> None:
        self.trace.outcome = outcome
        self.state.phase = Phase.DONE

    # node transitions

    def _enter(self, node_id: str, t: float) -> None:
        st = self.state
        node = self._node(node_id)
        st.current_node = node_id
        st.progress = start_progress(node, t, st.position, self.s.home) if node.kind.is_routing else None
        self._event(t, EventKind.NODE_ENTERED, node=node_id, kind=node.kind.value)
        if st.phase is Phase.RUNNING:
            for name in node.parallel_refs:
                st.active_parallels[name] = ActiveParallel(t)
                self._event(t, EventKind.PARALLEL_ENTERED, parallel=name, node=node_id)

    def _leave(self, t: float, preempted_by: str | None = None) -> None:
        st = self.state
        for name in list(st.active_parallels):
            self._event(t, EventKind.PARALLEL_EXITED, parallel=name, node=st.current_node)
        st.active_parallels.clear()
        node = self._node(st.current_node)
        payload: dict[str, Any] = {"node": node.id, "kind": node.kind.value}
        if preempted_by is not None:
            payload["preempted_by"] = preempted_by
        self._event(t, EventKind.NODE_COMPLETED, **payload)

    def _edge(self, node_id: str, label: EdgeLabel) -> str:
        for e in self.m.edges:
            if e.source == node_id and e.label is label:
                return e.target
        raise SimulationFault(f"node '{node_id}' has no {label.value} edge")

    # actions and conditions

    def _invoke(self, inst: ActionInstance, owner: str, t: float, input_value=None):
        st = self.state
        n = st.invocations.get(inst.action_name, 0) + 1
        st.invocations[inst.action_name] = n
        value = compute_output(inst, self.reg, self.s, n, st.position, input_value)
        self._event(t, EventKind.ACTION_FIRED, action=inst.action_name, n=n, label=inst.result_label,
                    source=owner, value=value_to_json(value))
        if inst.result_label:
            st.result_store[inst.result_label] = value
        return value

    def _evaluate(self, c: Condition, owner: str, t: float) -> bool:
        return evaluate_condition(c, self.state.result_store, self.reg, self.s,
                                  lambda inst, value: self._invoke(inst, owner, t, value))

    def _fire_parallels(self, t: float) -> tuple[str, str] | None:
        """Fire due parallel actions; returns (parallel, target) when an until condition holds."""
        st = self.state
        for name in list(st.active_parallels):
            ap = st.active_parallels[name]
            decl = self.m.parallel(name)
            while ap.fired == 0 or (decl.period_s is not None
                                    and ap.activated_at + ap.fired * decl.period_s <= t + EPS):
                ap.fired += 1
                for a in decl.actions:
                    self._invoke(a, name, t)
                if decl.until is not None:
                    result = self._evaluate(decl.until.condition, name, t)
                    target = decl.until.target if result else None
                    self._event(t, EventKind.BRANCH_TAKEN, parallel=name, node=st.current_node,
                                result=result, target=target)
                    if result:
                        return name, decl.until.target
        return None

    def _complete(self, node: Node, t: float) -> None:
        for a in node.embedded_actions:
            self._invoke(a, node.id, t)
        self._leave(t)
        if node.kind is NodeKind.TOUCHDOWN:
            if self.state.phase is Phase.ABORTING:
                self._finish(Outcome("Aborted", self._abort_reason))
            else:
                self._finish(COMPLETED)
        elif node.id == ABORT_HOME:
            self._enter(ABORT_LAND, t)
        else:
            self._enter(self._edge(node.id, EdgeLabel.NEXT), t)

    def _settle(self, t: float) -> None:
        """Run every zero-duration transition due at instant t."""
        st = self.state
        settled: set[str] = set()
        for _ in range(self.config.max_transitions_per_tick):
            if st.phase is Phase.DONE:
                return
            node = self._node(st.current_node)
            if node.id in settled:
                # Zero-time cycle: hold position and resume next tick.
                self._desired = vec.ZERO
                return
            if node.kind is NodeKind.BRANCH:
                settled.add(node.id)
                result = self._evaluate(node.condition, node.id, t)
                target = self._edge(node.id, EdgeLabel.TRUE if result else EdgeLabel.FALSE)
                self._event(t, EventKind.BRANCH_TAKEN, node=node.id, result=result, target=target)
                self._leave(t)
                self._enter(target, t)
                continue
            if st.phase is Phase.RUNNING:
                jump = self._fire_parallels(t)
                if jump is not None:
                    self._leave(t, preempted_by=jump[0])
                    self._enter(jump[1], t)
                    continue
            desired, done = routing_motion(node, st.progress, st.position, t, self.kin, self.s.tick_s)
            if not done:
                self._desired = desired
                return
            settled.add(node.id)
            self._complete(node, t)
        raise SimulationFault(f"more than {self.config.max_transitions_per_tick} transitions at t={t}")

    def _abort(self, t: float, reason: str) -> None:
        st = self.state
        node = self._node(st.current_node)
        self._event(t, EventKind.ABORT_TRIGGERED, reason=reason, node=node.id,
                    battery=st.battery_fraction)
        self._leave(t, preempted_by="abort")
        st.phase = Phase.ABORTING
        self._abort_reason = reason
        self._abort_nodes = {
            ABORT_HOME: Node(ABORT_HOME, NodeKind.FLY_HOME, filter_ref=node.filter_ref),
            ABORT_LAND: Node(ABORT_LAND, NodeKind.TOUCHDOWN, filter_ref=node.filter_ref),
        }
        self._enter(ABORT_HOME, t)

    # public API

    def step(self) -> SimState:
        """Advance one tick."""
        st = self.state
        if st.phase is Phase.DONE:
            return st
        t = self._time(st.tick)
        self._settle(t)
        if st.phase is Phase.DONE:
            return st
        if t >= self.config.max_sim_time - EPS:
            self._finish(Outcome("Aborted", "timeout"))
            return st
        node = self._node(st.current_node)
        v = self._desired
        if node.filter_ref is not None:
            clamps: list = []
            v = apply_filters(self.m.filter(node.filter_ref), v, st.position, self.s, self.reg, clamps)
            for action, before, after in clamps:
                self._event(t, EventKind.FILTER_CLAMPED, filter=node.filter_ref, action=action,
                            node=node.id, before=before, after=after)
        v = vec.clamp_norm(v, self.kin.v_max)
        speed = vec.norm(v)
        st.velocity = v
        st.position = vec.add(st.position, vec.scale(v, self.s.tick_s))
        drain = (self.config.battery_idle_cost + self.config.battery_motion_cost * speed) / self.s.battery_capacity_s
        st.battery_fraction = max(0.0, st.battery_fraction - drain * self.s.tick_s)
        st.tick += 1
        st.time_s = self._time(st.tick)
        self.trace.samples.append(Sample(self._next_seq(), st.time_s, st.position, speed,
                                         st.battery_fraction, st.current_node))
        if st.phase is Phase.RUNNING and st.battery_fraction <= self.s.battery_reserve_fraction:
            self._abort(st.time_s, "battery")
        return st

    def run(self) -> Trace:
        try:
            while self.state.phase is not Phase.DONE:
                self.step()
        except (SimulationFault, KeyError, TypeError) as exc:
            self._finish(Outcome("Error", str(exc)))
        return self.trace


def check_script(scenario: Scenario, reg: Registry) -> list[str]:
    """Scripted rules that name unknown actions or produce ill-typed outputs."""
    problems = []
    for rule in scenario.script:
        d = reg.lookup(rule.action)
        if d is None:
            problems.append(f"script rule names unknown action '{rule.action}'")
            continue
        try:
            coerce_output(rule.output, d.output_type, d.name, rule.nth or 1, vec.ZERO)
        except ScenarioError as exc:
            problems.append(str(exc))
    return problems


def run(mission: Mission, scenario: Scenario, registry: Registry | None = None,
        config: SimConfig | None = None) -> Trace:
    reg = registry if registry is not None else builtin_catalog()
    problems = check_script(scenario, reg)
    if problems:
        trace = Trace()
        trace.outcome = Outcome("Error", problems[0])
        return trace
    return Simulator(mission, scenario, reg, config).run()
