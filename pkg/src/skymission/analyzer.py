"""Whole-mission semantic checks: structure (S), references (R) and types (T)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic, sort_diagnostics
from .model import (
    ActionInstance,
    Condition,
    Mission,
    NodeKind,
    can_reach_touchdown,
    reachable,
    visible_results,
)
from .registry import (
    LITERAL_VALUE_TYPES,
    ROUTING_SCHEMAS,
    Category,
    Registry,
    ValueType,
    literal_kind,
    validate_instance,
    validate_params,
)


@dataclass
class AnalysisReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    resolved_types: dict[str, ValueType] = field(default_factory=dict)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if not d.is_error]

    @property
    def ok(self) -> bool:
        return not self.errors


def result_types(actions: list[ActionInstance], reg: Registry) -> dict[str, ValueType]:
    out = {}
    for a in actions:
        d = reg.lookup(a.action_name)
        if a.result_label and d is not None:
            out[a.result_label] = d.output_type
    return out


def visible_types(m: Mission, at: str, reg: Registry) -> dict[str, ValueType]:
    return result_types(visible_results(m, at), reg)


def condition_type(c: Condition, reg: Registry, scope: dict[str, ValueType]) -> ValueType | Diagnostic:
    """Fold the processing chain from the referenced result outwards."""
    if c.result_ref not in scope:
        return Diagnostic.at("R002", f"result '{c.result_ref}' is not in scope here", c.span)
    current = scope[c.result_ref]
    for position, proc in enumerate(c.processing_chain, start=1):
        d = reg.lookup(proc.action_name)
        if d is None:
            return Diagnostic.at("R001", f"unknown processing action '{proc.action_name}'", proc.span)
        if d.category is not Category.PROCESSING:
            return Diagnostic.at(
                "R006", f"'{proc.action_name}' is a {d.category.value} action, not a processing action", proc.span)
        if d.input_type is not current:
            return Diagnostic.at(
                "T001",
                f"'{proc.action_name}' at chain position {position} expects {d.input_type.value}, "
                f"got {current.value}",
                proc.span,
            )
        current = d.output_type
    return current


class _Checker:
    def __init__(self, m: Mission, reg: Registry):
        self.m = m
        self.reg = reg
        self.diags: list[Diagnostic] = []

    def emit(self, code, message, span):
        self.diags.append(Diagnostic.at(code, message, span))

    def check_action(self, a: ActionInstance, category: Category, where: str):
        d = self.reg.lookup(a.action_name)
        if d is None:
            self.emit("R001", f"unknown action '{a.action_name}' in {where}", a.span)
            return
        if d.category is not category:
            self.emit("R006", f"'{a.action_name}' is a {d.category.value} action; {where} needs "
                              f"{category.value} actions", a.span)
            return
        self.diags.extend(validate_instance(a, d))

    def check_condition(self, c: Condition, scope: dict[str, ValueType]):
        for proc in c.processing_chain:
            d = self.reg.lookup(proc.action_name)
            if d is not None and d.category is Category.PROCESSING:
                self.diags.extend(validate_instance(proc, d))
        result = condition_type(c, self.reg, scope)
        if isinstance(result, Diagnostic):
            self.diags.append(result)
            return
        if c.comparator.is_ordering and result is not ValueType.NUMBER:
            self.emit("T003", f"'{c.comparator.value}' needs a Number, the condition yields {result.value}", c.span)
            return
        ref_type = LITERAL_VALUE_TYPES.get(literal_kind(c.reference_value))
        if ref_type is not result:
            shown = ref_type.value if ref_type else literal_kind(c.reference_value).value
            self.emit("T002", f"cannot compare {result.value} with a {shown} value", c.span)

    def run(self) -> None:
        m = self.m
        live = reachable(m)
        exits = can_reach_touchdown(m)
        for n in m.nodes:
            if n.id not in live:
                self.emit("S001", f"'{n.id}' is unreachable from takeoff", n.span)
            elif n.id not in exits:
                self.emit("S002", f"touchdown cannot be reached from '{n.id}'", n.span)

        for f in m.filters:
            for a in f.actions:
                self.check_action(a, Category.FILTER, f"filter '{f.name}'")
        for p in m.parallels:
            for a in p.actions:
                self.check_action(a, Category.REGULAR, f"parallel '{p.name}'")
            if p.until is not None:
                target = m.node(p.until.target)
                if not target.kind.is_routing:
                    self.emit("R005", f"until target '{target.id}' is a branch, not a routing element", p.span)
                self.check_condition(p.until.condition, result_types(list(p.actions), self.reg))

        attached_filters: set[str] = set()
        attached_parallels: set[str] = set()
        for n in m.nodes:
            if n.kind is NodeKind.BRANCH:
                self.check_condition(n.condition, visible_types(m, n.id, self.reg))
                continue
            self.diags.extend(validate_params(n.params, ROUTING_SCHEMAS[n.kind], f"{n.kind.value}()", n.span))
            for a in n.embedded_actions:
                self.check_action(a, Category.REGULAR, f"'{n.id}'")
            if n.filter_ref is not None:
                attached_filters.add(n.filter_ref)
                if m.filter(n.filter_ref) is None:
                    self.emit("R003", f"unknown filter '{n.filter_ref}'", n.span)
            for name in n.parallel_refs:
                attached_parallels.add(name)
                if m.parallel(name) is None:
                    self.emit("R004", f"unknown parallel block '{name}'", n.span)

        for f in m.filters:
            if f.name not in attached_filters:
                self.emit("W001", f"filter '{f.name}' is never attached", f.span)
        for p in m.parallels:
            if p.name not in attached_parallels:
                self.emit("W001", f"parallel '{p.name}' is never attached", p.span)


def analyze(m: Mission, reg: Registry) -> AnalysisReport:
    checker = _Checker(m, reg)
    checker.run()
    return AnalysisReport(sort_diagnostics(checker.diags), result_types(m.all_actions(), reg))
