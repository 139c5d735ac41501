"""Canonical pretty-printer; `parse(format_mission(m)) == m` for every valid mission."""

from __future__ import annotations

import json

from .model import ActionInstance, Condition, EdgeLabel, Literal, Mission, Node, NodeKind, Point, Rect

INDENT = "  "


def format_number(x: float) -> str:
    return repr(float(x))


def format_literal(value: Literal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return format_number(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, Point):
        return f"point({format_number(value.x)}, {format_number(value.y)}, {format_number(value.z)})"
    if isinstance(value, Rect):
        nums = ", ".join(format_number(v) for v in (value.x0, value.y0, value.x1, value.y1))
        return f"rect({nums})"
    raise TypeError(f"not a literal: {value!r}")


def format_args(params) -> str:
    return ", ".join(f"{k} = {format_literal(v)}" for k, v in params)


def format_action(a: ActionInstance) -> str:
    head = f"{a.result_label}: " if a.result_label else ""
    return f"{head}{a.action_name}({format_args(a.params)})"


def format_condition(c: Condition) -> str:
    text = c.result_ref
    for proc in c.processing_chain:
        extra = f", {format_args(proc.params)}" if proc.params else ""
        text = f"{proc.action_name}({text}{extra})"
    return f"{text} {c.comparator.value} {format_literal(c.reference_value)}"


def _block(header: str, actions, depth: int, trailer: str = "") -> list[str]:
    pad = INDENT * depth
    lines = [f"{pad}{header} {{"]
    lines += [f"{pad}{INDENT}{format_action(a)}" for a in actions]
    lines.append(f"{pad}}}{trailer}")
    return lines


def _step(m: Mission, node: Node, depth: int) -> list[str]:
    pad = INDENT * depth
    head = f"{node.id}: " if node.labeled else ""
    if node.kind is NodeKind.BRANCH:
        targets = {label: target for label, target in
                   ((e.label, e.target) for e in m.edges if e.source == node.id)}
        return [f"{pad}{head}if {format_condition(node.condition)} -> {targets[EdgeLabel.TRUE]}"
                f" else -> {targets[EdgeLabel.FALSE]}"]
    call = f"{head}{node.kind.value}({format_args(node.params)})"
    clauses = []
    if node.filter_ref:
        clauses.append(f"with filter {node.filter_ref}")
    if node.parallel_refs:
        clauses.append("parallel " + ", ".join(node.parallel_refs))
    tail = " ".join(clauses)
    if node.embedded_actions:
        return _block(call, node.embedded_actions, depth, f" {tail}" if tail else "")
    lines = [f"{pad}{call}"]
    if tail:
        lines.append(f"{pad}{' ' * 6}{tail}")
    return lines


def format_mission(m: Mission) -> str:
    lines = [f"mission {json.dumps(m.name, ensure_ascii=False)} {{"]
    for f in m.filters:
        lines += _block(f"filter {f.name}", f.actions, 1)
    for p in m.parallels:
        header = f"parallel {p.name}"
        if p.period_s is not None:
            header += f" every {format_number(p.period_s)}s"
        trailer = ""
        if p.until is not None:
            trailer = f" until {format_condition(p.until.condition)} -> {p.until.target}"
        lines += _block(header, p.actions, 1, trailer)
    lines.append(f"{INDENT}flow {{")
    for node in m.nodes:
        lines += _step(m, node, 2)
    lines.append(f"{INDENT}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"
