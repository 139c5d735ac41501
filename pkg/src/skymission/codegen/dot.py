"""Graphviz DOT rendering of a mission graph."""

from __future__ import annotations

from ..formatter import format_action, format_args, format_condition, format_number
from ..model import EdgeLabel, Mission, NodeKind


def quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def _node_label(node) -> str:
    if node.kind is NodeKind.BRANCH:
        return format_condition(node.condition)
    text = f"{node.id}\n{node.kind.value}({format_args(node.params)})" if node.labeled \
        else f"{node.kind.value}({format_args(node.params)})"
    for a in node.embedded_actions:
        text += "\n+ " + format_action(a)
    return text


def gen_dot(m: Mission) -> str:
    """Branches are diamonds with green/red outcome edges; until links are dashed."""
    out = [f"digraph {quote(m.name)} {{", "  rankdir=TB;", "  node [shape=box, style=rounded];"]
    for node in m.nodes:
        if node.kind is NodeKind.BRANCH:
            out.append(f"  {quote(node.id)} [shape=diamond, style=solid, label={quote(_node_label(node))}];")
        else:
            out.append(f"  {quote(node.id)} [label={quote(_node_label(node))}];")
    for f in m.filters:
        body = "\n".join(f"{i}. {format_action(a)}" for i, a in enumerate(f.actions, start=1))
        out.append(f"  {quote('filter:' + f.name)} [shape=note, style=solid, label={quote(f'filter {f.name}' + chr(10) + body)}];")
    for p in m.parallels:
        head = f"parallel {p.name}"
        if p.period_s is not None:
            head += f" every {format_number(p.period_s)}s"
        body = "\n".join(format_action(a) for a in p.actions)
        out.append(f"  {quote('parallel:' + p.name)} [shape=component, style=solid, label={quote(head + chr(10) + body)}];")

    for e in m.edges:
        if e.label is EdgeLabel.TRUE:
            attrs = ' [color=green, label="true"]'
        elif e.label is EdgeLabel.FALSE:
            attrs = ' [color=red, label="false"]'
        else:
            attrs = ""
        out.append(f"  {quote(e.source)} -> {quote(e.target)}{attrs};")
    for node in m.nodes:
        if node.filter_ref and m.filter(node.filter_ref) is not None:
            out.append(f"  {quote('filter:' + node.filter_ref)} -> {quote(node.id)} [style=dotted, arrowhead=none];")
        for name in node.parallel_refs:
            if m.parallel(name) is not None:
                out.append(f"  {quote(node.id)} -> {quote('parallel:' + name)} [style=dotted, arrowhead=none];")
    for p in m.parallels:
        if p.until is not None:
            label = "until " + format_condition(p.until.condition)
            out.append(f"  {quote('parallel:' + p.name)} -> {quote(p.until.target)} [style=dashed, label={quote(label)}];")
    out.append("}")
    return "\n".join(out) + "\n"
