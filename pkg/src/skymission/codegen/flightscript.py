"""Neutral line-based flight script: emission, decoding and invariant checks.

Layout::

    MISSION "name"
    FILTER <name> / ACT ... / ENDFILTER        filter declarations
    PAR <name> <period|-> / ACT ... / [UNTIL <cond> <label>] / ENDPAR
    COND <id> <result> [<processing>...] <cmp> <literal>
    body: [LABEL L] [ATTACH FILTER f] [ATTACH PAR p]... <motion> [ACT ...]...
          motion = TAKEOFF alt | GOTO x y z | SWEEP x0 y0 x1 y1 spacing | HOME | HOVER dur | TOUCHDOWN
          BR <cond> <Ltrue> <Lfalse>;  JMP L  redirects the previous step's fall-through
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..model import (
    ActionInstance,
    Comparator,
    Condition,
    Edge,
    EdgeLabel,
    FilterDecl,
    Literal,
    Mission,
    MissionError,
    Node,
    NodeKind,
    ParallelDecl,
    Point,
    Rect,
    Until,
    build_mission,
)


class FlightScriptError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no


@dataclass
class FlightScript:
    lines: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def body(self) -> list[str]:
        """Executable commands, without header declarations and comments."""
        out = []
        depth = 0
        for line in self.lines:
            if not line or line.startswith("#"):
                continue
            op = line.split()[0]
            if op in ("FILTER", "PAR") and len(line.split()) >= 2:
                depth += 1
                continue
            if op in ("ENDFILTER", "ENDPAR"):
                depth -= 1
                continue
            if depth or op in ("MISSION", "COND"):
                continue
            out.append(line)
        return out


# literal encoding: no spaces outside quoted strings

def _num(x: float) -> str:
    return repr(float(x))


def encode_literal(v: Literal) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return _num(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Point):
        return f"point({_num(v.x)},{_num(v.y)},{_num(v.z)})"
    if isinstance(v, Rect):
        return f"rect({_num(v.x0)},{_num(v.y0)},{_num(v.x1)},{_num(v.y1)})"
    raise TypeError(f"not a literal: {v!r}")


_STRING = r'"(?:[^"\\]|\\.)*"'
_TOKEN = re.compile(rf'(?:[^\s"]|{_STRING})+')
_PARAM = re.compile(rf'([A-Za-z_][A-Za-z0-9_]*)=({_STRING}|(?:point|rect)\([^)]*\)|[^,()]+)')


def decode_literal(text: str) -> Literal:
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"'):
        return json.loads(text)
    m = re.fullmatch(r"(point|rect)\(([^)]*)\)", text)
    if m:
        nums = [float(x) for x in m.group(2).split(",")]
        if m.group(1) == "point" and len(nums) == 3:
            return Point(*nums)
        if m.group(1) == "rect" and len(nums) == 4:
            return Rect(*nums)
        raise ValueError(text)
    return float(text)


def tokens(line: str) -> list[str]:
    return _TOKEN.findall(line)


def _encode_action(a: ActionInstance) -> str:
    head = f"{a.result_label}:{a.action_name}" if a.result_label else a.action_name
    return " ".join([f"ACT {head}"] + [f"{k}={encode_literal(v)}" for k, v in a.params])


def _encode_processing(a: ActionInstance) -> str:
    if not a.params:
        return a.action_name
    return f"{a.action_name}(" + ",".join(f"{k}={encode_literal(v)}" for k, v in a.params) + ")"


def _encode_condition(cid: str, c: Condition) -> str:
    parts = ["COND", cid, c.result_ref]
    parts += [_encode_processing(p) for p in c.processing_chain]
    parts += [c.comparator.name, encode_literal(c.reference_value)]
    return " ".join(parts)


def auto_id(kind: NodeKind, index: int) -> str:
    return f"{kind.value}#{index}"


def _motion(node: Node) -> str:
    p = node.param_dict()
    k = node.kind
    if k is NodeKind.TAKEOFF:
        return f"TAKEOFF {_num(p['altitude'])}"
    if k is NodeKind.TOUCHDOWN:
        return "TOUCHDOWN"
    if k is NodeKind.FLY_TO:
        t = p["target"]
        return f"GOTO {_num(t.x)} {_num(t.y)} {_num(t.z)}"
    if k is NodeKind.FLY_IN_AREA:
        a = p["area"]
        return f"SWEEP {_num(a.x0)} {_num(a.y0)} {_num(a.x1)} {_num(a.y1)} {_num(p['spacing'])}"
    if k is NodeKind.FLY_HOME:
        return "HOME"
    if k is NodeKind.HOVER:
        return f"HOVER {_num(p['duration_s'])}"
    raise ValueError(f"no motion command for {k}")


def gen_flightscript(m: Mission, reg=None) -> FlightScript:
    """Translate a validated mission into a flight script (the registry is accepted for API symmetry)."""
    lines = [f"# flight script for mission {json.dumps(m.name)}",
             f"MISSION {json.dumps(m.name)}"]
    cond_ids: dict[str, str] = {}
    conds: list[str] = []
    for owner, c in m.conditions():
        cid = f"c{len(conds) + 1}"
        cond_ids[owner] = cid
        conds.append(_encode_condition(cid, c))

    for f in m.filters:
        lines.append(f"FILTER {f.name}")
        lines += [_encode_action(a) for a in f.actions]
        lines.append("ENDFILTER")
    for p in m.parallels:
        period = _num(p.period_s) if p.period_s is not None else "-"
        lines.append(f"PAR {p.name} {period}")
        lines += [_encode_action(a) for a in p.actions]
        if p.until is not None:
            lines.append(f"UNTIL {cond_ids[p.name]} {p.until.target}")
        lines.append("ENDPAR")
    lines += conds

    targets = {}
    for e in m.edges:
        targets[(e.source, e.label)] = e.target
    for i, node in enumerate(m.nodes, start=1):
        if node.labeled or node.id != auto_id(node.kind, i):
            lines.append(f"LABEL {node.id}")
        if node.kind is NodeKind.BRANCH:
            lines.append(f"BR {cond_ids[node.id]} {targets[(node.id, EdgeLabel.TRUE)]} "
                         f"{targets[(node.id, EdgeLabel.FALSE)]}")
            continue
        if node.filter_ref:
            lines.append(f"ATTACH FILTER {node.filter_ref}")
        for name in node.parallel_refs:
            lines.append(f"ATTACH PAR {name}")
        lines.append(_motion(node))
        lines += [_encode_action(a) for a in node.embedded_actions]
        nxt = targets.get((node.id, EdgeLabel.NEXT))
        if nxt is not None and (i == len(m.nodes) or m.nodes[i].id != nxt):
            lines.append(f"JMP {nxt}")
    return FlightScript(lines)


# decoding

def _decode_action(toks: list[str], line_no: int) -> ActionInstance:
    if len(toks) < 2:
        raise FlightScriptError("ACT needs an action name", line_no)
    label, _, name = toks[1].rpartition(":")
    params = []
    for tok in toks[2:]:
        key, eq, raw = tok.partition("=")
        if not eq:
            raise FlightScriptError(f"malformed parameter '{tok}'", line_no)
        try:
            params.append((key, decode_literal(raw)))
        except ValueError:
            raise FlightScriptError(f"malformed literal '{raw}'", line_no) from None
    return ActionInstance(name, tuple(params), label or None)


def _decode_processing(tok: str, line_no: int) -> ActionInstance:
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\((.*)\))?", tok)
    if m is None:
        raise FlightScriptError(f"malformed processing step '{tok}'", line_no)
    params = []
    if m.group(2):
        for pm in _PARAM.finditer(m.group(2)):
            params.append((pm.group(1), decode_literal(pm.group(2))))
    return ActionInstance(m.group(1), tuple(params))


def _decode_condition(toks: list[str], line_no: int) -> tuple[str, Condition]:
    if len(toks) < 5:
        raise FlightScriptError("COND needs id, result, comparator and value", line_no)
    try:
        comparator = Comparator[toks[-2]]
        value = decode_literal(toks[-1])
    except (KeyError, ValueError):
        raise FlightScriptError("malformed comparison", line_no) from None
    chain = tuple(_decode_processing(t, line_no) for t in toks[3:-2])
    return toks[1], Condition(toks[2], chain, comparator, value)


_MOTIONS = {
    "TAKEOFF": (NodeKind.TAKEOFF, 1),
    "TOUCHDOWN": (NodeKind.TOUCHDOWN, 0),
    "GOTO": (NodeKind.FLY_TO, 3),
    "SWEEP": (NodeKind.FLY_IN_AREA, 5),
    "HOME": (NodeKind.FLY_HOME, 0),
    "HOVER": (NodeKind.HOVER, 1),
}


def _motion_params(kind: NodeKind, nums: list[float]):
    if kind is NodeKind.TAKEOFF:
        return (("altitude", nums[0]),)
    if kind is NodeKind.FLY_TO:
        return (("target", Point(*nums)),)
    if kind is NodeKind.FLY_IN_AREA:
        return (("area", Rect(*nums[:4])), ("spacing", nums[4]))
    if kind is NodeKind.HOVER:
        return (("duration_s", nums[0]),)
    return ()


def load_flightscript(script: FlightScript | str) -> Mission:
    """Decode a flight script back into an executable mission graph."""
    text = script.text if isinstance(script, FlightScript) else script
    name = ""
    filters: list[FilterDecl] = []
    parallels: list[ParallelDecl] = []
    conds: dict[str, Condition] = {}
    until_refs: list[tuple[int, str, str]] = []  # (parallel index, cond id, target)
    block: tuple[str, str, float | None, list[ActionInstance]] | None = None

    nodes: list[Node] = []
    pending_label: str | None = None
    pending_filter: str | None = None
    pending_pars: list[str] = []
    branch_targets: list[tuple[str, str, str, str]] = []  # node id, cond id, Lt, Lf
    jumps: dict[str, str] = {}

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = tokens(line)
        op = toks[0]
        if block is not None:
            kind, bname, period, actions = block
            if op == "ACT":
                actions.append(_decode_action(toks, line_no))
            elif op == "UNTIL" and kind == "PAR" and len(toks) == 3:
                until_refs.append((len(parallels), toks[1], toks[2]))
            elif op == "ENDFILTER" and kind == "FILTER":
                filters.append(FilterDecl(bname, tuple(actions)))
                block = None
            elif op == "ENDPAR" and kind == "PAR":
                parallels.append(ParallelDecl(bname, tuple(actions), period))
                block = None
            else:
                raise FlightScriptError(f"unexpected '{op}' inside {kind} block", line_no)
            continue
        if op == "MISSION":
            name = json.loads(toks[1]) if len(toks) > 1 else ""
        elif op == "FILTER" and len(toks) == 2:
            block = ("FILTER", toks[1], None, [])
        elif op == "PAR" and len(toks) == 3:
            block = ("PAR", toks[1], None if toks[2] == "-" else float(toks[2]), [])
        elif op == "COND":
            cid, cond = _decode_condition(toks, line_no)
            conds[cid] = cond
        elif op == "LABEL" and len(toks) == 2:
            pending_label = toks[1]
        elif op == "ATTACH" and len(toks) == 3 and toks[1] == "FILTER":
            pending_filter = toks[2]
        elif op == "ATTACH" and len(toks) == 3 and toks[1] == "PAR":
            pending_pars.append(toks[2])
        elif op in _MOTIONS:
            kind, arity = _MOTIONS[op]
            if len(toks) != arity + 1:
                raise FlightScriptError(f"{op} takes {arity} operands", line_no)
            try:
                nums = [float(t) for t in toks[1:]]
            except ValueError:
                raise FlightScriptError(f"{op} operands must be numbers", line_no) from None
            index = len(nodes) + 1
            nodes.append(Node(pending_label or auto_id(kind, index), kind, _motion_params(kind, nums),
                              filter_ref=pending_filter, parallel_refs=tuple(pending_pars),
                              labeled=pending_label is not None))
            pending_label, pending_filter, pending_pars = None, None, []
        elif op == "ACT":
            if not nodes or not nodes[-1].kind.is_routing:
                raise FlightScriptError("ACT outside a declaration must follow a motion command", line_no)
            last = nodes[-1]
            nodes[-1] = Node(last.id, last.kind, last.params, last.embedded_actions
                             + (_decode_action(toks, line_no),), last.filter_ref, last.parallel_refs,
                             labeled=last.labeled)
        elif op == "BR" and len(toks) == 4:
            index = len(nodes) + 1
            node_id = pending_label or auto_id(NodeKind.BRANCH, index)
            branch_targets.append((node_id, toks[1], toks[2], toks[3]))
            nodes.append(Node(node_id, NodeKind.BRANCH, labeled=pending_label is not None))
            pending_label = None
        elif op == "JMP" and len(toks) == 2:
            if not nodes:
                raise FlightScriptError("JMP before any step", line_no)
            jumps[nodes[-1].id] = toks[1]
        else:
            raise FlightScriptError(f"unknown command '{op}'", line_no)
    if block is not None:
        raise FlightScriptError(f"unterminated {block[0]} block")

    for index, cid, target in until_refs:
        if cid not in conds:
            raise FlightScriptError(f"UNTIL references unknown condition '{cid}'")
        p = parallels[index]
        parallels[index] = ParallelDecl(p.name, p.actions, p.period_s, Until(conds[cid], target))

    edges: list[Edge] = []
    branch_info = {b[0]: b for b in branch_targets}
    for i, node in enumerate(nodes):
        if node.kind is NodeKind.BRANCH:
            _, cid, lt, lf = branch_info[node.id]
            if cid not in conds:
                raise FlightScriptError(f"BR references unknown condition '{cid}'")
            nodes[i] = Node(node.id, NodeKind.BRANCH, condition=conds[cid], labeled=node.labeled)
            edges += [Edge(node.id, lt, EdgeLabel.TRUE), Edge(node.id, lf, EdgeLabel.FALSE)]
        elif node.kind is not NodeKind.TOUCHDOWN:
            nxt = jumps.get(node.id)
            if nxt is None:
                if i + 1 >= len(nodes):
                    raise FlightScriptError(f"step '{node.id}' falls off the end of the script")
                nxt = nodes[i + 1].id
            edges.append(Edge(node.id, nxt, EdgeLabel.NEXT))
    try:
        return build_mission(name, nodes, edges, filters, parallels)
    except MissionError as exc:
        raise FlightScriptError(str(exc)) from exc


def check_flightscript(script: FlightScript) -> list[str]:
    """Structural invariants: labels resolve, TAKEOFF first, every terminating path ends in TOUCHDOWN."""
    problems = []
    body = script.body()
    labels = {tokens(line)[1] for line in body if line.startswith("LABEL ")}
    for line in body:
        toks = tokens(line)
        refs = toks[2:4] if toks[0] == "BR" else toks[1:2] if toks[0] == "JMP" else []
        problems += [f"'{line}' references missing label '{r}'" for r in refs if r not in labels]
    motions = [line for line in body if tokens(line)[0] in _MOTIONS or tokens(line)[0] == "BR"]
    if not motions or not motions[0].startswith("TAKEOFF"):
        problems.append("script does not start with TAKEOFF")
    if not problems:
        try:
            m = load_flightscript(script)
        except (FlightScriptError, MissionError, ValueError) as exc:
            problems.append(str(exc))
        else:
            # Only TOUCHDOWN has no successor, so any path that terminates ends there.
            sinks = [n for n in m.nodes if not any(e.source == n.id for e in m.edges)]
            if any(n.kind is not NodeKind.TOUCHDOWN for n in sinks):
                problems.append("a terminating path does not end with TOUCHDOWN")
    return problems
