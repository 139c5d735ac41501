"""In-memory mission representation and structural queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union


class NodeKind(str, Enum):
    TAKEOFF = "takeoff"
    TOUCHDOWN = "touchdown"
    FLY_TO = "fly_to"
    FLY_IN_AREA = "fly_in_area"
    FLY_HOME = "fly_home"
    HOVER = "hover"
    BRANCH = "if"

    @property
    def is_routing(self) -> bool:
        return self is not NodeKind.BRANCH


ROUTING_KEYWORDS = {k.value: k for k in NodeKind if k.is_routing}


class EdgeLabel(str, Enum):
    NEXT = "Next"
    TRUE = "True"
    FALSE = "False"


class Comparator(str, Enum):
    EQ = "=="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def is_ordering(self) -> bool:
        return self in (Comparator.LT, Comparator.LE, Comparator.GT, Comparator.GE)


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float


Literal = Union[bool, float, str, Point, Rect]


@dataclass(frozen=True, order=True)
class SourceSpan:
    line: int
    column: int
    end_line: int
    end_column: int


@dataclass(frozen=True)
class ActionInstance:
    action_name: str
    params: tuple[tuple[str, Literal], ...] = ()
    result_label: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    def param_dict(self) -> dict[str, Literal]:
        return dict(self.params)


@dataclass(frozen=True)
class Condition:
    result_ref: str
    processing_chain: tuple[ActionInstance, ...]
    comparator: Comparator
    reference_value: Literal
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    params: tuple[tuple[str, Literal], ...] = ()
    embedded_actions: tuple[ActionInstance, ...] = ()
    filter_ref: str | None = None
    parallel_refs: tuple[str, ...] = ()
    condition: Condition | None = None
    labeled: bool = True
    span: SourceSpan | None = field(default=None, compare=False)

    def param_dict(self) -> dict[str, Literal]:
        return dict(self.params)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: EdgeLabel = EdgeLabel.NEXT


@dataclass(frozen=True)
class FilterDecl:
    name: str
    actions: tuple[ActionInstance, ...]
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Until:
    condition: Condition
    target: str


@dataclass(frozen=True)
class ParallelDecl:
    name: str
    actions: tuple[ActionInstance, ...]
    period_s: float | None = None
    until: Until | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Mission:
    name: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    filters: tuple[FilterDecl, ...] = ()
    parallels: tuple[ParallelDecl, ...] = ()

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownNode(node_id)

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def filter(self, name: str) -> FilterDecl | None:
        return next((f for f in self.filters if f.name == name), None)

    def parallel(self, name: str) -> ParallelDecl | None:
        return next((p for p in self.parallels if p.name == name), None)

    @property
    def takeoff(self) -> Node:
        return next(n for n in self.nodes if n.kind is NodeKind.TAKEOFF)

    def all_actions(self) -> list[ActionInstance]:
        """Every action instance in the mission, in source order."""
        out: list[ActionInstance] = []
        for f in self.filters:
            out.extend(f.actions)
        for p in self.parallels:
            out.extend(p.actions)
        for n in self.nodes:
            out.extend(n.embedded_actions)
        return out

    def conditions(self) -> list[tuple[str, Condition]]:
        """(owner, condition) pairs: owner is a branch node id or parallel name."""
        out: list[tuple[str, Condition]] = []
        for p in self.parallels:
            if p.until is not None:
                out.append((p.name, p.until.condition))
        for n in self.nodes:
            if n.condition is not None:
                out.append((n.id, n.condition))
        return out


class MissionError(Exception):
    """Structural violation raised by build_mission."""

    code = "M000"

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


class DuplicateId(MissionError):
    code = "M001"


class DanglingEdge(MissionError):
    code = "M002"


class MissingTakeOff(MissionError):
    code = "M003"


class MissingTouchDown(MissionError):
    code = "M004"


class DuplicateLabel(MissionError):
    code = "M005"


class MalformedNode(MissionError):
    code = "M006"


class UnknownNode(KeyError):
    pass


def build_mission(
    name: str,
    nodes: Iterable[Node],
    edges: Iterable[Edge],
    filters: Iterable[FilterDecl] = (),
    parallels: Iterable[ParallelDecl] = (),
) -> Mission:
    """Assemble a Mission, raising a MissionError subclass on the first violation."""
    nodes = tuple(nodes)
    edges = tuple(edges)
    filters = tuple(filters)
    parallels = tuple(parallels)

    seen: dict[str, Node] = {}
    for n in nodes:
        if n.id in seen:
            raise DuplicateId(f"duplicate node id '{n.id}'", n.span)
        seen[n.id] = n

    takeoffs = [n for n in nodes if n.kind is NodeKind.TAKEOFF]
    touchdowns = [n for n in nodes if n.kind is NodeKind.TOUCHDOWN]
    if len(takeoffs) != 1:
        span = takeoffs[1].span if len(takeoffs) > 1 else None
        raise MissingTakeOff(f"mission needs exactly one takeoff, found {len(takeoffs)}", span)
    if len(touchdowns) != 1:
        span = touchdowns[1].span if len(touchdowns) > 1 else None
        raise MissingTouchDown(f"mission needs exactly one touchdown, found {len(touchdowns)}", span)

    for decls, what in ((filters, "filter"), (parallels, "parallel")):
        names: set[str] = set()
        for d in decls:
            if d.name in names:
                raise DuplicateId(f"duplicate {what} '{d.name}'", d.span)
            names.add(d.name)
            if not d.actions:
                raise MalformedNode(f"{what} '{d.name}' declares no actions", d.span)
    for p in parallels:
        if p.period_s is not None and not p.period_s > 0:
            raise MalformedNode(f"parallel '{p.name}' period must be positive", p.span)
        if p.until is not None and p.until.target not in seen:
            raise DanglingEdge(f"until target '{p.until.target}' is not a node", p.span)

    for e in edges:
        for end in (e.source, e.target):
            if end not in seen:
                src = seen.get(e.source)
                raise DanglingEdge(f"edge references unknown node '{end}'", src.span if src else None)

    outgoing: dict[str, list[Edge]] = {n.id: [] for n in nodes}
    for e in edges:
        outgoing[e.source].append(e)
        if e.target == takeoffs[0].id:
            raise MalformedNode("takeoff cannot be the target of an edge", seen[e.source].span)

    for n in nodes:
        labels = [e.label for e in outgoing[n.id]]
        if n.kind is NodeKind.BRANCH:
            if n.condition is None:
                raise MalformedNode(f"branch '{n.id}' has no condition", n.span)
            if n.embedded_actions or n.filter_ref or n.parallel_refs:
                raise MalformedNode(f"branch '{n.id}' cannot carry actions, filters or parallels", n.span)
            if sorted(labels) != sorted([EdgeLabel.TRUE, EdgeLabel.FALSE]):
                raise MalformedNode(f"branch '{n.id}' needs exactly one True and one False edge", n.span)
        else:
            if n.condition is not None:
                raise MalformedNode(f"routing node '{n.id}' cannot carry a condition", n.span)
            expected = [] if n.kind is NodeKind.TOUCHDOWN else [EdgeLabel.NEXT]
            if labels != expected:
                raise MalformedNode(
                    f"node '{n.id}' must have {'no' if not expected else 'exactly one Next'} outgoing edge",
                    n.span,
                )

    label_seen: set[str] = set()
    for a in _labelled_actions(nodes, filters, parallels):
        if a.result_label in label_seen:
            raise DuplicateLabel(f"result label '{a.result_label}' is defined more than once", a.span)
        label_seen.add(a.result_label)

    # Branch edges canonicalised True-then-False.
    order = {EdgeLabel.NEXT: 0, EdgeLabel.TRUE: 1, EdgeLabel.FALSE: 2}
    position = {n.id: i for i, n in enumerate(nodes)}
    canon = tuple(sorted(edges, key=lambda e: (position[e.source], order[e.label])))
    return Mission(name, nodes, canon, filters, parallels)


def _labelled_actions(nodes, filters, parallels):
    for group in [f.actions for f in filters] + [p.actions for p in parallels] + [n.embedded_actions for n in nodes]:
        for a in group:
            if a.result_label is not None:
                yield a


def successors(m: Mission, node_id: str) -> list[tuple[EdgeLabel, str]]:
    if not m.has_node(node_id):
        raise UnknownNode(node_id)
    return [(e.label, e.target) for e in m.edges if e.source == node_id]


def until_links(m: Mission) -> list[tuple[str, str, str]]:
    """(routing node, parallel name, until target) for every attached parallel carrying `until`."""
    out = []
    for n in m.nodes:
        for name in n.parallel_refs:
            p = m.parallel(name)
            if p is not None and p.until is not None:
                out.append((n.id, name, p.until.target))
    return out


def _adjacency(m: Mission) -> dict[str, list[str]]:
    adj: dict[str, list[str]] = {n.id: [] for n in m.nodes}
    for e in m.edges:
        adj[e.source].append(e.target)
    for src, _, target in until_links(m):
        if target in adj:
            adj[src].append(target)
    return adj


def reachable(m: Mission, start: str | None = None) -> set[str]:
    """Nodes reachable from TakeOff (or `start`) over any edge, including until jumps."""
    adj = _adjacency(m)
    first = start if start is not None else m.takeoff.id
    seen = {first}
    queue = deque([first])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def can_reach_touchdown(m: Mission) -> set[str]:
    """Nodes from which some path leads to the TouchDown node."""
    adj = _adjacency(m)
    rev: dict[str, list[str]] = {n: [] for n in adj}
    for src, targets in adj.items():
        for t in targets:
            rev[t].append(src)
    sink = next(n.id for n in m.nodes if n.kind is NodeKind.TOUCHDOWN)
    seen = {sink}
    queue = deque([sink])
    while queue:
        cur = queue.popleft()
        for prev in rev[cur]:
            if prev not in seen:
                seen.add(prev)
                queue.append(prev)
    return seen


def provided_results(m: Mission, node: Node) -> list[ActionInstance]:
    """Labelled actions guaranteed to have run once `node` completes normally."""
    out = [a for a in node.embedded_actions if a.result_label]
    for name in node.parallel_refs:
        p = m.parallel(name)
        if p is not None:
            out.extend(a for a in p.actions if a.result_label)
    return out


def visible_results(m: Mission, at: str) -> list[ActionInstance]:
    """Labelled actions a condition at `at` may reference.

    Scope is one main-flow step back: the routing element whose Next edge
    enters `at`, plus the parallel blocks attached to it. Every incoming
    edge must supply the label, so entries via branch edges contribute nothing.
    """
    if not m.has_node(at):
        raise UnknownNode(at)
    incoming = [e for e in m.edges if e.target == at]
    if not incoming:
        return []
    scopes: list[list[ActionInstance]] = []
    for e in incoming:
        if e.label is EdgeLabel.NEXT:
            scopes.append(provided_results(m, m.node(e.source)))
        else:
            scopes.append([])
    common = set(a.result_label for a in scopes[0])
    for s in scopes[1:]:
        common &= {a.result_label for a in s}
    return [a for a in scopes[0] if a.result_label in common]
