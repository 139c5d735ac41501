"""Desired motion of each routing element."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..model import Node, NodeKind, Point, Rect
from . import vec
from .vec import Vec


@dataclass(frozen=True)
class Kinematics:
    v_max: float = 5.0
    cruise_speed: float = 2.0
    climb_rate: float = 1.0
    arrival_tolerance: float = 0.05


@dataclass
class Progress:
    """Per-occurrence motion state of the current routing element."""

    entered_at: float
    entry_position: Vec
    path: list[Vec] = field(default_factory=list)
    index: int = 0
    planned: tuple[Vec, int] | None = None


def sweep_waypoints(area: Rect, spacing: float, z: float) -> list[Vec]:
    """Lawnmower rows along x, stepping `spacing` in y, ending on the far edge."""
    x0, x1 = min(area.x0, area.x1), max(area.x0, area.x1)
    y0, y1 = min(area.y0, area.y1), max(area.y0, area.y1)
    rows = [y0 + k * spacing for k in range(int(math.floor((y1 - y0) / spacing + 1e-9)) + 1)]
    if rows[-1] < y1 - 1e-9:
        rows.append(y1)
    out: list[Vec] = []
    for i, y in enumerate(rows):
        xs = (x0, x1) if i % 2 == 0 else (x1, x0)
        out.append((xs[0], y, z))
        out.append((xs[1], y, z))
    return out


def sweep_length(area: Rect, spacing: float) -> float:
    wps = sweep_waypoints(area, spacing, 0.0)
    return sum(vec.dist(a, b) for a, b in zip(wps, wps[1:]))


def start_progress(node: Node, t: float, position: Vec, home: Vec) -> Progress:
    p = node.param_dict()
    ground = home[2]
    path: list[Vec]
    if node.kind is NodeKind.TAKEOFF:
        path = [(position[0], position[1], ground + p["altitude"])]
    elif node.kind is NodeKind.TOUCHDOWN:
        path = [(position[0], position[1], ground)]
    elif node.kind is NodeKind.FLY_TO:
        target: Point = p["target"]
        path = [(target.x, target.y, target.z)]
    elif node.kind is NodeKind.FLY_HOME:
        path = [(home[0], home[1], position[2])]
    elif node.kind is NodeKind.FLY_IN_AREA:
        path = sweep_waypoints(p["area"], p["spacing"], position[2])
    else:
        path = []
    return Progress(t, position, path)


def _lookahead(position: Vec, path: list[Vec], index: int, reach: float) -> tuple[Vec, int]:
    """Point `reach` metres along the remaining path, and the waypoint index it lies before."""
    here = position
    i = index
    while i < len(path):
        leg = vec.dist(here, path[i])
        if leg >= reach:
            return vec.add(here, vec.scale(vec.sub(path[i], here), reach / leg)), i
        reach -= leg
        here = path[i]
        i += 1
    return here, i


def routing_motion(node: Node, progress: Progress, position: Vec, t: float,
                   kin: Kinematics, tick_s: float) -> tuple[Vec, bool]:
    """Desired velocity for the next tick and whether the element is already complete.

    Advances `progress` past waypoints that were reached.
    """
    if node.kind is NodeKind.HOVER:
        done = t - progress.entered_at >= node.param_dict()["duration_s"] - 1e-9
        return vec.ZERO, done

    tol = kin.arrival_tolerance
    path = progress.path
    if progress.planned is not None:
        point, after = progress.planned
        if vec.dist(position, point) <= tol:
            progress.index = max(progress.index, after)
        progress.planned = None
    while progress.index < len(path) and vec.dist(position, path[progress.index]) <= tol:
        progress.index += 1
    if progress.index >= len(path):
        return vec.ZERO, True

    vertical = node.kind in (NodeKind.TAKEOFF, NodeKind.TOUCHDOWN)
    speed = kin.climb_rate if vertical else kin.cruise_speed
    point, after = _lookahead(position, path, progress.index, speed * tick_s)
    progress.planned = (point, after)
    return vec.scale(vec.sub(point, position), 1.0 / tick_s), False
