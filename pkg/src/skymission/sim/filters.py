"""Velocity-transform filters applied to routing-element motion."""

from __future__ import annotations

from ..model import FilterDecl
from ..registry import Registry
from . import vec
from .scenario import Scenario
from .vec import Vec


def speed_limit(v: Vec, params: dict, position: Vec, scenario: Scenario) -> Vec:
    return vec.clamp_norm(v, params["limit"])


def altitude_limit(v: Vec, params: dict, position: Vec, scenario: Scenario) -> Vec:
    limit = params["limit"]
    dt = scenario.tick_s
    if position[2] + v[2] * dt > limit:
        return (v[0], v[1], (limit - position[2]) / dt)
    return v


def obstacle_clearance(v: Vec, params: dict, position: Vec, scenario: Scenario) -> Vec:
    """Remove the velocity component toward any obstacle the next tick would bring inside `clearance`."""
    clearance = params["clearance"]
    dt = scenario.tick_s
    for ob in scenario.obstacles:
        to_center = vec.sub(ob.center, position)
        d = vec.norm(to_center)
        if d == 0.0:
            continue
        u = vec.scale(to_center, 1.0 / d)
        closing = vec.dot(v, u)
        if closing <= 0.0:
            continue
        ahead = vec.add(position, vec.scale(v, dt))
        if vec.dist(ahead, ob.center) - ob.radius < clearance:
            v = vec.sub(v, vec.scale(u, closing))
    # Sequential projections can re-introduce a closing component; stop if so.
    for ob in scenario.obstacles:
        to_center = vec.sub(ob.center, position)
        ahead = vec.add(position, vec.scale(v, dt))
        if vec.dot(v, to_center) > 0.0 and vec.dist(ahead, ob.center) - ob.radius < clearance:
            return vec.ZERO
    return v


MOTION_HOOKS = {
    "speed_limit": speed_limit,
    "altitude_limit": altitude_limit,
    "obstacle_clearance": obstacle_clearance,
}


def apply_filters(f: FilterDecl, desired: Vec, position: Vec, scenario: Scenario,
                  reg: Registry, clamped: list | None = None) -> Vec:
    """Chain the filter's actions lowest priority first, so the first-listed action has the last word."""
    v = desired
    for action in reversed(f.actions):
        d = reg.lookup(action.action_name)
        hook = MOTION_HOOKS.get(d.behavior) if d is not None else None
        if hook is None:
            continue
        out = hook(v, d.resolved_params(action), position, scenario)
        if clamped is not None and vec.dist(out, v) > 1e-9:
            clamped.append((action.action_name, vec.norm(v), vec.norm(out)))
        v = out
    return v
