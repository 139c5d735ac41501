"""Scenario description: home, obstacles, battery and scripted action outputs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..model import Rect
from ..registry import ValueType

Vec = tuple[float, float, float]


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Obstacle:
    center: Vec
    radius: float


@dataclass(frozen=True)
class Opaque:
    """Stand-in for sensor payloads (images, point clouds) the simulator cannot produce."""

    kind: str
    action: str
    n: int
    at: Vec
    tag: Any = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "action": self.action, "n": self.n, "at": list(self.at)}
        if self.tag is not None:
            out["tag"] = self.tag
        return out


@dataclass(frozen=True)
class ScriptRule:
    action: str
    output: Any
    nth: int | None = None
    region: Rect | None = None

    def matches(self, action: str, n: int, position: Vec) -> bool:
        if action != self.action:
            return False
        if self.nth is not None and n != self.nth:
            return False
        if self.region is not None:
            r = self.region
            x, y = position[0], position[1]
            if not (min(r.x0, r.x1) <= x <= max(r.x0, r.x1) and min(r.y0, r.y1) <= y <= max(r.y0, r.y1)):
                return False
        return True


@dataclass(frozen=True)
class Scenario:
    home: Vec = (0.0, 0.0, 0.0)
    obstacles: tuple[Obstacle, ...] = ()
    battery_capacity_s: float = 1800.0
    battery_reserve_fraction: float = 0.15
    script: tuple[ScriptRule, ...] = ()
    tick_s: float = 0.1

    def __post_init__(self):
        if not self.tick_s > 0:
            raise ScenarioError("tick_s must be positive")
        if not 0 < self.battery_reserve_fraction < 1:
            raise ScenarioError("reserve fraction must lie in (0, 1)")
        if not self.battery_capacity_s > 0:
            raise ScenarioError("battery_capacity_s must be positive")
        for o in self.obstacles:
            if not o.radius > 0:
                raise ScenarioError("obstacle radius must be positive")

    def scripted(self, action: str, n: int, position: Vec) -> ScriptRule | None:
        """First rule matching this invocation; rule order breaks ties."""
        for rule in self.script:
            if rule.matches(action, n, position):
                return rule
        return None


def _vec(raw, what) -> Vec:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ScenarioError(f"{what} must be [x, y, z]")
    return tuple(_number(v, what) for v in raw)


def _number(raw, what) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioError(f"{what} must be a number")
    return float(raw)


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        return _scenario_from_dict(data)
    except (TypeError, AttributeError, KeyError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def _scenario_from_dict(data: dict) -> Scenario:
    obstacles = tuple(
        Obstacle(_vec(o.get("center"), "obstacle center"), _number(o.get("radius"), "obstacle radius"))
        for o in data.get("obstacles", [])
    )
    rules = []
    for raw in data.get("script", []):
        if "action" not in raw or "output" not in raw:
            raise ScenarioError("script rules need 'action' and 'output'")
        region = raw.get("region")
        if region is not None:
            if len(region) != 4:
                raise ScenarioError("region must be [x0, y0, x1, y1]")
            region = Rect(*(_number(v, "region") for v in region))
        nth = raw.get("nth")
        if nth is not None and (isinstance(nth, bool) or not isinstance(nth, int) or nth < 1):
            raise ScenarioError("nth must be a positive integer")
        rules.append(ScriptRule(raw["action"], raw["output"], nth, region))
    return Scenario(
        home=_vec(data.get("home", [0.0, 0.0, 0.0]), "home"),
        obstacles=obstacles,
        battery_capacity_s=_number(data.get("battery_capacity_s", 1800.0), "battery_capacity_s"),
        battery_reserve_fraction=_number(data.get("reserve", 0.15), "reserve"),
        script=tuple(rules),
        tick_s=_number(data.get("tick_s", 0.1), "tick_s"),
    )


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    return scenario_from_dict(data)


def coerce_output(value: Any, vtype: ValueType, action: str, n: int, at: Vec):
    """Turn a scripted JSON value into a typed runtime value, or raise ScenarioError."""
    if vtype is ValueType.TEXT and isinstance(value, str):
        return value
    if vtype is ValueType.BOOL and isinstance(value, bool):
        return value
    if vtype is ValueType.NUMBER and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if vtype in (ValueType.IMAGE, ValueType.POINT_CLOUD):
        return Opaque(vtype.value, action, n, at, value)
    if vtype is ValueType.UNIT and value is None:
        return None
    raise ScenarioError(f"scripted output {value!r} for '{action}' is not a {vtype.value}")


def default_output(vtype: ValueType, action: str, n: int, at: Vec):
    if vtype is ValueType.TEXT:
        return ""
    if vtype is ValueType.NUMBER:
        return 0.0
    if vtype is ValueType.BOOL:
        return False
    if vtype in (ValueType.IMAGE, ValueType.POINT_CLOUD):
        return Opaque(vtype.value, action, n, at)
    return None


def value_to_json(value):
    if isinstance(value, Opaque):
        return value.to_json()
    return value

