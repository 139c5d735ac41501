"""Action definitions and the registry that makes new actions usable without grammar changes."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .diagnostics import Diagnostic
from .model import ActionInstance, Literal, NodeKind, Point, Rect, SourceSpan


class ValueType(str, Enum):
    BOOL = "Bool"
    NUMBER = "Number"
    TEXT = "Text"
    IMAGE = "Image"
    POINT_CLOUD = "PointCloud"
    UNIT = "Unit"


class LiteralKind(str, Enum):
    BOOL = "bool"
    NUMBER = "number"
    TEXT = "text"
    POINT = "point"
    RECT = "rect"


class Category(str, Enum):
    REGULAR = "regular"
    PROCESSING = "processing"
    FILTER = "filter"


def literal_kind(value: Literal) -> LiteralKind:
    if isinstance(value, bool):
        return LiteralKind.BOOL
    if isinstance(value, (int, float)):
        return LiteralKind.NUMBER
    if isinstance(value, str):
        return LiteralKind.TEXT
    if isinstance(value, Point):
        return LiteralKind.POINT
    if isinstance(value, Rect):
        return LiteralKind.RECT
    raise TypeError(f"not a literal: {value!r}")


LITERAL_VALUE_TYPES = {
    LiteralKind.BOOL: ValueType.BOOL,
    LiteralKind.NUMBER: ValueType.NUMBER,
    LiteralKind.TEXT: ValueType.TEXT,
}


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: LiteralKind
    required: bool = False
    default: Literal | None = None
    positive: bool = False


@dataclass(frozen=True)
class ActionDefinition:
    name: str
    category: Category
    output_type: ValueType
    input_type: ValueType | None = None
    params: tuple[ParamSpec, ...] = ()
    behavior: str = "scripted"

    def param(self, name: str) -> ParamSpec | None:
        return next((p for p in self.params if p.name == name), None)

    def resolved_params(self, inst: ActionInstance) -> dict[str, Literal]:
        """Instance parameters with schema defaults filled in."""
        values = {p.name: p.default for p in self.params if p.default is not None}
        values.update(inst.params)
        return values


class RegistryError(Exception):
    pass


class DuplicateName(RegistryError):
    pass


class InvalidDefinition(RegistryError):
    pass


def check_definition(d: ActionDefinition) -> None:
    if not d.name.isidentifier():
        raise InvalidDefinition(f"'{d.name}' is not a valid action name")
    if d.category is Category.PROCESSING and d.input_type is None:
        raise InvalidDefinition(f"processing action '{d.name}' needs an input type")
    if d.category is not Category.PROCESSING and d.input_type is not None:
        raise InvalidDefinition(f"only processing actions take an input type ('{d.name}')")
    if d.category is Category.FILTER and d.output_type is not ValueType.UNIT:
        raise InvalidDefinition(f"filter action '{d.name}' must output Unit, not {d.output_type.value}")
    names = [p.name for p in d.params]
    if len(names) != len(set(names)):
        raise InvalidDefinition(f"action '{d.name}' repeats a parameter name")
    for p in d.params:
        if p.default is not None and literal_kind(p.default) is not p.kind:
            raise InvalidDefinition(f"default of '{d.name}.{p.name}' is not a {p.kind.value}")


@dataclass(frozen=True)
class Registry:
    definitions: Mapping[str, ActionDefinition] = field(default_factory=dict)

    def lookup(self, name: str) -> ActionDefinition | None:
        return self.definitions.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.definitions

    def names(self) -> list[str]:
        return sorted(self.definitions)

    def register(self, definition: ActionDefinition) -> "Registry":
        return register(self, definition)


def register(reg: Registry, definition: ActionDefinition) -> Registry:
    """Return a new registry that also contains `definition`."""
    check_definition(definition)
    if definition.name in reg.definitions:
        raise DuplicateName(f"action '{definition.name}' is already registered")
    defs = dict(reg.definitions)
    defs[definition.name] = definition
    return Registry(defs)


def validate_instance(inst: ActionInstance, definition: ActionDefinition) -> list[Diagnostic]:
    return validate_params(inst.params, definition.params, f"action '{definition.name}'", inst.span)


def validate_params(params: Iterable[tuple[str, Literal]], schema: Iterable[ParamSpec],
                    owner: str, span: SourceSpan | None) -> list[Diagnostic]:
    schema = {p.name: p for p in schema}
    given = dict(params)
    diags = []
    for name, value in params:
        spec = schema.get(name)
        if spec is None:
            diags.append(Diagnostic.at("T005", f"{owner} has no parameter '{name}'", span))
            continue
        kind = literal_kind(value)
        if kind is not spec.kind:
            diags.append(Diagnostic.at(
                "T004", f"{owner} parameter '{name}' expects {spec.kind.value}, got {kind.value}", span))
        elif spec.positive and not value > 0:
            diags.append(Diagnostic.at("T007", f"{owner} parameter '{name}' must be positive", span))
    for spec in schema.values():
        if spec.required and spec.name not in given:
            diags.append(Diagnostic.at("T006", f"{owner} requires parameter '{spec.name}'", span))
    return diags


def _num(name, required=False, default=None, positive=False):
    return ParamSpec(name, LiteralKind.NUMBER, required, default, positive)


def _text(name, required=False, default=None):
    return ParamSpec(name, LiteralKind.TEXT, required, default)


# Defaults below are toolchain choices, documented in docs/actions.md.
BUILTINS: tuple[ActionDefinition, ...] = (
    ActionDefinition("take_picture", Category.REGULAR, ValueType.IMAGE,
                     params=(_text("resolution", default="640x480"), _num("quality", default=0.9, positive=True)),
                     behavior="capture"),
    ActionDefinition("take_infrared_picture", Category.REGULAR, ValueType.IMAGE,
                     params=(_text("resolution", default="640x480"),), behavior="capture"),
    ActionDefinition("laser_scan", Category.REGULAR, ValueType.POINT_CLOUD, behavior="capture"),
    ActionDefinition("read_sensor", Category.REGULAR, ValueType.NUMBER,
                     params=(_text("name", required=True),)),
    ActionDefinition("record_video_start", Category.REGULAR, ValueType.UNIT),
    ActionDefinition("record_video_stop", Category.REGULAR, ValueType.UNIT),
    ActionDefinition("scan_wifi", Category.REGULAR, ValueType.NUMBER),
    ActionDefinition("recognize_image", Category.PROCESSING, ValueType.TEXT, input_type=ValueType.IMAGE),
    ActionDefinition("threshold_exceeded", Category.PROCESSING, ValueType.BOOL, input_type=ValueType.NUMBER,
                     params=(_num("limit", required=True),), behavior="threshold"),
    ActionDefinition("interpret_scan", Category.PROCESSING, ValueType.NUMBER, input_type=ValueType.POINT_CLOUD),
    ActionDefinition("maintain_speed", Category.FILTER, ValueType.UNIT,
                     params=(_num("limit", required=True, positive=True),), behavior="speed_limit"),
    ActionDefinition("avoid_obstacles", Category.FILTER, ValueType.UNIT,
                     params=(_num("clearance", default=1.0, positive=True),), behavior="obstacle_clearance"),
    ActionDefinition("max_altitude", Category.FILTER, ValueType.UNIT,
                     params=(_num("limit", required=True, positive=True),), behavior="altitude_limit"),
)


def builtin_catalog() -> Registry:
    reg = Registry()
    for d in BUILTINS:
        reg = register(reg, d)
    return reg


# Parameter schemas for routing elements; they are keywords, not registry entries.
ROUTING_SCHEMAS: dict[NodeKind, tuple[ParamSpec, ...]] = {
    NodeKind.TAKEOFF: (_num("altitude", required=True, positive=True),),
    NodeKind.TOUCHDOWN: (),
    NodeKind.FLY_TO: (ParamSpec("target", LiteralKind.POINT, required=True),),
    NodeKind.FLY_IN_AREA: (ParamSpec("area", LiteralKind.RECT, required=True),
                           _num("spacing", required=True, positive=True)),
    NodeKind.FLY_HOME: (),
    NodeKind.HOVER: (_num("duration_s", required=True),),
}

HOOKS = {"scripted", "capture", "threshold", "speed_limit", "obstacle_clearance", "altitude_limit"}


def _parse_enum(enum, raw, what):
    for member in enum:
        if raw in (member.value, member.name) or str(raw).lower() == member.value.lower():
            return member
    raise InvalidDefinition(f"unknown {what} '{raw}'")


def definitions_from_toml(text: str) -> list[ActionDefinition]:
    """Decode an action extension file (format in docs/actions.md)."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidDefinition(f"cannot parse action file: {exc}") from exc
    out = []
    for entry in data.get("action", []):
        try:
            params = []
            for p in entry.get("param", []):
                kind = _parse_enum(LiteralKind, p["kind"], "parameter kind")
                default = p.get("default")
                if kind is LiteralKind.NUMBER and isinstance(default, int) and not isinstance(default, bool):
                    default = float(default)
                params.append(ParamSpec(p["name"], kind, bool(p.get("required", False)), default,
                                        bool(p.get("positive", False))))
            behavior = entry.get("behavior", "scripted")
            if behavior not in HOOKS:
                raise InvalidDefinition(f"unknown behavior hook '{behavior}'")
            inp = entry.get("input")
            out.append(ActionDefinition(
                name=entry["name"],
                category=_parse_enum(Category, entry["category"], "category"),
                output_type=_parse_enum(ValueType, entry.get("output", "Unit"), "value type"),
                input_type=_parse_enum(ValueType, inp, "value type") if inp is not None else None,
                params=tuple(params),
                behavior=behavior,
            ))
        except KeyError as exc:
            raise InvalidDefinition(f"action entry is missing key {exc}") from exc
    return out


def load_extensions(reg: Registry, path: str | Path) -> Registry:
    for d in definitions_from_toml(Path(path).read_text(encoding="utf-8")):
        reg = register(reg, d)
    return reg

