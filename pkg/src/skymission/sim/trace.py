"""Simulation trace records and their JSON Lines form."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class EventKind(str, Enum):
    ACTION_FIRED = "ActionFired"
    BRANCH_TAKEN = "BranchTaken"
    PARALLEL_ENTERED = "ParallelEntered"
    PARALLEL_EXITED = "ParallelExited"
    FILTER_CLAMPED = "FilterClamped"
    ABORT_TRIGGERED = "AbortTriggered"
    NODE_ENTERED = "NodeEntered"
    NODE_COMPLETED = "NodeCompleted"


@dataclass(frozen=True)
class Sample:
    seq: int
    t: float
    pos: tuple[float, float, float]
    speed: float
    battery: float
    node: str

    def to_json(self) -> dict:
        return {"t": self.t, "pos": list(self.pos), "speed": self.speed,
                "battery": self.battery, "node": self.node}


@dataclass(frozen=True)
class Event:
    seq: int
    t: float
    kind: EventKind
    payload: dict[str, Any]

    def to_json(self) -> dict:
        return {"t": self.t, "event": self.kind.value, "payload": self.payload}


@dataclass(frozen=True)
class Outcome:
    status: str  # Completed | Aborted | Error
    reason: str | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"outcome": self.status}
        if self.reason is not None:
            out["reason"] = self.reason
        return out

    def __str__(self) -> str:
        return self.status if self.reason is None else f"{self.status}({self.reason!r})"


COMPLETED = Outcome("Completed")


@dataclass
class Trace:
    samples: list[Sample] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    outcome: Outcome | None = None

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind is kind]

    def records(self) -> list[dict]:
        merged = sorted(self.samples + self.events, key=lambda r: r.seq)
        out = [r.to_json() for r in merged]
        if self.outcome is not None:
            out.append(self.outcome.to_json())
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()

    def final_position(self):
        return self.samples[-1].pos if self.samples else None


# Event kinds compared when checking that two executions behave the same.
SEMANTIC_EVENTS = (
    EventKind.NODE_ENTERED,
    EventKind.NODE_COMPLETED,
    EventKind.ACTION_FIRED,
    EventKind.BRANCH_TAKEN,
)


def event_sequence(trace: Trace, kinds=SEMANTIC_EVENTS) -> str:
    """Canonical serialization of the semantic event stream plus outcome."""
    lines = [json.dumps(e.to_json(), sort_keys=True) for e in trace.events if e.kind in kinds]
    if trace.outcome is not None:
        lines.append(json.dumps(trace.outcome.to_json(), sort_keys=True))
    return "\n".join(lines) + "\n"
