from __future__ import annotations

import math

Vec = tuple[float, float, float]
ZERO: Vec = (0.0, 0.0, 0.0)


def add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(a: Vec, k: float) -> Vec:
    return (a[0] * k, a[1] * k, a[2] * k)


def dot(a: Vec, b: Vec) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def norm(a: Vec) -> float:
    return math.hypot(a[0], a[1], a[2])


def dist(a: Vec, b: Vec) -> float:
    return norm(sub(a, b))


def clamp_norm(v: Vec, limit: float) -> Vec:
    """Scale `v` down so that norm(v) <= limit holds exactly in floating point."""
    n = norm(v)
    if n <= limit:
        return v
    if limit <= 0:
        return ZERO
    k = limit / n
    out = scale(v, k)
    while norm(out) > limit:
        k = math.nextafter(k, 0.0)
        out = scale(v, k)
    return out
