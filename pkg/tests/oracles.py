"""Independent reference computations, written without touching the simulator code."""

from __future__ import annotations

import math


def sweep_length(x0, y0, x1, y1, spacing):
    """Boustrophedon length: one full row per pass plus the lane changes between rows."""
    width = abs(x1 - x0)
    height = abs(y1 - y0)
    passes = math.floor(height / spacing + 1e-9) + 1
    if passes - 1 < height / spacing - 1e-9:
        passes += 1
    return width * passes + height


def leg_time(a, b, speed):
    return math.dist(a, b) / speed


def firings(duration, period):
    return math.floor(duration / period + 1e-9) + 1
