"""Hypothesis strategies producing random, structurally valid mission sources."""

from __future__ import annotations

import json

from hypothesis import strategies as st

coord = st.integers(-20, 20).map(float)
text_value = st.text(st.characters(blacklist_categories=("Cs",)), max_size=8)


@st.composite
def routing_step(draw, i):
    kind = draw(st.sampled_from(["hover", "fly_to", "fly_in_area", "fly_home"]))
    if kind == "hover":
        call = f"hover(duration_s = {float(draw(st.integers(0, 4)))})"
    elif kind == "fly_to":
        call = f"fly_to(target = point({draw(coord)}, {draw(coord)}, {float(draw(st.integers(1, 8)))}))"
    elif kind == "fly_in_area":
        x, y = draw(coord), draw(coord)
        call = f"fly_in_area(area = rect({x}, {y}, {x + 4.0}, {y + 3.0}), spacing = 2.0)"
    else:
        call = "fly_home()"
    actions = []
    if draw(st.booleans()):
        actions.append(f"r{i}: read_sensor(name = {json.dumps(draw(text_value), ensure_ascii=False)})")
    if draw(st.booleans()):
        actions.append(f"p{i}: take_picture()")
    return kind, call, actions


@st.composite
def mission_source(draw):
    n = draw(st.integers(0, 5))
    with_filter = draw(st.booleans())
    with_parallel = draw(st.booleans())
    decls = []
    if with_filter:
        decls.append("filter guard { avoid_obstacles(clearance = 1.0) maintain_speed(limit = 1.5) }")
    lines = ["takeoff(altitude = 3.0)"]
    labels = ["land"]
    steps = [draw(routing_step(i)) for i in range(n)]
    labels += [f"s{i}" for i in range(n)]
    for i, (kind, call, actions) in enumerate(steps):
        body = f" {{ {' '.join(actions)} }}" if actions else ""
        clauses = ""
        if with_filter and draw(st.booleans()):
            clauses += " with filter guard"
        if with_parallel and i == 0:
            clauses += " parallel watch"
        lines.append(f"s{i}: {call}{body}{clauses}")
        sensors = [a.split(":")[0] for a in actions if "read_sensor" in a]
        if sensors and draw(st.booleans()):
            t, f = draw(st.sampled_from(labels)), draw(st.sampled_from(labels))
            lines.append(f"if {sensors[0]} > {draw(coord)} -> {t} else -> {f}")
    lines.append("land: touchdown()")
    if with_parallel:
        until = ""
        if draw(st.booleans()):
            until = f" until w >= 2.0 -> {draw(st.sampled_from(labels))}"
        decls.append(f"parallel watch every {float(draw(st.integers(1, 5)))}s {{ w: scan_wifi() }}{until}")
    name = draw(text_value)
    return f"mission {json.dumps(name, ensure_ascii=False)} {{ {' '.join(decls)} flow {{ {' '.join(lines)} }} }}"
