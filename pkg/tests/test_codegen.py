from __future__ import annotations

import pydot
import pytest
from hypothesis import HealthCheck, given, settings

from conftest import CORPUS, VALID_MISSIONS, corpus_pairs, load_mission, scenario
from strategies import mission_source
from skymission.analyzer import analyze
from skymission.codegen import (
    FlightScript,
    FlightScriptError,
    check_flightscript,
    gen_dot,
    gen_flightscript,
    load_flightscript,
)
from skymission.codegen.flightscript import decode_literal, encode_literal
from skymission.model import Point, Rect
from skymission.parser import parse
from skymission.registry import builtin_catalog
from skymission.sim import SimConfig, event_sequence, run

REG = builtin_catalog()


def test_minimal_script():
    script = gen_flightscript(load_mission(CORPUS / "minimal.msn"))
    assert script.body() == ["TAKEOFF 10.0", "TOUCHDOWN"]


def test_branch_emits_both_labels(crop):
    body = gen_flightscript(crop).lines
    (br,) = [line for line in body if line.startswith("BR ")]
    _, cond_id, on_true, on_false = br.split()
    assert (on_true, on_false) == ("inspect", "scan")
    labels = {line.split()[1] for line in body if line.startswith("LABEL ")}
    assert {on_true, on_false} <= labels
    assert any(line.startswith(f"COND {cond_id} ") for line in body)


def test_script_well_formed(crop):
    script = gen_flightscript(crop)
    assert check_flightscript(script) == []
    commands = [line for line in script.lines if line and not line.startswith("#")]
    assert commands[0].startswith("MISSION")
    body = script.body()
    assert body[0].startswith("TAKEOFF") and body[-1] == "TOUCHDOWN"


@pytest.mark.parametrize("path", VALID_MISSIONS, ids=lambda p: p.name)
def test_script_round_trips_to_same_mission(path):
    m = load_mission(path)
    assert load_flightscript(gen_flightscript(m, REG)) == m
    assert load_flightscript(gen_flightscript(m).text) == m


@pytest.mark.parametrize("mission,scen", corpus_pairs())
def test_differential_execution(mission, scen):
    m = load_mission(CORPUS / mission)
    s = scenario(scen)
    config = SimConfig(max_sim_time=900.0)
    direct = run(m, s, REG, config)
    generated = run(load_flightscript(gen_flightscript(m, REG)), s, REG, config)
    assert event_sequence(generated).encode() == event_sequence(direct).encode()


@pytest.mark.parametrize("value", [True, False, 0.0, -2.5, 1e-7, "a b \"c\"", "é\n", Point(1.0, 2.0, 3.0),
                                   Rect(0.0, 0.0, 1.0, 2.0)])
def test_literal_codec(value):
    assert decode_literal(encode_literal(value)) == value


@pytest.mark.parametrize("text", [
    "TAKEOFF 10.0\nFLY 3\nTOUCHDOWN\n",
    "TAKEOFF 10.0\nJMP nowhere\nTOUCHDOWN\n",
    "HOVER 1.0\nTOUCHDOWN\n",
    "TAKEOFF 10.0\nBR c9 a b\nLABEL a\nLABEL b\nTOUCHDOWN\n",
])
def test_bad_scripts_rejected(text):
    with pytest.raises(FlightScriptError):
        load_flightscript(text)


def test_check_flightscript_reports_problems():
    assert check_flightscript(FlightScript(["TAKEOFF 1.0", "JMP nowhere", "TOUCHDOWN"]))


# DOT

def graph_nodes(graph):
    return [n for n in graph.get_nodes() if n.get_name() not in ("node", "edge", "graph")]


def test_minimal_dot():
    text = gen_dot(load_mission(CORPUS / "minimal.msn"))
    (graph,) = pydot.graph_from_dot_data(text)
    assert len(graph_nodes(graph)) == 2
    assert len(graph.get_edges()) == 1


def test_crop_dot_conventions(crop):
    text = gen_dot(crop)
    (graph,) = pydot.graph_from_dot_data(text)
    shapes = [n.get_shape() for n in graph_nodes(graph)]
    assert shapes.count("diamond") == 1
    edges = graph.get_edges()
    assert sum(e.get_style() == "dashed" for e in edges) == 1
    assert sum(e.get("color") == "green" for e in edges) == 1
    assert sum(e.get("color") == "red" for e in edges) == 1


@pytest.mark.parametrize("path", VALID_MISSIONS, ids=lambda p: p.name)
def test_dot_valid_for_corpus(path):
    assert pydot.graph_from_dot_data(gen_dot(load_mission(path)))


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(mission_source())
def test_random_missions_codegen(src):
    m = parse(src)
    assert not isinstance(m, list), m
    graphs = pydot.graph_from_dot_data(gen_dot(m))
    assert graphs and len(graphs[0].get_edges()) >= len(m.edges)
    script = gen_flightscript(m, REG)
    assert check_flightscript(script) == []
    assert load_flightscript(script) == m
    if analyze(m, REG).ok:
        config = SimConfig(max_sim_time=120.0)
        direct = run(m, scenario("open_sky.json"), REG, config)
        assert event_sequence(run(load_flightscript(script), scenario("open_sky.json"), REG, config)) == \
            event_sequence(direct)
