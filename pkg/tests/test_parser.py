from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ALL_MISSIONS, CORPUS, FAULT_MISSIONS, VALID_MISSIONS, fault_code, load_mission
from skymission.diagnostics import Diagnostic, Severity
from skymission.formatter import format_mission
from skymission.model import Comparator, Mission, NodeKind, Point, Rect
from skymission.parser import parse, parse_or_raise, tokenize

MINIMAL = 'mission "m" { flow { takeoff(altitude=10.0) touchdown() } }'


def codes(result):
    assert not isinstance(result, Mission), "expected diagnostics"
    return [d.code for d in result]


def test_minimal_program():
    m = parse(MINIMAL)
    assert isinstance(m, Mission)
    assert [n.kind for n in m.nodes] == [NodeKind.TAKEOFF, NodeKind.TOUCHDOWN]
    assert m.takeoff.param_dict() == {"altitude": 10.0}


def test_missing_touchdown_reports_at_flow_brace():
    src = 'mission "m" {\n  flow {\n    takeoff(altitude=10.0)\n  }\n}\n'
    diags = parse(src)
    assert codes(diags) == ["P004"]
    assert (diags[0].line, diags[0].column) == (4, 3)
    assert diags[0].severity is Severity.ERROR


def test_crop_survey_shape(crop):
    assert len(crop.nodes) == 6
    assert len(crop.filters) == 1 and len(crop.parallels) == 1
    assert crop.name == "crop_survey"


def test_crop_survey_details(crop):
    scan = crop.node("scan")
    assert scan.kind is NodeKind.FLY_IN_AREA
    assert scan.param_dict() == {"area": Rect(0.0, 0.0, 20.0, 10.0), "spacing": 5.0}
    assert scan.filter_ref == "safe_slow" and scan.parallel_refs == ("survey",)
    survey = crop.parallel("survey")
    assert survey.period_s == 10.0
    assert survey.until.target == "inspect"
    assert survey.until.condition.reference_value == "disease found"
    f = crop.filter("safe_slow")
    assert [a.action_name for a in f.actions] == ["avoid_obstacles", "maintain_speed"]


def test_every_node_has_span(crop):
    for n in crop.nodes:
        assert n.span is not None
        assert n.span.line >= 1 and (n.span.line, n.span.column) <= (n.span.end_line, n.span.end_column)


def test_unlabeled_nodes_get_positional_ids(crop):
    assert crop.nodes[0].id == "takeoff#1" and not crop.nodes[0].labeled
    assert crop.nodes[2].id == "if#3"
    assert crop.nodes[-1].id == "touchdown#6"


def test_literals():
    m = parse('mission "m" { flow { takeoff(altitude = 1) '
              'fly_to(target = point(1, -2.5, 3e1)) touchdown() } }')
    assert m.nodes[1].param_dict()["target"] == Point(1.0, -2.5, 30.0)


def test_string_escapes_round_trip():
    src = ('mission "m" { flow { takeoff(altitude=1.0) { read_sensor(name = "a\\"b\\\\c\\u00e9") } '
           'touchdown() } }')
    m = parse(src)
    assert m.nodes[0].embedded_actions[0].param_dict()["name"] == 'a"b\\cé'
    assert parse(format_mission(m)) == m


def test_comparators_and_bool_literal():
    for op in ("==", "!=", "<", "<=", ">", ">="):
        src = ('mission "m" { flow { takeoff(altitude=1.0) { s: read_sensor(name="x") } '
               f'if s {op} 2.0 -> d else -> d d: touchdown() }} }}')
        m = parse(src)
        assert m.nodes[1].condition.comparator is Comparator(op)
    m = parse('mission "m" { flow { takeoff(altitude=1.0) { s: read_sensor(name="x") } '
              'if threshold_exceeded(s, limit = 3.0) == true -> d else -> d d: touchdown() } }')
    cond = m.nodes[1].condition
    assert cond.reference_value is True
    assert cond.processing_chain[0].param_dict() == {"limit": 3.0}


def test_comments_and_whitespace_ignored():
    src = "// lead\nmission \"m\" {\n  flow { // inline\n takeoff(altitude=10.0)\n\n touchdown() }\n}\n"
    assert parse(src) == parse(MINIMAL)


@pytest.mark.parametrize("src,code", [
    ('mission "m" { flow { takeoff(altitude=10.0 touchdown() } }', "P001"),
    ('mission "m" { flow { takeoff(altitude=10.0) fly_around() touchdown() } }', "P002"),
    ('mission "m" { banner { } flow { takeoff(altitude=10.0) touchdown() } }', "P002"),
    ('mission "m" { flow { takeoff(altitude=10.0) touchdown() }', "P003"),
    ('mission "m" { flow { takeoff(altitude=10.0) { read_sensor(name="x) } touchdown() } }', "P003"),
    ('mission "m" { flow { hover(duration_s=1.0) touchdown() } }', "P004"),
    ('mission "m" { flow { } }', "P004"),
    ("", "P001"),
])
def test_parse_errors(src, code):
    assert code in codes(parse(src))


def test_invalid_utf8_is_a_diagnostic():
    assert codes(parse(b'mission "m" { \xff }')) == ["P001"]


def test_bom_accepted():
    assert isinstance(parse("﻿" + MINIMAL), Mission)


def test_parse_or_raise():
    assert parse_or_raise(MINIMAL).name == "m"
    with pytest.raises(ValueError):
        parse_or_raise("nonsense")


def test_tokenizer_positions():
    toks = tokenize('mission "m"\n  { }')
    assert [(t.line, t.column) for t in toks[:4]] == [(1, 1), (1, 9), (2, 3), (2, 5)]


@pytest.mark.parametrize("path", FAULT_MISSIONS, ids=lambda p: p.name)
def test_structural_faults_rejected_by_parser(path):
    code = fault_code(path)
    result = parse(path.read_bytes())
    if code[0] in "PM":
        assert set(codes(result)) == {code}
    else:
        assert isinstance(result, Mission)


# Formatter

def test_format_minimal():
    assert format_mission(parse(MINIMAL)) == (
        'mission "m" {\n  flow {\n    takeoff(altitude = 10.0)\n    touchdown()\n  }\n}\n')


def test_format_period_canonical():
    src = ('mission "m" { parallel p every 60 s { take_picture() } '
           'flow { takeoff(altitude=10.0) hover(duration_s=120) parallel p touchdown() } }')
    text = format_mission(parse(src))
    assert "parallel p every 60.0s {" in text


def test_crop_survey_golden(crop):
    assert format_mission(crop) == (CORPUS / "crop_survey.msn").read_text()


@pytest.mark.parametrize("path", [p for p in ALL_MISSIONS if isinstance(parse(p.read_bytes()), Mission)],
                         ids=lambda p: p.name)
def test_corpus_is_canonical(path):
    text = path.read_text()
    m = load_mission(path)
    assert format_mission(m) == text
    assert parse(format_mission(m)) == m


# Fuzz and span properties

def _within(d: Diagnostic, text: str) -> bool:
    lines = text.split("\n")
    if not 1 <= d.line <= len(lines):
        return False
    return 1 <= d.column <= len(lines[d.line - 1]) + 1


@settings(max_examples=400, deadline=None)
@given(st.binary(max_size=300))
def test_parse_never_crashes_on_bytes(data):
    result = parse(data)
    if not isinstance(result, Mission):
        assert result and all(isinstance(d, Diagnostic) for d in result)
        assert any(d.is_error for d in result)


ALPHABET = list('missionflowtakeofftouchdownhoverfly_toif else->{}()=,:."0123456789 \n') + [
    "mission", "flow", "takeoff", "touchdown", "hover", "fly_to", "if", "else", "->", "parallel",
    "filter", "with", "every", "until", "point", "rect", "true", "false", "==", "<", '"x"',
]


@settings(max_examples=400, deadline=None)
@given(st.lists(st.sampled_from(ALPHABET), max_size=60).map(" ".join))
def test_parse_token_soup(text):
    result = parse(text)
    if isinstance(result, Mission):
        assert format_mission(parse(format_mission(result))) == format_mission(result)
    else:
        for d in result:
            assert _within(d, text), (d, text)


def _mutations(text: str):
    for i in range(0, len(text), 7):
        yield text[:i] + text[i + 1:]
        yield text[:i] + "}" + text[i:]


@pytest.mark.parametrize("path", VALID_MISSIONS, ids=lambda p: p.name)
def test_spans_in_bounds_for_corrupted_corpus(path):
    text = path.read_text()
    for variant in _mutations(text):
        result = parse(variant)
        if not isinstance(result, Mission):
            for d in result:
                assert _within(d, variant)
