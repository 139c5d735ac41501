"""Recursive-descent parser for `.msn` mission sources."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .diagnostics import Diagnostic, Severity
from .model import (
    ROUTING_KEYWORDS,
    ActionInstance,
    Comparator,
    Condition,
    Edge,
    EdgeLabel,
    FilterDecl,
    Literal,
    Mission,
    MissionError,
    Node,
    NodeKind,
    ParallelDecl,
    Point,
    Rect,
    SourceSpan,
    Until,
    build_mission,
)

KEYWORDS = {
    "mission", "filter", "parallel", "every", "until", "flow", "with",
    "if", "else", "true", "false", "point", "rect",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v]+|//[^\n]*)
  | (?P<number>-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<open_string>")
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|==|!=|<=|>=|[{}(),=:<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # id, keyword, number, string, op, eof
    text: str
    value: object
    line: int
    column: int
    end_line: int
    end_column: int


class ParseError(Exception):
    def __init__(self, code: str, message: str, line: int, column: int):
        super().__init__(message)
        self.diagnostic = Diagnostic(code, Severity.ERROR, message, line, column)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, col = 1, 1
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError("P001", f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "open_string":
            raise ParseError("P003", "unterminated string literal", line, col)
        nl = text.count("\n")
        if nl:
            end_line, end_col = line + nl, len(text) - text.rfind("\n")
        else:
            end_line, end_col = line, col + len(text)
        if kind != "ws":
            value: object = text
            if kind == "number":
                value = float(text)
                if not math.isfinite(value):
                    raise ParseError("P001", f"number {text} is out of range", line, col)
            elif kind == "string":
                try:
                    value = json.loads(text)
                except ValueError:
                    raise ParseError("P001", f"invalid escape in string {text}", line, col) from None
            elif kind == "id" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, text, value, line, col, end_line, end_col - 1))
        line, col = end_line, end_col
        pos = m.end()
    tokens.append(Token("eof", "", None, line, col, line, col))
    return tokens


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.depth: list[Token] = []  # open braces, for P003

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "keyword") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, expected: str) -> ParseError:
        t = self.tok
        if t.kind == "eof" and self.depth:
            opener = self.depth[-1]
            return ParseError("P003", f"block opened at {opener.line}:{opener.column} is never closed",
                              t.line, t.column)
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError("P001", f"expected {expected}, found {found}", t.line, t.column)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"'{text}'")
        t = self.advance()
        if text == "{":
            self.depth.append(t)
        elif text == "}":
            self.depth.pop()
        return t

    def expect_id(self, what: str = "identifier") -> Token:
        if self.tok.kind != "id":
            raise self.error(what)
        return self.advance()

    def span(self, start: Token) -> SourceSpan:
        end = self.tokens[self.pos - 1] if self.pos > 0 else start
        return SourceSpan(start.line, start.column, end.end_line, end.end_column)

    # grammar

    def parse_mission(self) -> Mission:
        if not self.at("mission"):
            if self.tok.kind == "id":
                raise ParseError("P002", f"unknown keyword '{self.tok.text}', expected 'mission'",
                                 self.tok.line, self.tok.column)
            raise self.error("'mission'")
        self.advance()
        if self.tok.kind != "string":
            raise self.error("mission name string")
        name = self.advance().value
        self.expect("{")
        filters: list[FilterDecl] = []
        parallels: list[ParallelDecl] = []
        while not self.at("flow"):
            if self.at("filter"):
                filters.append(self.parse_filter())
            elif self.at("parallel"):
                parallels.append(self.parse_parallel())
            elif self.tok.kind == "id":
                raise ParseError("P002", f"unknown keyword '{self.tok.text}' in mission body",
                                 self.tok.line, self.tok.column)
            else:
                raise self.error("'filter', 'parallel' or 'flow'")
        nodes, edges = self.parse_flow()
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.error("end of input")
        try:
            return build_mission(name, nodes, edges, filters, parallels)
        except MissionError as exc:
            span = exc.span
            line, col = (span.line, span.column) if span else (1, 1)
            raise ParseError(exc.code, exc.message, line, col) from None

    def parse_filter(self) -> FilterDecl:
        start = self.advance()
        name = self.expect_id("filter name").text
        actions = self.parse_action_block()
        return FilterDecl(name, actions, self.span(start))

    def parse_parallel(self) -> ParallelDecl:
        start = self.advance()
        name = self.expect_id("parallel block name").text
        period = None
        if self.at("every"):
            self.advance()
            if self.tok.kind != "number":
                raise self.error("period in seconds")
            period = self.advance().value
            unit = self.expect_id("'s'")
            if unit.text != "s":
                raise ParseError("P001", f"expected 's' after period, found {unit.text!r}", unit.line, unit.column)
        actions = self.parse_action_block()
        until = None
        if self.at("until"):
            self.advance()
            cond = self.parse_condition()
            self.expect("->")
            target = self.expect_id("until target label").text
            until = Until(cond, target)
        return ParallelDecl(name, actions, period, until, self.span(start))

    def parse_action_block(self) -> tuple[ActionInstance, ...]:
        self.expect("{")
        actions = [self.parse_action()]
        while not self.at("}"):
            actions.append(self.parse_action())
        self.expect("}")
        return tuple(actions)

    def parse_action(self) -> ActionInstance:
        start = self.tok
        label = None
        if self.tok.kind == "id" and self.peek().kind == "op" and self.peek().text == ":":
            label = self.advance().text
            self.advance()
        name = self.expect_id("action name").text
        params = self.parse_call_args()
        return ActionInstance(name, params, label, self.span(start))

    def parse_call_args(self) -> tuple[tuple[str, Literal], ...]:
        self.expect("(")
        params = ()
        if not self.at(")"):
            params = self.parse_args()
        self.expect(")")
        return params

    def parse_args(self) -> tuple[tuple[str, Literal], ...]:
        args = [self.parse_arg()]
        while self.at(","):
            self.advance()
            args.append(self.parse_arg())
        return tuple(args)

    def parse_arg(self) -> tuple[str, Literal]:
        key = self.expect_id("parameter name").text
        self.expect("=")
        return key, self.parse_literal()

    def parse_literal(self) -> Literal:
        t = self.tok
        if t.kind in ("number", "string"):
            self.advance()
            return t.value
        if self.at("true") or self.at("false"):
            self.advance()
            return t.text == "true"
        if self.at("point") or self.at("rect"):
            self.advance()
            count = 3 if t.text == "point" else 4
            self.expect("(")
            nums = []
            for i in range(count):
                if i:
                    self.expect(",")
                if self.tok.kind != "number":
                    raise self.error("number")
                nums.append(self.advance().value)
            self.expect(")")
            return Point(*nums) if count == 3 else Rect(*nums)
        raise self.error("literal")

    def parse_condition(self) -> Condition:
        start = self.tok
        calls: list[Token] = []
        while True:
            name = self.expect_id("result label or processing action")
            if self.at("("):
                self.advance()
                calls.append(name)
            else:
                result_ref = name.text
                break
        chain: list[ActionInstance] = []
        for call in reversed(calls):
            params = ()
            if self.at(","):
                self.advance()
                params = self.parse_args()
            self.expect(")")
            chain.append(ActionInstance(call.text, params, None, self.span(call)))
        if self.tok.kind != "op" or self.tok.text not in {c.value for c in Comparator}:
            raise self.error("comparison operator")
        comparator = Comparator(self.advance().text)
        value = self.parse_literal()
        return Condition(result_ref, tuple(chain), comparator, value, self.span(start))

    def parse_flow(self) -> tuple[list[Node], list[Edge]]:
        self.expect("flow")
        self.expect("{")
        steps: list[Node] = []
        targets: list[tuple[str, str, str]] = []
        while not self.at("}"):
            steps.append(self.parse_step(len(steps) + 1, targets))
        close = self.tok
        if not steps:
            raise ParseError("P004", "flow is empty; it must run from takeoff() to touchdown()",
                             close.line, close.column)
        if steps[0].kind is not NodeKind.TAKEOFF:
            first = steps[0].span
            raise ParseError("P004", "flow must start with takeoff()", first.line, first.column)
        if steps[-1].kind is not NodeKind.TOUCHDOWN:
            raise ParseError("P004", "flow must end with touchdown()", close.line, close.column)
        self.expect("}")

        edges: list[Edge] = []
        for i, node in enumerate(steps):
            if node.kind.is_routing and node.kind is not NodeKind.TOUCHDOWN:
                edges.append(Edge(node.id, steps[i + 1].id, EdgeLabel.NEXT))
        for source, label, target in targets:
            edges.append(Edge(source, target, EdgeLabel(label)))
        return steps, edges

    def parse_step(self, index: int, targets: list) -> Node:
        start = self.tok
        label = None
        if self.tok.kind == "id" and self.peek().kind == "op" and self.peek().text == ":":
            label = self.advance().text
            self.advance()
        if self.at("if"):
            self.advance()
            cond = self.parse_condition()
            self.expect("->")
            t_true = self.expect_id("branch target label").text
            self.expect("else")
            self.expect("->")
            t_false = self.expect_id("branch target label").text
            node_id = label or f"if#{index}"
            targets.append((node_id, "True", t_true))
            targets.append((node_id, "False", t_false))
            return Node(node_id, NodeKind.BRANCH, condition=cond, labeled=label is not None,
                        span=self.span(start))

        kw = self.tok
        if kw.kind != "id":
            raise self.error("flow step")
        if kw.text not in ROUTING_KEYWORDS:
            raise ParseError("P002", f"unknown routing element '{kw.text}'", kw.line, kw.column)
        self.advance()
        kind = ROUTING_KEYWORDS[kw.text]
        params = self.parse_call_args()
        embedded: tuple[ActionInstance, ...] = ()
        if self.at("{"):
            embedded = self.parse_action_block()
        filter_ref = None
        if self.at("with"):
            self.advance()
            self.expect("filter")
            filter_ref = self.expect_id("filter name").text
        parallel_refs: list[str] = []
        if self.at("parallel"):
            self.advance()
            parallel_refs.append(self.expect_id("parallel block name").text)
            while self.at(","):
                self.advance()
                parallel_refs.append(self.expect_id("parallel block name").text)
        return Node(
            label or f"{kind.value}#{index}",
            kind,
            params,
            embedded,
            filter_ref,
            tuple(parallel_refs),
            labeled=label is not None,
            span=self.span(start),
        )


def parse(source: str | bytes) -> Mission | list[Diagnostic]:
    """Parse mission text; returns the Mission or a non-empty list of error diagnostics."""
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            line = source[:exc.start].count(b"\n") + 1
            col = exc.start - (source.rfind(b"\n", 0, exc.start) + 1) + 1
            return [Diagnostic("P001", Severity.ERROR, "source is not valid UTF-8", line, col)]
    if source.startswith("﻿"):
        source = source[1:]
    try:
        return Parser(source).parse_mission()
    except ParseError as exc:
        return [exc.diagnostic]


def parse_or_raise(source: str | bytes) -> Mission:
    result = parse(source)
    if isinstance(result, Mission):
        return result
    raise ValueError("; ".join(d.render() for d in result))
