"""`skymission` command-line entry point."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analyzer import analyze
from .codegen import gen_dot, gen_flightscript
from .diagnostics import Diagnostic, sort_diagnostics
from .formatter import format_mission
from .model import Mission
from .parser import parse
from .registry import Registry, RegistryError, builtin_catalog, load_extensions
from .sim import SimConfig, load_scenario, run
from .sim.scenario import ScenarioError

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_IO = 3

ACTIONS_ENV = "SKYMISSION_ACTIONS"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.format_usage()}{self.prog}: error: {message}", EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="skymission", description="Mission language toolchain for quadrotor missions.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    check = sub.add_parser("check", help="parse and analyze a mission")
    check.add_argument("mission")
    check.add_argument("--json", action="store_true", help="machine-readable report")

    r = sub.add_parser("run", help="simulate a mission against a scenario")
    r.add_argument("mission")
    r.add_argument("--scenario", required=True)
    r.add_argument("--trace", help="write the JSON Lines trace here")
    r.add_argument("--max-time", type=float, default=SimConfig.max_sim_time)

    g = sub.add_parser("gen", help="emit the flight script")
    g.add_argument("mission")
    g.add_argument("--out")

    graph = sub.add_parser("graph", help="emit a Graphviz DOT graph")
    graph.add_argument("mission")
    graph.add_argument("--out")

    fmt = sub.add_parser("fmt", help="print the canonical form")
    fmt.add_argument("mission")
    fmt.add_argument("--write", action="store_true", help="rewrite the file in place")
    return p


def load_registry() -> Registry:
    reg = builtin_catalog()
    path = os.environ.get(ACTIONS_ENV)
    if path:
        try:
            reg = load_extensions(reg, path)
        except OSError as exc:
            raise CliError(f"cannot read {ACTIONS_ENV} file: {exc}", EXIT_IO) from exc
        except RegistryError as exc:
            raise CliError(f"{path}: {exc}", EXIT_DIAGNOSTICS) from exc
    return reg


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from exc


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from exc


def _load(path: str, reg: Registry) -> tuple[Mission | None, list[Diagnostic]]:
    result = parse(_read(path))
    if not isinstance(result, Mission):
        return None, sort_diagnostics(result)
    return result, analyze(result, reg).diagnostics


def _print_diagnostics(path: str, diags: list[Diagnostic], out) -> None:
    for d in diags:
        print(d.render(path), file=out)


def _summary(diags: list[Diagnostic]) -> str:
    errors = sum(d.is_error for d in diags)
    warnings = len(diags) - errors
    return f"{errors} error{'s' if errors != 1 else ''}, {warnings} warning{'s' if warnings != 1 else ''}"


def _require_valid(path: str, reg: Registry, stderr) -> Mission:
    mission, diags = _load(path, reg)
    if mission is None or any(d.is_error for d in diags):
        _print_diagnostics(path, diags, stderr)
        raise CliError(_summary(diags), EXIT_DIAGNOSTICS)
    return mission


def cmd_check(args, reg, stdout, stderr) -> int:
    mission, diags = _load(args.mission, reg)
    failed = mission is None or any(d.is_error for d in diags)
    if args.json:
        report = {
            "file": args.mission,
            "diagnostics": [d.to_dict() for d in diags],
            "errors": sum(d.is_error for d in diags),
            "warnings": sum(not d.is_error for d in diags),
        }
        print(json.dumps(report, indent=2, sort_keys=True), file=stdout)
    else:
        _print_diagnostics(args.mission, diags, stdout)
        print(_summary(diags), file=stdout)
    return EXIT_DIAGNOSTICS if failed else EXIT_OK


def cmd_run(args, reg, stdout, stderr) -> int:
    mission = _require_valid(args.mission, reg, stderr)
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        raise CliError(f"cannot read {args.scenario}: {exc.strerror}", EXIT_IO) from exc
    except ScenarioError as exc:
        raise CliError(f"invalid scenario {args.scenario}: {exc}", EXIT_IO) from exc
    trace = run(mission, scenario, reg, SimConfig(max_sim_time=args.max_time))
    if args.trace:
        _write(args.trace, trace.to_jsonl())
    outcome = trace.outcome
    line = outcome.status if outcome.reason is None else f"{outcome.status}: {outcome.reason}"
    print(line, file=stdout)
    return EXIT_DIAGNOSTICS if outcome.status == "Error" else EXIT_OK


def cmd_gen(args, reg, stdout, stderr) -> int:
    text = gen_flightscript(_require_valid(args.mission, reg, stderr), reg).text
    if args.out:
        _write(args.out, text)
    else:
        stdout.write(text)
    return EXIT_OK


def cmd_graph(args, reg, stdout, stderr) -> int:
    text = gen_dot(_require_valid(args.mission, reg, stderr))
    if args.out:
        _write(args.out, text)
    else:
        stdout.write(text)
    return EXIT_OK


def cmd_fmt(args, reg, stdout, stderr) -> int:
    result = parse(_read(args.mission))
    if not isinstance(result, Mission):
        _print_diagnostics(args.mission, sort_diagnostics(result), stderr)
        return EXIT_DIAGNOSTICS
    text = format_mission(result)
    if args.write:
        _write(args.mission, text)
    else:
        stdout.write(text)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "run": cmd_run, "gen": cmd_gen, "graph": cmd_graph, "fmt": cmd_fmt}


def run_cli(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        reg = load_registry()
        return COMMANDS[args.command](args, reg, stdout, stderr)
    except CliError as exc:
        print(str(exc), file=stderr)
        return exc.code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
