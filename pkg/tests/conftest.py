from __future__ import annotations

import json
from pathlib import Path

import pytest

from skymission.model import Mission
from skymission.parser import parse
from skymission.registry import builtin_catalog
from skymission.sim import load_scenario

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FAULTS = CORPUS / "faults"

VALID_MISSIONS = sorted(CORPUS.glob("*.msn"))
FAULT_MISSIONS = sorted(FAULTS.glob("*.msn"))
ALL_MISSIONS = VALID_MISSIONS + FAULT_MISSIONS


def fault_code(path: Path) -> str:
    return path.name.split("_", 1)[0]


def load_mission(path: Path | str) -> Mission:
    result = parse(Path(path).read_bytes())
    assert isinstance(result, Mission), result
    return result


def corpus_pairs() -> list[tuple[str, str]]:
    table = json.loads((CORPUS / "pairs.json").read_text())
    return [(m, s) for m, scenarios in table.items() for s in scenarios]


def scenario(name: str):
    return load_scenario(CORPUS / name)


@pytest.fixture(scope="session")
def reg():
    return builtin_catalog()


@pytest.fixture(scope="session")
def crop():
    return load_mission(CORPUS / "crop_survey.msn")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
