from pathlib import Path

import pytest

from etymograph.tei import parse_file

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
ALL_FIXTURES = sorted(FIXTURES.glob("*.xml"))

# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture
def load():
    def _load(name):
        doc, _ = parse_file(fixture_path(name))
        return doc

    return _load


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
