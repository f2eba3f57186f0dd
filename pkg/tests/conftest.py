"""Suite-wide fixtures: the acceptance scorecard.

test_acceptance.py registers one line per criterion; the terminal summary
prints the whole scorecard so a plain `pytest -v` run shows each PASS/FAIL
with its measured evidence, whether or not the run stopped early.
"""

import pytest


class _Scorecard:
    def __init__(self):
        self.lines = {}

    def add(self, number, label, ok, detail=""):
        word = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        self.lines[number] = f"ACCEPTANCE {number:02d} {word} - {label}{suffix}"


_CARD = _Scorecard()


@pytest.fixture(scope="session")
def scorecard():
    return _CARD


def pytest_terminal_summary(terminalreporter):
    if not _CARD.lines:
        return
    terminalreporter.section("acceptance scorecard")
    for k in sorted(_CARD.lines):
        terminalreporter.write_line(_CARD.lines[k])
