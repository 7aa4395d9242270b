import random

import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def rng():
    return random.Random(20241016)


@pytest.fixture
def report():
    """Record one pass/fail line for the terminal summary."""
    def add(number: int, ok: bool, text: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
