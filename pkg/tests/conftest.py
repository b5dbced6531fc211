from fractions import Fraction

import pytest

from flipdyn import Coloring, generate


@pytest.fixture
def c4():
    return generate("cycle", n=4)


@pytest.fixture
def p3():
    return generate("path", n=3)


@pytest.fixture
def reference_pair():
    # R=1, B=2, P=3, Y=4
    return Coloring((1, 2, 3, 2), 4), Coloring((4, 2, 4, 2), 4)


ALPHA = Fraction(1, 100)


# acceptance verdicts, printed once at the end of the run
VERDICTS: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for c in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[c])
