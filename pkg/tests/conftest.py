import numpy as np
import pytest

from qpronoun.data import Entry
from qpronoun.lexicon import bundled_lexicon
from qpronoun.parser import parse_discourse

STUDENTS_S1 = "The students read the books."
STUDENTS_S2 = "They were learning."


@pytest.fixture(scope="session")
def lex():
    return bundled_lexicon()


@pytest.fixture(scope="session")
def students_pd(lex):
    return parse_discourse(STUDENTS_S1, STUDENTS_S2, lex)


@pytest.fixture
def students_entry():
    return Entry(STUDENTS_S1, STUDENTS_S2, "They", "students", 1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_params(symbols, rng):
    return {s: float(rng.uniform(0, 2 * np.pi)) for s in symbols}


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
