import pytest

from crossfield.model import AcademicRank, Authorship, Convention, Publication, Researcher


def make_pub(pid, authors, citations=0, year=2004, cats=("SC1",), convention="alphabetical", insts=None):
    insts = insts or ["uniA"] * len(authors)
    byline = tuple(Authorship(a, i + 1, inst) for i, (a, inst) in enumerate(zip(authors, insts)))
    return Publication(pid, year, frozenset(cats), citations, byline, Convention(convention))


def make_researcher(rid, field="MAT/05", rank=AcademicRank.ASSISTANT_PROBATIONARY, years=5.0, uda="AREA01"):
    return Researcher(rid, field, uda, rank, years, "uniA")


@pytest.fixture
def pub():
    return make_pub


@pytest.fixture
def researcher():
    return make_researcher


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
