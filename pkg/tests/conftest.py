from pathlib import Path

import pytest

from modulobench.domains import BLOCKSWORLD, LOGISTICS, SOKOBAN, load_domain
from modulobench.instances.blocksworld import render_blocksworld_problem
from modulobench.pddl import Atom, parse_problem

GOLDEN = Path(__file__).parent / "golden"


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def four_block_problem(domain):
    """Blue (b) on orange (c); red (a), orange and yellow (d) on the table; goal: orange on blue."""
    text = render_blocksworld_problem("BW-H1", list("abcd"), [["a"], ["c", "b"], ["d"]], [Atom("on", ("c", "b"))])
    return parse_problem(text, domain)


@pytest.fixture(scope="session")
def bw():
    return load_domain(BLOCKSWORLD)


@pytest.fixture(scope="session")
def logistics():
    return load_domain(LOGISTICS)


@pytest.fixture(scope="session")
def sokoban():
    return load_domain(SOKOBAN)


@pytest.fixture(scope="session")
def h1(bw):
    return four_block_problem(bw)


@pytest.fixture(scope="session")
def rand6(bw):
    return parse_problem(golden("bw_rand_6.pddl"), bw)


@pytest.fixture(scope="session")
def rand4(bw):
    return parse_problem(golden("bw_rand_4.pddl"), bw)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
