import sys
from pathlib import Path

import pytest

from ucqa.parser import parse_constraints, parse_instance, parse_query, parse_schema

FIXTURES = Path(__file__).parent / "fixtures"


class Case:
    """A fixture directory: schema, constraints and any instance or query file in it."""

    def __init__(self, name):
        self.dir = FIXTURES / name
        self.schema = parse_schema((self.dir / "schema.txt").read_text())
        cpath = self.dir / "constraints.txt"
        self.f = parse_constraints(cpath.read_text(), self.schema) if cpath.exists() else []

    def path(self, name):
        return str(self.dir / name)

    def inst(self, name="instance.txt"):
        return parse_instance((self.dir / name).read_text(), self.schema)

    def facts(self, text):
        return parse_instance(text, self.schema)

    def fact(self, text):
        (x,) = parse_instance(text + ".", self.schema)
        return x

    def query(self, text):
        return parse_query(text, self.schema)


def load(name):
    return Case(name)


@pytest.fixture
def diagnosis():
    return Case("diagnosis")


@pytest.fixture
def coffee():
    return Case("coffee")


@pytest.fixture
def chain():
    return Case("chain")


@pytest.fixture
def lookup():
    return Case("lookup")


@pytest.fixture
def walk():
    return Case("walk")


@pytest.fixture
def ring():
    return Case("ring")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
