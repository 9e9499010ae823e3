import os
import re
import sys

import pytest
from hypothesis import settings

from fewpaths.topology import read_topology
from fewpaths.traffic import TrafficMatrix

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("ci", max_examples=40, deadline=None)
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def sixnode():
    return read_topology(os.path.join(FIXTURES, "sixnode.txt"))


@pytest.fixture
def sixnode_tm(sixnode):
    return TrafficMatrix({(sixnode.index("S"), sixnode.index("T")): 1.0})


@pytest.fixture
def hotlink():
    return read_topology(os.path.join(FIXTURES, "hotlink.txt"))


_criteria = []


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", report.nodeid)
    if m and (report.when == "call" or report.outcome != "passed"):
        _criteria.append((int(m.group(1)), m.group(2), report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    verdicts = {}
    for num, name, outcome in _criteria:
        ok = verdicts.get((num, name), True)
        verdicts[(num, name)] = ok and outcome == "passed"
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(verdicts.items()):
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}")
