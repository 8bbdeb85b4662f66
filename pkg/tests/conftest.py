import numpy as np
import pytest

from detdisc.fields import GF, QQ
from detdisc.polymatroid import SubspaceTuple


@pytest.fixture
def triangle():
    """Three coordinate planes in a 3-space: span(e1,e2), span(e2,e3), span(e1,e3)."""
    return SubspaceTuple.from_generators(
        [[[1, 0, 0], [0, 1, 0]], [[0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 0, 1]]], 3, QQ)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


FIELDS = [QQ, GF(10007)]


# --- acceptance summary -------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    num = int(name.split("_")[2])
    _CRITERIA[num] = (name, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, outcome = _CRITERIA[num]
        label = name.split("_", 3)[3].replace("_", " ")
        terminalreporter.write_line(f"criterion {num:2d} {outcome}  {label}")
