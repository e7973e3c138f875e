import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prodnet import toy  # noqa: E402
from prodnet.dynamics import Params  # noqa: E402


@pytest.fixture(scope="session")
def toy_econ():
    return toy.toy_economy()


@pytest.fixture(scope="session")
def toy_attrs():
    return toy.toy_attributes()


@pytest.fixture(scope="session")
def toy_inputs():
    return toy.generate()


@pytest.fixture
def params():
    return Params()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{number}] {detail}")
