import os
import shutil
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hullinv.smt import BuiltinOracle, SmtLibOracle  # noqa: E402

HAVE_Z3 = shutil.which("z3") is not None


@pytest.fixture
def builtin():
    with BuiltinOracle(timeout=30) as o:
        yield o


@pytest.fixture
def z3proc():
    if not HAVE_Z3:
        pytest.skip("z3 binary not on PATH")
    with SmtLibOracle("z3 -in", timeout=30) as o:
        yield o


@pytest.fixture(params=["builtin", "z3"])
def oracle(request):
    if request.param == "builtin":
        with BuiltinOracle(timeout=30) as o:
            yield o
    else:
        if not HAVE_Z3:
            pytest.skip("z3 binary not on PATH")
        with SmtLibOracle("z3 -in", timeout=30) as o:
            yield o


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
