import os

import pytest
import sympy as sp
from hypothesis import HealthCheck, settings

settings.register_profile(
    "formalps",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "formalps"))


@pytest.fixture
def x():
    return sp.Symbol("x")


@pytest.fixture
def k():
    from formalps.recurrence import K

    return K


@pytest.fixture(scope="session")
def newai():
    """The ``newAi``/``newAiPrime`` pair with ``f'' = x f``."""
    from formalps.expr import declare_function, lookup, register_function

    t = sp.Symbol("t")
    declare_function("newAi", 1)
    declare_function("newAiPrime", 1)
    A = register_function("newAi", [t], lookup("newAiPrime").cls(t), value_at_zero=1)
    register_function("newAiPrime", [t], t * A(t), value_at_zero=0)
    return A


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion item, if the gate ran."""
    import sys

    results = None
    for mod in list(sys.modules.values()):
        results = getattr(mod, "ACCEPTANCE_RESULTS", None)
        if results:
            break
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, (ok, seconds, detail) in results.items():
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {label:<40} {seconds:7.2f}s  {detail}")
