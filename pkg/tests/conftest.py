import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Print one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def emit(number, name, ok, detail=""):
        line = f"acceptance {number:>2} {'PASS' if ok else 'FAIL'}: {name}" + (f" [{detail}]" if detail else "")
        print(line)
        lines.append(line)
        assert ok, line

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
