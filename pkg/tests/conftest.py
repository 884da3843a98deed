import pytest

from resonator_feshbach import figure_system
from resonator_feshbach.model import ArrayParams


@pytest.fixture
def fig_sys():
    """Reflection-figure parameters with g_A = 0.5, Omega = 2.5."""
    return figure_system(controller_level=2.5, coupling_a=0.5)


@pytest.fixture
def arm_b():
    return ArrayParams(omega=1.0, hopping=0.5, coupling=0.7)



_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line for the acceptance summary and return the verdict."""

    def _record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
