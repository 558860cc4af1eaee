import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=100
)
settings.load_profile("default")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Append a PASS/FAIL line that is echoed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'} {title}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
