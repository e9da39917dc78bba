import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def record_criterion():
    """Store one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{number:2d}  {'PASS' if ok else 'FAIL'}  {title}  {detail}")
