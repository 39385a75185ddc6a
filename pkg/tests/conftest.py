import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record the outcome of an acceptance criterion for the summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        line = f"[{'PASS' if passed else 'FAIL'}] {number}. {title}"
        tr.write_line(line + (f"  ({detail})" if detail else ""))
