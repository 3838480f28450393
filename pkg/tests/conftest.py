import pytest

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""
    def record(criterion: int, passed: bool, detail: str):
        ACCEPTANCE_RESULTS[criterion] = (bool(passed), detail)
        print(f"C{criterion:<2} {'PASS' if passed else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[c]
        terminalreporter.write_line(f"C{c:<2} {'PASS' if ok else 'FAIL'}  {detail}")
