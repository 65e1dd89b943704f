import pytest

_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the end-of-run summary."""
    lines = request.config.stash.setdefault(_KEY, [])

    def record(number, title, ok, detail):
        lines.append((number, f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
