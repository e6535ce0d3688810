import pytest

_ACCEPTANCE: dict[int, list[str]] = {}


@pytest.fixture
def accept():
    """record(n, ok, detail): log one acceptance line, then assert it."""

    def record(n: int, ok: bool, detail: str):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE.setdefault(n, []).append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        for line in _ACCEPTANCE[n]:
            terminalreporter.write_line(line)
