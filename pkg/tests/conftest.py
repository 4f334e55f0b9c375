import pytest

_ACCEPTANCE_LINES: list[str] = []


class AcceptanceRecorder:
    def __init__(self, lines):
        self._lines = lines

    def record(self, criterion: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        self._lines.append(f"[{status}] criterion {criterion}: {detail}")

    def skip(self, criterion: int, detail: str) -> None:
        self._lines.append(f"[SKIPPED] criterion {criterion}: {detail}")
        pytest.skip(detail)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder(_ACCEPTANCE_LINES)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
