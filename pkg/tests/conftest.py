import pytest

_LINES: dict[int, str] = {}


class Criterion:
    """Collects named checks for one acceptance criterion and reports once."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, ok: bool, what: str) -> None:
        (self.notes if ok else self.failures).append(what)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, AssertionError):
            self.failures.append(f"error: {exc_type.__name__}: {exc}")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures[:4]) if self.failures else f"{len(self.notes)} checks"
        _LINES[self.number] = f"criterion {self.number:2d} {status}  {self.title}  [{detail}]"
        print(_LINES[self.number])
        if exc is None:
            assert not self.failures, "; ".join(self.failures)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
