"""Collects acceptance outcomes and prints one summary line per criterion."""
import pytest

_RESULTS: dict[int, list] = {}
_TITLES: dict[int, str] = {}


class Acceptance:
    def title(self, n: int, text: str):
        _TITLES[n] = text

    def record(self, n: int, part: str, ok: bool, detail: str = ""):
        _RESULTS.setdefault(n, []).append((part, bool(ok), detail))


@pytest.fixture(scope="session")
def acceptance():
    return Acceptance()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_TITLES.keys() | _RESULTS.keys()):
        parts = _RESULTS.get(n, [])
        ok = bool(parts) and all(p[1] for p in parts)
        status = "PASS" if ok else ("FAIL" if parts else "NOT RUN")
        tr.write_line(f"criterion {n} [{status}] {_TITLES.get(n, '')}")
        for part, good, detail in parts:
            tr.write_line(f"    {'ok  ' if good else 'FAIL'} {part}: {detail}")
