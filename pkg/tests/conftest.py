"""Collects per-criterion acceptance verdicts and prints them after the run."""

import pytest

_VERDICTS: list[tuple[str, bool, str]] = []
_NOTES: list[str] = []


class Recorder:
    def verdict(self, name: str, ok: bool, detail: str) -> None:
        _VERDICTS.append((name, bool(ok), detail))

    def note(self, text: str) -> None:
        _NOTES.append(text)


@pytest.fixture(scope="session")
def acceptance():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok, detail in _VERDICTS:
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if _NOTES:
        tr.section("acceptance notes")
        for text in _NOTES:
            tr.write_line(text)
