import pytest

_PARTS = {}  # criterion -> [(part, ok, detail)]
_NOTES = {}  # criterion -> [text]


class Verdicts:
    """Collects per-criterion outcomes; a criterion passes only if every part does."""

    def __init__(self, capsys):
        self._capsys = capsys

    def record(self, criterion, part, ok, detail):
        _PARTS.setdefault(criterion, []).append((part, ok, detail))
        with self._capsys.disabled():
            print(f"\n    [{'ok' if ok else 'FAILED'}] criterion {criterion} {part}: {detail}")
        return ok

    def note(self, criterion, text):
        _NOTES.setdefault(criterion, []).append(text)
        with self._capsys.disabled():
            print(f"\n    [note] criterion {criterion}: {text}")


@pytest.fixture
def verdicts(capsys):
    return Verdicts(capsys)


def pytest_terminal_summary(terminalreporter):
    if not _PARTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_PARTS):
        parts = _PARTS[crit]
        failed = [p[0] for p in parts if not p[1]]
        tail = f"  (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{'FAIL' if failed else 'PASS'} criterion {crit}{tail}")
        for text in _NOTES.get(crit, []):
            tr.write_line(f"     note: {text}")
