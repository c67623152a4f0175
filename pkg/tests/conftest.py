import pytest

_verdicts: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion."""
    name = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str):
        _verdicts[name] = (bool(ok), detail)
        return ok

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_verdicts, key=lambda s: int(s.split()[0])):
        ok, detail = _verdicts[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
