import time

import pytest

_RESULTS = []


class _Recorder:
    def __init__(self, label):
        self.label = label
        self.start = time.perf_counter()

    def __call__(self, ok, detail=""):
        elapsed = time.perf_counter() - self.start
        _RESULTS.append((self.label, bool(ok), f"{detail} [{elapsed:.1f}s]"))
        return ok


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    return _Recorder(label)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_RESULTS, key=lambda r: (int("".join(c for c in r[0] if c.isdigit())), r[0])):
        terminalreporter.write_line(f"criterion {label:<4} {'PASS' if ok else 'FAIL'}  {detail}")
