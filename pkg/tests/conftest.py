import time

import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}
_CRITERIA = range(1, 11)


class _Recorder:
    """Collects one verdict per acceptance criterion; printed in the terminal summary."""

    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def __call__(self, number: int, ok: bool, detail: str, budget: float | None = None) -> bool:
        took = self.elapsed()
        if budget is not None and took > budget:
            ok = False
            detail += f"; runtime {took:.1f}s exceeds {budget:.0f}s"
        else:
            detail += f"; {took:.1f}s"
        _RESULTS[number] = (bool(ok), detail)
        return bool(ok)


@pytest.fixture
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in _CRITERIA:
        if k not in _RESULTS:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
            continue
        ok, detail = _RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
