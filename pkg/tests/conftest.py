import numpy as np
import pytest

# criterion number -> list of (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}")
    return passed


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        items = ACCEPTANCE_RESULTS[key]
        ok = all(p for p, _ in items)
        detail = "; ".join(d for _, d in items)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
