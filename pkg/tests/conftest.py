import numpy as np
import pytest

from robust_spod.transport import SnapshotMatrix, SpatialGrid, TransportOperator
from robust_spod.solvers import SpodProblem

# criterion number -> list of (check, passed, detail), filled by test_acceptance
ACCEPTANCE_LINES = {}


def record_acceptance(criterion, check, passed, detail):
    ACCEPTANCE_LINES.setdefault(criterion, []).append((check, bool(passed), detail))


def random_problem(seed, m=12, n=8, k=2, lattice=False, noise_enabled=True):
    rng = np.random.default_rng(seed)
    grid = SpatialGrid.from_interval(0.0, 1.0, m)
    times = np.arange(n, dtype=float)
    if lattice:
        shifts = [rng.integers(-2 * m, 2 * m, n) * grid.dx for _ in range(k)]
    else:
        shifts = [rng.uniform(-0.7, 0.7, n) for _ in range(k)]
    snap = SnapshotMatrix(rng.standard_normal((m, n)), grid, times)
    ops = [TransportOperator(s, grid) for s in shifts]
    return SpodProblem(snap, ops, noise_enabled=noise_enabled)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        checks = ACCEPTANCE_LINES[key]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        parts = "; ".join(f"{name} {'ok' if ok else 'FAIL'} ({detail})" for name, ok, detail in checks)
        terminalreporter.write_line(f"criterion {key}: {verdict}  {parts}")
