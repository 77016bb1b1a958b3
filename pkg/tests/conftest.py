import numpy as np
import pytest

from ams1d.meshing import CoarseningMap
from ams1d.micro_assembly import MicroSystem, stiffness_from_magnitudes
from ams1d.meshing import uniform_micro_mesh
from ams1d.tridiag import TridiagonalSystem

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(label, passed, detail=""):
        _ACCEPTANCE.append((label, bool(passed), detail))
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  {detail}".rstrip())


def raw_micro(c, rhs=None) -> MicroSystem:
    """Micro system on a uniform mesh with off-diagonal magnitudes ``c``."""
    c = np.asarray(c, dtype=np.float64)
    diag, lower = stiffness_from_magnitudes(c)
    if rhs is None:
        rhs = np.zeros(c.size + 1)
    return MicroSystem(TridiagonalSystem(diag, lower, rhs), uniform_micro_mesh(c.size))


def random_coarsening(rng, n_micro, n_macro) -> CoarseningMap:
    inner = np.sort(rng.choice(np.arange(1, n_micro), size=n_macro - 1, replace=False))
    return CoarseningMap(np.concatenate(([0], inner, [n_micro])))


def random_magnitudes(rng, n):
    """Log-uniform magnitudes spanning four decades."""
    return 10.0 ** rng.uniform(-2, 2, size=n)
