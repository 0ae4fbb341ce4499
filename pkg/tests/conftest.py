import numpy as np
import pytest


def rand_herm(D, seed=0, trace_one=True):
    """Random Hermitian matrix, optionally positive with unit trace."""
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    rho = Z @ Z.conj().T
    rho = 0.5 * (rho + rho.conj().T)  # exactly Hermitian entry by entry
    if trace_one:
        rho /= np.trace(rho).real
    return rho


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_RESULTS = []


def record_acceptance(name, passed, detail=""):
    _ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
