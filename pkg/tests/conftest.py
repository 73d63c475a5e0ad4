import numpy as np
import pytest


def random_hermitian(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def random_psd(rng, d, r=None):
    r = d if r is None else r
    a = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    return a @ a.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def qutrit_kernel_instance():
    """diag(0.7, 0.3, 0) with G coupling the first level to the kernel."""
    rho = np.diag([0.7, 0.3, 0.0]).astype(complex)
    g = np.zeros((3, 3), complex)
    g[0, 2] = g[2, 0] = 1.0
    return rho, g


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
