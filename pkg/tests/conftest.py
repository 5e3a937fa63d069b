import numpy as np
import pytest

from zeno_lab import FiniteState, Grid, GisinTwoLevel, NLSE1D, SolitonParams, soliton_state


def random_state(rng, dim, scale=None):
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    if scale is not None:
        z = z * scale
    return FiniteState(z)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def central_derivative(f, t, h):
    """Nine-point (8th-order) central difference of a vector-valued function."""
    c = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    return sum(ci * f(t + (i - 4) * h) for i, ci in enumerate(c) if ci) / h


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def default_grid():
    return Grid(-40.0, 40.0, 2048)


@pytest.fixture(scope="session")
def soliton_u2(default_grid):
    p = SolitonParams.from_eta_u(1.0, 2.0)
    return p, NLSE1D.for_soliton(p, default_grid), soliton_state(p, 0.0, default_grid)


@pytest.fixture
def ground():
    return FiniteState([1.0, 0.0])


@pytest.fixture
def gisin11():
    return GisinTwoLevel(alpha=1.0, lam=1.0, omega=0.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
