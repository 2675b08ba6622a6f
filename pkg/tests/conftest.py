import pytest

from besovclaw.fields import Grid2D
from besovclaw.flux_entropy import burgers
from besovclaw.solver import (InitialData, aligned_shock_grid, exact_riemann, grid_for_cfl,
                              nonentropic_shock, solve_fv)


@pytest.fixture(scope="session")
def flux():
    return burgers()


@pytest.fixture(scope="session")
def sine_run(flux):
    grid = grid_for_cfl(0.0, 1.2, 0.0, 1.0, 128, 0.45, 1.0)
    return solve_fv(InitialData.sine(1.0, 1.0), flux, grid, "godunov", 0.45, "periodic")


@pytest.fixture(scope="session")
def shock_exact(flux):
    return exact_riemann(1.0, 0.0, flux, Grid2D(0.0, 1.0, -1.0, 1.0, 128, 128))


@pytest.fixture(scope="session")
def upjump(flux):
    grid = aligned_shock_grid(0.0, 1.0, flux, -1.0, 1.0, 256, 1.0)
    return nonentropic_shock(0.0, 1.0, flux, grid)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
