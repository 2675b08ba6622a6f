import numpy as np
import pytest

from besovclaw.fields import Box, Grid2D, SpaceTimeField, make_bump_cutoff
from besovclaw.solver import (InitialData, aligned_shock_grid, exact_riemann, grid_for_cfl,
                              SolutionRecord, mass_history, nonentropic_shock, oleinik_check, parse_init,
                              rh_speed, riemann_solution, solve_fv, weak_residual)


def test_parse_init():
    assert parse_init("sine:1,1").bound == pytest.approx(1.0)
    assert parse_init("riemann:1,0").bound == pytest.approx(1.0)
    with pytest.raises(ValueError):
        parse_init("gauss:1")


def test_sine_cell_averages_exact():
    init = InitialData.sine(1.0, 1.0)
    edges = np.linspace(0.0, 1.0, 5)
    # average of sin(2 pi x) over [0, 1/4] is 2 / pi
    np.testing.assert_allclose(init.cell_averages(edges), [2 / np.pi, 2 / np.pi, -2 / np.pi, -2 / np.pi])


@pytest.mark.parametrize("scheme", ["godunov", "lax_friedrichs"])
def test_periodic_mass_and_max_principle(flux, scheme):
    grid = grid_for_cfl(0.0, 1.2, 0.0, 1.0, 128, 0.45, 1.0)
    rec = solve_fv(InitialData.sine(1.0, 1.0), flux, grid, scheme, 0.45, "periodic")
    mass = mass_history(rec)
    assert np.max(np.abs(mass - mass[0])) < 1e-13
    assert rec.supnorm <= 1.0


@pytest.mark.parametrize("cfl", [0.0, 1.0, 1.5])
def test_invalid_cfl(cfl):
    with pytest.raises(ValueError, match="cfl exceeded"):
        grid_for_cfl(0.0, 1.0, 0.0, 1.0, 64, cfl, 1.0)


def test_too_large_timestep_rejected(flux):
    grid = Grid2D(0.0, 1.0, 0.0, 1.0, 8, 64)
    with pytest.raises(ValueError, match="cfl exceeded"):
        solve_fv(InitialData.sine(1.0, 1.0), flux, grid)


def test_riemann_point_values(flux):
    sol = riemann_solution(1.0, 0.0, flux)
    assert sol(1.0, 0.49) == 1.0 and sol(1.0, 0.51) == 0.0
    fan = riemann_solution(-1.0, 1.0, flux)
    assert fan(2.0, 0.5) == pytest.approx(0.25)
    assert fan(2.0, -3.0) == -1.0


def test_exact_shock_is_weak_solution(flux, shock_exact):
    chi = make_bump_cutoff(Box(0.1, 0.9, -0.6, 0.8))
    assert abs(weak_residual(shock_exact, flux, chi)) < 1e-3
    # the same jump at the wrong speed fails the weak form
    grid = shock_exact.grid
    t, x = grid.mesh()
    slow = np.where(x < 0.25 * t, 1.0, 0.0)
    rec = SolutionRecord(SpaceTimeField(grid, slow), "burgers", "test", 0.0, "outflow", {})
    assert abs(weak_residual(rec, flux, chi)) > 1e-2


def test_godunov_converges_to_exact(flux):
    errs = []
    for nx in (64, 128, 256):
        grid = grid_for_cfl(0.0, 0.5, -1.0, 1.0, nx, 0.45, 1.0)
        num = solve_fv(InitialData.riemann(1.0, 0.0), flux, grid, boundary="outflow")
        ex = exact_riemann(1.0, 0.0, flux, grid)
        errs.append(np.abs(num.values[-1] - ex.values[-1]).sum() * grid.dx)
    assert errs[0] > errs[1] > errs[2]


def test_rarefaction_exact_averages(flux):
    grid = Grid2D(0.0, 1.0, -1.0, 1.0, 16, 64)
    rec = exact_riemann(-1.0, 1.0, flux, grid)
    i = grid.nt - 1
    t = grid.t_centers[i]
    inside = np.abs(grid.x_centers) < t - 2 * grid.dx
    np.testing.assert_allclose(rec.values[i, inside], grid.x_centers[inside] / t, atol=1e-12)


def test_rh_speed(flux):
    assert rh_speed(0.0, 1.0, flux) == pytest.approx(0.5)
    assert rh_speed(2.0, -1.0, flux) == pytest.approx(0.5)


def test_aligned_grid_step(flux):
    g = aligned_shock_grid(0.0, 1.0, flux, -1.0, 1.0, 256, 1.0)
    assert g.dt == pytest.approx(4 * g.dx)
    assert g.t0 == 0.0


def test_nonentropic_rejects_entropic_data(flux):
    with pytest.raises(ValueError, match="use exact_riemann"):
        nonentropic_shock(1.0, 0.0, flux, Grid2D(0.0, 1.0, -1.0, 1.0, 8, 8))


def test_oleinik_discriminates(flux, shock_exact, upjump):
    assert oleinik_check(shock_exact, 1.0).passed
    rep = oleinik_check(upjump, 1.0)
    assert not rep.passed
    assert rep.max_violation > 10.0


def test_solver_is_deterministic(flux):
    grid = grid_for_cfl(0.0, 0.6, 0.0, 1.0, 64, 0.45, 1.0)
    a = solve_fv(InitialData.sine(1.0, 1.0), flux, grid)
    b = solve_fv(InitialData.sine(1.0, 1.0), flux, grid)
    assert a.values.tobytes() == b.values.tobytes()
