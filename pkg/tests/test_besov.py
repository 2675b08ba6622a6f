import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besovclaw.besov import (besov_fit, diff, dyadic_shifts, increment_functional, loglog_fit)
from besovclaw.fields import Box, Grid2D, SpaceTimeField, make_bump_cutoff

GRID = Grid2D(0.0, 1.0, 0.0, 1.0, 128, 256)


def _field(fn):
    t, x = GRID.mesh()
    return SpaceTimeField(GRID, np.broadcast_to(fn(t, x), (GRID.nt, GRID.nx)))


def test_diff_extends_by_zero():
    f = _field(lambda t, x: 1.0 + 0 * x)
    d = diff(f, "x", 2 * GRID.dx).values
    assert np.all(d[:, :-2] == 0.0) and np.all(d[:, -2:] == -1.0)


def test_noncommensurate_shift_rejected():
    f = _field(lambda t, x: x)
    with pytest.raises(ValueError, match="non-commensurate"):
        diff(f, "x", 1.5 * GRID.dx)


def test_support_escape():
    f = _field(lambda t, x: x)
    with pytest.raises(ValueError, match="support escape"):
        increment_functional(f, "x", 64 * GRID.dx, 2.0, Box(0.1, 0.9, 0.5, 0.9))


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("k", [1, 4, 16])
def test_linear_field_increments(p, k):
    # D^h x = h, so the functional is h^p times the window area
    f = _field(lambda t, x: x)
    box = Box(0.2, 0.8, 0.25, 0.75)
    h = k * GRID.dx
    val = increment_functional(f, "x", h, p, box).value
    n_t = np.count_nonzero((GRID.t_centers >= 0.2) & (GRID.t_centers <= 0.8))
    n_x = np.count_nonzero((GRID.x_centers >= 0.25) & (GRID.x_centers <= 0.75))
    assert val == pytest.approx(h**p * n_t * n_x * GRID.dt * GRID.dx, rel=1e-12)


def test_time_direction_uses_time_spacing():
    f = _field(lambda t, x: 2.0 * t)
    box = Box(0.2, 0.6, 0.25, 0.75)
    v1 = increment_functional(f, "t", GRID.dt, 1.0, box).value
    v4 = increment_functional(f, "t", 4 * GRID.dt, 1.0, box).value
    assert v4 == pytest.approx(4 * v1, rel=1e-12)


def test_dyadic_shifts():
    assert dyadic_shifts(0.5, 2, 16) == [1.0, 2.0, 4.0, 8.0]
    with pytest.raises(ValueError):
        dyadic_shifts(0.5, 4, 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-3.0, 3.0))
def test_loglog_fit_recovers_power(s, c):
    h = np.array([0.01, 0.02, 0.04, 0.08])
    slope, intercept = loglog_fit(h, np.exp(c) * h**s)
    assert slope == pytest.approx(s, abs=1e-9)
    assert intercept == pytest.approx(c, abs=1e-8)


def test_jump_has_slope_one():
    f = _field(lambda t, x: (x < 0.5).astype(float))
    cut = make_bump_cutoff(Box(0.2, 0.8, 0.2, 0.8))
    rep = besov_fit(f, "x", 3.0, cut, dyadic_shifts(GRID.dx, 4, 32), epsilon=0.15)
    assert rep.slope == pytest.approx(1.0, abs=0.02)
    assert rep.consistent
    assert rep.s == pytest.approx(1 / 3, abs=0.01)


def test_smooth_field_has_slope_p():
    f = _field(lambda t, x: np.sin(2 * np.pi * x))
    cut = make_bump_cutoff(Box(0.2, 0.8, 0.2, 0.8))
    rep = besov_fit(f, "x", 3.0, cut, dyadic_shifts(GRID.dx, 4, 32), epsilon=0.15)
    assert rep.slope == pytest.approx(3.0, abs=0.1)


def test_fit_needs_four_shifts():
    f = _field(lambda t, x: x)
    with pytest.raises(ValueError, match="at least 4"):
        besov_fit(f, "x", 2.0, Box(0.2, 0.8, 0.2, 0.8), dyadic_shifts(GRID.dx, 1, 2))
