import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from besovclaw.fields import (Box, Bump1D, Cutoff, Grid2D, SpaceTimeField, VelocityGrid,
                              integrate1d, integrate2d, make_bump_cutoff, pairwise_sum,
                              plateau_weight, polynomial_weight, smooth_step)


def test_box_rejects_empty_support():
    with pytest.raises(ValueError, match="empty support"):
        Box(0.5, 0.5, 0.0, 1.0)


def test_grid_rejects_tiny_resolution():
    with pytest.raises(ValueError):
        Grid2D(0.0, 1.0, 0.0, 1.0, 2, 8)


def test_grid_geometry():
    g = Grid2D(0.0, 2.0, -1.0, 1.0, 4, 8)
    assert g.dt == 0.5 and g.dx == 0.25
    np.testing.assert_allclose(g.t_centers, [0.25, 0.75, 1.25, 1.75])
    assert g.x_edges[0] == -1.0 and g.x_edges[-1] == 1.0
    assert g.spacing("t") == g.dt


def test_field_rejects_nonfinite():
    g = Grid2D(0.0, 1.0, 0.0, 1.0, 4, 4)
    vals = np.zeros((4, 4))
    vals[1, 2] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        SpaceTimeField(g, vals)


def test_field_is_read_only():
    g = Grid2D(0.0, 1.0, 0.0, 1.0, 4, 4)
    f = SpaceTimeField(g, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_velocity_grid_covering_spans_support():
    vg = VelocityGrid.covering(0.7, 32)
    assert vg.spans(0.7)
    assert vg.vmin < -0.7 and vg.vmax > 0.7
    assert len(vg.centers) == 32


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_pairwise_sum_matches_fsum(xs):
    assert pairwise_sum(xs) == pytest.approx(math.fsum(xs), abs=1e-6)


def test_midpoint_integrators_on_polynomials():
    assert integrate1d(lambda s: s**2, 0.0, 1.0, 400) == pytest.approx(1 / 3, rel=1e-5)
    val = integrate2d(lambda t, x: t * x, Box(0.0, 1.0, 0.0, 2.0), 50, 50)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_smooth_step_limits():
    y = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(smooth_step(y), [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("pf", [0.2, 0.5, 0.8])
def test_bump_integrals_against_quad(pf):
    b = Bump1D(-0.5, 1.5, pf)
    ref, _ = integrate.quad(b, -0.5, 1.5, limit=200, points=[0.0, 1.0])
    ref_sq, _ = integrate.quad(lambda s: b(s) ** 2, -0.5, 1.5, limit=200)
    assert b.integral() == pytest.approx(ref, rel=1e-8)
    assert b.integral_sq() == pytest.approx(ref_sq, rel=1e-8)
    ref_var, _ = integrate.quad(lambda s: abs(b.deriv(s)), -0.5, 1.5, limit=400)
    assert ref_var == pytest.approx(Bump1D.variation(), rel=1e-6)


def test_cutoff_norms_against_quadrature():
    c = make_bump_cutoff(Box(0.2, 0.8, -0.3, 0.5), 0.5)
    box = c.box
    ref = integrate2d(lambda t, x: np.abs(c.dx(t, x)), box, 800, 800)
    assert c.l1_dx == pytest.approx(ref, rel=1e-4)
    ref = integrate2d(lambda t, x: c(t, x) ** 2, box, 800, 800)
    assert c.l1_chi2 == pytest.approx(ref, rel=1e-4)
    assert c.sup == pytest.approx(1.0)
    assert c.sup_l1x_dx == pytest.approx(2.0)
    assert c.sup_l1t_dt == pytest.approx(2.0)


def test_cutoff_vanishes_outside_box():
    c = make_bump_cutoff(Box(0.2, 0.8, -0.3, 0.5))
    assert c(np.array(0.1), np.array(0.0)) == 0.0
    assert c(np.array(0.5), np.array(0.6)) == 0.0


@pytest.mark.parametrize("make", [lambda: plateau_weight(1.0, 0.7), lambda: polynomial_weight(1.0)])
def test_weight_norms(make):
    w = make()
    ref, _ = integrate.quad(lambda v: abs(w(v)), -w.V, w.V, limit=200)
    assert w.l1 == pytest.approx(ref, rel=1e-6)
    assert w.sup <= 1.0 + 1e-12
    assert w(np.array(w.V * 1.01)) == 0.0
