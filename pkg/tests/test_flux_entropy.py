import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from besovclaw.flux_entropy import (burgers, certify_hyp_a, custom_flux, delta_constants,
                                    even_power, godunov_state, make_entropy_pair, parse_flux,
                                    table_flux, tartar_constants, tartar_gap)


def test_parse_flux_tags():
    assert parse_flux("burgers").tag == "burgers"
    assert parse_flux("power:2").tag == "power:2"
    with pytest.raises(ValueError):
        parse_flux("cubic")


def test_even_power_derivatives():
    f = even_power(2)
    v = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(f.a(v), v**4 / 4)
    np.testing.assert_allclose(f.da(v), v**3)
    np.testing.assert_allclose(f.d2a(v), 3 * v**2)


@pytest.mark.parametrize("make", [burgers, lambda: even_power(2)])
def test_inverse_speed_roundtrip(make):
    f = make()
    v = np.linspace(-0.9, 0.9, 11)
    np.testing.assert_allclose(f.inverse_speed(f.da(v)), v, atol=1e-10)


def test_table_flux_reproduces_burgers():
    v = np.linspace(-2, 2, 401)
    f = table_flux(v, 0.5 * v**2)
    probe = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(f.a(probe), 0.5 * probe**2, atol=1e-10)
    np.testing.assert_allclose(f.da(probe), probe, atol=1e-8)


# Godunov states for Burgers: shock picks the upwind side by the RH speed,
# rarefaction through zero gives the sonic state 0.
@pytest.mark.parametrize("ul,ur,expected", [
    (1.0, 0.0, 1.0), (0.0, -1.0, -1.0), (1.0, -1.0, 1.0), (-1.0, 1.0, 0.0),
    (0.2, 0.7, 0.2), (-0.7, -0.2, -0.2), (0.5, -0.2, 0.5), (0.2, -0.5, -0.5),
])
def test_godunov_state_burgers(flux, ul, ur, expected):
    assert float(godunov_state(np.array(ul), np.array(ur), flux)) == pytest.approx(expected)


def test_burgers_certificate_is_exact():
    cert = certify_hyp_a(burgers(), 1.0)
    assert (cert.alpha_M, cert.beta) == (1.0, 1.0)


def test_quartic_empirical_certificate():
    # (v^3 - w^3) / (v - w)^3 = (v^2 + v w + w^2) / (v - w)^2 >= 1/4, equality at w = -v
    cert = certify_hyp_a(even_power(2), 1.0, method="empirical")
    assert cert.beta == 3.0
    assert cert.alpha_M == pytest.approx(0.25, rel=0.02)
    assert cert.alpha_M <= 0.25 + 1e-12


def test_quartic_analytic_certificate_is_weaker():
    cert = certify_hyp_a(even_power(2), 1.0)
    assert cert.beta == 3.0
    assert cert.alpha_M == pytest.approx(1 / 64)


def test_linear_flux_is_rejected():
    f = custom_flux(lambda v: 2 * v, lambda v: 2 + 0 * v, lambda v: 0 * v)
    with pytest.raises(ValueError, match="not uniformly convex"):
        certify_hyp_a(f, 1.0, method="empirical")


def test_concave_entropy_rejected(flux):
    with pytest.raises(ValueError, match="entropy not convex"):
        make_entropy_pair((lambda v: -v**2, lambda v: -2 * v, lambda v: -2 + 0 * v), flux, 1.0)


def test_entropy_flux_against_quad(flux):
    pair = make_entropy_pair("quartic", flux, 1.0, method="empirical")
    for v in (-0.8, 0.3, 1.0):
        ref, _ = integrate.quad(lambda w: w**3 * w, 0.0, v)
        assert float(pair.q(np.array(v))) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_tartar_gap_equality_case(flux):
    # eta = v^2/2, q = v^3/3: gap(0, 1) = 1/3 - 1/4
    pair = make_entropy_pair("quadratic", flux, 1.0)
    assert float(tartar_gap(pair, flux, 0.0, 1.0)) == pytest.approx(1 / 12, abs=1e-12)
    c = tartar_constants(1.0, 1.0, 1.0, 1.0)
    assert c["corrected"] == pytest.approx(1 / 12)
    assert c["exponent"] == 4.0


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_tartar_gap_nonnegative(v, w):
    f = burgers()
    pair = make_entropy_pair("quadratic", f, 1.0)
    # closed form (w - v)^4 / 12 for Burgers with the quadratic entropy
    gap = float(tartar_gap(pair, f, v, w))
    assert gap >= -1e-15
    assert gap == pytest.approx((w - v) ** 4 / 12, abs=1e-14)


def test_delta_constants_coincide_at_beta_one():
    c = delta_constants(1.0, 1.0)
    assert c["stated"] == c["corrected"] == pytest.approx(1 / 6)
    c3 = delta_constants(0.25, 3.0)
    assert c3["corrected"] == pytest.approx(0.25 / 20)
    assert c3["stated"] == pytest.approx(9 * 0.25 / 20)
