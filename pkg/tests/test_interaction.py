import numpy as np
import pytest

from besovclaw.fields import Grid2D, SpaceTimeField
from besovclaw.interaction import (BalanceFields, check_identity_space, check_identity_time,
                                   manufactured_bump_fields, refinement_study)


@pytest.fixture(scope="module")
def fields():
    return manufactured_bump_fields(Grid2D(0.0, 1.0, 0.0, 1.0, 256, 256))


def test_sources_are_consistent(fields):
    # centred differences: residual of the balance laws falls at second order
    fine = manufactured_bump_fields(Grid2D(0.0, 1.0, 0.0, 1.0, 512, 512))
    for coarse_r, fine_r in zip(fields.system_residuals(), fine.system_residuals()):
        assert coarse_r / fine_r > 3.5


@pytest.mark.parametrize("check", [check_identity_space, check_identity_time])
def test_identity_holds_to_discretisation(fields, check):
    rep = check(fields)
    assert abs(rep.lhs) > 1e-3
    assert rep.residual < 1e-5 * max(1.0, abs(rep.lhs)) * 10


@pytest.mark.parametrize("check", [check_identity_space, check_identity_time])
def test_identity_is_linear_in_first_pair(fields, check):
    base, scaled = check(fields), check(fields.scaled_first(-2.5))
    assert scaled.lhs == pytest.approx(-2.5 * base.lhs, rel=1e-12)
    assert scaled.rhs == pytest.approx(-2.5 * base.rhs, rel=1e-12)


def test_coinciding_pairs_give_zero_lhs():
    bf = manufactured_bump_fields(Grid2D(0.0, 1.0, 0.0, 1.0, 128, 128), coincide=True)
    rep = check_identity_space(bf)
    assert rep.lhs == 0.0
    assert abs(rep.rhs) < 1e-4


def test_support_escape_detected():
    g = Grid2D(0.0, 1.0, 0.0, 1.0, 16, 16)
    one = SpaceTimeField(g, np.ones((16, 16)))
    bf = BalanceFields(one, one, one, one, one, one)
    with pytest.raises(ValueError, match="support escape"):
        check_identity_space(bf)


def test_refinement_order():
    rows = refinement_study((64, 128, 256))
    for tag in ("space", "time"):
        res = [r["residual"] for r in rows if r["tag"] == tag]
        assert all(a / b >= 1.6 for a, b in zip(res, res[1:]))
