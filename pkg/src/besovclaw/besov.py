"""Shift differences, weighted increment functionals and Besov exponent fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Box, Cutoff, SpaceTimeField, pairwise_sum
from .parallel import ordered_map

Array = np.ndarray

NOISE_FLOOR_CELLS = 4
FIT_TOLERANCE = 0.1


def _cells(field: SpaceTimeField, direction: str, h: float) -> int:
    spacing = field.grid.spacing(direction)
    k = h / spacing
    kr = int(round(k))
    if kr == 0 or abs(k - kr) > 1e-9 * max(1.0, abs(k)):
        raise ValueError("non-commensurate shift")
    return kr


def _shift_zero(values: Array, k: int, axis: int) -> Array:
    """values[index + k] along axis, zero outside."""
    out = np.zeros_like(values)
    n = values.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * 2
    dst = [slice(None)] * 2
    if k > 0:
        src[axis], dst[axis] = slice(k, None), slice(0, n - k)
    else:
        src[axis], dst[axis] = slice(0, n + k), slice(-k, None)
    out[tuple(dst)] = values[tuple(src)]
    return out


def diff(field: SpaceTimeField, direction: str, h: float) -> SpaceTimeField:
    """D^h u = u(. + h) - u, with u extended by zero outside the grid."""
    k = _cells(field, direction, h)
    axis = 0 if direction == "t" else 1
    return SpaceTimeField(field.grid, _shift_zero(field.values, k, axis) - field.values)


@dataclass(frozen=True)
class IncrementFunctional:
    direction: str
    h: float
    p: float
    value: float


def _weight_window(field: SpaceTimeField, weight: Cutoff | Box) -> tuple[slice, slice, Array]:
    """Index window covering the weight support and chi^2 sampled on it."""
    g = field.grid
    box = weight.box if isinstance(weight, Cutoff) else weight
    t, x = g.t_centers, g.x_centers
    it = np.nonzero((t >= box.ta) & (t <= box.tb))[0]
    ix = np.nonzero((x >= box.xa) & (x <= box.xb))[0]
    if it.size == 0 or ix.size == 0:
        raise ValueError("empty support")
    st, sx = slice(it[0], it[-1] + 1), slice(ix[0], ix[-1] + 1)
    if isinstance(weight, Cutoff):
        chi2 = weight(t[st, None], x[None, sx]) ** 2
    else:
        chi2 = np.ones((it.size, ix.size))
    return st, sx, chi2


def _check_margin(field: SpaceTimeField, weight: Cutoff | Box, direction: str, h: float) -> None:
    g = field.grid
    box = weight.box if isinstance(weight, Cutoff) else weight
    tol = 1e-12 * max(1.0, abs(g.t1), abs(g.x1), abs(g.x0))
    if direction == "x":
        lo, hi, a, b = g.x0, g.x1, box.xa, box.xb
    else:
        lo, hi, a, b = g.t0, g.t1, box.ta, box.tb
    if a + min(h, 0.0) < lo - tol or b + max(h, 0.0) > hi + tol or box.ta < g.t0 - tol \
            or box.tb > g.t1 + tol or box.xa < g.x0 - tol or box.xb > g.x1 + tol:
        raise ValueError("support escape: weight plus shift leaves the grid")


def increment_functional(field: SpaceTimeField, direction: str, h: float, p: float,
                         weight: Cutoff | Box) -> IncrementFunctional:
    """int int chi^2 |D^h u|^p dx dt; a Box weight means chi = 1 on the box."""
    if p < 1:
        raise ValueError("exponent p must be at least 1")
    k = _cells(field, direction, h)
    _check_margin(field, weight, direction, h)
    st, sx, chi2 = _weight_window(field, weight)
    u = field.values
    if direction == "x":
        sh = u[st, sx.start + k:sx.stop + k]
    else:
        sh = u[st.start + k:st.stop + k, sx]
    d = np.abs(sh - u[st, sx])
    g = field.grid
    return IncrementFunctional(direction, float(h), float(p),
                               pairwise_sum(chi2 * d**p) * g.dt * g.dx)


def dyadic_shifts(spacing: float, kmin: int, kmax: int) -> list[float]:
    """spacing * 2^j for every power of two 2^j in [kmin, kmax]."""
    if kmin < 1 or kmax < kmin:
        raise ValueError("need 1 <= kmin <= kmax")
    out, k = [], 1
    while k <= kmax:
        if k >= kmin:
            out.append(k * spacing)
        k *= 2
    return out


def default_epsilon(weight: Cutoff | Box, direction: str) -> float:
    box = weight.box if isinstance(weight, Cutoff) else weight
    return 0.1 * (box.width_x if direction == "x" else box.width_t)


@dataclass(frozen=True)
class BesovReport:
    direction: str
    p: float
    h: tuple
    values: tuple
    slope: float
    intercept: float
    h_range: tuple

    @property
    def s(self) -> float:
        return self.slope / self.p

    @property
    def consistent(self) -> bool:
        return self.slope >= 1.0 - FIT_TOLERANCE

    def rows(self) -> list[dict]:
        return [{"direction": self.direction, "p": self.p, "h": h, "value": v,
                 "slope": self.slope, "flag": "consistent" if self.consistent else "inconsistent"}
                for h, v in zip(self.h, self.values)]


def loglog_fit(h, values) -> tuple[float, float]:
    h = np.asarray(h, float)
    values = np.asarray(values, float)
    if np.any(values <= 0):
        raise ValueError("fit needs positive increment values")
    slope, intercept = np.polyfit(np.log(h), np.log(values), 1)
    return float(slope), float(intercept)


def besov_fit(field: SpaceTimeField, direction: str, p: float, weight: Cutoff | Box,
              h_set, epsilon: float | None = None) -> BesovReport:
    """Least-squares slope of log value against log h over admissible shifts.

    Shifts below four cells (scheme viscosity dominates) or above epsilon are
    discarded; at least four must remain.
    """
    spacing = field.grid.spacing(direction)
    eps = default_epsilon(weight, direction) if epsilon is None else epsilon
    hs = sorted(float(h) for h in h_set
                if NOISE_FLOOR_CELLS * spacing * (1 - 1e-9) <= abs(h) <= eps * (1 + 1e-9))
    if len(hs) < 4:
        raise ValueError("besov_fit needs at least 4 shifts in [4 spacing, epsilon]")
    vals = ordered_map(lambda h: increment_functional(field, direction, h, p, weight).value, hs)
    slope, intercept = loglog_fit(hs, vals)
    return BesovReport(direction, float(p), tuple(hs), tuple(vals), slope, intercept,
                       (hs[0], hs[-1]))
