"""Discrete checks of the interaction identities for a 2x2 system of balance laws

    d_t A + d_x B = C,    d_t D + d_x E = F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Box, Grid2D, SpaceTimeField, make_bump_cutoff, pairwise_sum

Array = np.ndarray

MARGIN_CELLS = 4


@dataclass(frozen=True, eq=False)
class BalanceFields:
    A: SpaceTimeField
    B: SpaceTimeField
    C: SpaceTimeField
    D: SpaceTimeField
    E: SpaceTimeField
    F: SpaceTimeField

    def __post_init__(self):
        g = self.A.grid
        for name in "BCDEF":
            if getattr(self, name).grid != g:
                raise ValueError("balance fields must share one grid")

    @property
    def grid(self) -> Grid2D:
        return self.A.grid

    def scaled_first(self, lam: float) -> "BalanceFields":
        return BalanceFields(self.A.map(lambda a: lam * a), self.B.map(lambda b: lam * b),
                             self.C.map(lambda c: lam * c), self.D, self.E, self.F)

    def system_residuals(self) -> tuple[float, float]:
        """L1 norms of the centred-difference residuals of both balance laws."""
        g = self.grid

        def res(P, Q, S):
            p, q = P.values, Q.values
            pt = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2 * g.dt)
            qx = (q[1:-1, 2:] - q[1:-1, :-2]) / (2 * g.dx)
            return pairwise_sum(np.abs(pt + qx - S.values[1:-1, 1:-1])) * g.dt * g.dx

        return res(self.A, self.B, self.C), res(self.D, self.E, self.F)


@dataclass(frozen=True)
class IdentityReport:
    tag: str
    lhs: float
    rhs: float
    dt: float
    dx: float
    tol_sys: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "dt": self.dt, "dx": self.dx, "tol_sys": self.tol_sys}


def _check_support(bf: BalanceFields) -> None:
    k = MARGIN_CELLS
    for name in "ABCDEF":
        v = getattr(bf, name).values
        inner = np.zeros_like(v, dtype=bool)
        inner[k:-k, k:-k] = True
        if np.any(v[~inner] != 0.0):
            raise ValueError(f"support escape: field {name} is nonzero near the boundary")


def _suffix(v: Array, axis: int, h: float) -> Array:
    """int_s^inf at cell centres: later cells plus half the current one."""
    rev = np.flip(v, axis=axis)
    csum = np.flip(np.cumsum(rev, axis=axis), axis=axis)
    return (csum - 0.5 * v) * h


def _prefix(v: Array, axis: int, h: float) -> Array:
    """int_-inf^s at cell centres: earlier cells plus half the current one."""
    return (np.cumsum(v, axis=axis) - 0.5 * v) * h


def check_identity_space(bf: BalanceFields) -> IdentityReport:
    """int int (AE - DB) = -int int C int_x^inf D dy - int int F int_-inf^y A dx."""
    _check_support(bf)
    g = bf.grid
    area = g.dt * g.dx
    A, B, C, D, E, F = (getattr(bf, n).values for n in "ABCDEF")
    lhs = pairwise_sum(A * E - D * B) * area
    rhs = -(pairwise_sum(C * _suffix(D, 1, g.dx)) + pairwise_sum(F * _prefix(A, 1, g.dx))) * area
    return IdentityReport("space", lhs, rhs, g.dt, g.dx, max(bf.system_residuals()))


def check_identity_time(bf: BalanceFields) -> IdentityReport:
    """int int (AE - DB) = int int C int_s^inf E dt + int int F int_-inf^t B ds."""
    _check_support(bf)
    g = bf.grid
    area = g.dt * g.dx
    A, B, C, D, E, F = (getattr(bf, n).values for n in "ABCDEF")
    lhs = pairwise_sum(A * E - D * B) * area
    rhs = (pairwise_sum(C * _suffix(E, 0, g.dt)) + pairwise_sum(F * _prefix(B, 0, g.dt))) * area
    return IdentityReport("time", lhs, rhs, g.dt, g.dx, max(bf.system_residuals()))


def _sample(grid: Grid2D, fn) -> SpaceTimeField:
    t, x = grid.mesh()
    return SpaceTimeField(grid, np.broadcast_to(fn(t, x), (grid.nt, grid.nx)))


def manufactured_bump_fields(grid: Grid2D, coincide: bool = False) -> BalanceFields:
    """Smooth compactly supported fields with exact sources.

    A = phi_1, B = 2 phi_2, C = d_t A + d_x B and D = phi_3, E = -phi_4,
    F = d_t D + d_x E, each phi a smooth bump on its own sub-box of the grid.
    With ``coincide`` the second pair equals the first.
    """
    T, L = grid.t1 - grid.t0, grid.x1 - grid.x0

    def bump(ta, tb, xa, xb):
        return make_bump_cutoff(Box(grid.t0 + ta * T, grid.t0 + tb * T,
                                    grid.x0 + xa * L, grid.x0 + xb * L), 0.3)

    p1, p2 = bump(0.15, 0.70, 0.10, 0.55), bump(0.25, 0.85, 0.30, 0.80)
    p3, p4 = bump(0.10, 0.60, 0.40, 0.90), bump(0.30, 0.80, 0.15, 0.65)
    A = _sample(grid, p1)
    B = _sample(grid, lambda t, x: 2.0 * p2(t, x))
    C = _sample(grid, lambda t, x: p1.dt(t, x) + 2.0 * p2.dx(t, x))
    if coincide:
        return BalanceFields(A, B, C, A, B, C)
    D = _sample(grid, p3)
    E = _sample(grid, lambda t, x: -p4(t, x))
    F = _sample(grid, lambda t, x: p3.dt(t, x) - p4.dx(t, x))
    return BalanceFields(A, B, C, D, E, F)


def refinement_study(levels=(128, 256, 512, 1024), box=(0.0, 1.0, 0.0, 1.0)) -> list[dict]:
    """Residuals of both identities on manufactured fields at nt = nx = n."""
    rows = []
    for n in levels:
        bf = manufactured_bump_fields(Grid2D(box[0], box[1], box[2], box[3], n, n))
        for rep in (check_identity_space(bf), check_identity_time(bf)):
            rows.append({"n": n, **rep.to_dict()})
    return rows
