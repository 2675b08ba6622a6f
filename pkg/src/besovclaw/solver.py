"""Entropy and non-entropic weak solutions of u_t + a(u)_x = 0 on uniform grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fields import Box, Cutoff, Grid2D, SpaceTimeField, pairwise_sum
from .flux_entropy import FluxFunction, godunov_state

Array = np.ndarray

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)

SCHEMES = ("godunov", "lax_friedrichs")
BOUNDARIES = ("periodic", "outflow")


@dataclass(frozen=True, eq=False)
class InitialData:
    """Initial datum with an exact cell-averaging rule.

    Args:
        tag: 'riemann', 'sine' or 'custom'.
        params: tag-specific parameters.
        averager: maps cell edges (length n+1) to n cell averages.
        bound: sup-norm of the datum.
    """

    tag: str
    params: tuple
    averager: Callable[[Array], Array]
    bound: float

    def cell_averages(self, edges: Array) -> Array:
        vals = np.asarray(self.averager(np.asarray(edges, float)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite sample")
        return vals

    def describe(self) -> str:
        return self.tag + (":" + ",".join(f"{p:g}" for p in self.params) if self.params else "")

    @staticmethod
    def riemann(ul: float, ur: float, x_jump: float = 0.0) -> "InitialData":
        ul, ur = float(ul), float(ur)
        if not (math.isfinite(ul) and math.isfinite(ur)):
            raise ValueError("riemann states must be finite")

        def avg(edges):
            lo, hi = edges[:-1], edges[1:]
            frac_left = np.clip((x_jump - lo) / (hi - lo), 0.0, 1.0)
            return frac_left * ul + (1.0 - frac_left) * ur

        return InitialData("riemann", (ul, ur), avg, max(abs(ul), abs(ur)))

    @staticmethod
    def sine(amplitude: float = 1.0, period: float = 1.0) -> "InitialData":
        k = 2.0 * math.pi / period

        def avg(edges):
            lo, hi = edges[:-1], edges[1:]
            return amplitude * (np.cos(k * lo) - np.cos(k * hi)) / (k * (hi - lo))

        return InitialData("sine", (float(amplitude), float(period)), avg, abs(float(amplitude)))

    @staticmethod
    def custom(samples) -> "InitialData":
        arr = np.asarray(samples, dtype=float).copy()

        def avg(edges):
            if len(edges) - 1 != arr.size:
                raise ValueError("custom samples do not match the grid")
            return arr

        return InitialData("custom", (), avg, float(np.max(np.abs(arr))))


def parse_init(spec: str) -> InitialData:
    """Parse 'sine:A,P' or 'riemann:UL,UR'."""
    name, _, arg = spec.strip().partition(":")
    nums = [float(s) for s in arg.split(",")] if arg else []
    if name == "sine":
        return InitialData.sine(*(nums or [1.0, 1.0]))
    if name == "riemann" and len(nums) == 2:
        return InitialData.riemann(*nums)
    raise ValueError(f"unknown init spec {spec!r}")


@dataclass(frozen=True, eq=False)
class SolutionRecord:
    field: SpaceTimeField
    flux_tag: str
    scheme: str
    cfl: float
    boundary: str = "outflow"
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid2D:
        return self.field.grid

    @property
    def values(self) -> Array:
        return self.field.values

    @property
    def supnorm(self) -> float:
        return self.field.supnorm


# --- finite-volume schemes -----------------------------------------------

def _neighbours(u: Array, boundary: str) -> tuple[Array, Array]:
    """States left and right of each of the nx + 1 interfaces."""
    if boundary == "periodic":
        ext = np.concatenate(([u[-1]], u, [u[0]]))
    else:
        ext = np.concatenate(([u[0]], u, [u[-1]]))
    return ext[:-1], ext[1:]


def numerical_flux(ul: Array, ur: Array, flux: FluxFunction, scheme: str, lam: float) -> Array:
    """Interface flux; lam = dt / dx of the step."""
    if scheme == "godunov":
        return flux.a(godunov_state(ul, ur, flux))
    if scheme == "lax_friedrichs":
        return 0.5 * (flux.a(ul) + flux.a(ur)) - 0.5 / lam * (ur - ul)
    raise ValueError(f"unknown scheme {scheme!r}")


def _step(u: Array, flux: FluxFunction, scheme: str, boundary: str, lam: float) -> Array:
    ul, ur = _neighbours(u, boundary)
    F = numerical_flux(ul, ur, flux, scheme, lam)
    return u - lam * (F[1:] - F[:-1])


def grid_for_cfl(t0: float, t1: float, x0: float, x1: float, nx: int, cfl: float,
                 speed: float) -> Grid2D:
    """Smallest nt so that speed * dt / dx <= cfl."""
    if not 0.0 < cfl < 1.0:
        raise ValueError("cfl exceeded")
    dx = (x1 - x0) / nx
    nt = max(4, int(math.ceil((t1 - t0) * speed / (cfl * dx) - 1e-12)))
    return Grid2D(t0, t1, x0, x1, nt, nx)


def solve_fv(init: InitialData, flux: FluxFunction, grid: Grid2D, scheme: str = "godunov",
             cfl: float | None = None, boundary: str = "periodic") -> SolutionRecord:
    """March a monotone conservative scheme.

    Row i of the result holds the cell averages at t0 + (i + 1/2) dt: the scheme
    takes one half step from the initial averages, then full steps.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}")
    if cfl is not None and not 0.0 < cfl < 1.0:
        raise ValueError("cfl exceeded")
    u = init.cell_averages(grid.x_edges)
    lam = grid.dt / grid.dx
    used = flux.speed_bound(float(u.min()), float(u.max())) * lam
    if used >= 1.0 or (cfl is not None and used > cfl * (1 + 1e-9)):
        raise ValueError("cfl exceeded")

    out = np.empty((grid.nt, grid.nx))
    u = _step(u, flux, scheme, boundary, 0.5 * lam)
    for i in range(grid.nt):
        if not np.all(np.isfinite(u)):
            raise ValueError("blowup")
        out[i] = u
        if i + 1 < grid.nt:
            u = _step(u, flux, scheme, boundary, lam)
    meta = {"init": init.describe(), "init_bound": init.bound}
    return SolutionRecord(SpaceTimeField(grid, out), flux.tag, scheme, float(used), boundary, meta)


# --- exact solutions ----------------------------------------------------

def _require_strictly_convex(flux: FluxFunction, lo: float, hi: float) -> None:
    if hi > lo:
        speeds = flux.da(np.linspace(lo, hi, 513))
        if np.any(np.diff(speeds) <= 0):
            raise ValueError("flux not strictly convex over state range")


def riemann_solution(ul: float, ur: float, flux: FluxFunction,
                     x_jump: float = 0.0) -> Callable[[Array, Array], Array]:
    """Point evaluator (t, x) -> u of the entropy solution, t > 0."""
    _require_strictly_convex(flux, min(ul, ur), max(ul, ur))
    if ul > ur:
        sigma = (float(flux.a(np.array(ul))) - float(flux.a(np.array(ur)))) / (ul - ur)

        def shock(t, x):
            t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
            return np.where(x - x_jump <= sigma * t, ul, ur)

        return shock
    sl, sr = float(flux.da(np.array(ul))), float(flux.da(np.array(ur)))

    def fan(t, x):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        s = (x - x_jump) / t
        inside = np.clip(s, sl, sr)
        vals = flux.inverse_speed(inside.ravel()).reshape(s.shape)
        return np.where(s <= sl, ul, np.where(s >= sr, ur, vals))

    return fan


def _cell_average_rows(fn, grid: Grid2D, breaks: Callable[[float], tuple[float, float]]) -> Array:
    """Cell averages of fn(t, .) at each t center, splitting cells at breakpoints."""
    lo, hi = grid.x_edges[:-1], grid.x_edges[1:]
    out = np.empty((grid.nt, grid.nx))
    for i, t in enumerate(grid.t_centers):
        b1, b2 = breaks(t)
        p1 = np.clip(b1, lo, hi)
        p2 = np.clip(b2, lo, hi)
        total = np.zeros(grid.nx)
        for a, b in ((lo, p1), (p1, p2), (p2, hi)):
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            pts = mid[:, None] + half[:, None] * _GL_X
            total += half * (fn(t, pts) @ _GL_W)
        out[i] = total / grid.dx
    return out


def exact_riemann(ul: float, ur: float, flux: FluxFunction, grid: Grid2D,
                  x_jump: float = 0.0) -> SolutionRecord:
    """Exact entropy solution of the Riemann problem, averaged over cells."""
    ul, ur = float(ul), float(ur)
    fn = riemann_solution(ul, ur, flux, x_jump)
    if ul > ur:
        sigma = (float(flux.a(np.array(ul))) - float(flux.a(np.array(ur)))) / (ul - ur)

        def breaks(t):
            return x_jump + sigma * t, x_jump + sigma * t
    else:
        sl, sr = float(flux.da(np.array(ul))), float(flux.da(np.array(ur)))

        def breaks(t):
            return x_jump + sl * t, x_jump + sr * t

    if grid.t0 < 0:
        raise ValueError("exact solutions need t0 >= 0")
    vals = _cell_average_rows(fn, grid, breaks)
    meta = {"init": f"riemann:{ul:g},{ur:g}", "init_bound": max(abs(ul), abs(ur)),
            "ul": ul, "ur": ur, "x_jump": x_jump}
    return SolutionRecord(SpaceTimeField(grid, vals), flux.tag, "exact_riemann", 0.0, "outflow", meta)


def rh_speed(ul: float, ur: float, flux: FluxFunction) -> float:
    if ul == ur:
        return float(flux.da(np.array(ul)))
    return (float(flux.a(np.array(ur))) - float(flux.a(np.array(ul)))) / (ur - ul)


def nonentropic_shock(ul: float, ur: float, flux: FluxFunction, grid: Grid2D,
                      x_jump: float = 0.0) -> SolutionRecord:
    """Upward jump travelling at the Rankine-Hugoniot speed.

    This is a weak solution that violates the entropy condition; cells cut by
    the discontinuity hold the volume-weighted average of the two states.
    """
    ul, ur = float(ul), float(ur)
    if not ul < ur:
        raise ValueError("use exact_riemann for entropic data")
    _require_strictly_convex(flux, ul, ur)
    sigma = rh_speed(ul, ur, flux)
    lo, hi = grid.x_edges[:-1], grid.x_edges[1:]
    pos = x_jump + sigma * grid.t_centers
    frac_left = np.clip((pos[:, None] - lo[None, :]) / grid.dx, 0.0, 1.0)
    vals = frac_left * ul + (1.0 - frac_left) * ur
    meta = {"init": f"riemann:{ul:g},{ur:g}", "init_bound": max(abs(ul), abs(ur)),
            "ul": ul, "ur": ur, "x_jump": x_jump, "sigma": sigma}
    return SolutionRecord(SpaceTimeField(grid, vals), flux.tag, "nonentropic_shock", 0.0,
                          "outflow", meta)


def aligned_shock_grid(ul: float, ur: float, flux: FluxFunction, x0: float, x1: float, nx: int,
                       t1: float, cells_per_step: int = 2) -> Grid2D:
    """Grid on which a jump from x = 0 sits on a cell interface at every t center.

    With t0 = 0 and sigma dt = cells_per_step * dx (cells_per_step even) the
    jump at t_i = (i + 1/2) dt lies at an odd multiple of dx / 2 * cells_per_step.
    A stationary jump only needs x = 0 on an interface.
    """
    dx = (x1 - x0) / nx
    k = -x0 / dx
    if abs(k - round(k)) > 1e-9:
        raise ValueError("x = 0 must be a cell interface")
    sigma = abs(rh_speed(ul, ur, flux))
    if cells_per_step % 2:
        raise ValueError("cells_per_step must be even")
    dt = dx if sigma == 0 else cells_per_step * dx / sigma
    nt = max(4, int(round(t1 / dt)))
    return Grid2D(0.0, nt * dt, x0, x1, nt, nx)


# --- diagnostics ----------------------------------------------------------

def _require_inside(box: Box, grid: Grid2D) -> None:
    tol = 1e-12 * max(1.0, abs(grid.t1), abs(grid.x1), abs(grid.x0))
    if (box.ta < grid.t0 - tol or box.tb > grid.t1 + tol
            or box.xa < grid.x0 - tol or box.xb > grid.x1 + tol):
        raise ValueError("support escape: test function leaves the grid")


def weak_residual(rec: SolutionRecord, flux: FluxFunction, testfn: Cutoff) -> float:
    """Midpoint quadrature of int int (u chi_t + a(u) chi_x) dx dt."""
    grid = rec.grid
    _require_inside(testfn.box, grid)
    t, x = grid.mesh()
    u = rec.values
    integrand = u * testfn.dt(t, x) + flux.a(u) * testfn.dx(t, x)
    return pairwise_sum(integrand) * grid.dt * grid.dx


def mass_history(rec: SolutionRecord) -> Array:
    return np.array([pairwise_sum(row) for row in rec.values]) * rec.grid.dx


@dataclass(frozen=True)
class OleinikReport:
    max_violation: float
    tolerance: float
    passed: bool
    worst_t: float
    worst_x: float

    def to_dict(self) -> dict:
        return {"max_violation": self.max_violation, "tolerance": self.tolerance,
                "pass": self.passed, "worst_t": self.worst_t, "worst_x": self.worst_x}


def oleinik_check(rec: SolutionRecord, alpha: float) -> OleinikReport:
    """max over cells of the forward-difference slope minus 1 / (alpha t)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    grid = rec.grid
    u = rec.values
    if rec.boundary == "periodic":
        slope = (np.roll(u, -1, axis=1) - u) / grid.dx
    else:
        slope = np.diff(u, axis=1) / grid.dx
    t = grid.t_centers
    if np.any(t <= 0):
        raise ValueError("Oleinik bound needs t > 0")
    excess = slope - 1.0 / (alpha * t[:, None])
    idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[idx])
    tol = 10.0 * grid.dx
    return OleinikReport(worst, tol, worst <= tol, float(t[idx[0]]),
                         float(grid.x0 + (idx[1] + 1.0) * grid.dx))
