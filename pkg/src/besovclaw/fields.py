"""Uniform grids, sampled fields, smooth cutoffs and quadrature primitives."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate

Array = np.ndarray


def pairwise_sum(values) -> float:
    """Sum with numpy's pairwise reduction over a flattened contiguous copy.

    The reduction order depends only on the array length, so results are
    bit-identical across runs and thread counts.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    return float(np.add.reduce(arr))


def _check_finite(values: Array) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite sample")


@dataclass(frozen=True)
class Box:
    """Closed space-time rectangle [ta, tb] x [xa, xb]."""

    ta: float
    tb: float
    xa: float
    xb: float

    def __post_init__(self):
        if not (self.tb > self.ta and self.xb > self.xa):
            raise ValueError("empty support")

    @property
    def width_t(self) -> float:
        return self.tb - self.ta

    @property
    def width_x(self) -> float:
        return self.xb - self.xa

    def widened(self, dt: float = 0.0, dx: float = 0.0) -> "Box":
        return Box(self.ta - dt, self.tb + dt, self.xa - dx, self.xb + dx)

    def indicator(self, t, x) -> Array:
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        inside = (t >= self.ta) & (t <= self.tb) & (x >= self.xa) & (x <= self.xb)
        return inside.astype(float)


@dataclass(frozen=True)
class Grid2D:
    t0: float
    t1: float
    x0: float
    x1: float
    nt: int
    nx: int

    def __post_init__(self):
        if not (self.t1 > self.t0 and self.x1 > self.x0):
            raise ValueError("grid bounds must satisfy t1 > t0 and x1 > x0")
        if self.nt < 4 or self.nx < 4:
            raise ValueError("grid needs nt, nx >= 4")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nt

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def t_centers(self) -> Array:
        return self.t0 + (np.arange(self.nt) + 0.5) * self.dt

    @property
    def x_centers(self) -> Array:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def x_edges(self) -> Array:
        return self.x0 + np.arange(self.nx + 1) * self.dx

    @property
    def box(self) -> Box:
        return Box(self.t0, self.t1, self.x0, self.x1)

    def spacing(self, direction: str) -> float:
        if direction == "x":
            return self.dx
        if direction == "t":
            return self.dt
        raise ValueError(f"unknown direction {direction!r}")

    def mesh(self) -> tuple[Array, Array]:
        return self.t_centers[:, None], self.x_centers[None, :]

    def to_dict(self) -> dict:
        return {"t0": self.t0, "t1": self.t1, "x0": self.x0, "x1": self.x1,
                "nt": self.nt, "nx": self.nx}


@dataclass(frozen=True)
class VelocityGrid:
    vmin: float
    vmax: float
    nv: int

    def __post_init__(self):
        if not self.vmax > self.vmin:
            raise ValueError("velocity grid needs vmin < vmax")
        if self.nv < 4:
            raise ValueError("velocity grid needs nv >= 4")

    @classmethod
    def covering(cls, U: float, nv: int = 64) -> "VelocityGrid":
        """Symmetric grid spanning [-U - dv, U + dv] exactly."""
        U = max(float(U), 1e-12)
        dv = 2.0 * U / (nv - 2)
        return cls(-U - dv, U + dv, nv)

    @property
    def dv(self) -> float:
        return (self.vmax - self.vmin) / self.nv

    @property
    def centers(self) -> Array:
        return self.vmin + (np.arange(self.nv) + 0.5) * self.dv

    @property
    def edges(self) -> Array:
        return self.vmin + np.arange(self.nv + 1) * self.dv

    def spans(self, U: float) -> bool:
        tol = 1e-12 * max(1.0, abs(U))
        return self.vmin <= -U - self.dv + tol and self.vmax >= U + self.dv - tol


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Cell-centred samples u[i, j] at (t_centers[i], x_centers[j])."""

    grid: Grid2D
    values: Array

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != (self.grid.nt, self.grid.nx):
            raise ValueError(
                f"values shape {vals.shape} does not match grid {(self.grid.nt, self.grid.nx)}")
        _check_finite(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @cached_property
    def supnorm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def map(self, fn: Callable[[Array], Array]) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, fn(self.values))

    def integral(self) -> float:
        return pairwise_sum(self.values) * self.grid.dt * self.grid.dx


def integrate2d(fn: Callable[[Array, Array], Array], box: Box, nt: int, nx: int) -> float:
    """Composite midpoint rule for fn(t, x) on box with nt x nx cells."""
    dt = box.width_t / nt
    dx = box.width_x / nx
    t = box.ta + (np.arange(nt) + 0.5) * dt
    x = box.xa + (np.arange(nx) + 0.5) * dx
    vals = np.broadcast_to(fn(t[:, None], x[None, :]), (nt, nx))
    _check_finite(vals)
    return pairwise_sum(vals) * dt * dx


def integrate1d(fn: Callable[[Array], Array], a: float, b: float, n: int) -> float:
    h = (b - a) / n
    x = a + (np.arange(n) + 0.5) * h
    vals = np.asarray(fn(x), dtype=float)
    _check_finite(vals)
    return pairwise_sum(vals) * h


# --- smooth transition built from exp(-1/y) -------------------------------

def _psi(y: Array) -> Array:
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = np.exp(-1.0 / y[pos])
    return out


def _dpsi(y: Array) -> Array:
    out = np.zeros_like(y)
    pos = y > 0
    yp = y[pos]
    out[pos] = np.exp(-1.0 / yp) / yp**2
    return out


def smooth_step(y) -> Array:
    """C-infinity step: 0 for y <= 0, 1 for y >= 1, S(y) + S(1 - y) = 1."""
    y = np.asarray(y, dtype=float)
    a, b = _psi(y), _psi(1.0 - y)
    return a / (a + b)


def smooth_step_deriv(y) -> Array:
    y = np.asarray(y, dtype=float)
    a, b = _psi(y), _psi(1.0 - y)
    da, db = _dpsi(y), _dpsi(1.0 - y)
    return (da * b + a * db) / (a + b) ** 2


@dataclass(frozen=True)
class Bump1D:
    """Smooth bump on [lo, hi], equal to 1 on the central plateau_fraction."""

    lo: float
    hi: float
    plateau_fraction: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("empty support")
        if not 0.0 < self.plateau_fraction < 1.0:
            raise ValueError("plateau_fraction must lie in (0, 1)")

    @property
    def ramp(self) -> float:
        return 0.5 * (1.0 - self.plateau_fraction) * (self.hi - self.lo)

    def __call__(self, s) -> Array:
        s = np.asarray(s, dtype=float)
        w = self.ramp
        return smooth_step((s - self.lo) / w) * smooth_step((self.hi - s) / w)

    def deriv(self, s) -> Array:
        s = np.asarray(s, dtype=float)
        w = self.ramp
        left, right = (s - self.lo) / w, (self.hi - s) / w
        return (smooth_step_deriv(left) * smooth_step(right)
                - smooth_step(left) * smooth_step_deriv(right)) / w

    def integral(self) -> float:
        # S(y) + S(1 - y) = 1 makes each ramp integrate to w / 2.
        return (self.hi - self.lo) * self.plateau_fraction + self.ramp

    def integral_sq(self) -> float:
        ramp_sq, _ = integrate.quad(lambda y: float(smooth_step(np.array([y]))[0]) ** 2,
                                    0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        return (self.hi - self.lo) * self.plateau_fraction + 2.0 * self.ramp * ramp_sq

    @staticmethod
    def variation() -> float:
        # monotone ramps from 0 to 1 and back
        return 2.0


@dataclass(frozen=True, eq=False)
class Cutoff:
    """Product cutoff chi(t, x) = b_t(t) b_x(x) with cached norms.

    ``l1_dt``/``l1_dx`` are L1 norms over (t, x). ``sup_l1x_dx`` is
    sup_t int |d_x chi| dx and ``sup_l1t_dt`` is sup_x int |d_t chi| dt: these
    mixed norms are what bounds the inner one-dimensional integrals of the
    interaction estimates.
    """

    box: Box
    plateau_fraction: float
    bt: Bump1D = field(init=False)
    bx: Bump1D = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bt", Bump1D(self.box.ta, self.box.tb, self.plateau_fraction))
        object.__setattr__(self, "bx", Bump1D(self.box.xa, self.box.xb, self.plateau_fraction))

    def __call__(self, t, x) -> Array:
        return self.bt(t) * self.bx(x)

    def dt(self, t, x) -> Array:
        return self.bt.deriv(t) * self.bx(x)

    def dx(self, t, x) -> Array:
        return self.bt(t) * self.bx.deriv(x)

    @property
    def sup(self) -> float:
        return 1.0

    @cached_property
    def l1_chi2(self) -> float:
        return self.bt.integral_sq() * self.bx.integral_sq()

    @cached_property
    def l1_chi(self) -> float:
        return self.bt.integral() * self.bx.integral()

    @cached_property
    def l1_dt(self) -> float:
        return Bump1D.variation() * self.bx.integral()

    @cached_property
    def l1_dx(self) -> float:
        return self.bt.integral() * Bump1D.variation()

    @property
    def sup_l1x_dx(self) -> float:
        return Bump1D.variation()

    @property
    def sup_l1t_dt(self) -> float:
        return Bump1D.variation()

    def norms(self) -> dict[str, float]:
        return {
            "chi_sup": self.sup,
            "chi2_l1": self.l1_chi2,
            "dt_chi_l1": self.l1_dt,
            "dx_chi_l1": self.l1_dx,
            "dx_chi_sup_t_l1_x": self.sup_l1x_dx,
            "dt_chi_sup_x_l1_t": self.sup_l1t_dt,
        }

    def transport_l1(self, speed: Callable[[Array], Array], vmin: float, vmax: float,
                     weight: Callable[[Array], Array] | None = None,
                     n_tx: int = 400, n_v: int = 400) -> float:
        """int_{vmin}^{vmax} int int |weight(v)| |d_t chi + speed(v) d_x chi| dx dt dv.

        Midpoint rule; the integrand vanishes on the plateau so only the ramp
        bands carry mass.
        """
        box = self.box
        t = box.ta + (np.arange(n_tx) + 0.5) * box.width_t / n_tx
        x = box.xa + (np.arange(n_tx) + 0.5) * box.width_x / n_tx
        dchi_t = self.dt(t[:, None], x[None, :]).ravel()
        dchi_x = self.dx(t[:, None], x[None, :]).ravel()
        dv = (vmax - vmin) / n_v
        v = vmin + (np.arange(n_v) + 0.5) * dv
        c = np.asarray(speed(v), dtype=float)
        w = np.ones_like(v) if weight is None else np.abs(np.asarray(weight(v), dtype=float))
        per_v = np.empty(n_v)
        for k in range(n_v):
            per_v[k] = pairwise_sum(np.abs(dchi_t + c[k] * dchi_x))
        area = box.width_t * box.width_x / n_tx**2
        return pairwise_sum(per_v * w) * area * dv


def make_bump_cutoff(txbox: Box | tuple, plateau_fraction: float = 0.5) -> Cutoff:
    if not isinstance(txbox, Box):
        txbox = Box(*txbox)
    if not 0.0 < plateau_fraction < 1.0:
        raise ValueError("plateau_fraction must lie in (0, 1)")
    return Cutoff(txbox, plateau_fraction)


@dataclass(frozen=True, eq=False)
class TestWeight:
    """Smooth compactly supported velocity weight psi on [-V, V]."""

    __test__ = False  # not a pytest class

    V: float
    psi: Callable[[Array], Array]
    dpsi: Callable[[Array], Array]
    name: str = "custom"
    n_quad: int = 20001

    def __post_init__(self):
        if not self.V > 0:
            raise ValueError("weight support must be nondegenerate")

    def __call__(self, v) -> Array:
        v = np.asarray(v, dtype=float)
        return np.where(np.abs(v) <= self.V, self.psi(v), 0.0)

    def _l1(self, fn) -> float:
        val, _ = integrate.quad(lambda s: abs(float(fn(np.array([s]))[0])), -self.V, self.V,
                                epsabs=1e-14, epsrel=1e-12, limit=400)
        return val

    def _sup(self, fn) -> float:
        v = np.linspace(-self.V, self.V, self.n_quad)
        return float(np.max(np.abs(fn(v))))

    @cached_property
    def l1(self) -> float:
        return self._l1(self.psi)

    @cached_property
    def sup(self) -> float:
        return self._sup(self.psi)

    @cached_property
    def l1_v(self) -> float:
        return self._l1(lambda v: v * self.psi(v))

    def l1_speed(self, speed) -> float:
        """||a' psi||_{L1}."""
        return self._l1(lambda v: speed(v) * self.psi(v))

    def l1_v_speed(self, speed) -> float:
        """||v a' psi||_{L1}."""
        return self._l1(lambda v: v * speed(v) * self.psi(v))

    def sup_deriv(self, gamma: int) -> float:
        """sup |d^gamma psi| for gamma in {0, 1}."""
        if gamma == 0:
            return self.sup
        if gamma == 1:
            return self._sup(self.dpsi)
        raise ValueError("only gamma in {0, 1} is supported")

    def sup_deriv_v(self, gamma: int) -> float:
        """sup |d^gamma (v psi)| for gamma in {0, 1}."""
        if gamma == 0:
            return self._sup(lambda v: v * self.psi(v))
        if gamma == 1:
            return self._sup(lambda v: self.psi(v) + v * self.dpsi(v))
        raise ValueError("only gamma in {0, 1} is supported")


def plateau_weight(V: float, plateau_fraction: float = 0.7) -> TestWeight:
    b = Bump1D(-V, V, plateau_fraction)
    return TestWeight(V, b, b.deriv, name=f"plateau:{V:g},{plateau_fraction:g}")


def polynomial_weight(V: float = 1.0) -> TestWeight:
    """psi(v) = max(0, 1 - (v/V)^2)^2 normalised to unit mass."""
    norm = 16.0 * V / 15.0

    def psi(v):
        s = np.clip(1.0 - (np.asarray(v, float) / V) ** 2, 0.0, None)
        return s**2 / norm

    def dpsi(v):
        v = np.asarray(v, float)
        s = np.clip(1.0 - (v / V) ** 2, 0.0, None)
        return -4.0 * v * s / V**2 / norm

    return TestWeight(V, psi, dpsi, name=f"poly:{V:g}")
