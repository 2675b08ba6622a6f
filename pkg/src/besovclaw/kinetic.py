"""Kinetic densities, the kinetic defect measure m, entropy production and Delta."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator

import numpy as np

from .fields import Box, Grid2D, SpaceTimeField, TestWeight, VelocityGrid, pairwise_sum
from .flux_entropy import EntropyPair, FluxFunction, godunov_state
from .solver import SolutionRecord, _neighbours, _require_inside, rh_speed, riemann_solution

Array = np.ndarray

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
BLOCK = 64


# --- primitives in v of f and of a'(v) f ----------------------------------

def kinetic_primitive(u: Array, v: Array) -> Array:
    """Phi(u, v) = int_{-inf}^v M_u(w) dw, broadcasting u against v."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return np.where(u >= 0, np.clip(v, 0.0, np.maximum(u, 0.0)),
                    u - np.clip(v, np.minimum(u, 0.0), 0.0))


def kinetic_flux_primitive(u: Array, v: Array, flux: FluxFunction) -> Array:
    """Psi(u, v) = int_{-inf}^v a'(w) M_u(w) dw."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    pos = np.clip(v, 0.0, np.maximum(u, 0.0))
    neg = np.clip(v, np.minimum(u, 0.0), 0.0)
    a0 = float(flux.a(np.array(0.0)))
    return np.where(u >= 0, flux.a(pos) - a0, flux.a(u) - flux.a(neg))


def maxwellian(u, v) -> Array:
    """M_u(v): +1 on [0, u] for u >= 0, -1 on [u, 0] for u < 0."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return np.where(u >= 0, ((v >= 0) & (v <= u)).astype(float),
                    -((v >= u) & (v <= 0)).astype(float))


# --- densities -----------------------------------------------------------

class _Density:
    """Common interface: f on (time cell, space cell, velocity cell) in slabs."""

    grid: Grid2D
    vgrid: VelocityGrid

    def slab(self, i0: int, i1: int) -> Array:  # pragma: no cover - interface
        raise NotImplementedError

    def slabs(self, block: int = BLOCK) -> Iterator[tuple[int, Array]]:
        for i0 in range(0, self.grid.nt, block):
            yield i0, self.slab(i0, min(i0 + block, self.grid.nt))

    @property
    def fmax(self) -> float:
        return max(float(np.max(np.abs(s))) for _, s in self.slabs())

    def dense(self) -> Array:
        return self.slab(0, self.grid.nt)


@dataclass(frozen=True, eq=False)
class KineticDensity(_Density):
    """f = M_u(v) stored implicitly through u; cell averages over v-cells."""

    record: SolutionRecord
    vgrid: VelocityGrid
    gamma: int = 1

    def __post_init__(self):
        if self.gamma not in (0, 1):
            raise ValueError("only gamma in {0, 1} is supported")

    @property
    def grid(self) -> Grid2D:
        return self.record.grid

    def slab(self, i0: int, i1: int) -> Array:
        u = self.record.values[i0:i1, :, None]
        P = kinetic_primitive(u, self.vgrid.edges[None, None, :])
        return np.diff(P, axis=-1) / self.vgrid.dv

    @property
    def fmax(self) -> float:
        return 1.0 if self.record.supnorm > 0 else 0.0


def lift(rec: SolutionRecord, vgrid: VelocityGrid, gamma: int = 1) -> KineticDensity:
    if not vgrid.spans(rec.supnorm):
        raise ValueError("velocity support exceeded")
    return KineticDensity(rec, vgrid, gamma)


@dataclass(frozen=True, eq=False)
class SampledDensity(_Density):
    """f(t, x, v) = W(rho(t, x) - v) sampled at velocity cell centres."""

    rho: SpaceTimeField
    W: Callable[[Array], Array]
    vgrid: VelocityGrid

    @property
    def grid(self) -> Grid2D:
        return self.rho.grid

    def slab(self, i0: int, i1: int) -> Array:
        r = self.rho.values[i0:i1, :, None]
        return np.asarray(self.W(r - self.vgrid.centers[None, None, :]), dtype=float)


def monotone_profile_density(rho: SpaceTimeField, W: Callable[[Array], Array],
                             vgrid: VelocityGrid, check: bool = True) -> SampledDensity:
    if check:
        s = np.linspace(-4.0 * (vgrid.vmax - vgrid.vmin), 4.0 * (vgrid.vmax - vgrid.vmin), 4001)
        d = np.diff(np.asarray(W(s), float))
        if not (np.all(d >= -1e-14) or np.all(d <= 1e-14)):
            raise ValueError("profile W is not monotone")
    return SampledDensity(rho, W, vgrid)


@dataclass(frozen=True, eq=False)
class RandomSignDensity(_Density):
    """Independent random signs per (t, x, v): a deliberate (Hyp-f) counterexample."""

    grid: Grid2D
    vgrid: VelocityGrid
    seed: int = 0

    def slab(self, i0: int, i1: int) -> Array:
        rows = [np.random.default_rng([self.seed, i]).choice([-1.0, 1.0],
                                                             size=(self.grid.nx, self.vgrid.nv))
                for i in range(i0, i1)]
        return np.stack(rows)


# --- signed measures -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Cell masses of a signed measure, aggregated per (step, cell).

    Steps are located at t0 + (i + 1) dt (between consecutive sample rows) and
    cells at the x centres. For the kinetic measure m the masses are already
    integrated over v; ``weighted_tv`` carries |a'(v)| d|m|.
    """

    grid: Grid2D
    pos: Array
    neg: Array
    weighted_tv: Array | None = None
    moments: dict = field(default_factory=dict)
    closure_defect: float = 0.0
    closure_tolerance: float = np.inf
    triplets: Array | None = None
    kind: str = "m"
    meta: dict = field(default_factory=dict)

    @property
    def closure_warning(self) -> bool:
        return self.closure_defect > self.closure_tolerance

    @cached_property
    def step_times(self) -> Array:
        return self.grid.t0 + (np.arange(self.pos.shape[0]) + 1.0) * self.grid.dt

    def _mask(self, box: Box | None) -> tuple[slice, slice]:
        if box is None:
            return slice(None), slice(None)
        t = self.step_times
        x = self.grid.x_centers
        it = np.nonzero((t >= box.ta) & (t <= box.tb))[0]
        ix = np.nonzero((x >= box.xa) & (x <= box.xb))[0]
        if it.size == 0 or ix.size == 0:
            return slice(0, 0), slice(0, 0)
        return slice(it[0], it[-1] + 1), slice(ix[0], ix[-1] + 1)

    def window(self, box: Box | None = None) -> dict[str, float]:
        st, sx = self._mask(box)
        pos = pairwise_sum(self.pos[st, sx])
        neg = pairwise_sum(self.neg[st, sx])
        out = {"pos": pos, "neg": neg, "tv": pos + neg, "net": pos - neg}
        if self.weighted_tv is not None:
            out["weighted_tv"] = pairwise_sum(self.weighted_tv[st, sx])
        return out

    def total_variation(self, box: Box | None = None) -> float:
        return self.window(box)["tv"]

    def moment(self, name: str, box: Box | None = None) -> float:
        st, sx = self._mask(box)
        return pairwise_sum(self.moments[name][st, sx])

    def summary(self) -> dict:
        w = self.window()
        return {"kind": self.kind, **w, "closure_defect": self.closure_defect,
                "closure_tolerance": (self.closure_tolerance
                                      if np.isfinite(self.closure_tolerance) else None),
                "closure_warning": self.closure_warning}


# --- interface primitives -------------------------------------------------

def _shock_theta(rec: SolutionRecord, flux: FluxFunction, i: int) -> Array:
    """Fraction of [t_i, t_{i+1}] during which each interface sees the left state."""
    g = rec.grid
    ul, ur = rec.meta["ul"], rec.meta["ur"]
    xj = rec.meta.get("x_jump", 0.0)
    sigma = rh_speed(ul, ur, flux)
    ta, tb = g.t_centers[i], g.t_centers[i] + g.dt
    xe = g.x_edges - xj
    if sigma == 0.0:
        tol = 1e-9 * g.dx
        return np.where(np.abs(xe) <= tol, 0.5, (xe < 0).astype(float))
    tc = xe / sigma
    if sigma > 0:
        return np.clip((tb - tc) / g.dt, 0.0, 1.0)
    return np.clip((tc - ta) / g.dt, 0.0, 1.0)


def _is_shock(rec: SolutionRecord) -> bool:
    return rec.scheme == "nonentropic_shock" or (
        rec.scheme == "exact_riemann" and rec.meta["ul"] > rec.meta["ur"])


def _analytic_interface(rec: SolutionRecord, flux: FluxFunction, i: int,
                        phi: Callable[[Array], Array]) -> Array:
    """Time average over [t_i, t_{i+1}] of phi(u) at each interface; phi maps
    a state array of shape (nx + 1, k) to values of the same shape plus trailing dims."""
    g = rec.grid
    if _is_shock(rec):
        theta = _shock_theta(rec, flux, i)
        left = phi(np.full((1,), rec.meta["ul"]))[0]
        right = phi(np.full((1,), rec.meta["ur"]))[0]
        th = theta.reshape((-1,) + (1,) * np.ndim(left))
        return th * left + (1.0 - th) * right
    fn = riemann_solution(rec.meta["ul"], rec.meta["ur"], flux, rec.meta.get("x_jump", 0.0))
    ta = g.t_centers[i]
    ts = ta + 0.5 * g.dt * (_GL_X + 1.0)
    states = fn(ts[None, :], g.x_edges[:, None])  # (nx + 1, 8)
    vals = phi(states.ravel())
    vals = vals.reshape(states.shape + vals.shape[1:])
    return np.tensordot(0.5 * _GL_W, vals, axes=([0], [1]))


def _interface_primitive(rec: SolutionRecord, flux: FluxFunction, i: int, v: Array) -> Array:
    """Scheme-consistent interface value of Psi(., v) for the step i -> i + 1."""
    u = rec.values[i]
    g = rec.grid
    if rec.scheme == "godunov":
        ul, ur = _neighbours(u, rec.boundary)
        return kinetic_flux_primitive(godunov_state(ul, ur, flux)[:, None], v[None, :], flux)
    if rec.scheme == "lax_friedrichs":
        ul, ur = _neighbours(u, rec.boundary)
        psi_l = kinetic_flux_primitive(ul[:, None], v[None, :], flux)
        psi_r = kinetic_flux_primitive(ur[:, None], v[None, :], flux)
        phi_l = kinetic_primitive(ul[:, None], v[None, :])
        phi_r = kinetic_primitive(ur[:, None], v[None, :])
        return 0.5 * (psi_l + psi_r) - 0.5 * g.dx / g.dt * (phi_r - phi_l)
    if rec.scheme in ("exact_riemann", "nonentropic_shock"):
        return _analytic_interface(
            rec, flux, i, lambda s: kinetic_flux_primitive(s[:, None], v[None, :], flux))
    raise ValueError(f"no kinetic interface rule for scheme {rec.scheme!r}")


def _interface_entropy_flux(rec: SolutionRecord, flux: FluxFunction, pair: EntropyPair,
                            i: int) -> Array:
    u = rec.values[i]
    g = rec.grid
    if rec.scheme == "godunov":
        ul, ur = _neighbours(u, rec.boundary)
        return pair.q(godunov_state(ul, ur, flux))
    if rec.scheme == "lax_friedrichs":
        ul, ur = _neighbours(u, rec.boundary)
        return 0.5 * (pair.q(ul) + pair.q(ur)) - 0.5 * g.dx / g.dt * (pair.eta(ur) - pair.eta(ul))
    if rec.scheme in ("exact_riemann", "nonentropic_shock"):
        return _analytic_interface(rec, flux, i, pair.q)
    raise ValueError(f"no entropy flux rule for scheme {rec.scheme!r}")


# --- measure extraction ------------------------------------------------

def _trapezoid_weights(n_edges: int) -> Array:
    w = np.ones(n_edges)
    w[0] = w[-1] = 0.5
    return w


def extract_measure(kd: KineticDensity, flux: FluxFunction,
                    moments: dict[str, Callable[[Array], Array]] | None = None,
                    keep_triplets: int = 0,
                    v_window: tuple[float, float] | None = None) -> SignedMeasure:
    """Recover m from d_t Phi + d_x Psi = m, cumulatively in v from vmin.

    m is evaluated at the velocity edges; masses are m dt dx dv with trapezoid
    weights in v. ``moments`` maps names to weights g(v) for which the signed
    per-cell integral of g(v) dm is also kept (g = eta'' gives the entropy
    production predicted by the kinetic measure). ``v_window`` restricts the
    aggregated masses to velocity edges inside [lo, hi].
    """
    rec = kd.record
    g = rec.grid
    vg = kd.vgrid
    v = vg.edges
    wv = _trapezoid_weights(v.size) * vg.dv
    if v_window is not None:
        wv = np.where((v >= v_window[0] - 1e-12) & (v <= v_window[1] + 1e-12), wv, 0.0)
    speed = np.abs(flux.da(v))
    nsteps = g.nt - 1
    pos = np.empty((nsteps, g.nx))
    neg = np.empty((nsteps, g.nx))
    wtv = np.empty((nsteps, g.nx))
    moments = moments or {}
    mom_w = {k: np.asarray(fn(v), float) * wv for k, fn in moments.items()}
    mom = {k: np.empty((nsteps, g.nx)) for k in moments}
    closure = 0.0
    cell = g.dt * g.dx
    trip = []
    n_trip = 0

    phi_prev = kinetic_primitive(rec.values[0][:, None], v[None, :])
    for i in range(nsteps):
        phi_next = kinetic_primitive(rec.values[i + 1][:, None], v[None, :])
        P = _interface_primitive(rec, flux, i, v)
        m = (phi_next - phi_prev) / g.dt + (P[1:] - P[:-1]) / g.dx
        if kd.gamma == 0:
            m = np.concatenate((np.diff(m, axis=1) / vg.dv, np.zeros((g.nx, 1))), axis=1)
        closure = max(closure, float(np.max(np.abs(m[:, -1]))) * cell)
        mp = np.maximum(m, 0.0)
        mn = np.maximum(-m, 0.0)
        pos[i] = (mp @ wv) * cell
        neg[i] = (mn @ wv) * cell
        wtv[i] = ((mp + mn) @ (wv * speed)) * cell
        for k, w in mom_w.items():
            mom[k][i] = (m @ w) * cell
        if keep_triplets and n_trip < keep_triplets:
            jj, kk = np.nonzero(m != 0.0)
            masses = m[jj, kk] * wv[kk] * cell
            trip.append(np.column_stack([np.full(jj.size, i), jj, kk, masses]))
            n_trip += jj.size
        phi_prev = phi_next

    triplets = np.concatenate(trip)[:keep_triplets] if trip else None
    return SignedMeasure(g, pos, neg, wtv, mom, closure, 10.0 * (g.dx + g.dt), triplets, "m",
                         {"nv": vg.nv, "vmin": vg.vmin, "vmax": vg.vmax, "gamma": kd.gamma,
                          "v_window": v_window})


def entropy_production(rec: SolutionRecord, flux: FluxFunction, pair: EntropyPair,
                       testfn=None) -> SignedMeasure:
    """Cell masses of mu defined by d_t eta(u) + d_x q(u) = -mu.

    Entropy solutions give mu >= 0. When ``testfn`` is a Cutoff its support
    must lie in the grid and the tested value int chi dmu goes into meta.
    """
    g = rec.grid
    if testfn is not None:
        _require_inside(testfn.box, g)
    nsteps = g.nt - 1
    mu = np.empty((nsteps, g.nx))
    eta_prev = pair.eta(rec.values[0])
    for i in range(nsteps):
        eta_next = pair.eta(rec.values[i + 1])
        Q = _interface_entropy_flux(rec, flux, pair, i)
        mu[i] = -((eta_next - eta_prev) * g.dx + (Q[1:] - Q[:-1]) * g.dt)
        eta_prev = eta_next
    meas = SignedMeasure(g, np.maximum(mu, 0.0), np.maximum(-mu, 0.0), kind="mu",
                         moments={"signed": mu}, meta={"entropy": pair.tag})
    if testfn is not None:
        chi = testfn(meas.step_times[:, None], g.x_centers[None, :])
        meas.meta["tested"] = pairwise_sum(chi * mu)
    return meas


# --- Delta and (Hyp-f) --------------------------------------------------

def delta(u: float, ubar: float, flux: FluxFunction, vgrid: VelocityGrid) -> float:
    """Double quadrature of 1_{v > w} (a'(v) - a'(w)) g(v) g(w), g = M_u - M_ubar.

    g is replaced by its exact cell averages; pairs in distinct cells use the
    cell centres and same-cell pairs the second-order correction
    (a'(hi) - a'(lo)) dv^2 / 6.
    """
    lim = max(abs(u), abs(ubar))
    if vgrid.vmin > -lim or vgrid.vmax < lim:
        raise ValueError("velocity support exceeded")
    e = vgrid.edges
    gk = np.diff(kinetic_primitive(u, e) - kinetic_primitive(ubar, e)) / vgrid.dv
    s = flux.da(vgrid.centers)
    G = np.cumsum(gk) - gk
    H = np.cumsum(gk * s) - gk * s
    off = pairwise_sum(gk * (s * G - H)) * vgrid.dv**2
    diag = pairwise_sum((flux.da(e[1:]) - flux.da(e[:-1])) * gk**2) * vgrid.dv**2 / 6.0
    return off + diag


def closed_form_delta(u: float, ubar: float, flux: FluxFunction) -> float:
    """(hi - lo)(a(hi) + a(lo)) - 2 int_lo^hi a, needing an antiderivative of a."""
    if flux.antiderivative is None:
        raise ValueError("closed form needs an antiderivative of the flux")
    lo, hi = min(u, ubar), max(u, ubar)
    A = flux.antiderivative
    a = flux.a
    return float((hi - lo) * (a(np.array(hi)) + a(np.array(lo))) - 2.0 * (A(np.array(hi)) - A(np.array(lo))))


@dataclass(frozen=True)
class HypFReport:
    worst: float
    n_checked: int
    n_violations: int

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def to_dict(self) -> dict:
        return {"worst": self.worst, "n_checked": self.n_checked,
                "n_violations": self.n_violations, "pass": self.passed}


def check_hyp_f(density: _Density, shifts, row_stride: int = 1, tol: float = 1e-12) -> HypFReport:
    """(f(t+s, x+y, v) - f(t, x, v)) (f(t+s, x+y, w) - f(t, x, w)) >= 0 for all v, w.

    Shifts (s, y) are integer cell offsets. For each sampled (t, x) the worst
    product over (v, w) is min(d) * max(d) when d changes sign.
    """
    g = density.grid
    worst = 0.0
    n_checked = 0
    n_bad = 0
    f = None
    for s, y in shifts:
        s, y = int(s), int(y)
        if abs(s) >= g.nt or abs(y) >= g.nx:
            raise ValueError("shift leaves the grid")
        rows = np.arange(max(0, -s), g.nt - max(0, s), row_stride)
        for start in range(0, rows.size, BLOCK):
            r = rows[start:start + BLOCK]
            if f is None:
                f = density.dense() if g.nt * g.nx * density.vgrid.nv <= 4_000_000 else False
            if f is not False:
                a, b = f[r], f[r + s]
            else:
                a = np.stack([density.slab(i, i + 1)[0] for i in r])
                b = np.stack([density.slab(i + s, i + s + 1)[0] for i in r])
            j0, j1 = max(0, -y), g.nx - max(0, y)
            d = b[:, j0 + y:j1 + y] - a[:, j0:j1]
            prod = np.minimum(d.min(axis=-1) * d.max(axis=-1), 0.0)
            n_checked += prod.size
            n_bad += int(np.count_nonzero(prod < -tol))
            worst = min(worst, float(prod.min()))
    return HypFReport(worst, n_checked, n_bad)


def velocity_average(density: _Density, psi: TestWeight | Callable[[Array], Array]) -> SpaceTimeField:
    """int f psi dv per (t, x) by the midpoint rule over velocity cells."""
    vg = density.vgrid
    w = np.asarray(psi(vg.centers), float) * vg.dv
    out = np.empty((density.grid.nt, density.grid.nx))
    for i0, slab in density.slabs():
        out[i0:i0 + slab.shape[0]] = slab @ w
    return SpaceTimeField(density.grid, out)
