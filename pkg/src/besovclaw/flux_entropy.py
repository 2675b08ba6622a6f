"""Convex fluxes, convexity certificates, entropy pairs and the Tartar gap."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import interpolate, optimize

Array = np.ndarray
Fn = Callable[[Array], Array]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _vec(fn: Fn) -> Fn:
    def wrapped(v):
        return np.asarray(fn(np.asarray(v, dtype=float)), dtype=float)
    return wrapped


@dataclass(frozen=True, eq=False)
class FluxFunction:
    """Flux a with first and second derivatives.

    ``inv_da`` inverts a' (needed for rarefaction fans) and ``antiderivative``
    is a primitive of a; both are optional for custom fluxes.
    """

    tag: str
    a: Fn
    da: Fn
    d2a: Fn
    inv_da: Fn | None = None
    antiderivative: Fn | None = None
    params: tuple = ()

    def speed_bound(self, lo: float, hi: float) -> float:
        v = np.linspace(lo, hi, 257)
        return float(np.max(np.abs(self.da(v))))

    def inverse_speed(self, s) -> Array:
        if self.inv_da is not None:
            return self.inv_da(s)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        for k, target in enumerate(s):
            lo, hi = -1.0, 1.0
            while float(self.da(np.array(lo))) > target:
                lo *= 2.0
            while float(self.da(np.array(hi))) < target:
                hi *= 2.0
            out[k] = optimize.brentq(lambda v: float(self.da(np.array(v))) - target, lo, hi,
                                     xtol=1e-15, rtol=1e-14)
        return out

    def l1_speed(self, U: float, n: int = 4001) -> float:
        """||a'||_{L1(-U, U)} by Gauss-Legendre on monotone pieces."""
        if U <= 0:
            return 0.0
        pts = np.linspace(-U, U, n)
        # a' is monotone, so |a'| is piecewise monotone with at most one kink.
        x = 0.5 * (pts[1:, None] + pts[:-1, None]) + 0.5 * (pts[1:, None] - pts[:-1, None]) * _GL_NODES
        w = 0.5 * (pts[1:, None] - pts[:-1, None]) * _GL_WEIGHTS
        return float(np.sum(np.abs(self.da(x)) * w))


def burgers() -> FluxFunction:
    return FluxFunction(
        tag="burgers",
        a=lambda v: 0.5 * np.asarray(v, float) ** 2,
        da=lambda v: np.asarray(v, float) * 1.0,
        d2a=lambda v: np.ones_like(np.asarray(v, float)),
        inv_da=lambda s: np.asarray(s, float) * 1.0,
        antiderivative=lambda v: np.asarray(v, float) ** 3 / 6.0,
    )


def even_power(n: int) -> FluxFunction:
    """a(v) = v^(2n) / (2n), uniformly convex only in the (Hyp-a) sense for n > 1."""
    if n < 1:
        raise ValueError("even_power needs n >= 1")
    k = 2 * n

    def inv_da(s):
        s = np.asarray(s, float)
        return np.sign(s) * np.abs(s) ** (1.0 / (k - 1))

    return FluxFunction(
        tag=f"power:{n}",
        a=lambda v: np.asarray(v, float) ** k / k,
        da=lambda v: np.asarray(v, float) ** (k - 1),
        d2a=lambda v: (k - 1) * np.asarray(v, float) ** (k - 2),
        inv_da=inv_da,
        antiderivative=lambda v: np.asarray(v, float) ** (k + 1) / (k * (k + 1)),
        params=(n,),
    )


def custom_flux(a: Fn, da: Fn, d2a: Fn, tag: str = "custom") -> FluxFunction:
    return FluxFunction(tag=tag, a=_vec(a), da=_vec(da), d2a=_vec(d2a))


def table_flux(v_samples, a_samples, tag: str = "table") -> FluxFunction:
    """Flux interpolated by a C2 cubic spline through tabulated values."""
    spline = interpolate.CubicSpline(np.asarray(v_samples, float), np.asarray(a_samples, float))
    d1, d2, prim = spline.derivative(1), spline.derivative(2), spline.antiderivative(1)
    return FluxFunction(tag=tag, a=_vec(spline), da=_vec(d1), d2a=_vec(d2),
                        antiderivative=_vec(lambda v: prim(v) - prim(0.0)))


def parse_flux(spec: str) -> FluxFunction:
    """Parse 'burgers' or 'power:N'."""
    name, _, arg = spec.strip().partition(":")
    if name == "burgers" and not arg:
        return burgers()
    if name == "power":
        try:
            return even_power(int(arg))
        except ValueError:
            pass
    raise ValueError(f"unknown flux spec {spec!r}")


# --- Riemann flux ----------------------------------------------------------

def godunov_state(ul: Array, ur: Array, flux: FluxFunction) -> Array:
    """Interface state of the exact Riemann solution for convex a at x/t = 0."""
    ul = np.asarray(ul, float)
    ur = np.asarray(ur, float)
    sonic = float(flux.inverse_speed(np.array(0.0)).ravel()[0])
    rare = np.clip(sonic, ul, ur)
    shock = np.where(flux.a(ul) >= flux.a(ur), ul, ur)
    return np.where(ul <= ur, rare, shock)


# --- convexity certificates -----------------------------------------------

@dataclass(frozen=True)
class ConvexityCertificate:
    """a'(v) - a'(w) >= alpha_M (v - w)^beta for -M <= w < v <= M."""

    M: float
    alpha_M: float
    beta: float
    method: str = "analytic"

    def bound(self, gap) -> Array:
        return self.alpha_M * np.abs(np.asarray(gap, float)) ** self.beta

    def to_dict(self) -> dict:
        return {"M": self.M, "alpha_M": self.alpha_M, "beta": self.beta, "method": self.method}


def _scan_ratio(deriv: Fn, M: float, n: int, beta: float) -> float:
    """Infimum of (g(v) - g(w)) / (v - w)^beta over grid pairs w < v."""
    v = np.linspace(-M, M, n)
    g = deriv(v)
    best = math.inf
    for i in range(n - 1):
        gaps = v[i + 1:] - v[i]
        best = min(best, float(np.min((g[i + 1:] - g[i]) / gaps**beta)))
    return best


def _fit_beta(deriv: Fn, M: float, n: int) -> float:
    """Smallest ladder exponent whose infimum is positive and refinement-stable."""
    for beta in np.arange(1.0, 9.01, 0.5):
        coarse = _scan_ratio(deriv, M, n, beta)
        fine = _scan_ratio(deriv, M, 2 * n - 1, beta)
        if coarse > 0 and fine > 0.75 * coarse:
            return float(beta)
    raise ValueError("flux not uniformly convex at exponent β")


def loglog_beta(deriv: Fn, M: float, n: int = 200) -> float:
    """Least-squares slope of log(g(v) - g(w)) against log(v - w) over w < v pairs."""
    v = np.linspace(-M, M, n)
    g = deriv(v)
    iu = np.triu_indices(n, 1)
    dv = (v[:, None] - v[None, :]).T[iu]
    dg = (g[:, None] - g[None, :]).T[iu]
    keep = dg > 0
    slope, _ = np.polyfit(np.log(dv[keep]), np.log(dg[keep]), 1)
    return float(slope)


def _validate(deriv: Fn, cert: ConvexityCertificate, seed: int, n_pairs: int = 10_000) -> None:
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-cert.M, cert.M, (2, n_pairs))
    v, w = np.maximum(a, b), np.minimum(a, b)
    keep = v > w
    lhs = deriv(v[keep]) - deriv(w[keep])
    rhs = cert.alpha_M * (v[keep] - w[keep]) ** cert.beta
    if np.any(lhs < rhs * (1.0 - 1e-9) - 1e-15):
        raise ValueError("flux not uniformly convex at exponent β")


def _certify(deriv: Fn, tag: str, M: float, n_samples: int, method: str, seed: int,
             analytic: Callable[[], tuple[float, float] | None]) -> ConvexityCertificate:
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    if M <= 0:
        raise ValueError("probe radius M must be positive")
    known = analytic() if method == "analytic" else None
    if known is not None:
        alpha, beta = known
        used = "analytic"
    else:
        if method not in ("analytic", "empirical"):
            raise ValueError(f"unknown certification method {method!r}")
        beta = _known_beta(tag) or _fit_beta(deriv, M, min(n_samples, 400))
        alpha = _scan_ratio(deriv, M, n_samples, beta) * (1.0 - 1e-6)
        used = "empirical"
    if not alpha > 0:
        raise ValueError("flux not uniformly convex at exponent β")
    cert = ConvexityCertificate(float(M), float(alpha), float(beta), used)
    _validate(deriv, cert, seed)
    return cert


def _known_beta(tag: str) -> float | None:
    if tag == "burgers":
        return 1.0
    if tag.startswith("power:"):
        return 2.0 * int(tag.split(":")[1]) - 1.0
    return None


def certify_hyp_a(flux: FluxFunction, M: float, n_samples: int = 2001,
                  method: str = "analytic", seed: int = 0) -> ConvexityCertificate:
    """Certificate (alpha_M, beta) for a' on [-M, M].

    Tagged fluxes get the closed-form certificate under ``method='analytic'``.
    For even powers that is the generic lambda / (2^(2n-1) (2n-1)!) (rho/M)^(2n-1)
    bound with rho = M/2, which is far from sharp; ``method='empirical'`` returns
    the scanned infimum instead.
    """

    def analytic():
        if flux.tag == "burgers":
            return 1.0, 1.0
        if flux.tag.startswith("power:"):
            n = int(flux.tag.split(":")[1])
            k = 2 * n - 1
            lam = float(math.factorial(k))  # min of a^(2n) for v^(2n)/(2n)
            rho = M / 2.0
            return lam / (2.0**k * math.factorial(k)) * (rho / M) ** k, float(k)
        return None

    return _certify(flux.da, flux.tag, M, n_samples, method, seed, analytic)


# --- entropy pairs ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EntropyPair:
    """Entropy eta with flux q(v) = int_0^v eta'(w) a'(w) dw."""

    tag: str
    eta: Fn
    deta: Fn
    d2eta: Fn
    flux: FluxFunction
    V: float
    certificate: ConvexityCertificate | None = field(default=None)

    def q(self, v) -> Array:
        v = np.asarray(v, dtype=float)
        flat = v.ravel()
        out = np.empty_like(flat)
        for k in range(0, flat.size, 65536):
            part = flat[k:k + 65536]
            nodes = 0.5 * part[:, None] * (_GL_NODES + 1.0)
            vals = self.deta(nodes) * self.flux.da(nodes)
            out[k:k + 65536] = 0.5 * part * (vals @ _GL_WEIGHTS)
        return out.reshape(v.shape)

    @property
    def eta0(self) -> float:
        return 0.0 if self.certificate is None else self.certificate.alpha_M

    @property
    def beta_prime(self) -> float | None:
        return None if self.certificate is None else self.certificate.beta


_ENTROPIES = {
    "quadratic": (lambda v: 0.5 * v**2, lambda v: v * 1.0, lambda v: np.ones_like(v)),
    "linear": (lambda v: v * 1.0, lambda v: np.ones_like(v), lambda v: np.zeros_like(v)),
    "quartic": (lambda v: 0.25 * v**4, lambda v: v**3, lambda v: 3.0 * v**2),
}


def make_entropy_pair(spec, flux: FluxFunction, V: float, method: str = "analytic",
                      n_samples: int = 2001, seed: int = 0) -> EntropyPair:
    """Build an entropy pair from a tag ('quadratic', 'linear', 'quartic') or a
    tuple (eta, deta, d2eta) of callables.
    """
    if isinstance(spec, str):
        if spec not in _ENTROPIES:
            raise ValueError(f"unknown entropy spec {spec!r}")
        tag = spec
        eta, deta, d2eta = (_vec(fn) for fn in _ENTROPIES[spec])
    else:
        tag = "custom"
        eta, deta, d2eta = (_vec(fn) for fn in spec)
    probe = np.linspace(-V, V, 2001)
    slope = deta(probe)
    if np.any(np.diff(slope) < -1e-12 * max(1.0, float(np.max(np.abs(slope))))):
        raise ValueError("entropy not convex")

    cert = None
    if tag != "linear":
        def analytic():
            if tag == "quadratic":
                return 1.0, 1.0
            return None
        cert = _certify(deta, "burgers" if tag == "quadratic" else "power:2" if tag == "quartic"
                        else "custom", V, n_samples, method, seed, analytic)
    return EntropyPair(tag, eta, deta, d2eta, flux, float(V), cert)


def parse_entropy(spec: str, flux: FluxFunction, V: float) -> EntropyPair:
    return make_entropy_pair(spec.strip(), flux, V)


def tartar_gap(pair: EntropyPair, flux: FluxFunction, v, w) -> Array:
    """(w - v)(q(w) - q(v)) - (a(w) - a(v))(eta(w) - eta(v))."""
    v = np.asarray(v, float)
    w = np.asarray(w, float)
    return (w - v) * (pair.q(w) - pair.q(v)) - (flux.a(w) - flux.a(v)) * (pair.eta(w) - pair.eta(v))


def tartar_constants(alpha: float, beta: float, eta0: float, beta_prime: float) -> dict[str, float]:
    """Lower-bound constants for the Tartar gap, as stated and as derived."""
    k = beta + beta_prime
    denom = (k + 1.0) * (k + 2.0)
    return {
        "stated": alpha * eta0 * k / denom,
        "corrected": alpha * eta0 / denom,
        "exponent": k + 2.0,
    }


def delta_constants(alpha: float, beta: float) -> dict[str, float]:
    """Lower-bound constants for Delta(u, ubar), as stated and as derived."""
    denom = (beta + 1.0) * (beta + 2.0)
    return {"stated": alpha * beta**2 / denom, "corrected": alpha / denom, "exponent": beta + 2.0}
