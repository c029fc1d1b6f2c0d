"""Symbols of the frozen-slope operators and the diagonal operators built from them.

For a slope a in R^n the frozen operator A^a acts on e^{ik.x} by

    m_a(k) = -2 int (1 - cos(y.k)) |y|^{-n-1-alpha} (1 + (|y.a|/|y|)^2)^{-p} dy,

p = (n+1+alpha)/2.  Two independent evaluations are provided: a direct
quadrature over R^n (same node sets as the curvature evaluator) and the
polar reduction m_a(x) = |x|^{1+alpha} p_n(x), where the radial integral is
done in closed form and p_n is an integral over the unit sphere after a
Householder reflection sends x/|x| to a coordinate axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma, roots_jacobi

from .quadrature import QuadratureScheme, build_nodes, far_multiplier, radial_constant
from .torus import GridSpec, SpectralField

__all__ = [
    "FrozenSlope",
    "SymbolTable",
    "ResolventSpec",
    "symbol_direct",
    "symbol_polar",
    "symbol_table",
    "omega0",
    "omega0_closed_form",
    "householder",
    "mikhlin_sup",
    "mikhlin_over_slopes",
    "slope_sample",
    "probe_grid",
    "cutoff_symbol",
    "lifting_symbol",
    "lifting_apply",
    "resolvent_apply",
    "resolvent_check",
    "resolvent_sup",
    "operator_apply",
]

# Householder chart switch: use the e_1 chart within this angle of +e_n
_CHART_SWITCH_DEG = 10.0
_JACOBI_NODES = 96


@dataclass(frozen=True)
class FrozenSlope:
    """Frozen gradient ``a``; ``tau_delta`` = (tau, delta) selects delta * A^{tau a}."""

    a: tuple
    tau_delta: tuple | None = None
    eta: float | None = None

    def __post_init__(self):
        a = tuple(float(t) for t in np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "a", a)
        if self.eta is not None:
            if self.eta < 1:
                raise ValueError("eta must be >= 1")
            if np.linalg.norm(a) > self.eta + 1e-12:
                raise ValueError("|a| exceeds the slope budget eta")
        if self.tau_delta is not None:
            tau, delta = self.tau_delta
            if not 0.0 <= tau <= 1.0:
                raise ValueError("tau must lie in [0, 1]")
            hi = self.eta if self.eta is not None else np.inf
            if not 1.0 <= delta <= hi:
                raise ValueError("delta must lie in [1, eta]")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def effective(self) -> np.ndarray:
        """The slope entering the symbol, tau * a."""
        tau = 1.0 if self.tau_delta is None else self.tau_delta[0]
        return tau * np.asarray(self.a)

    @property
    def delta(self) -> float:
        return 1.0 if self.tau_delta is None else float(self.tau_delta[1])

    @classmethod
    def zero(cls, dim: int) -> "FrozenSlope":
        return cls(tuple([0.0] * dim))


def _as_slope(slope, dim: int | None = None) -> FrozenSlope:
    if isinstance(slope, FrozenSlope):
        return slope
    if slope is None:
        return FrozenSlope.zero(dim or 1)
    return FrozenSlope(tuple(np.atleast_1d(np.asarray(slope, dtype=float))))


def _slope_weight(a: np.ndarray, p: float):
    a = np.asarray(a, dtype=float)
    return lambda omega: (1.0 + (omega @ a) ** 2) ** (-p)


# ---------------------------------------------------------------------------
# omega_0


def _radial_integral_quad(alpha: float) -> float:
    """int_0^inf (1 - cos t) t^{-2-alpha} dt by adaptive quadrature."""
    L = 2 * np.pi
    # (1 - cos t)/t^2 is smooth; the t^{-alpha} factor is an algebraic weight
    head, _ = quad(lambda t: (1 - np.cos(t)) / t**2 if t > 0 else 0.5, 0.0, L,
                   weight="alg", wvar=(-alpha, 0.0), epsabs=1e-13, epsrel=1e-13, limit=200)
    tail_pow = L ** (-1 - alpha) / (1 + alpha)
    tail_cos, _ = quad(lambda t: t ** (-2 - alpha), L, np.inf, weight="cos", wvar=1.0,
                       epsabs=1e-13, limlst=100)
    return head + tail_pow - tail_cos


def _sphere_moment_quad(alpha: float, dim: int) -> float:
    """int_{S^{n-1}} |omega_1|^{1+alpha} d omega."""
    if dim == 1:
        return 2.0
    val, _ = quad(lambda t: np.cos(t) ** (1 + alpha), 0.0, 0.5 * np.pi, epsabs=1e-13, epsrel=1e-12)
    return 4 * val


@lru_cache(maxsize=None)
def omega0(alpha: float, dim: int = 1) -> float:
    """omega_0 = 2 int (1 - cos(y.e)) |y|^{-n-1-alpha} dy, by adaptive quadrature."""
    return float(2 * _radial_integral_quad(alpha) * _sphere_moment_quad(alpha, dim))


def omega0_closed_form(alpha: float, dim: int = 1) -> float:
    """Gamma-function value of omega_0, used as an independent cross-check."""
    ang = 2.0 if dim == 1 else 2 * np.sqrt(np.pi) * gamma(1 + alpha / 2) / gamma((3 + alpha) / 2)
    return float(2 * radial_constant(alpha) * ang)


# ---------------------------------------------------------------------------
# direct quadrature


def symbol_direct(k, alpha: float, slope=None, scheme: QuadratureScheme | None = None) -> float:
    """m_a(k) by quadrature over R^n (polar base cell + exact exterior multiplier)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    n = k.size
    if not np.any(k):
        return 0.0
    slope = _as_slope(slope, n)
    a = slope.effective
    if a.size != n:
        raise ValueError("slope and wavevector dimensions differ")
    p = 0.5 * (n + 1 + alpha)
    if scheme is None:
        # steep slope weights need extra angular resolution
        kmax = int(np.ceil(np.linalg.norm(k)))
        base = QuadratureScheme.for_band(kmax, n)
        extra = int(np.ceil(16 * np.linalg.norm(a)))
        scheme = QuadratureScheme.for_band(kmax, n, inner_angular_nodes=base.inner_angular_nodes + extra)
    nodes = build_nodes(scheme, n, alpha)
    z, r, w = nodes.inner_z, nodes.inner_r, nodes.inner_w
    weight = _slope_weight(a, p)
    half = np.sin(0.5 * (z @ k)) / r
    # (1 - cos) at z and -z, scaled by r^2 to keep the graded weights finite
    inner = np.sum(w * r ** (2 - 2 * p) * weight(z / r[:, None]) * 4 * half * half)
    wfun = None if not np.any(a) else weight
    outer = far_multiplier(k[None, :], alpha, np.pi, "pv", wfun, max(scheme.far_angular_nodes, 64))[0]
    return float(-2 * (inner + outer))


# ---------------------------------------------------------------------------
# polar reduction


def householder(x, chart: int | None = None) -> np.ndarray:
    """Reflection H with H x/|x| = e_c (c = n by default, 1-based).

    h_ij = delta_ij - (x_i/|x| - delta_ic)(x_j/|x| - delta_jc) / (1 - x_c/|x|).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    c = n if chart is None else chart
    u = x / np.linalg.norm(x)
    e = np.zeros(n)
    e[c - 1] = 1.0
    v = u - e
    denom = 1.0 - u[c - 1]
    if denom <= 0:
        raise ValueError("Householder chart degenerate for this direction")
    return np.eye(n) - np.outer(v, v) / denom


@lru_cache(maxsize=None)
def _jacobi_rule(alpha: float, npts: int):
    t, w = roots_jacobi(npts, 1 + alpha, 1 + alpha)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _sphere_integral(alpha: float, b: np.ndarray, axis: int, p: float) -> np.ndarray:
    """int_{S^1} |eta_axis|^{1+alpha} (1 + (eta.b)^2)^{-p} d eta for rows b of shape (N, 2).

    The zeros of |eta_axis| split the circle into two half-circles; each is
    integrated with Gauss-Jacobi nodes absorbing the |.|^{1+alpha} endpoint behaviour.
    """
    t, w = _jacobi_rule(alpha, _JACOBI_NODES)
    half = 0.5 * np.pi
    total = 0.0
    for start in (0.0, np.pi):
        if axis == 0:
            start = start - half  # zeros of cos at -pi/2, pi/2
        phi = start + half * (1.0 + t)
        s = half * half * (1 - t) * (1 + t)  # (phi - start)(start + pi - phi)
        trig = np.abs(np.sin(phi) if axis == 1 else np.cos(phi))
        # |trig|^{1+alpha} = (phi-start)^{1+alpha}(start+pi-phi)^{1+alpha} * smooth ratio
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = trig / s
        eta = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        wt = (1.0 + (b @ eta.T) ** 2) ** (-p)
        jac = half * half ** (2 * (1 + alpha))
        total = total + jac * (wt * (w * ratio ** (1 + alpha))).sum(axis=-1)
    return total


def symbol_polar(x, alpha: float, slope=None) -> np.ndarray:
    """|x|^{1+alpha} p_n(x) for one direction x (shape (n,)) or many (shape (N, n))."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    n = X.shape[1]
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ValueError("symbol undefined at origin")
    slope = _as_slope(slope, n)
    a = slope.effective
    if a.size != n:
        raise ValueError("slope and wavevector dimensions differ")
    p = 0.5 * (n + 1 + alpha)
    c_rad = radial_constant(alpha)
    if n == 1:
        pn = np.full(X.shape[0], -2 * c_rad * 2 * (1 + a[0] ** 2) ** (-p))
    else:
        pn = np.empty(X.shape[0])
        cos_switch = np.cos(np.deg2rad(_CHART_SWITCH_DEG))
        b = np.empty((X.shape[0], 2))
        axis = np.empty(X.shape[0], dtype=int)
        for i, xi in enumerate(X):
            chart = 1 if xi[1] / norms[i] > cos_switch else 2
            H = householder(xi, chart)
            b[i] = H @ a
            axis[i] = chart - 1
        for ax in (0, 1):
            sel = axis == ax
            if np.any(sel):
                pn[sel] = -2 * c_rad * _sphere_integral(alpha, b[sel], ax, p)
    out = norms ** (1 + alpha) * pn
    return out[0] if single else out


# ---------------------------------------------------------------------------
# tables over a grid band


@dataclass(frozen=True)
class SymbolTable:
    grid: GridSpec
    alpha: float
    slope: FrozenSlope
    values: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("values", "normalized"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def symbol_table(grid: GridSpec, alpha: float, slope=None, method: str = "polar",
                 scheme: QuadratureScheme | None = None) -> SymbolTable:
    """m_a(k) over the grid band (FFT order) with m_a(0) = 0."""
    slope = _as_slope(slope, grid.dim)
    k = grid.wavenumbers().reshape(-1, grid.dim).astype(float)
    nz = np.any(k != 0, axis=1)
    vals = np.zeros(k.shape[0])
    if method == "polar":
        vals[nz] = symbol_polar(k[nz], alpha, slope)
    elif method == "direct":
        vals[nz] = [symbol_direct(kk, alpha, slope, scheme) for kk in k[nz]]
    else:
        raise ValueError(f"unknown method {method!r}")
    absk = np.linalg.norm(k, axis=1)
    normalized = np.zeros_like(vals)
    normalized[nz] = vals[nz] / absk[nz] ** (1 + alpha)
    return SymbolTable(grid, alpha, slope, vals.reshape(grid.shape), normalized.reshape(grid.shape))


# ---------------------------------------------------------------------------
# Mikhlin-type bounds


def probe_grid(dim: int, radial: int = 9, angular: int = 64) -> np.ndarray:
    """Log-radial x angular probe points with 1e-2 <= |x| <= 1e2."""
    r = np.logspace(-2, 2, radial)
    if dim == 1:
        return np.concatenate([r, -r])[:, None]
    phi = np.linspace(0, 2 * np.pi, angular, endpoint=False) + np.pi / (3 * angular)
    d = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return (r[:, None, None] * d[None, :, :]).reshape(-1, 2)


def _normalized(x: np.ndarray, alpha: float, slope) -> np.ndarray:
    return symbol_polar(x, alpha, slope) / np.linalg.norm(x, axis=1) ** (1 + alpha)


def mikhlin_sup(slope, alpha: float, dim: int, probe: np.ndarray | None = None) -> dict:
    """Empirical Mikhlin constants of P_a = m_a / |x|^{1+alpha}.

    Derivatives up to order N = [n/2] + 1 by central differences with steps
    proportional to |x|.  Returns inf |P_a|, the sup of |x|^{|mu|} |d^mu P_a|
    for each order, and M_emp = max(1 / inf, sups).
    """
    slope = _as_slope(slope, dim)
    pts = probe_grid(dim) if probe is None else np.asarray(probe, dtype=float)
    order = dim // 2 + 1
    rad = np.linalg.norm(pts, axis=1)
    P = _normalized(pts, alpha, slope)
    inf_abs = float(np.min(np.abs(P)))
    eye = np.eye(dim)
    sups = {}
    h1 = 1e-4
    d1 = []
    for j in range(dim):
        step = (h1 * rad)[:, None] * eye[j]
        d = (_normalized(pts + step, alpha, slope) - _normalized(pts - step, alpha, slope)) / (2 * h1 * rad)
        d1.append(rad * d)
    sups[1] = float(np.max(np.abs(d1)))
    if order >= 2:
        h2 = 1e-3
        vals = []
        for i in range(dim):
            for j in range(i, dim):
                si = (h2 * rad)[:, None] * eye[i]
                sj = (h2 * rad)[:, None] * eye[j]
                if i == j:
                    d = (_normalized(pts + si, alpha, slope) - 2 * P
                         + _normalized(pts - si, alpha, slope)) / (h2 * rad) ** 2
                else:
                    d = (_normalized(pts + si + sj, alpha, slope) - _normalized(pts + si - sj, alpha, slope)
                         - _normalized(pts - si + sj, alpha, slope)
                         + _normalized(pts - si - sj, alpha, slope)) / (4 * (h2 * rad) ** 2)
                vals.append(rad**2 * d)
        sups[2] = float(np.max(np.abs(vals)))
    sups[0] = float(np.max(np.abs(P)))
    m_emp = max([1.0 / inf_abs] + list(sups.values()))
    return {
        "order": order,
        "inf_abs": inf_abs,
        "sup_by_order": sups,
        "M_emp": float(m_emp),
        "probe_points": int(pts.shape[0]),
    }


def slope_sample(eta: float, dim: int, radii=(0.0, 0.5, 1.0, 1.5, 2.0), angles: int = 8) -> list:
    """Slopes with |a| <= eta on a fixed absolute grid, so budgets give nested sets."""
    out = []
    for r in radii:
        if r > eta + 1e-12:
            continue
        if dim == 1:
            out.extend([(r,), (-r,)] if r else [(0.0,)])
            continue
        if r == 0:
            out.append((0.0, 0.0))
            continue
        for j in range(angles):
            phi = np.pi * j / angles  # m_a is even in a
            out.append((r * np.cos(phi), r * np.sin(phi)))
    return out


def mikhlin_over_slopes(eta: float, alpha: float, dim: int, probe: np.ndarray | None = None) -> dict:
    """Largest M_emp over the slope sample with |a| <= eta."""
    reports = [(a, mikhlin_sup(a, alpha, dim, probe)) for a in slope_sample(eta, dim)]
    worst = max(reports, key=lambda t: t[1]["M_emp"])
    return {"eta": eta, "M_emp": worst[1]["M_emp"], "worst_slope": list(worst[0]),
            "slopes": len(reports)}


# ---------------------------------------------------------------------------
# lifting and resolvent


def _quintic_ramp(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


def cutoff_symbol(kabs: np.ndarray, s: float) -> np.ndarray:
    """Smooth symbol equal to 1 on |k| <= 1/2 and to |k|^s on |k| >= 1.

    The blend is a quintic Hermite ramp in log|k| applied to the exponent.
    """
    kabs = np.asarray(kabs, dtype=float)
    out = np.ones_like(kabs)
    pos = kabs > 0.5
    lk = np.log(kabs[pos])
    ramp = _quintic_ramp((lk - np.log(0.5)) / np.log(2.0))
    out[pos] = np.exp(ramp * s * lk)
    return out


def lifting_symbol(grid: GridSpec, t: float) -> np.ndarray:
    """|k|^t for k != 0 and 1 at k = 0."""
    kabs = grid.abs_wavenumbers()
    out = np.ones_like(kabs)
    nz = kabs > 0
    out[nz] = kabs[nz] ** t
    return out


def lifting_apply(t: float, v: SpectralField) -> SpectralField:
    return SpectralField(v.grid, v.coeffs * lifting_symbol(v.grid, t))


@dataclass(frozen=True)
class ResolventSpec:
    """Data of the diagonal resolvent R(lambda) for delta * A^a on a grid band."""

    lambda_: complex
    delta: float
    table: SymbolTable

    def __post_init__(self):
        lam = complex(self.lambda_)
        object.__setattr__(self, "lambda_", lam)
        if lam.real < 1.0:
            raise ValueError(f"outside guaranteed resolvent set: Re(lambda) = {lam.real} < 1")
        if self.delta < 1.0:
            raise ValueError("delta must be >= 1")

    @property
    def cutoff_symbol(self) -> np.ndarray:
        return cutoff_symbol(self.table.grid.abs_wavenumbers(), 1 + self.table.alpha)

    @property
    def denominator(self) -> np.ndarray:
        return self.lambda_ - self.delta * self.table.values


def resolvent_apply(spec: ResolventSpec, v: SpectralField) -> SpectralField:
    """R(lambda) v with symbol cutoff(k) / (lambda - delta m_a(k))."""
    if spec.lambda_.real < 1.0:
        raise ValueError("outside guaranteed resolvent set")
    if v.grid != spec.table.grid:
        raise ValueError("grid mismatch")
    return SpectralField(v.grid, v.coeffs * spec.cutoff_symbol / spec.denominator)


def operator_apply(spec: ResolventSpec, v: SpectralField) -> SpectralField:
    """(lambda - delta A^a) v, the operator inverted by I_{-1-alpha} R(lambda)."""
    return SpectralField(v.grid, v.coeffs * spec.denominator)


def resolvent_sup(spec: ResolventSpec) -> float:
    """sup_k |lambda - delta m_a(k)|^{-1}, the diagonal norm of (lambda - delta A^a)^{-1}."""
    return float(np.max(1.0 / np.abs(spec.denominator)))


def resolvent_check(spec: ResolventSpec) -> dict:
    """min_k |lambda - delta m_a(k)| / max(|lambda|, |m_a(k)|) over the band (>= 1 expected)."""
    m = spec.table.values
    lam_abs = np.abs(np.full(m.shape, spec.lambda_))  # same routine as the numerator
    ratio = np.abs(spec.denominator) / np.maximum(lam_abs, np.abs(m))
    i = int(np.argmin(ratio))
    return {
        "min_ratio": float(ratio.reshape(-1)[i]),
        "argmin_k": spec.table.grid.wavenumbers().reshape(-1, spec.table.grid.dim)[i].tolist(),
        "resolvent_sup": resolvent_sup(spec),
        "lambda": [spec.lambda_.real, spec.lambda_.imag],
        "delta": spec.delta,
    }
