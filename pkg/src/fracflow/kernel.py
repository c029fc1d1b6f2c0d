"""Nonlocal mean curvature of periodic graphs and the quasilinear operator Phi.

Two equivalent forms of the curvature are evaluated:

* gradient-corrected form
      H(u)(x) = -(2/alpha) int (du - y.grad u(x-y)) / (|y|^2 + du^2)^p dy,
  with du = u(x) - u(x-y) and p = (n+1+alpha)/2;
* principal-value form
      H(u)(x) = -PV int |y|^{-n-alpha} [F(du/|y|) - F(-du/|y|)] dy,
      F(xi) = int_xi^inf (1+t^2)^{-p} dt.

Integration domain split (see :mod:`fracflow.quadrature`):

* base cell [-pi, pi]^n: graded polar nodes.  Every quantity needed at a
  node z (du, the numerator, the symmetric second difference) is produced for
  all x at once as a Fourier multiplier evaluated in closed form, so nothing
  is lost to cancellation as z -> 0.  The principal-value form pairs z with
  -z and integrates F' exactly over the interval spanned by the pair.
* outer cells: on |y| >= pi one has du^2/|y|^2 <= osc(u)^2/pi^2, and the
  kernel is expanded in the binomial series of (1 + du^2/|y|^2)^{-p}.  The
  linear term is integrated exactly over the whole exterior of the base cell
  as a Fourier multiplier; higher terms reduce to lattice sums
  sum_Y |z+Y|^{-2p-2j} (explicit for |m| <= M, continuum remainder beyond),
  evaluated once per node set.  Large oscillations fall back to direct
  summation over the cells |m| <= M plus the linear far field.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as beta_fn
from scipy.special import betainc, binom

from .quadrature import (
    QuadratureScheme,
    _legendre,
    build_nodes,
    far_multiplier,
    gauss_legendre,
)
from .torus import GridSpec, PeriodicField, oscillation

__all__ = [
    "FlowParams",
    "CurvatureResult",
    "F_eval",
    "F_closed",
    "F_prime",
    "f_eval",
    "h_alpha",
    "h_alpha_point",
    "h_alpha_point_pv",
    "phi_apply",
    "frozen_apply",
    "tail_bound",
    "default_scheme",
    "set_threads",
    "get_threads",
]

GRADIENT = "gradient_corrected"
PRINCIPAL = "principal_value"

# largest du^2/|y|^2 bound on the outer cells for which the series is used
_SERIES_RATIO = 0.5
_SERIES_TOL = 1e-16


@dataclass(frozen=True)
class FlowParams:
    """Order ``alpha`` and dimension; ``beta``/``gamma`` are reporting metadata only."""

    alpha: float
    dim: int = 1
    beta: float = 0.6
    gamma: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"order out of range: alpha = {self.alpha} not in (0, 1)")
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")

    @property
    def p(self) -> float:
        return 0.5 * (self.dim + 1 + self.alpha)

    def holder_conforming(self) -> bool:
        a, b, g = self.alpha, self.beta, self.gamma
        return max(a, b) < g < min(1.0, a + b)


@dataclass(frozen=True)
class CurvatureResult:
    value: float
    tail_bound: float
    form: str

    def __post_init__(self):
        if not (np.isfinite(self.value) and np.isfinite(self.tail_bound)):
            raise ValueError("non-finite curvature result")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")


# ---------------------------------------------------------------------------
# worker pool

_THREADS: int | None = None


def set_threads(n: int | None) -> None:
    """Cap the worker pool; ``None`` restores the FRACFLOW_THREADS / CPU default."""
    global _THREADS
    if n is not None and n < 1:
        raise ValueError("thread count must be >= 1")
    _THREADS = n


def get_threads() -> int:
    if _THREADS is not None:
        return _THREADS
    env = os.environ.get("FRACFLOW_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _ordered_sum(fn, chunks):
    """sum(fn(c) for c in chunks), added in chunk order whatever the pool size."""
    nthreads = get_threads()
    if nthreads == 1 or len(chunks) < 2:
        parts = map(fn, chunks)
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(fn, chunks))
    total = None
    for part in parts:
        total = part if total is None else total + part
    return total


def _chunks(n: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


# ---------------------------------------------------------------------------
# profile function F and f


def _p(params: FlowParams) -> float:
    return params.p


def F_eval(xi: float, params: FlowParams) -> float:
    """F(xi) = int_xi^inf (1+t^2)^{-p} dt by adaptive quadrature in t = tan(theta)."""
    e = params.dim - 1 + params.alpha
    val, _ = quad(lambda th: np.cos(th) ** e, np.arctan(xi), 0.5 * np.pi,
                  epsabs=1e-12, epsrel=1e-13, limit=200)
    return float(val)


def _half_beta(p: float) -> float:
    return 0.5 * beta_fn(0.5, p - 0.5)


def F_closed(xi, params: FlowParams) -> np.ndarray:
    """Vectorised F through the regularised incomplete beta function."""
    p = params.p
    xi = np.asarray(xi, dtype=float)
    hb = _half_beta(p)
    pos = hb * betainc(p - 0.5, 0.5, 1.0 / (1.0 + xi * xi))
    return np.where(xi >= 0, pos, 2 * hb - pos)


def F_prime(xi, params: FlowParams) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return -((1.0 + xi * xi) ** (-params.p))


def f_eval(s, params: FlowParams) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return (2.0 / params.alpha) * (1.0 + s * s) ** (-params.p)


def _antisym_F(xi, p: float) -> np.ndarray:
    """F(xi) - F(-xi) = -sign(xi) B(1/2, p-1/2) I_{xi^2/(1+xi^2)}(1/2, p-1/2)."""
    x2 = xi * xi
    return -np.sign(xi) * 2 * _half_beta(p) * betainc(0.5, p - 0.5, x2 / (1.0 + x2))


# Gauss-Legendre orders by interval half-length; (1+t^2)^{-p} has its
# nearest singularities at distance >= 1, so the error is below ~h^{2q}
_AVG_RULES = ((0.02, 4), (0.08, 6), (0.25, 10))


def _mean_weight(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """Mean of (1+t^2)^{-p} over the interval between a and b."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    out = np.empty(np.broadcast(a, b).shape)
    ah = np.abs(h)
    lower = -1.0
    for hmax, order in _AVG_RULES:
        sel = (ah > lower) & (ah <= hmax) if lower >= 0 else ah <= hmax
        lower = hmax
        if not np.any(sel):
            continue
        x, w = _legendre(order)
        cs, hs = c[sel], h[sel]
        acc = np.zeros_like(cs)
        for xi, wi in zip(x, w):
            t = cs + hs * xi
            acc += wi * (1.0 + t * t) ** (-p)
        out[sel] = 0.5 * acc
    small = ah <= _AVG_RULES[-1][0]
    big = ~small
    if np.any(big):
        lo = np.minimum(a[big], b[big])
        hi = np.maximum(a[big], b[big])
        flip = hi <= 0
        lo, hi = np.where(flip, -hi, lo), np.where(flip, -lo, hi)
        hb = _half_beta(p)

        def Fc(t):
            pos = hb * betainc(p - 0.5, 0.5, 1.0 / (1.0 + t * t))
            return np.where(t >= 0, pos, 2 * hb - pos)

        out[big] = (Fc(lo) - Fc(hi)) / (hi - lo)
    return out


# ---------------------------------------------------------------------------
# multipliers for the quantities sampled at x - z


def _numerator_imag_series(theta: np.ndarray) -> np.ndarray:
    """sin(t) - t cos(t) = sum_{j>=1} (-1)^{j+1} 2j t^{2j+1} / (2j+1)!, for |t| < 1/2."""
    t2 = theta * theta
    acc = np.zeros_like(theta)
    for j in range(9, 0, -1):
        acc = acc * t2 + (-1) ** (j + 1) * 2 * j / _FACT[2 * j + 1]
    return acc * t2 * theta


_FACT = np.cumprod(np.concatenate([[1.0], np.arange(1, 30, dtype=float)]))


class _Phases:
    """theta = k.z and the half phase e^{i theta/2} for a chunk of nodes z."""

    def __init__(self, theta: np.ndarray, half: np.ndarray):
        self.theta = theta
        self.half = half
        self.s = half.imag  # sin(theta/2)
        self.c = half.real  # cos(theta/2)

    def symbol(self, kind: str) -> np.ndarray:
        s, c, h = self.s, self.c, self.half
        if kind == "delta":  # u(x) - u(x - z):  1 - e^{-i theta} = 2i sin(theta/2) e^{-i theta/2}
            return 2j * s * np.conj(h)
        if kind == "pair":  # 2u(x) - u(x - z) - u(x + z)
            return 4 * s * s
        if kind == "shift":  # u(x - z)
            return np.conj(h) ** 2
        if kind == "numer":  # du - z.grad u(x - z):  1 - e^{-i theta}(1 + i theta)
            th = self.theta
            re = 2 * s * s - 2 * th * s * c
            im = np.where(np.abs(th) < 0.5, _numerator_imag_series(th),
                          2 * s * c - th * (1 - 2 * s * s))
            return re + 1j * im
        raise ValueError(kind)


class _Sampler:
    """Evaluates multiplier-transformed copies of a real field at x - z.

    ``targets=None`` returns values at every grid node through batched real
    inverse FFTs (half spectrum along the last axis; every multiplier used
    here satisfies mult(-k) = conj(mult(k))).  Otherwise ``targets`` is an
    (N, n) array of grid coordinates and the trigonometric sums are formed
    directly.
    """

    def __init__(self, f: PeriodicField, targets: np.ndarray | None = None):
        grid = f.grid
        self.grid = grid
        self.n = grid.dim
        m = grid.points_per_axis
        self.targets = targets
        if targets is None:
            self.c = np.fft.rfftn(f.values) / grid.size
            k_full = grid.wavenumbers_1d().astype(float)
            k_half = np.arange(m // 2 + 1, dtype=float)
            self.axes_k = [k_full] * (self.n - 1) + [k_half]
            mesh = np.meshgrid(*self.axes_k, indexing="ij")
            self.k = np.stack(mesh, axis=-1)
        else:
            c = np.fft.fftn(f.values) / grid.size
            keep = c.reshape(-1) != 0
            self.keep = keep
            k = grid.wavenumbers().reshape(-1, self.n).astype(float)[keep]
            self.k = k
            self.ce = c.reshape(-1)[keep][:, None] * np.exp(1j * (k @ targets.T))

    def phases(self, z: np.ndarray) -> _Phases:
        if self.targets is not None:
            th = z @ self.k.T
            return _Phases(th, np.exp(0.5j * th))
        theta = 0.0
        half = 1.0
        for j, kj in enumerate(self.axes_k):
            tj = z[:, j, None] * kj[None, :]
            shape = [z.shape[0]] + [1] * self.n
            shape[j + 1] = kj.size
            tj = tj.reshape(shape)
            theta = theta + tj
            half = half * np.exp(0.5j * tj)
        return _Phases(theta, half)

    def _finish(self, mult: np.ndarray) -> np.ndarray:
        if self.targets is None:
            axes = tuple(range(1, self.n + 1))
            return np.fft.irfftn(mult * self.c, s=self.grid.shape, axes=axes) * self.grid.size
        return (mult @ self.ce).real

    def sample(self, kind: str, z: np.ndarray, ph: _Phases | None = None) -> np.ndarray:
        ph = self.phases(z) if ph is None else ph
        return self._finish(ph.symbol(kind))

    def sample_grad(self, z: np.ndarray, ph: _Phases | None = None) -> list[np.ndarray]:
        """Components of grad u(x - z)."""
        ph = self.phases(z) if ph is None else ph
        e = ph.symbol("shift")
        return [self._finish(1j * self.k[..., j] * e) for j in range(self.n)]

    def multiplier_sum(self, mult_grid: np.ndarray) -> np.ndarray:
        """sum_k c_k mult(k) e^{ik.x} at the targets (mult given on the full grid, FFT order)."""
        if self.targets is None:
            half = mult_grid[..., : self.grid.points_per_axis // 2 + 1]
            axes = tuple(range(self.n))
            return np.fft.irfftn(half * self.c, s=self.grid.shape, axes=axes) * self.grid.size
        return (mult_grid.reshape(-1)[self.keep] @ self.ce).real


def _make_sampler(f: PeriodicField, targets=None) -> _Sampler:
    return _Sampler(f, targets)


# ---------------------------------------------------------------------------
# far field and lattice sums


@lru_cache(maxsize=64)
def _far_grid_multiplier(grid: GridSpec, alpha: float, radius: float, kind: str,
                         angular_nodes: int, slope: tuple | None = None) -> np.ndarray:
    """far_multiplier over the grid wavenumbers (k = 0 gives 0)."""
    k = grid.wavenumbers().reshape(-1, grid.dim).astype(float)
    weight = None if slope is None else _slope_weight(np.asarray(slope), grid.dim + 1 + alpha)
    if grid.dim == 1 or slope is not None:
        # only k -> -k symmetry in general
        key = np.where((k[:, :1] < 0) | ((k[:, :1] == 0) & (k[:, -1:] < 0)), -k, k)
    else:
        key = np.sort(np.abs(k), axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    vals = far_multiplier(uniq, alpha, radius, kind, weight, angular_nodes)
    out = vals[inv.reshape(-1)].reshape(grid.shape)
    out.setflags(write=False)
    return out


def _slope_weight(a: np.ndarray, two_p: float):
    a = np.asarray(a, dtype=float)

    def w(omega):
        return (1.0 + (omega @ a) ** 2) ** (-0.5 * two_p)

    return w


def _square_exterior(q: float, dim: int, radius: float) -> float:
    """(2 pi)^{-n} int_{|y|_inf > R} |y|^{-q} dy."""
    if dim == 1:
        return 2 * radius ** (1 - q) / ((q - 1) * 2 * np.pi)
    phi, w = gauss_legendre(40, 0.0, np.pi / 4)
    ang = 8 * np.sum(w * np.cos(phi) ** (q - 2))
    return ang * radius ** (2 - q) / ((q - 2) * (2 * np.pi) ** 2)


@lru_cache(maxsize=16)
def _lattice_sums(scheme: QuadratureScheme, dim: int, alpha: float, jmax: int):
    """S_j(z) = sum_{Y != 0} |z+Y|^{-2p-2j},  T_j(z) = sum_{Y != 0} (z+Y)|z+Y|^{-2p-2j}.

    Rows j = 1..jmax for every outer node z; cells with |m|_inf <= M are
    summed explicitly, the rest by the continuum (midpoint) approximation.
    """
    nodes = build_nodes(scheme, dim, alpha)
    z = nodes.outer_z
    two_p = dim + 1 + alpha
    q = two_p + 2 * np.arange(1, jmax + 1)
    S = np.zeros((jmax, z.shape[0]))
    T = np.zeros((jmax, z.shape[0], dim))
    for Y in np.concatenate([nodes.cells, -nodes.cells]):
        y = z + Y
        r2 = np.sum(y * y, axis=1)
        powers = r2[None, :] ** (-0.5 * q[:, None])
        S += powers
        T += powers[..., None] * y[None, :, :]
    for j, qj in enumerate(q):
        cont = _square_exterior(qj, dim, scheme.tail_radius)
        S[j] += cont
        T[j] += z * (1 - qj / dim) * cont
    S.setflags(write=False)
    T.setflags(write=False)
    return S, T


# ---------------------------------------------------------------------------
# scheme selection


def default_scheme(u: PeriodicField | GridSpec, lattice_cells: int | None = None) -> QuadratureScheme:
    """Scheme resolving the active band of ``u`` (or the full band of a grid)."""
    if isinstance(u, GridSpec):
        kmax = u.points_per_axis // 2 * (np.sqrt(u.dim))
        dim = u.dim
    else:
        c = np.abs(np.fft.fftn(u.values))
        k = np.sqrt(np.sum(u.grid.wavenumbers().astype(float) ** 2, axis=-1))
        active = c > 1e-13 * max(c.max(), 1e-300)
        kmax = float(k[active].max()) if np.any(active) else 1.0
        dim = u.grid.dim
    return QuadratureScheme.for_band(int(np.ceil(kmax)), dim, lattice_cells)


def _resolve(u: PeriodicField, params: FlowParams, scheme):
    if params.dim != u.grid.dim:
        raise ValueError("field dimension does not match params.dim")
    return default_scheme(u) if scheme is None else scheme


def _series_terms(ratio: float, p: float) -> int | None:
    if ratio >= _SERIES_RATIO:
        return None
    j = 1
    while True:
        if abs(binom(-p, j)) * ratio**j < _SERIES_TOL or ratio == 0.0:
            return max(j - 1, 0)
        j += 1
        if j > 80:
            return None


# ---------------------------------------------------------------------------
# integral kernels


def _grad_integral(su: _Sampler, sv: _Sampler, osc_u: float, params: FlowParams,
                   scheme: QuadratureScheme, chunk: int) -> np.ndarray:
    """int (dv - y.grad v(x-y)) / (|y|^2 + du^2)^p dy at the targets."""
    n, p, alpha = params.dim, params.p, params.alpha
    nodes = build_nodes(scheme, n, alpha)
    same = su is sv

    def inner(sl):
        z = nodes.inner_z[sl]
        r = nodes.inner_r[sl]
        # powers of r folded into the weights so nothing overflows under the grading
        w = nodes.inner_w[sl] * r ** (2 - 2 * p)
        acc = 0.0
        for sgn in (1.0, -1.0):
            ph = su.phases(sgn * z)
            du = su.sample("delta", sgn * z, ph)
            nv = sv.sample("numer", sgn * z, ph if same else None)
            shape = (-1,) + (1,) * (du.ndim - 1)
            rr = r.reshape(shape)
            xi = du / rr
            acc = acc + np.sum(w.reshape(shape) * (nv / (rr * rr)) * (1 + xi * xi) ** (-p), axis=0)
        return acc

    total = _ordered_sum(inner, _chunks(nodes.inner_z.shape[0], chunk))
    jmax = _series_terms(osc_u**2 / np.pi**2, p)
    grid = su.grid
    if jmax is not None:
        lin = _far_grid_multiplier(grid, alpha, np.pi, "grad", scheme.far_angular_nodes)
        total = total + sv.multiplier_sum(lin)
        if jmax > 0:
            S, T = _lattice_sums(scheme, n, alpha, max(jmax, 8))
            coef = np.array([binom(-p, j) for j in range(1, jmax + 1)])

            def outer(sl):
                z = nodes.outer_z[sl]
                w = nodes.outer_w[sl]
                th = su.phases(z)
                du = su.sample("delta", z, th)
                dv = du if same else sv.sample("delta", z)
                gv = sv.sample_grad(z, th if same else None)
                shape = (-1,) + (1,) * (du.ndim - 1)
                du2 = du * du
                cS = (coef[:, None] * w * S[:jmax, sl])[..., None]
                cT = coef[:, None, None] * w[:, None] * T[:jmax, sl]
                # Horner in du^2 for sum_j coef_j du^{2j} (dv S_j - gv.T_j)
                ps = np.broadcast_to(cS[-1].reshape(shape), du.shape)
                pt = [np.broadcast_to(cT[-1, :, d].reshape(shape), du.shape) for d in range(n)]
                for j in range(jmax - 2, -1, -1):
                    ps = ps * du2 + cS[j].reshape(shape)
                    pt = [pt[d] * du2 + cT[j, :, d].reshape(shape) for d in range(n)]
                integrand = ps * dv
                for d in range(n):
                    integrand = integrand - pt[d] * gv[d]
                return np.sum(du2 * integrand, axis=0)

            total = total + _ordered_sum(outer, _chunks(nodes.outer_z.shape[0], chunk))
        return total

    # direct summation over the cells |m| <= M, linear far field beyond
    R = scheme.tail_radius
    lin = _far_grid_multiplier(grid, alpha, R, "grad", scheme.far_angular_nodes)
    total = total + sv.multiplier_sum(lin)
    cells = np.concatenate([nodes.cells, -nodes.cells])

    def outer_direct(sl):
        z = nodes.outer_z[sl]
        w = nodes.outer_w[sl]
        th = su.phases(z)
        du = su.sample("delta", z, th)
        nv = sv.sample("numer", z, th if same else None)
        gv = sv.sample_grad(z, th if same else None)
        shape = (-1,) + (1,) * (du.ndim - 1)
        acc = 0.0
        for Y in cells:
            y = z + Y
            r2 = np.sum(y * y, axis=1).reshape(shape)
            num = nv
            for d in range(n):
                num = num - Y[d] * gv[d]
            acc = acc + np.sum(w.reshape(shape) * num * (r2 + du * du) ** (-p), axis=0)
        return acc

    return total + _ordered_sum(outer_direct, _chunks(nodes.outer_z.shape[0], chunk))


def _pv_integral(su: _Sampler, osc_u: float, params: FlowParams,
                 scheme: QuadratureScheme, chunk: int) -> np.ndarray:
    """-PV int |y|^{-n-alpha} [F(du/|y|) - F(-du/|y|)] dy at the targets."""
    n, p, alpha = params.dim, params.p, params.alpha
    nodes = build_nodes(scheme, n, alpha)

    def inner(sl):
        z = nodes.inner_z[sl]
        r = nodes.inner_r[sl]
        w = nodes.inner_w[sl]
        th = su.phases(z)
        s = su.sample("pair", z, th)
        dp = su.sample("delta", z, th)
        dm = s - dp
        shape = (-1,) + (1,) * (s.ndim - 1)
        rr = r.reshape(shape)
        avg = _mean_weight((-dm / rr).reshape(-1), (dp / rr).reshape(-1), p).reshape(s.shape)
        return np.sum((2 * w * r ** (2 - 2 * p)).reshape(shape) * (s / (rr * rr)) * avg, axis=0)

    total = _ordered_sum(inner, _chunks(nodes.inner_z.shape[0], chunk))
    jmax = _series_terms(osc_u**2 / np.pi**2, p)
    grid = su.grid
    if jmax is not None:
        lin = _far_grid_multiplier(grid, alpha, np.pi, "pv", scheme.far_angular_nodes)
        total = total + 2 * su.multiplier_sum(lin)
        if jmax > 0:
            S, _ = _lattice_sums(scheme, n, alpha, max(jmax, 8))
            coef = np.array([binom(-p, j) / (2 * j + 1) for j in range(1, jmax + 1)])

            def outer(sl):
                z = nodes.outer_z[sl]
                w = nodes.outer_w[sl]
                du = su.sample("delta", z)
                shape = (-1,) + (1,) * (du.ndim - 1)
                du2 = du * du
                cS = coef[:, None] * w * S[:jmax, sl]
                ps = np.broadcast_to(cS[-1].reshape(shape), du.shape)
                for j in range(jmax - 2, -1, -1):
                    ps = ps * du2 + cS[j].reshape(shape)
                acc = np.sum(ps * du2 * du, axis=0)
                return 2 * acc

            total = total + _ordered_sum(outer, _chunks(nodes.outer_z.shape[0], chunk))
        return total

    R = scheme.tail_radius
    lin = _far_grid_multiplier(grid, alpha, R, "pv", scheme.far_angular_nodes)
    total = total + 2 * su.multiplier_sum(lin)
    cells = np.concatenate([nodes.cells, -nodes.cells])

    def outer_direct(sl):
        z = nodes.outer_z[sl]
        w = nodes.outer_w[sl]
        du = su.sample("delta", z)
        shape = (-1,) + (1,) * (du.ndim - 1)
        acc = 0.0
        for Y in cells:
            y = z + Y
            r = np.sqrt(np.sum(y * y, axis=1)).reshape(shape)
            acc = acc - np.sum(w.reshape(shape) * r ** (-n - alpha) * _antisym_F(du / r, p), axis=0)
        return acc

    return total + _ordered_sum(outer_direct, _chunks(nodes.outer_z.shape[0], chunk))


def _chunk_size(grid: GridSpec, targets) -> int:
    npts = grid.size if targets is None else len(targets)
    return int(max(8, min(512, 2**16 // max(npts, 1))))


# ---------------------------------------------------------------------------
# public evaluators


def tail_bound(u: PeriodicField, params: FlowParams, scheme: QuadratureScheme | None = None) -> float:
    """Bound on the contribution of |y|_inf > R to the symmetrised integrand.

    Uses |F(xi) - F(-xi)| <= 2|xi|, so the far part is at most
    2 osc(u) |S^{n-1}| R^{-1-alpha} / (1 + alpha).  The evaluators add an
    analytic far-field correction on top, so their actual truncation error
    is far below this number.
    """
    scheme = _resolve(u, params, scheme)
    sphere = 2.0 if params.dim == 1 else 2 * np.pi
    R = scheme.tail_radius
    return float(2 * oscillation(u) * sphere * R ** (-1 - params.alpha) / (1 + params.alpha))


def h_alpha(u: PeriodicField, params: FlowParams, scheme: QuadratureScheme | None = None,
            form: str = GRADIENT) -> PeriodicField:
    """Curvature at every grid node."""
    scheme = _resolve(u, params, scheme)
    su = _make_sampler(u)
    osc = oscillation(u)
    chunk = _chunk_size(u.grid, None)
    if osc == 0.0:
        return PeriodicField(u.grid, np.zeros(u.grid.shape))
    if form in (GRADIENT, "nmc", "gradient"):
        vals = -(2.0 / params.alpha) * _grad_integral(su, su, osc, params, scheme, chunk)
    elif form in (PRINCIPAL, "pv"):
        vals = _pv_integral(su, osc, params, scheme, chunk)
    else:
        raise ValueError(f"unknown form {form!r}")
    return PeriodicField(u.grid, vals)


def _node_index(u: PeriodicField, x) -> np.ndarray:
    """Grid coordinates of node x (given as index tuple or as a point)."""
    grid = u.grid
    x = np.atleast_1d(np.asarray(x))
    if x.shape != (grid.dim,):
        raise ValueError("off-grid evaluation unsupported: point has wrong dimension")
    if np.issubdtype(x.dtype, np.integer):
        idx = np.mod(x, grid.points_per_axis)
    else:
        t = x / grid.spacing
        idx = np.rint(t)
        if np.max(np.abs(t - idx)) > 1e-9:
            raise ValueError("off-grid evaluation unsupported: x is not a grid node")
        idx = np.mod(idx.astype(int), grid.points_per_axis)
    return idx * grid.spacing


def _point(u, x, params, scheme, form) -> CurvatureResult:
    scheme = _resolve(u, params, scheme)
    xt = _node_index(u, x)[None, :]
    bound = tail_bound(u, params, scheme)
    osc = oscillation(u)
    if osc == 0.0:
        return CurvatureResult(0.0, bound, form)
    su = _make_sampler(u, xt)
    chunk = 2048
    if form == GRADIENT:
        val = -(2.0 / params.alpha) * _grad_integral(su, su, osc, params, scheme, chunk)
    else:
        val = _pv_integral(su, osc, params, scheme, chunk)
    return CurvatureResult(float(np.asarray(val).reshape(-1)[0]), bound, form)


def h_alpha_point(u: PeriodicField, x, params: FlowParams,
                  scheme: QuadratureScheme | None = None) -> CurvatureResult:
    """Gradient-corrected curvature at one grid node ``x`` (index tuple or coordinates)."""
    return _point(u, x, params, scheme, GRADIENT)


def h_alpha_point_pv(u: PeriodicField, x, params: FlowParams,
                     scheme: QuadratureScheme | None = None) -> CurvatureResult:
    """Principal-value curvature at one grid node."""
    return _point(u, x, params, scheme, PRINCIPAL)


def _grad_norm_factor(u: PeriodicField) -> np.ndarray:
    c = np.fft.fftn(u.values)
    k = u.grid.wavenumbers()
    g2 = np.zeros(u.grid.shape)
    for j in range(u.grid.dim):
        g2 += np.fft.ifftn(1j * k[..., j] * c).real ** 2
    return np.sqrt(1.0 + g2)


def phi_apply(u: PeriodicField, v: PeriodicField, params: FlowParams,
              scheme: QuadratureScheme | None = None) -> PeriodicField:
    """Phi(u)[v] = (2/alpha)(1+|grad u|^2)^{1/2} int (dv - y.grad v(x-y)) / (|y|^2+du^2)^p dy."""
    if u.grid != v.grid:
        raise ValueError(f"grid mismatch: {u.grid} vs {v.grid}")
    if scheme is None:
        scheme = default_scheme(u + v) if oscillation(u + v) > 0 else default_scheme(u.grid)
    _resolve(u, params, scheme)
    if oscillation(v) == 0.0:
        return PeriodicField(u.grid, np.zeros(u.grid.shape))
    su = _make_sampler(u)
    sv = su if v is u else _make_sampler(v)
    chunk = _chunk_size(u.grid, None)
    integral = _grad_integral(su, sv, oscillation(u), params, scheme, chunk)
    return PeriodicField(u.grid, (2.0 / params.alpha) * _grad_norm_factor(u) * integral)


def frozen_apply(a, v: PeriodicField, params: FlowParams,
                 scheme: QuadratureScheme | None = None) -> PeriodicField:
    """Frozen-slope operator A^a[v]: du replaced by the linear profile y.a.

    A^a[v](x) = (2/alpha) int (dv - y.grad v(x-y)) |y|^{-n-1-alpha} (1 + (a.y/|y|)^2)^{-p} dy,
    evaluated with the base-cell polar nodes and the exact exterior multiplier.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    scheme = _resolve(v, params, scheme)
    if a.shape != (params.dim,):
        raise ValueError("slope has the wrong dimension")
    n, p, alpha = params.dim, params.p, params.alpha
    nodes = build_nodes(scheme, n, alpha)
    sv = _make_sampler(v)
    weight = _slope_weight(a, 2 * p)
    chunk = _chunk_size(v.grid, None)

    def inner(sl):
        z = nodes.inner_z[sl]
        r = nodes.inner_r[sl]
        w = nodes.inner_w[sl] * r ** (2 - 2 * p) * weight(z / r[:, None])
        acc = 0.0
        for sgn in (1.0, -1.0):
            nv = sv.sample("numer", sgn * z)
            shape = (-1,) + (1,) * (nv.ndim - 1)
            rr = r.reshape(shape)
            acc = acc + np.sum(w.reshape(shape) * (nv / (rr * rr)), axis=0)
        return acc

    total = _ordered_sum(inner, _chunks(nodes.inner_z.shape[0], chunk))
    slope = tuple(float(t) for t in a)
    lin = _far_grid_multiplier(v.grid, alpha, np.pi, "grad", scheme.far_angular_nodes,
                               None if not np.any(a) else slope)
    total = total + sv.multiplier_sum(lin)
    return PeriodicField(v.grid, (2.0 / alpha) * total)
