"""Time integration of du/dt = Phi(u)[u] on the periodic grid.

The default stepper is a Crank-Nicolson / Adams-Bashforth-2 splitting: the
linearization at zero, L = -sigma * omega0 * |k|^{1+alpha}, is handled
implicitly and the remainder N(u) = Phi(u)[u] - L u is extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernel import PRINCIPAL, FlowParams, default_scheme, h_alpha, _grad_norm_factor
from .quadrature import QuadratureScheme
from .symbol import omega0
from .torus import (
    GridSpec,
    PeriodicField,
    besov_seminorm,
    derivative,
    dilate_field,
    integral_mean,
    refined_sup_norm,
)

SCHEMES = ("imex_cn", "explicit_rk2")
BLOWUP_FACTOR = 1e6
FIT_R2 = 0.999
STATUS_DONE = "completed"
STATUS_BLOWUP = "blow-up"
STATUS_NOT_CONVERGED = "not converged"


class BlowUpError(RuntimeError):
    """Raised by ``step`` when a stage value is non-finite or too large."""

    def __init__(self, state: PeriodicField, t: float | None = None):
        super().__init__("blow-up detected")
        self.state = state
        self.t = t


def stability_budget(grid: GridSpec, alpha: float) -> float:
    """Largest stable explicit dt: Heun's region reaches -2 on the real axis."""
    h = grid.spacing
    c = 2.0 / (math.pi ** (1.0 + alpha) * grid.dim ** ((1.0 + alpha) / 2))
    return c * h ** (1.0 + alpha) / omega0(alpha, grid.dim)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "imex_cn"
    implicit_symbol_scale: float = 1.0
    snapshot_every: int = 10
    budget: float | None = None  # explicit stability budget, filled by ``with_budget``

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.implicit_symbol_scale < 0:
            raise ValueError("implicit_symbol_scale must be >= 0")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    def with_budget(self, grid: GridSpec, alpha: float) -> "StepperConfig":
        return replace(self, budget=stability_budget(grid, alpha))

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def over_budget(self) -> bool:
        return self.scheme == "explicit_rk2" and self.budget is not None and self.dt > self.budget


@dataclass
class FlowTrace:
    alpha: float
    times: np.ndarray
    sup_norms: np.ndarray
    grad_sup_norms: list[np.ndarray]
    dt_sup_norms: np.ndarray
    means: np.ndarray
    rhs_means: np.ndarray
    deviation_norms: np.ndarray
    besov: np.ndarray
    snapshots: list[tuple[float, PeriodicField]] = field(default_factory=list)
    c_limit: float | None = None
    status: str = STATUS_DONE
    fit: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        cols = [self.sup_norms, self.dt_sup_norms, self.means, self.rhs_means,
                self.deviation_norms, self.besov, *self.grad_sup_norms]
        if any(len(c) != n for c in cols):
            raise ValueError("trace arrays must have equal length")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final(self) -> PeriodicField:
        return self.snapshots[-1][1]

    def rows(self) -> list[list[float]]:
        cols = [self.times, self.sup_norms, *self.grad_sup_norms, self.dt_sup_norms, self.means]
        return [list(map(float, r)) for r in zip(*cols)]

    def header(self) -> list[str]:
        d = len(self.grad_sup_norms)
        return ["t", "sup_u", *[f"sup_du_dx{j}" for j in range(d)], "sup_du_dt", "mean"]


# ---------------------------------------------------------------------------
# right-hand side and one step


def flow_rhs(u: PeriodicField, params: FlowParams, scheme: QuadratureScheme) -> PeriodicField:
    """Phi(u)[u] = -(1+|grad u|^2)^{1/2} H_alpha(u), curvature in principal-value form."""
    h = h_alpha(u, params, scheme, form=PRINCIPAL)
    return PeriodicField(u.grid, -_grad_norm_factor(u) * h.values)


def _linear_symbol(grid: GridSpec, alpha: float, sigma: float) -> np.ndarray:
    return -sigma * omega0(alpha, grid.dim) * grid.abs_wavenumbers() ** (1.0 + alpha)


def _guard(vals: np.ndarray, limit: float, last: PeriodicField, t=None) -> PeriodicField:
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > limit:
        raise BlowUpError(last, t)
    return PeriodicField(last.grid, vals)


class _Stepper:
    """Holds the extrapolation history of the splitting scheme."""

    def __init__(self, grid: GridSpec, cfg: StepperConfig, params: FlowParams,
                 scheme: QuadratureScheme, limit: float):
        self.cfg, self.params, self.scheme, self.limit = cfg, params, scheme, limit
        self.lin = _linear_symbol(grid, params.alpha, cfg.implicit_symbol_scale)
        self.prev_n: np.ndarray | None = None
        self.last_rhs: PeriodicField | None = None

    def rhs(self, u: PeriodicField) -> PeriodicField:
        return flow_rhs(u, self.params, self.scheme)

    def __call__(self, u: PeriodicField, t: float | None = None) -> PeriodicField:
        if np.ptp(u.values) == 0.0:
            self.last_rhs = PeriodicField(u.grid, np.zeros(u.grid.shape))
            return u
        dt = self.cfg.dt
        if self.cfg.scheme == "explicit_rk2":
            f0 = self.rhs(u)
            self.last_rhs = f0
            u1 = _guard(u.values + dt * f0.values, self.limit, u, t)
            f1 = self.rhs(u1)
            return _guard(u.values + 0.5 * dt * (f0.values + f1.values), self.limit, u, t)
        uh = np.fft.fftn(u.values)
        f0 = self.rhs(u)
        self.last_rhs = f0
        nh = np.fft.fftn(f0.values) - self.lin * uh
        prev = nh if self.prev_n is None else self.prev_n
        self.prev_n = nh
        num = (1.0 + 0.5 * dt * self.lin) * uh + dt * (1.5 * nh - 0.5 * prev)
        new = np.fft.ifftn(num / (1.0 - 0.5 * dt * self.lin)).real
        return _guard(new, self.limit, u, t)


def step(u: PeriodicField, cfg: StepperConfig, params: FlowParams,
         scheme: QuadratureScheme | None = None) -> PeriodicField:
    """One step from rest (the extrapolation starts from the current nonlinear term)."""
    if params.dim != u.grid.dim:
        raise ValueError("field dimension does not match params.dim")
    scheme = scheme or default_scheme(u.grid)
    limit = BLOWUP_FACTOR * max(refined_sup_norm(u), 1e-300)
    return _Stepper(u.grid, cfg, params, scheme, limit)(u)


# ---------------------------------------------------------------------------
# fits and the limit of the mean


def fit_exponential(t: np.ndarray, y: np.ndarray) -> dict:
    """Least squares fit of log y = log M - rate * t; returns rate, M and R^2."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    ok = y > 0
    if ok.sum() < 3:
        return {"rate": float("nan"), "M": float("nan"), "r2": float("nan"), "points": int(ok.sum())}
    t, ly = t[ok], np.log(y[ok])
    slope, icpt = np.polyfit(t, ly, 1)
    resid = ly - (slope * t + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else float("nan")
    return {"rate": float(-slope), "M": float(np.exp(icpt)), "r2": r2, "points": int(ok.sum())}


def _tail_estimate(t: np.ndarray, rhs_means: np.ndarray, fallback_rate: float) -> float:
    """Integral of <Phi(u)[u]> beyond the last time, from an exponential model of its tail."""
    r = rhs_means
    if r[-1] == 0.0:
        return 0.0
    fit = fit_exponential(t, np.abs(r))
    rate = fit["rate"] if fit["r2"] >= 0.99 and fit["rate"] > 0 else fallback_rate
    return float(r[-1] / rate)


def _limit_of_mean(trace: FlowTrace) -> None:
    n = len(trace.times)
    w = slice(int(math.floor(0.8 * n)), n)
    fit = fit_exponential(trace.times[w], trace.deviation_norms[w])
    trace.fit = fit
    if np.all(trace.deviation_norms == 0.0):
        trace.c_limit = float(trace.means[-1])
        return
    if not (fit["r2"] >= FIT_R2 and fit["rate"] > 0):
        trace.status = STATUS_NOT_CONVERGED
        return
    trace.c_limit = float(trace.means[-1]) + _tail_estimate(trace.times[w], trace.rhs_means[w], fit["rate"])


# ---------------------------------------------------------------------------
# runs


def decompose_mean(u: PeriodicField) -> tuple[float, PeriodicField]:
    q = integral_mean(u)
    return q, PeriodicField(u.grid, u.values - q)


def _grad_sups(u: PeriodicField) -> list[float]:
    return [refined_sup_norm(derivative(u, j)) for j in range(u.grid.dim)]


def simulate(u0: PeriodicField, cfg: StepperConfig, params: FlowParams,
             scheme: QuadratureScheme | None = None) -> FlowTrace:
    if params.dim != u0.grid.dim:
        raise ValueError("field dimension does not match params.dim")
    grid = u0.grid
    scheme = scheme or default_scheme(grid)
    cfg = cfg if cfg.budget is not None else cfg.with_budget(grid, params.alpha)
    limit = BLOWUP_FACTOR * max(refined_sup_norm(u0), 1e-300)
    stepper = _Stepper(grid, cfg, params, scheme, limit)

    times, sups, grads, dts, means, rhs_means, devs, besov = [], [], [], [], [], [], [], []
    snaps: list[tuple[float, PeriodicField]] = []
    status = STATUS_DONE
    u, prev = u0, None

    def record(i: int, t: float, u: PeriodicField, rhs: PeriodicField, prev: PeriodicField | None):
        q, v = decompose_mean(u)
        times.append(t)
        sups.append(refined_sup_norm(u))
        grads.append(_grad_sups(u))
        if prev is None:
            dts.append(refined_sup_norm(rhs))
        else:
            dts.append(refined_sup_norm(PeriodicField(grid, (u.values - prev.values) / cfg.dt)))
        means.append(q)
        rhs_means.append(integral_mean(rhs))
        devs.append(refined_sup_norm(v))
        besov.append(besov_seminorm(u, 1.5))
        if i % cfg.snapshot_every == 0:
            snaps.append((t, u))

    n = cfg.steps
    last_t = 0.0
    for i in range(n + 1):
        t = i * cfg.dt
        try:
            new = stepper(u, t) if i < n else None
        except BlowUpError:
            status = STATUS_BLOWUP
            new = None
        rhs = stepper.last_rhs if stepper.last_rhs is not None else stepper.rhs(u)
        record(i, t, u, rhs, prev)
        stepper.last_rhs = None
        last_t = t
        if new is None:
            break
        prev, u = u, new
    if not snaps or snaps[-1][0] != last_t:
        snaps.append((last_t, u))

    trace = FlowTrace(
        alpha=params.alpha,
        times=np.array(times),
        sup_norms=np.array(sups),
        grad_sup_norms=[np.array(c) for c in zip(*grads)],
        dt_sup_norms=np.array(dts),
        means=np.array(means),
        rhs_means=np.array(rhs_means),
        deviation_norms=np.array(devs),
        besov=np.array(besov),
        snapshots=snaps,
        status=status,
        meta={"dt": cfg.dt, "scheme": cfg.scheme, "budget": cfg.budget,
              "over_budget": cfg.over_budget, "beta": params.beta,
              "beta_gt_alpha": params.beta > params.alpha, "dim": grid.dim,
              "points_per_axis": grid.points_per_axis},
    )
    if status == STATUS_DONE:
        _limit_of_mean(trace)
    return trace


def rescale_field(u: PeriodicField, lam: int, target: GridSpec | None = None) -> PeriodicField:
    """x -> u(lam x) / lam."""
    d = dilate_field(u, lam, target)
    return PeriodicField(d.grid, d.values / lam)


def rescale_solution(trace: FlowTrace, lam: int, target: GridSpec | None = None) -> FlowTrace:
    """Trace of u_lam(t, x) = u(lam^{1+alpha} t, lam x) / lam."""
    if int(lam) != lam or lam < 1:
        raise ValueError("breaks periodicity: rescaling factor must be a positive integer")
    lam = int(lam)
    s = lam ** (1.0 + trace.alpha)
    snaps = [(t / s, rescale_field(f, lam, target)) for t, f in trace.snapshots]
    return FlowTrace(
        alpha=trace.alpha,
        times=trace.times / s,
        sup_norms=trace.sup_norms / lam,
        grad_sup_norms=[g.copy() for g in trace.grad_sup_norms],
        dt_sup_norms=trace.dt_sup_norms * lam ** trace.alpha,
        means=trace.means / lam,
        rhs_means=trace.rhs_means * lam ** trace.alpha,
        deviation_norms=trace.deviation_norms / lam,
        besov=trace.besov * lam ** 0.5,
        snapshots=snaps,
        c_limit=None if trace.c_limit is None else trace.c_limit / lam,
        status=trace.status,
        fit=None if trace.fit is None else dict(trace.fit, rate=trace.fit["rate"] * s,
                                                M=trace.fit["M"] / lam),
        meta=dict(trace.meta, rescaled_by=lam),
    )


__all__ = [
    "BlowUpError",
    "FlowTrace",
    "StepperConfig",
    "decompose_mean",
    "fit_exponential",
    "flow_rhs",
    "rescale_field",
    "rescale_solution",
    "simulate",
    "stability_budget",
    "step",
]
