"""Periodic fields on the torus T^n = [0, 2pi)^n for n = 1, 2.

Fourier coefficients follow the convention

    f_hat(k) = (2 pi)^{-n} \\int_{T^n} f(x) e^{-i k.x} dx,     f = sum_k f_hat(k) e^{i k.x},

so that on a uniform grid with m points per axis ``f_hat = fftn(values) / m**n``.
Coefficient arrays are kept in numpy FFT order; the wavenumber attached to
the Nyquist slot is +m/2, giving the band {-m/2+1, ..., m/2}^n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "PeriodicField",
    "SpectralField",
    "LittlewoodPaleyFamily",
    "to_spectral",
    "to_physical",
    "sup_norm",
    "grad_sup_norm",
    "refined_sup_norm",
    "derivative",
    "gradient",
    "integral_mean",
    "besov_seminorm",
    "field_from_modes",
    "random_band_limited",
    "shift_field",
    "dilate_field",
    "oscillation",
    "write_snapshot",
    "read_snapshot",
]

# relative size of the imaginary part tolerated when reconstructing a real field
_HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on T^n with ``points_per_axis`` nodes per axis."""

    dim: int
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")
        m = self.points_per_axis
        if m < 8 or m % 2:
            raise ValueError(f"points_per_axis must be even and >= 8, got {m}")

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    def axis(self) -> np.ndarray:
        return self.spacing * np.arange(self.points_per_axis)

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (dim,)``."""
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def wavenumbers_1d(self) -> np.ndarray:
        m = self.points_per_axis
        k = np.fft.fftfreq(m, d=1.0 / m).astype(int)
        k[m // 2] = m // 2
        return k

    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumber vectors, shape ``grid.shape + (dim,)`` in FFT order."""
        k1 = self.wavenumbers_1d()
        ks = np.meshgrid(*([k1] * self.dim), indexing="ij")
        return np.stack(ks, axis=-1)

    def abs_wavenumbers(self) -> np.ndarray:
        return np.sqrt(np.sum(self.wavenumbers().astype(float) ** 2, axis=-1))

    def nyquist_mask(self) -> np.ndarray:
        """True on coefficients touching the Nyquist index along some axis."""
        k = self.wavenumbers()
        return np.any(np.abs(k) == self.points_per_axis // 2, axis=-1)


@dataclass(frozen=True)
class PeriodicField:
    """Samples of a real 2pi-periodic function on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            _check_same_grid(self, other)
            return PeriodicField(self.grid, self.values + other.values)
        return PeriodicField(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            _check_same_grid(self, other)
            return PeriodicField(self.grid, self.values - other.values)
        return PeriodicField(self.grid, self.values - other)

    def __mul__(self, c):
        return PeriodicField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a field on ``grid`` (FFT order)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def mode(self, k: int | Sequence[int]) -> complex:
        """Coefficient of the mode ``k`` (any integer vector inside the band)."""
        k = np.atleast_1d(np.asarray(k, dtype=int))
        m = self.grid.points_per_axis
        if np.any(k > m // 2) or np.any(k <= -m // 2):
            raise IndexError(f"mode {tuple(k)} outside the band")
        return complex(self.coeffs[tuple(k % m)])

    def is_hermitian(self, tol: float = _HERMITIAN_TOL) -> bool:
        c = self.coeffs
        flipped = c
        for ax in range(c.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        scale = max(np.max(np.abs(c)), 1e-300)
        # Nyquist slots are their own partners under the symmetric convention
        mask = ~self.grid.nyquist_mask()
        return bool(np.max(np.abs(c - np.conj(flipped))[mask], initial=0.0) <= tol * scale)

    def __mul__(self, multiplier):
        return SpectralField(self.grid, self.coeffs * multiplier)

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def to_spectral(f: PeriodicField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.values) / f.grid.size)


def to_physical(g: SpectralField) -> PeriodicField:
    """Inverse of :func:`to_spectral`; raises on non-Hermitian input."""
    z = np.fft.ifftn(g.coeffs) * g.grid.size
    scale = max(np.max(np.abs(z)), 1e-300)
    if np.max(np.abs(z.imag)) > _HERMITIAN_TOL * max(scale, 1.0):
        raise ValueError("complex-valued reconstruction: coefficients are not Hermitian")
    return PeriodicField(g.grid, z.real)


def apply_multiplier(f: PeriodicField, multiplier: np.ndarray) -> PeriodicField:
    """Real part of the inverse transform of ``multiplier * f_hat``.

    Taking the real part splits Nyquist coefficients evenly between +-m/2,
    which is the symmetric convention for odd multipliers.
    """
    z = np.fft.ifftn(np.fft.fftn(f.values) * multiplier)
    return PeriodicField(f.grid, z.real)


def derivative(f: PeriodicField, axis: int) -> PeriodicField:
    k = f.grid.wavenumbers()[..., axis]
    return apply_multiplier(f, 1j * k)


def gradient(f: PeriodicField) -> list[PeriodicField]:
    return [derivative(f, j) for j in range(f.grid.dim)]


def sup_norm(f: PeriodicField) -> float:
    return float(np.max(np.abs(f.values)))


def grad_sup_norm(f: PeriodicField, axis: int) -> float:
    return sup_norm(derivative(f, axis))


def oscillation(f: PeriodicField) -> float:
    return float(np.max(f.values) - np.min(f.values))


def integral_mean(f: PeriodicField) -> float:
    return float(np.mean(f.values))


# ---------------------------------------------------------------------------
# sup norms of the trigonometric interpolant (not just the samples)


def _trig_terms(f: PeriodicField, drop_below: float = 1e-15):
    # for real fields Re(sum c_k e^{ik.x}) already equals the symmetric
    # Nyquist split, so the coefficients are used as they are
    c = (np.fft.fftn(f.values) / f.grid.size).reshape(-1)
    k = f.grid.wavenumbers().reshape(-1, f.grid.dim).astype(float)
    keep = np.abs(c) > drop_below * max(np.max(np.abs(c)), 1e-300)
    return c[keep], k[keep]


def _trig_eval(c, k, x):
    """Value, gradient and Hessian of sum_k c_k e^{ik.x} at one point."""
    e = c * np.exp(1j * (k @ x))
    val = np.sum(e).real
    grad = (1j * (k.T @ e)).real
    hess = -((k.T * e) @ k).real
    return val, grad, hess


def refined_sup_norm(f: PeriodicField, upsample: int = 8) -> float:
    """Sup norm of the trigonometric interpolant of ``f``.

    The maximiser of |f| is located on an ``upsample``-times finer grid and
    polished with Newton steps on the exact trigonometric polynomial.
    """
    grid = f.grid
    fine_m = upsample * grid.points_per_axis
    c = np.fft.fftn(f.values) / grid.size
    big = np.zeros((fine_m,) * grid.dim, dtype=complex)
    k1 = grid.wavenumbers_1d()
    big[np.ix_(*([k1 % fine_m] * grid.dim))] = c
    fine = (np.fft.ifftn(big) * fine_m**grid.dim).real
    j = np.unravel_index(np.argmax(np.abs(fine)), fine.shape)
    x = np.array(j, dtype=float) * (2 * np.pi / fine_m)
    best = abs(fine[j])
    cc, kk = _trig_terms(f)
    if cc.size == 0:
        return float(best)
    sgn = np.sign(fine[j]) or 1.0
    for _ in range(8):
        val, grad, hess = _trig_eval(cc, kk, x)
        try:
            step = np.linalg.solve(sgn * hess, -sgn * grad)
        except np.linalg.LinAlgError:
            break
        if np.linalg.norm(step) > 2 * np.pi / fine_m:
            break
        x = x + step
        if np.linalg.norm(step) < 1e-14:
            break
    val, _, _ = _trig_eval(cc, kk, x)
    return float(max(best, abs(val)))


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks and the B^s_{inf,inf} norm


def _raised_cosine_step(t: np.ndarray) -> np.ndarray:
    """1 for t <= 0, 0 for t >= 1, cos^2(pi t / 2) in between."""
    t = np.clip(t, 0.0, 1.0)
    return np.cos(0.5 * np.pi * t) ** 2


def _psi(r: np.ndarray) -> np.ndarray:
    # psi = 1 on |x| <= 1, 0 on |x| >= 2, raised cosine in log2|x|
    with np.errstate(divide="ignore"):
        t = np.where(r > 0, np.log2(np.maximum(r, 1e-300)), -np.inf)
    return _raised_cosine_step(t)


@dataclass(frozen=True)
class LittlewoodPaleyFamily:
    """Dyadic raised-cosine windows phi_j sampled on a grid's band.

    phi_0 = psi(|k|), phi_j = psi(|k|/2^j) - psi(|k|/2^{j-1}) with psi the
    raised-cosine step from 1 (|k| <= 1) to 0 (|k| >= 2) in log2 |k|.
    """

    grid: GridSpec
    blocks: tuple = field(repr=False)

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "LittlewoodPaleyFamily":
        r = grid.abs_wavenumbers()
        jmax = int(np.ceil(np.log2(max(r.max(), 1.0))))
        blocks = [_psi(r)]
        for j in range(1, jmax + 1):
            blocks.append(_psi(r / 2**j) - _psi(r / 2 ** (j - 1)))
        for b in blocks:
            b.setflags(write=False)
        return cls(grid, tuple(blocks))

    @property
    def levels(self) -> int:
        return len(self.blocks)

    def partition_defect(self) -> float:
        return float(np.max(np.abs(np.sum(self.blocks, axis=0) - 1.0)))

    def describe(self) -> dict:
        return {"window": "raised-cosine in log2|k|", "levels": self.levels}


def besov_seminorm(
    f: PeriodicField,
    s: float,
    family: LittlewoodPaleyFamily | None = None,
    min_block: int = 0,
) -> float:
    """sup_j 2^{sj} || Delta_j f ||_inf over the blocks resolvable on the band."""
    if s <= 0:
        raise ValueError("smoothness index must be positive")
    if family is None:
        family = LittlewoodPaleyFamily.for_grid(f.grid)
    if family.grid != f.grid:
        raise ValueError("family sampled on a different grid")
    if family.partition_defect() > 1e-12:
        raise ValueError("invalid dyadic partition")
    c = np.fft.fftn(f.values)
    best = 0.0
    for j in range(min_block, family.levels):
        block = np.fft.ifftn(c * family.blocks[j]).real
        best = max(best, 2.0 ** (s * j) * float(np.max(np.abs(block))))
    return best


# ---------------------------------------------------------------------------
# constructors and grid maps


def field_from_modes(
    grid: GridSpec,
    modes: Mapping | Iterable,
    mean: float = 0.0,
) -> PeriodicField:
    """Real field ``mean + sum_k a_k cos(k.x) + b_k sin(k.x)``.

    ``modes`` maps an integer (n = 1) or integer tuple to an amplitude ``a``
    or an ``(a, b)`` pair.
    """
    x = grid.nodes()
    vals = np.full(grid.shape, float(mean))
    items = modes.items() if isinstance(modes, Mapping) else modes
    for k, amp in items:
        kv = np.atleast_1d(np.asarray(k, dtype=float))
        if kv.size != grid.dim:
            raise ValueError(f"mode {k} does not match dimension {grid.dim}")
        a, b = (amp, 0.0) if np.isscalar(amp) else amp
        phase = x @ kv
        vals += a * np.cos(phase) + b * np.sin(phase)
    return PeriodicField(grid, vals)


def random_band_limited(
    grid: GridSpec,
    rng: np.random.Generator,
    kmax: int | None = None,
    amplitude: float = 0.3,
    decay: float = 3.0,
) -> PeriodicField:
    """Random smooth field with modes |k| <= kmax (default m/4).

    Coefficients are complex Gaussian scaled by (1+|k|)^{-decay}; the zero
    mode is random as well and the result is rescaled so that the
    oscillating part has sup norm ``amplitude``.
    """
    if kmax is None:
        kmax = grid.points_per_axis // 4
    r = grid.abs_wavenumbers()
    shape = grid.shape
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * (1 + r) ** (-decay)
    c[r > kmax] = 0.0
    c[grid.nyquist_mask()] = 0.0
    vals = np.fft.ifftn(c).real
    vals -= vals.mean()
    vals *= amplitude / max(np.max(np.abs(vals)), 1e-300)
    return PeriodicField(grid, vals + amplitude * rng.uniform(-1, 1))


def shift_field(f: PeriodicField, cells: int | Sequence[int]) -> PeriodicField:
    """Translate by whole grid cells: result(x) = f(x - cells*h)."""
    cells = np.atleast_1d(np.asarray(cells, dtype=int))
    if cells.size == 1 and f.grid.dim > 1:
        cells = np.repeat(cells, f.grid.dim)
    return PeriodicField(f.grid, np.roll(f.values, tuple(cells), axis=tuple(range(f.grid.dim))))


def dilate_field(f: PeriodicField, lam: int, target: GridSpec | None = None) -> PeriodicField:
    """Samples of x -> f(lam x) for integer ``lam`` (band must fit ``target``)."""
    if int(lam) != lam or lam < 1:
        raise ValueError("breaks periodicity: dilation factor must be a positive integer")
    lam = int(lam)
    target = target or f.grid
    if lam == 1 and target == f.grid:
        return f
    if target.dim != f.grid.dim:
        raise ValueError("dimension mismatch")
    c = (np.fft.fftn(f.values) / f.grid.size).reshape(-1)
    k = f.grid.wavenumbers().reshape(-1, f.grid.dim)
    nz = np.abs(c) > 1e-15 * max(np.max(np.abs(c)), 1e-300)
    k, c = k[nz], c[nz]
    kk = lam * k
    mt = target.points_per_axis
    if np.any(np.abs(kk) >= mt // 2):
        raise ValueError("dilated band does not fit the target grid")
    out = np.zeros(target.shape, dtype=complex)
    np.add.at(out, tuple((kk % mt).T), c)
    return PeriodicField(target, (np.fft.ifftn(out) * target.size).real)


# ---------------------------------------------------------------------------
# snapshot files: header "n m alpha t", then m^n samples in row-major order


def write_snapshot(path: str | Path, f: PeriodicField, alpha: float, t: float) -> None:
    g = f.grid
    lines = [f"{g.dim} {g.points_per_axis} {alpha!r} {float(t)!r}"]
    lines.extend(repr(float(v)) for v in f.values.reshape(-1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_snapshot(path: str | Path) -> tuple[PeriodicField, float, float]:
    """Returns ``(field, alpha, t)``."""
    text = Path(path).read_text(encoding="ascii").split("\n")
    head = text[0].split()
    if len(head) != 4:
        raise ValueError(f"bad snapshot header: {text[0]!r}")
    n, m, alpha, t = int(head[0]), int(head[1]), float(head[2]), float(head[3])
    grid = GridSpec(n, m)
    vals = np.array([float(s) for s in text[1:] if s.strip()])
    if vals.size != grid.size:
        raise ValueError(f"expected {grid.size} samples, found {vals.size}")
    return PeriodicField(grid, vals.reshape(grid.shape)), alpha, t
