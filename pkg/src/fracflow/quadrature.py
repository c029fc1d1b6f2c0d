"""Node sets and far-field pieces for integrals over R^n with |y|^{-n-1-alpha} kernels.

The whole space is split into

* the base cell [-pi, pi]^n, covered in polar coordinates around the
  singularity (graded radial nodes on |y| <= r0, composite Gauss-Legendre
  panels from r0 out to the cell boundary);
* the lattice translates [-pi, pi]^n + 2 pi m with 0 < |m|_inf <= M, all
  sharing one tensor Gauss-Legendre node set in the base cell;
* the far region outside the square [-R, R]^n, R = (2M+1) pi, where the
  integrands are linearised and integrated exactly as Fourier multipliers
  (see :func:`far_multiplier`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma, roots_laguerre, roots_legendre

__all__ = [
    "QuadratureScheme",
    "NodeSet",
    "build_nodes",
    "gauss_legendre",
    "radial_constant",
    "radial_profile",
    "far_multiplier",
]


@dataclass(frozen=True)
class QuadratureScheme:
    """Discretisation parameters for the singular integrals.

    ``inner_angular_nodes`` counts nodes per quarter turn (n = 2 only);
    ``cell_nodes_per_axis`` is split into Gauss-Legendre panels of
    ``panel_order`` nodes and is also used for the radial panels between
    ``inner_radius`` and the base-cell boundary.
    """

    inner_radius: float = 0.5
    inner_radial_nodes: int = 24
    inner_angular_nodes: int = 24
    lattice_cells: int = 4
    cell_nodes_per_axis: int = 48
    panel_order: int = 12
    far_angular_nodes: int = 32

    def __post_init__(self):
        if not 0 < self.inner_radius <= np.pi:
            raise ValueError("inner_radius must lie in (0, pi]")
        for name in ("inner_radial_nodes", "inner_angular_nodes", "cell_nodes_per_axis",
                     "panel_order", "far_angular_nodes"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.lattice_cells < 1:
            raise ValueError("lattice_cells must be >= 1")

    @property
    def tail_radius(self) -> float:
        return (2 * self.lattice_cells + 1) * np.pi

    @property
    def panels(self) -> int:
        return max(1, -(-self.cell_nodes_per_axis // self.panel_order))

    @classmethod
    def for_band(cls, kmax: int, dim: int, lattice_cells: int | None = None, **overrides):
        """Defaults resolving modes up to ``kmax``."""
        kmax = max(int(kmax), 1)
        order = overrides.pop("panel_order", 12)
        panels = max(2, int(np.ceil(kmax / 2.0)))
        params = dict(
            inner_radius=min(np.pi / 2, 2.0 / kmax),
            inner_radial_nodes=24,
            inner_angular_nodes=max(24, int(np.ceil(2.5 * kmax)) + 8),
            lattice_cells=lattice_cells if lattice_cells is not None else (4 if dim == 1 else 2),
            cell_nodes_per_axis=panels * order,
            panel_order=order,
            far_angular_nodes=32,
        )
        params.update(overrides)
        return cls(**params)

    def describe(self) -> dict:
        return {
            "inner_radius": self.inner_radius,
            "inner_radial_nodes": self.inner_radial_nodes,
            "inner_angular_nodes": self.inner_angular_nodes,
            "lattice_cells": self.lattice_cells,
            "cell_nodes_per_axis": self.cell_nodes_per_axis,
            "panel_order": self.panel_order,
            "far_angular_nodes": self.far_angular_nodes,
        }


@lru_cache(maxsize=None)
def _legendre(n: int):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a, b):
    """Nodes and weights on [a, b] (a, b may be arrays, broadcast on a new last axis)."""
    x, w = _legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def composite_gauss_legendre(edges, order: int):
    """Concatenated Gauss-Legendre rules on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order, edges[:-1], edges[1:])
    return x.reshape(-1), w.reshape(-1)


@dataclass(frozen=True)
class NodeSet:
    """Quadrature nodes shared by every evaluation point.

    ``inner_z``/``inner_w`` cover half of the base cell (one ray of each
    antipodal pair); the full base-cell integral of ``f`` is
    ``sum(inner_w * (f(inner_z) + f(-inner_z)))``.  ``outer_z`` is the full
    tensor rule on the base cell with ``outer_neg`` indexing the node -z.
    ``cells`` holds the offsets 2 pi m for one member of each pair +-m.
    """

    dim: int
    inner_z: np.ndarray
    inner_r: np.ndarray
    inner_w: np.ndarray
    outer_z: np.ndarray
    outer_w: np.ndarray
    outer_neg: np.ndarray
    cells: np.ndarray
    tail_radius: float


def _radial_rule(scheme: QuadratureScheme, alpha: float, outer_radius):
    """Radial nodes/weights (without the r^{n-1} Jacobian) on [0, outer_radius].

    ``outer_radius`` is an array of ray lengths; returns arrays of shape
    ``outer_radius.shape + (N,)``.
    """
    r0 = scheme.inner_radius
    q = 2.0 / (1.0 - alpha)
    s, ws = gauss_legendre(scheme.inner_radial_nodes, 0.0, 1.0)
    r_in = r0 * s**q
    w_in = ws * q * r0 * s ** (q - 1)
    # geometric panels away from r0, then panels no wider than the lattice ones
    width = 2 * np.pi / scheme.panels
    outer_radius = np.atleast_1d(np.asarray(outer_radius, dtype=float))
    rows_r, rows_w = [], []
    for rho in outer_radius.reshape(-1):
        edges = [r0]
        while edges[-1] < rho - 1e-12:
            step = min(edges[-1], width)
            edges.append(min(edges[-1] + step, rho))
        if len(edges) > 1 and edges[-1] - edges[-2] < 0.25 * min(edges[-2], width) and len(edges) > 2:
            edges.pop(-2)
        if rho - r0 <= 1e-12:
            xr, wr = np.empty(0), np.empty(0)
        else:
            xr, wr = composite_gauss_legendre(edges, scheme.panel_order)
        rows_r.append(np.concatenate([r_in, xr]))
        rows_w.append(np.concatenate([w_in, wr]))
    lengths = {len(r) for r in rows_r}
    if len(lengths) == 1:
        rr = np.array(rows_r)
        ww = np.array(rows_w)
    else:
        # ragged rays: pad with zero-weight nodes
        n = max(lengths)
        rr = np.array([np.pad(r, (0, n - len(r)), constant_values=r[-1]) for r in rows_r])
        ww = np.array([np.pad(w, (0, n - len(w))) for w in rows_w])
    return rr.reshape(outer_radius.shape + (-1,)), ww.reshape(outer_radius.shape + (-1,))


@lru_cache(maxsize=32)
def build_nodes(scheme: QuadratureScheme, dim: int, alpha: float) -> NodeSet:
    if dim == 1:
        r, w = _radial_rule(scheme, alpha, np.array([np.pi]))
        r, w = r[0], w[0]
        keep = w > 0
        inner_z = r[keep, None]
        inner_r = r[keep]
        inner_w = w[keep]
    else:
        # four quarter sectors centred on the axes; rho(phi) is smooth inside each
        t, wt = gauss_legendre(scheme.inner_angular_nodes, -np.pi / 4, np.pi / 4)
        phis, wphi = [], []
        for j in range(2):  # half turn; the other half is the antipodal image
            phis.append(t + j * np.pi / 2)
            wphi.append(wt)
        phi = np.concatenate(phis)
        wphi = np.concatenate(wphi)
        rho = np.pi / np.maximum(np.abs(np.cos(phi)), np.abs(np.sin(phi)))
        r, w = _radial_rule(scheme, alpha, rho)
        w = w * r * wphi[:, None]  # polar Jacobian
        direction = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        inner_z = (r[..., None] * direction[:, None, :]).reshape(-1, 2)
        inner_r = r.reshape(-1)
        inner_w = w.reshape(-1)
        keep = inner_w > 0
        inner_z, inner_r, inner_w = inner_z[keep], inner_r[keep], inner_w[keep]

    edges = np.linspace(-np.pi, np.pi, scheme.panels + 1)
    x1, w1 = composite_gauss_legendre(edges, scheme.panel_order)
    neg1 = np.arange(x1.size)[::-1]  # rule is symmetric about 0
    if dim == 1:
        outer_z = x1[:, None]
        outer_w = w1
        outer_neg = neg1
    else:
        X, Y = np.meshgrid(x1, x1, indexing="ij")
        outer_z = np.stack([X.reshape(-1), Y.reshape(-1)], axis=-1)
        outer_w = np.outer(w1, w1).reshape(-1)
        n1 = x1.size
        I, J = np.meshgrid(neg1, neg1, indexing="ij")
        outer_neg = (I * n1 + J).reshape(-1)

    M = scheme.lattice_cells
    rng = np.arange(-M, M + 1)
    if dim == 1:
        cells = rng[rng > 0][:, None]
    else:
        A, B = np.meshgrid(rng, rng, indexing="ij")
        m = np.stack([A.reshape(-1), B.reshape(-1)], axis=-1)
        # one representative of each pair +-m: first nonzero component positive
        first = np.where(m[:, 0] != 0, m[:, 0], m[:, 1])
        cells = m[first > 0]
    cells = 2 * np.pi * cells.astype(float)
    for a in (inner_z, inner_r, inner_w, outer_z, outer_w, outer_neg, cells):
        a.setflags(write=False)
    return NodeSet(dim, inner_z, inner_r, inner_w, outer_z, outer_w, outer_neg, cells,
                   scheme.tail_radius)


# ---------------------------------------------------------------------------
# radial profiles  Q(x) = int_x^inf f(t) t^{-2-alpha} dt


def radial_constant(alpha: float) -> float:
    """int_0^inf (1 - cos t) t^{-2-alpha} dt = -Gamma(-1-alpha) cos(pi (1+alpha) / 2)."""
    s = 1.0 + alpha
    return float(-gamma(-s) * np.cos(0.5 * np.pi * s))


_LAGUERRE_X, _LAGUERRE_W = roots_laguerre(64)
_SWITCH = 4.0  # series below, rotated-contour Gauss-Laguerre above
_SERIES_TERMS = 40


def _exp_tail(x: np.ndarray, s: float) -> np.ndarray:
    """int_x^inf e^{it} t^{-s} dt for x >= _SWITCH via the contour t = x + i tau."""
    z = x[..., None] + 1j * _LAGUERRE_X
    return 1j * np.exp(1j * x) * np.sum(_LAGUERRE_W * z ** (-s), axis=-1)


def radial_profile(x, alpha: float, kind: str = "pv") -> np.ndarray:
    """Q(x) = int_x^inf f(t) t^{-2-alpha} dt for x >= 0.

    ``kind='pv'``: f(t) = 1 - cos t.  ``kind='grad'``: f(t) = 1 - cos t - t sin t.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    c0 = radial_constant(alpha)
    small = x < _SWITCH
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        for j in range(1, _SERIES_TERMS + 1):
            e = 2 * j - 1 - alpha
            coef = (-1) ** (j + 1) / (gamma(2 * j + 1) * e)
            if kind == "grad":
                coef *= 1 - 2 * j
            acc += coef * xs**e
        q0 = c0 if kind == "pv" else -alpha * c0
        out[small] = q0 - acc
    big = ~small
    if np.any(big):
        xb = x[big]
        val = xb ** (-1 - alpha) / (1 + alpha) - _exp_tail(xb, 2 + alpha).real
        if kind == "grad":
            val -= _exp_tail(xb, 1 + alpha).imag
        out[big] = val
    return out


def _angular_breaks(k: np.ndarray) -> np.ndarray:
    br = [np.pi / 4 + j * np.pi / 2 for j in range(4)]
    if np.any(k != 0):
        base = np.arctan2(k[1], k[0]) + np.pi / 2
        br += [base % (2 * np.pi), (base + np.pi) % (2 * np.pi)]
    br = np.unique(np.concatenate([[0.0], np.sort(np.mod(br, 2 * np.pi)), [2 * np.pi]]))
    return br


def far_multiplier(
    kvecs: np.ndarray,
    alpha: float,
    tail_radius: float,
    kind: str = "pv",
    weight=None,
    angular_nodes: int = 32,
) -> np.ndarray:
    """int_{|y|_inf > R} f(k.y) |y|^{-n-1-alpha} w(y/|y|) dy for each row of ``kvecs``.

    ``f`` is ``1 - cos`` (kind 'pv') or ``1 - cos t - t sin t`` (kind 'grad');
    ``weight`` maps unit vectors (..., n) to weights and defaults to 1.
    Radial integrals are exact through :func:`radial_profile`; for n = 2 the
    angle is integrated with Gauss-Legendre panels split at the square's
    corners and at the directions orthogonal to k.
    """
    kvecs = np.atleast_2d(np.asarray(kvecs, dtype=float))
    n = kvecs.shape[1]
    R = tail_radius
    out = np.zeros(kvecs.shape[0])
    if n == 1:
        for sgn in (1.0, -1.0):
            wgt = 1.0 if weight is None else float(np.asarray(weight(np.array([sgn]))))
            b = np.abs(kvecs[:, 0])
            out += wgt * b ** (1 + alpha) * radial_profile(b * R, alpha, kind)
        return out
    for i, k in enumerate(kvecs):
        if not np.any(k):
            continue
        br = _angular_breaks(k)
        phi, wphi = gauss_legendre(angular_nodes, br[:-1], br[1:])
        phi, wphi = phi.reshape(-1), wphi.reshape(-1)
        om = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        rho = R / np.maximum(np.abs(om[:, 0]), np.abs(om[:, 1]))
        b = np.abs(om @ k)
        wgt = 1.0 if weight is None else weight(om)
        out[i] = np.sum(wphi * wgt * b ** (1 + alpha) * radial_profile(b * rho, alpha, kind))
    return out
