import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracflow.quadrature import (
    QuadratureScheme,
    build_nodes,
    composite_gauss_legendre,
    far_multiplier,
    gauss_legendre,
    radial_constant,
    radial_profile,
)


@given(st.integers(1, 20), st.floats(-3, 3), st.floats(0.1, 4))
def test_gauss_legendre_exact_for_polynomials(n, a, width):
    b = a + width
    x, w = gauss_legendre(n, a, b)
    deg = 2 * n - 1
    exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    assert np.sum(w * x**deg) == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_composite_rule_integrates_cosine():
    x, w = composite_gauss_legendre(np.linspace(0, 10, 6), 12)
    assert np.sum(w * np.cos(x)) == pytest.approx(np.sin(10.0), abs=1e-13)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_radial_constant_against_quad(alpha):
    # (1 - cos t)/t^2 is smooth; the t^{-alpha} singularity goes into an algebraic weight
    g = lambda t: (1 - np.cos(t)) / t**2 if t > 0 else 0.5
    head = quad(g, 0, 1, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-15)[0]
    tail = 1 / (1 + alpha) - quad(lambda t: t ** (-2 - alpha), 1, np.inf, weight="cos", wvar=1.0)[0]
    assert radial_constant(alpha) == pytest.approx(head + tail, rel=1e-10)


def _profile_oracle(x, alpha, kind):
    X = x + 50.0
    if kind == "pv":
        f = lambda t: (1 - np.cos(t)) * t ** (-2 - alpha)
    else:
        f = lambda t: (1 - np.cos(t) - t * np.sin(t)) * t ** (-2 - alpha)
    body = sum(quad(f, a, a + 1, epsabs=1e-15)[0] for a in np.arange(x, X, 1.0))
    tail = X ** (-1 - alpha) / (1 + alpha)
    tail -= quad(lambda t: t ** (-2 - alpha), X, np.inf, weight="cos", wvar=1.0)[0]
    if kind == "grad":
        tail -= quad(lambda t: t ** (-1 - alpha), X, np.inf, weight="sin", wvar=1.0)[0]
    return body + tail


@pytest.mark.parametrize("kind", ["pv", "grad"])
@pytest.mark.parametrize("x", [0.5, 3.9, 4.1, 12.0])
def test_radial_profile_against_quad(kind, x):
    ref = _profile_oracle(x, 0.5, kind)
    assert radial_profile(np.array([x]), 0.5, kind)[0] == pytest.approx(ref, abs=5e-11)


def test_profile_is_continuous_at_switch():
    lo, hi = radial_profile(np.array([4.0 - 1e-9, 4.0 + 1e-9]), 0.3)
    assert abs(lo - hi) < 1e-8


def test_scheme_validation():
    with pytest.raises(ValueError):
        QuadratureScheme(inner_radius=0.0)
    with pytest.raises(ValueError):
        QuadratureScheme(lattice_cells=0)
    s = QuadratureScheme(lattice_cells=2)
    assert s.tail_radius == pytest.approx(5 * np.pi)


def test_for_band_scales_with_band():
    lo, hi = QuadratureScheme.for_band(4, 1), QuadratureScheme.for_band(64, 1)
    assert hi.inner_radius < lo.inner_radius
    assert hi.cell_nodes_per_axis > lo.cell_nodes_per_axis


@pytest.mark.parametrize("dim", [1, 2])
def test_node_weights_integrate_the_base_cell(dim):
    scheme = QuadratureScheme.for_band(8, dim)
    nodes = build_nodes(scheme, dim, 0.5)
    assert nodes.inner_z.shape[1] == dim
    assert nodes.outer_z.shape[1] == dim
    assert np.all(nodes.outer_z[nodes.outer_neg] == -nodes.outer_z)


def test_far_multiplier_1d_matches_profile():
    alpha, R = 0.5, 9 * np.pi
    k = np.array([[3.0]])
    val = far_multiplier(k, alpha, R, "pv")[0]
    ref = 2 * 3.0 ** (1 + alpha) * radial_profile(np.array([3.0 * R]), alpha)[0]
    assert val == pytest.approx(ref, rel=1e-14)


def test_far_multiplier_2d_against_polar_quad():
    alpha, R = 0.5, 5 * np.pi
    k = np.array([[1.0, 2.0]])
    val = far_multiplier(k, alpha, R, "pv", angular_nodes=256)[0]

    def ray(phi):
        w = np.array([np.cos(phi), np.sin(phi)])
        rho = R / max(abs(w[0]), abs(w[1]))
        b = abs(k[0] @ w)
        return b ** (1 + alpha) * radial_profile(np.array([b * rho]), alpha)[0]

    ref = quad(ray, 0, 2 * np.pi, limit=400, points=np.linspace(0, 2 * np.pi, 17)[1:-1])[0]
    # the angular integrand has a |k.w|^{1+alpha} kink, so convergence in nodes is algebraic
    assert val == pytest.approx(ref, rel=5e-9)
