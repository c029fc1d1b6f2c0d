import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracflow.flow import (
    BlowUpError,
    FlowTrace,
    StepperConfig,
    decompose_mean,
    fit_exponential,
    flow_rhs,
    rescale_field,
    rescale_solution,
    simulate,
    stability_budget,
    step,
)
from fracflow.kernel import FlowParams, default_scheme
from fracflow.symbol import omega0
from fracflow.torus import GridSpec, PeriodicField, field_from_modes, integral_mean, random_band_limited

P = FlowParams(0.5)
G = GridSpec(1, 32)


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        StepperConfig(1e-3, 1.0, scheme="euler")
    with pytest.raises(ValueError):
        StepperConfig(1e-3, 1.0, implicit_symbol_scale=-1)
    cfg = StepperConfig(1.0, 1.0, scheme="explicit_rk2").with_budget(G, 0.5)
    assert cfg.budget == pytest.approx(stability_budget(G, 0.5)) and cfg.over_budget


def test_budget_scales_with_spacing():
    b1, b2 = stability_budget(GridSpec(1, 32), 0.5), stability_budget(GridSpec(1, 64), 0.5)
    assert b1 / b2 == pytest.approx(2 ** 1.5)


@pytest.mark.parametrize("scheme", ["imex_cn", "explicit_rk2"])
def test_constant_is_fixed_point(scheme):
    u = PeriodicField(G, np.full(G.shape, 2.5))
    assert np.array_equal(step(u, StepperConfig(0.1, 0.1, scheme), P).values, u.values)


@pytest.mark.parametrize("k", [1, 3])
def test_linear_mode_one_step(k):
    eps, dt = 1e-5, 1e-3
    u = field_from_modes(G, {k: eps})
    new = step(u, StepperConfig(dt, dt), P)
    amp = np.fft.fft(new.values)[k].real / (G.size / 2)
    exact = eps * np.exp(-omega0(0.5) * k**1.5 * dt)
    z = omega0(0.5) * k**1.5 * dt
    assert abs(amp - exact) <= eps * (z**3 / 10 + 1e-8)


def test_mean_drift_matches_rhs_mean():
    u = random_band_limited(G, np.random.default_rng(0), amplitude=0.2)
    scheme = default_scheme(G)
    for dt in (1e-3, 5e-4):
        new = step(u, StepperConfig(dt, dt), P, scheme)
        drift = integral_mean(new) - integral_mean(u)
        pred = dt * integral_mean(flow_rhs(u, P, scheme))
        assert abs(drift - pred) < 5 * dt**2


def test_blowup_is_reported():
    u = field_from_modes(G, {1: 50.0})
    with pytest.raises(BlowUpError, match="blow-up detected") as exc:
        for _ in range(20):
            u = step(u, StepperConfig(0.05, 0.05, "explicit_rk2"), P)
    assert np.all(np.isfinite(exc.value.state.values))
    trace = simulate(field_from_modes(G, {1: 50.0}), StepperConfig(0.05, 5.0, "explicit_rk2"), P)
    assert trace.status == "blow-up" and trace.c_limit is None


def test_constant_trace():
    u = PeriodicField(G, np.full(G.shape, -1.25))
    tr = simulate(u, StepperConfig(0.01, 0.05), P)
    assert tr.c_limit == -1.25
    assert np.all(tr.sup_norms == 1.25) and np.all(tr.means == -1.25)
    assert np.all(tr.dt_sup_norms == 0.0)


def test_small_data_run_is_monotone_and_converges():
    u = field_from_modes(G, {3: 0.01}, 0.5)
    tr = simulate(u, StepperConfig(1e-3, 0.3, snapshot_every=5), P)
    assert tr.status == "completed"
    for chain in (tr.sup_norms, tr.grad_sup_norms[0], tr.dt_sup_norms):
        assert np.max(np.diff(chain)) <= 1e-8
    assert tr.c_limit == pytest.approx(0.5, abs=1e-12)
    assert abs(tr.c_limit) <= np.max(np.abs(u.values))
    assert tr.fit["rate"] == pytest.approx(omega0(0.5) * 3**1.5, rel=0.01)


def test_mean_bookkeeping():
    u = random_band_limited(G, np.random.default_rng(1), amplitude=0.2)
    dt = 1e-3
    tr = simulate(u, StepperConfig(dt, 0.05), P)
    riemann = integral_mean(u) + dt * np.sum(tr.rhs_means[:-1])
    assert abs(tr.means[-1] - riemann) < 10 * dt * np.max(np.abs(tr.rhs_means)) + 1e-12


def test_imex_and_explicit_converge_together():
    u = random_band_limited(G, np.random.default_rng(2), amplitude=0.1)
    gaps = []
    for dt in (0.5 * stability_budget(G, 0.5), 0.25 * stability_budget(G, 0.5)):
        t_end = 80 * 0.25 * stability_budget(G, 0.5)
        a = simulate(u, StepperConfig(dt, t_end, "imex_cn"), P).final.values
        b = simulate(u, StepperConfig(dt, t_end, "explicit_rk2"), P).final.values
        gaps.append(np.max(np.abs(a - b)))
    assert gaps[0] < 2e-5
    assert gaps[0] / gaps[1] > 3.0  # both schemes are second order


def test_trace_invariants():
    z = np.zeros(3)
    with pytest.raises(ValueError):
        FlowTrace(0.5, np.array([0.0, 0.0, 1.0]), z, [z], z, z, z, z, z)
    with pytest.raises(ValueError):
        FlowTrace(0.5, np.array([0.0, 1.0]), z, [z], z, z, z, z, z)


def test_decompose_mean():
    q, v = decompose_mean(PeriodicField(G, np.full(G.shape, 3.0)))
    assert q == 3.0 and np.all(v.values == 0)
    q, v = decompose_mean(field_from_modes(G, {2: 1.0}, 5.0))
    assert q == pytest.approx(5.0)
    assert np.allclose(v.values, np.cos(2 * G.axis()), atol=1e-14)


def test_rhs_depends_only_on_differences():
    u = random_band_limited(G, np.random.default_rng(3))
    q, v = decompose_mean(u)
    scheme = default_scheme(G)
    a, b = flow_rhs(u, P, scheme).values, flow_rhs(v, P, scheme).values
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


def test_rescale_identity_and_example():
    u = field_from_modes(G, {1: 0.02})
    tr = simulate(u, StepperConfig(1e-3, 0.01, snapshot_every=5), P)
    same = rescale_solution(tr, 1)
    assert np.array_equal(same.times, tr.times)
    assert all(np.array_equal(a.values, b.values) for (_, a), (_, b) in zip(same.snapshots, tr.snapshots))
    assert np.allclose(rescale_field(u, 2).values, 0.01 * np.cos(2 * G.axis()), atol=1e-15)
    with pytest.raises(ValueError, match="breaks periodicity"):
        rescale_solution(tr, 1.5)


def test_rescaled_simulation_matches():
    g1, g2 = GridSpec(1, 16), GridSpec(1, 32)
    u = field_from_modes(g1, {1: 0.02})
    dt, s = 1e-3, 2**1.5
    a = rescale_solution(simulate(u, StepperConfig(dt, 0.05, snapshot_every=1), P), 2, g2)
    b = simulate(rescale_field(u, 2, g2), StepperConfig(dt / s, 0.05 / s, snapshot_every=1), P)
    worst = max(np.max(np.abs(x.values - y.values)) for (_, x), (_, y) in zip(a.snapshots, b.snapshots))
    assert worst < 5 * (dt + 1e-5)


@given(st.floats(0.1, 20), st.floats(0.1, 5))
def test_fit_exponential_exact(rate, M):
    t = np.linspace(0, 1, 30)
    fit = fit_exponential(t, M * np.exp(-rate * t))
    assert fit["rate"] == pytest.approx(rate, rel=1e-10)
    assert fit["r2"] == pytest.approx(1.0)
