import json

import numpy as np
import pytest

from fracflow.flow import FlowTrace, StepperConfig, simulate
from fracflow.kernel import FlowParams
from fracflow.torus import GridSpec, PeriodicField, field_from_modes
from fracflow.verify import (
    FAIL,
    PASS,
    SKIPPED,
    CheckReport,
    VerifyConfig,
    check_constants_stationary,
    check_homogeneity,
    check_lifting,
    check_max_principles,
    check_multiplier_identity,
    check_resolvent_bounds,
    check_translation_equivariance,
    predicted_scaling_gap,
    run_all,
    selftest_fitter,
    selftest_injected_increase,
    selftest_scaling_sensitivity,
)

FAST = VerifyConfig(curvature_points=64, probe_fields=5, dual_fields=3)


def _status_consistent(r: CheckReport):
    if r.status == SKIPPED:
        return True
    ok = r.measured <= r.tolerance if r.direction == "le" else r.measured >= r.tolerance
    return (r.status == PASS) <= ok


@pytest.mark.parametrize("check", [check_constants_stationary, check_multiplier_identity,
                                   check_homogeneity, check_resolvent_bounds, check_lifting,
                                   check_translation_equivariance])
def test_fast_checks_pass(check):
    r = check(FAST)
    assert r.status == PASS, r.details
    assert _status_consistent(r)
    json.dumps(r.summary())


def test_constant_trace_has_zero_margins():
    g = GridSpec(1, 16)
    tr = simulate(PeriodicField(g, np.full(g.shape, 3.0)), StepperConfig(0.01, 0.05), FlowParams(0.5))
    r = check_max_principles(tr, FAST)
    assert r.status == PASS and r.measured == 0.0


def test_small_data_trace_passes_max_principles():
    g = GridSpec(1, 32)
    tr = simulate(field_from_modes(g, {3: 0.01}), StepperConfig(1e-3, 0.1), FlowParams(0.5))
    r = check_max_principles(tr, FAST)
    assert r.status == PASS and r.measured <= 1e-8 + 10 * 1e-6


def test_third_chain_follows_hypothesis_flag():
    n = 5
    t = np.linspace(0, 1, n)
    dec = np.exp(-t)
    rising = np.exp(t)
    z = np.zeros(n)
    tr = FlowTrace(0.5, t, dec, [dec], rising, z, z, dec, z, meta={"dt": 1e-3, "beta_gt_alpha": False})
    assert check_max_principles(tr, FAST).status == PASS
    tr.meta["beta_gt_alpha"] = True
    assert check_max_principles(tr, FAST).status == FAIL


def test_self_tests_fire():
    assert selftest_fitter().status == PASS
    assert selftest_injected_increase(FAST).status == PASS


def test_sensitivity_self_test_skips_unresolvable_fixture():
    cfg = VerifyConfig(scaling_t_end=1e-4)
    assert predicted_scaling_gap(cfg) < 5 * (cfg.scaling_dt + cfg.tol.scaling_quadrature)
    assert selftest_scaling_sensitivity(cfg).status == SKIPPED


def test_run_all_is_deterministic_and_rejects_unknown():
    names = ["homogeneity", "lifting_isomorphism", "resolvent_bounds"]
    r1, s1 = run_all(FAST, names)
    r2, s2 = run_all(FAST, names)
    assert s1["checks"] == s2["checks"] and s1["ok"]
    with pytest.raises(KeyError):
        run_all(FAST, ["nope"])


def test_reduced_2d_fixture_has_relaxed_tolerance():
    cfg = VerifyConfig.reduced_2d()
    assert cfg.dim == 2 and cfg.tol.dual_form_2d == 1e-3
