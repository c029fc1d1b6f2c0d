"""Acceptance criteria, one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed even
without ``-s``.
"""

import time

import numpy as np
import pytest

from fracflow.torus import GridSpec
from fracflow.verify import (
    PASS,
    VerifyConfig,
    check_constants_stationary,
    check_decay_rate,
    check_dual_forms,
    check_homogeneity,
    check_lifting,
    check_max_principles_suite,
    check_mean_limit,
    check_mikhlin,
    check_multiplier_identity,
    check_resolvent_bounds,
    check_scaling_invariance,
    check_symbol_methods,
    selftest_scaling_sensitivity,
)

CFG1 = VerifyConfig()
CFG2 = VerifyConfig(dim=2)


@pytest.fixture
def report(capsys):
    def emit(n: int, title: str, ok: bool, text: str):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'} {title}: {text}")
        assert ok, text
    return emit


def _timed(fn, *args):
    t0 = time.perf_counter()
    r = fn(*args)
    return r, time.perf_counter() - t0


def test_01_constants_stationary(report):
    r = check_constants_stationary(CFG1)
    ok = r.status == PASS and r.details["seconds"] < 1.0
    report(1, "stationary constants", ok,
           f"max|H(c)| = {r.measured:.2e} (tol 1e-10), {r.details['seconds']:.3f}s, "
           f"probe min sup|H| = {r.details['probe_min_sup']:.3g}")


def test_02_dual_form_agreement(report):
    r1, t1 = _timed(check_dual_forms, CFG1)
    r2, t2 = _timed(check_dual_forms, CFG2)
    ok = r1.status == PASS and r2.status == PASS and t1 < 60 and t2 < 60
    report(2, "dual-form agreement", ok,
           f"n=1: {r1.measured:.2e} (tol 1e-5, {t1:.1f}s); n=2 m=32: {r2.measured:.2e} (tol 1e-3, {t2:.1f}s)")


def test_03_multiplier_identity(report):
    r1 = check_multiplier_identity(CFG1)
    r2 = check_multiplier_identity(CFG2)
    ok = r1.status == PASS and r2.status == PASS
    report(3, "multiplier identity", ok,
           f"worst relative deviation n=1 {r1.measured:.2e}, n=2 {r2.measured:.2e} (tol 1e-4)")


def test_04_symbol_cross_validation(report):
    r1 = check_symbol_methods(CFG1)
    r2 = check_symbol_methods(CFG2)
    ok = r1.status == PASS and r2.status == PASS
    report(4, "symbol cross-validation", ok,
           f"direct vs polar n=1 {r1.measured:.2e}, n=2 {r2.measured:.2e} over {r2.details['modes']} modes "
           f"(tol 1e-5); 1D slope relation {r1.details['relation_1d']:.2e} (tol 1e-6)")


def test_05_homogeneity(report):
    r = check_homogeneity(CFG2)
    report(5, "homogeneity", r.status == PASS,
           f"max |m(2k)/m(k) / 2^(1+alpha) - 1| = {r.measured:.2e} over 8 directions (tol 1e-8)")


def test_06_decay_rate(report):
    r, t = _timed(check_decay_rate, CFG1)
    runs = r.details.get("runs", [])
    ok = r.status == PASS and t < 120 and all(x.get("r2", 0) >= 0.999 for x in runs)
    desc = ", ".join(f"k={x['k']}: rel err {x.get('relative_error', float('nan')):.1e} R2={x.get('r2', float('nan')):.6f}"
                     for x in runs)
    report(6, "linearized decay rate", ok, f"{desc} (tol 5%), {t:.1f}s")


def test_07_max_principles(report):
    r = check_max_principles_suite(CFG1)
    report(7, "maximum principles", r.status == PASS,
           f"{r.details['runs']} runs, worst violation {r.measured:.2e} <= {r.tolerance:.2e}, "
           f"C estimate {r.details['constant_estimate']:.2e} (<= 10)")


def test_08_scaling_invariance(report):
    r = check_scaling_invariance(CFG1)
    s = selftest_scaling_sensitivity(CFG1)
    ok = r.status == PASS and s.status == PASS
    report(8, "scaling invariance", ok,
           f"lambda=2 discrepancy {r.measured:.2e} <= {r.tolerance:.2e}; "
           f"perturbed-order run detected ({s.details.get('discrepancy', float('nan')):.2e} > tol)")


def test_09_mean_limit(report):
    r = check_mean_limit(CFG1)
    rows = r.details["runs"]
    worst_c = max(abs(x["C"]) - x["sup_u0"] for x in rows if "C" in x) if rows else float("nan")
    worst_gap = max(x["gap"] - x["bound"] for x in rows if "C" in x) if rows else float("nan")
    report(9, "mean limit", r.status == PASS,
           f"{len(rows)} runs; max(|C| - sup|u0|) = {worst_c:.2e}, max(gap - 2Me^(-wt)) = {worst_gap:.2e}")


def test_10_resolvent(report):
    r1 = check_resolvent_bounds(CFG1)
    r2 = check_resolvent_bounds(CFG2)
    ok = r1.status == PASS and r2.status == PASS
    report(10, "resolvent inequality", ok,
           f"min ratio n=1 {r1.measured!r}, n=2 {r2.measured!r} (>= 1 exactly); "
           f"1/|lambda| decay deviation {max(r1.details['decay_deviation'], r2.details['decay_deviation']):.2e} (tol 0.1)")


def test_11_lifting(report):
    r = check_lifting(CFG1)
    ratios = r.details["besov_ratios"]
    report(11, "lifting isomorphism", r.status == PASS,
           f"round trip {r.measured:.2e} (tol 1e-12); Besov ratios "
           + ", ".join(f"J={J}: {v:.4f}" for J, v in ratios.items()) + " (within factor 2)")


def test_12_mikhlin(report):
    r1 = check_mikhlin(CFG1)
    r2 = check_mikhlin(CFG2)
    ok = r1.status == PASS and r2.status == PASS and np.isfinite(r2.details["M_emp"])
    report(12, "Mikhlin bounds", ok,
           f"n=2 M_emp {r2.details['M_emp']:.6g} -> {r2.details['M_emp_refined']:.6g} (drift {r2.measured:.2e}, tol 5%); "
           f"a=0 isotropy n=1 {r1.details['isotropy_a0']:.1e}, n=2 {r2.details['isotropy_a0']:.1e} (tol 1e-6)")
