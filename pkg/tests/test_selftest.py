"""The built-in identity suite must pass and expose failures honestly."""

import numpy as np
import pytest

import heisriesz.core as core
from heisriesz.selftest import CheckResult, all_passed, run_selftest

EXPECTED_CHECKS = {
    "reference_values",
    "associativity",
    "inverse_identity",
    "metric_left_invariance",
    "metric_dilation_scaling",
    "norm_homogeneity",
    "triangle_inequality",
    "kernel_antisymmetry",
    "kernel_homogeneity",
    "truncation_consistency",
    "translation_covariance",
    "dilation_covariance",
}


def test_full_suite_passes():
    results = run_selftest(samples=2000, seed=0)
    assert {r.name for r in results} == EXPECTED_CHECKS
    assert all_passed(results)
    for r in results:
        assert r.worst <= r.tol, r.name


def test_quick_mode_caps_samples():
    results = run_selftest(samples=50_000, quick=True)
    assert all_passed(results)
    assert max(r.samples for r in results) <= 1000


def test_truncation_check_is_exact():
    results = run_selftest(samples=2000, seed=1)
    trunc = next(r for r in results if r.name == "truncation_consistency")
    assert trunc.tol == 0.0
    assert trunc.worst == 0.0


def test_check_result_passed_property():
    assert CheckResult("x", 10, 1e-13, 1e-12).passed
    assert not CheckResult("x", 10, 1e-11, 1e-12).passed
    assert not all_passed([CheckResult("x", 1, 1.0, 0.5)])


def test_twist_sign_mutation_is_caught(monkeypatch):
    # flipping the sign of the bilinear twist leaves the group axioms
    # intact (any bilinear form gives an associative product), so the
    # catch must come from pinned reference values, not associativity
    orig = core.symplectic_form
    monkeypatch.setattr(core, "symplectic_form", lambda p, q: -orig(p, q))
    results = run_selftest(samples=500, seed=0)
    assert not all_passed(results)
    failing = [r.name for r in results if not r.passed]
    assert failing[0] == "reference_values"
    assoc = next(r for r in results if r.name == "associativity")
    assert assoc.passed


def test_norm_exponent_mutation_is_caught(monkeypatch):
    orig = core.koranyi_norm
    monkeypatch.setattr(core, "koranyi_norm", lambda p: 1.01 * orig(p))
    results = run_selftest(samples=500, seed=0)
    failing = [r.name for r in results if not r.passed]
    assert "norm_homogeneity" in failing or "reference_values" in failing
