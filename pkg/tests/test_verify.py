"""Tests for the brute-force oracles that certify the fast-path algebra."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from jsqn.core import SecantPair, SplitDims, jsymm_update, psb_update
from jsqn.problems import quadratic_problem, quartic_problem, QuadraticSpec
from jsqn.verify import (
    OracleReport,
    dennis_more_ratio,
    finite_difference_jacobian,
    kkt_least_change_oracle,
    sufficient_decrease_check,
)


def random_jsymmetric(rng, dims):
    k = dims.total
    j = np.diag(np.concatenate([np.ones(dims.n), -np.ones(dims.m)]))
    raw = rng.normal(size=(k, k))
    return 0.5 * (raw + j @ raw.T @ j)


# ---------------------------------------------------------------------------
# KKT least-change oracle


def test_oracle_returns_b_when_secant_already_holds():
    dims = SplitDims(2, 1)
    rng = np.random.Generator(np.random.Philox(1))
    b = random_jsymmetric(rng, dims)
    s = rng.normal(size=3)
    pair = SecantPair(s, b @ s)  # r = 0: B itself is feasible and closest
    assert_allclose(kkt_least_change_oracle(b, pair, dims), b, atol=1e-10)


def test_oracle_frozen_2x2():
    dims = SplitDims(1, 1)
    pair = SecantPair(np.array([1.0, 0.0]), np.array([2.0, 1.0]))
    assert_allclose(
        kkt_least_change_oracle(np.eye(2), pair, dims),
        [[2.0, -1.0], [1.0, 1.0]],
        atol=1e-10,
    )


def test_oracle_agrees_with_closed_form():
    rng = np.random.Generator(np.random.Philox(2))
    for trial in range(200):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(0, 5))
        dims = SplitDims(n, m)
        b = random_jsymmetric(rng, dims)
        pair = SecantPair(rng.normal(size=dims.total), rng.normal(size=dims.total))
        gap = np.linalg.norm(
            kkt_least_change_oracle(b, pair, dims) - jsymm_update(b, pair, dims),
            "fro",
        )
        assert gap < 1e-8 * (1 + np.linalg.norm(b, "fro"))


def test_oracle_matches_psb_when_dual_block_empty():
    rng = np.random.Generator(np.random.Philox(3))
    for trial in range(20):
        dims = SplitDims(3, 0)
        raw = rng.normal(size=(3, 3))
        b = 0.5 * (raw + raw.T)
        pair = SecantPair(rng.normal(size=3), rng.normal(size=3))
        assert_allclose(
            kkt_least_change_oracle(b, pair, dims), psb_update(b, pair), atol=1e-9
        )


def test_oracle_rejects_large_instances():
    dims = SplitDims(8, 5)
    pair = SecantPair(np.ones(13), np.ones(13))
    with pytest.raises(ValueError):
        kkt_least_change_oracle(np.eye(13), pair, dims)


# ---------------------------------------------------------------------------
# finite differences


def test_fd_exact_on_affine_field():
    spec = QuadraticSpec(
        d_matrix=np.array([[2.0, 0.5], [0.5, 1.0]]),
        c_matrix=np.array([[1.5]]),
        a_matrix=np.array([[1.0, -1.0]]),
        x_star=np.zeros(2),
        w_star=np.zeros(1),
        alpha=1.0,
    )
    prob = quadratic_problem(spec)
    z = np.array([0.3, -0.7, 2.0])
    fd = finite_difference_jacobian(prob, z, h=0.37)  # any h works on affine F
    assert_allclose(fd, prob.eval_jacobian(z), atol=1e-9)


def test_fd_matches_symbolic_quartic():
    prob = quartic_problem(1.0)
    z = np.array([1.0, 1.0])
    fd = finite_difference_jacobian(prob, z, h=1e-5)
    assert_allclose(fd, [[-8.0, 1.0], [-1.0, -8.0]], atol=1e-5)


def test_fd_error_is_second_order():
    prob = quartic_problem(1.0)
    z = np.array([0.7, -1.3])
    exact = prob.eval_jacobian(z)
    hs = np.array([1e-1, 5e-2, 2.5e-2, 1.25e-2])
    errs = [
        np.abs(finite_difference_jacobian(prob, z, h=h) - exact).max() for h in hs
    ]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.7 <= slope <= 2.3


def test_fd_halving_shrinks_error_fourfold():
    prob = quartic_problem(1.0)
    z = np.array([0.4, 0.9])
    exact = prob.eval_jacobian(z)
    e1 = np.abs(finite_difference_jacobian(prob, z, h=0.08) - exact).max()
    e2 = np.abs(finite_difference_jacobian(prob, z, h=0.04) - exact).max()
    assert e1 / e2 == pytest.approx(4.0, rel=0.2)


# ---------------------------------------------------------------------------
# Dennis-More ratio


def test_dm_ratio_zero_at_exact_jacobian():
    rng = np.random.Generator(np.random.Philox(4))
    jac = rng.normal(size=(4, 4))
    assert dennis_more_ratio(jac, jac, rng.normal(size=4)) == 0.0


def test_dm_ratio_identity_offset_is_one():
    rng = np.random.Generator(np.random.Philox(5))
    jac = rng.normal(size=(3, 3))
    s = rng.normal(size=3)
    assert dennis_more_ratio(jac + np.eye(3), jac, s) == pytest.approx(1.0)


def test_dm_ratio_homogeneous_in_step():
    rng = np.random.Generator(np.random.Philox(6))
    b = rng.normal(size=(4, 4))
    jac = rng.normal(size=(4, 4))
    s = rng.normal(size=4)
    base = dennis_more_ratio(b, jac, s)
    for c in (2.0, -1.0, 1e-6, 137.0):
        assert dennis_more_ratio(b, jac, c * s) == pytest.approx(base, rel=1e-12)


def test_dm_ratio_rejects_zero_step():
    with pytest.raises(ValueError):
        dennis_more_ratio(np.eye(2), np.eye(2), np.zeros(2))


# ---------------------------------------------------------------------------
# sufficient-decrease report


def test_sufficient_decrease_zero_gradient_passes():
    rep = sufficient_decrease_check(m0=5.0, ms=5.0, g_norm=0.0, delta=1.0, b_norm=2.0)
    assert isinstance(rep, OracleReport)
    assert rep.passed


def test_sufficient_decrease_cauchy_equality_case():
    # B=I, g=(1,0), Delta=2: the Cauchy step attains the bound exactly
    rep = sufficient_decrease_check(m0=0.5, ms=0.0, g_norm=1.0, delta=2.0, b_norm=1.0)
    assert rep.passed
    assert rep.max_abs_error <= rep.tolerance


def test_sufficient_decrease_flat_step_fails():
    rep = sufficient_decrease_check(m0=1.0, ms=1.0, g_norm=1.0, delta=1.0, b_norm=1.0)
    assert not rep.passed
    assert rep.max_abs_error == pytest.approx(0.5, abs=1e-9)


def test_report_pass_matches_tolerance_rule():
    rep = sufficient_decrease_check(m0=1.0, ms=0.2, g_norm=1.0, delta=1.0, b_norm=1.0)
    assert rep.passed == (rep.max_abs_error <= rep.tolerance)
