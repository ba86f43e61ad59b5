"""Unit tests for the rank-2 update family and its inverse maintenance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from jsqn.core import (
    SecantPair,
    SplitDims,
    PrimalDualPoint,
    JacobianEstimate,
    SingularUpdateError,
    UpdateBreakdownError,
    ZeroStepError,
    apply_j,
    broyden_inverse_update,
    broyden_update,
    estimate_from_b,
    estimate_from_h,
    is_jsymmetric,
    jsymm_inverse_update,
    jsymm_update,
    jsymm_update_scaled,
    jsymmetry_residual,
    psb_update,
)


def random_jsymmetric(rng, dims):
    # symmetrize a dense draw into the J-symmetric subspace
    k = dims.total
    j = np.diag(np.concatenate([np.ones(dims.n), -np.ones(dims.m)]))
    raw = rng.normal(size=(k, k))
    return 0.5 * (raw + j @ raw.T @ j)


def random_instance(rng, n, m, well_conditioned=False):
    dims = SplitDims(n, m)
    k = dims.total
    if well_conditioned:
        b = np.eye(k) + 0.3 * random_jsymmetric(rng, dims)
    else:
        b = random_jsymmetric(rng, dims)
    pair = SecantPair(rng.normal(size=k), rng.normal(size=k))
    return dims, b, pair


# ---------------------------------------------------------------------------
# plumbing types


def test_split_dims_validation():
    assert SplitDims(3, 2).total == 5
    assert SplitDims(2, 0).total == 2
    with pytest.raises(ValueError):
        SplitDims(-1, 2)
    with pytest.raises(ValueError):
        SplitDims(0, 0)


def test_primal_dual_point_split():
    p = PrimalDualPoint(np.array([1.0, 2.0, 3.0]), SplitDims(2, 1))
    assert_allclose(p.x, [1.0, 2.0])
    assert_allclose(p.w, [3.0])
    assert_allclose(np.asarray(p), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        PrimalDualPoint(np.zeros(4), SplitDims(2, 1))


def test_secant_pair_rejects_zero_step():
    with pytest.raises(ZeroStepError):
        SecantPair(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        SecantPair(np.ones(3), np.ones(2))


@given(n=st.integers(1, 5), m=st.integers(0, 5), seed=st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_apply_j_involution(n, m, seed):
    dims = SplitDims(n, m)
    v = np.random.Generator(np.random.Philox(seed)).normal(size=dims.total)
    jv = apply_j(v, dims)
    assert_allclose(apply_j(jv, dims), v)
    assert_allclose(jv[: dims.n], v[: dims.n])
    assert_allclose(jv[dims.n :], -v[dims.n :])


def test_jsymmetry_residual_detects_structure():
    dims = SplitDims(2, 2)
    rng = np.random.Generator(np.random.Philox(0))
    mat = random_jsymmetric(rng, dims)
    assert jsymmetry_residual(mat, dims) < 1e-14
    assert is_jsymmetric(mat, dims)
    mat[0, 3] += 0.5  # breaks the off-block pairing
    assert jsymmetry_residual(mat, dims) > 0.1
    assert not is_jsymmetric(mat, dims)


# ---------------------------------------------------------------------------
# the main update: frozen instance, then properties


def test_update_frozen_2x2():
    # B=I, s=(1,0), y=(2,1) with n=m=1; every entry is hand-checkable
    dims = SplitDims(1, 1)
    pair = SecantPair(np.array([1.0, 0.0]), np.array([2.0, 1.0]))
    b_new = jsymm_update(np.eye(2), pair, dims)
    assert_allclose(b_new, [[2.0, -1.0], [1.0, 1.0]], atol=1e-14)
    # secant and structure
    assert_allclose(b_new @ pair.s, pair.y, atol=1e-14)
    assert jsymmetry_residual(b_new, dims) < 1e-14


def test_inverse_update_frozen_2x2():
    dims = SplitDims(1, 1)
    pair = SecantPair(np.array([1.0, 0.0]), np.array([2.0, 1.0]))
    h_new = jsymm_inverse_update(np.eye(2), np.eye(2), pair, dims)
    assert_allclose(h_new, np.array([[1.0, 1.0], [-1.0, 2.0]]) / 3.0, atol=1e-14)
    assert_allclose(h_new @ pair.y, pair.s, atol=1e-14)


def test_update_secant_and_symmetry_properties():
    rng = np.random.Generator(np.random.Philox(11))
    for trial in range(200):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(0, 7))
        dims, b, pair = random_instance(rng, n, m)
        b_new = jsymm_update(b, pair, dims)
        scale = 1.0 + np.abs(b_new).max()
        assert np.abs(b_new @ pair.s - pair.y).max() < 1e-10 * scale
        assert jsymmetry_residual(b_new, dims) < 1e-10 * scale


def test_update_rejects_zero_step():
    dims = SplitDims(1, 1)
    pair = SecantPair(np.array([1e-16, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(ZeroStepError):
        jsymm_update(np.eye(2), pair, dims, min_step=1e-12)


def test_update_is_least_change():
    # any other J-symmetric secant-satisfying matrix is farther from B
    rng = np.random.Generator(np.random.Philox(12))
    for trial in range(50):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(0, 5))
        dims, b, pair = random_instance(rng, n, m)
        b_new = jsymm_update(b, pair, dims)
        base = np.linalg.norm(b_new - b, "fro")
        # competitor: correct another J-symmetric matrix onto the secant set
        other = random_jsymmetric(rng, dims)
        competitor = jsymm_update(other, pair, dims)
        assert np.linalg.norm(competitor - b, "fro") >= base - 1e-10 * (1 + base)


def test_psb_reduction_when_dual_block_empty():
    rng = np.random.Generator(np.random.Philox(13))
    for trial in range(100):
        dims = SplitDims(5, 0)
        raw = rng.normal(size=(5, 5))
        b = 0.5 * (raw + raw.T)
        pair = SecantPair(rng.normal(size=5), rng.normal(size=5))
        assert_allclose(
            jsymm_update(b, pair, dims), psb_update(b, pair), atol=1e-12
        )


def test_psb_update_stays_symmetric():
    rng = np.random.Generator(np.random.Philox(14))
    raw = rng.normal(size=(4, 4))
    b = 0.5 * (raw + raw.T)
    pair = SecantPair(rng.normal(size=4), rng.normal(size=4))
    b_new = psb_update(b, pair)
    assert_allclose(b_new, b_new.T, atol=1e-12)
    assert_allclose(b_new @ pair.s, pair.y, atol=1e-12)


# ---------------------------------------------------------------------------
# scaled variant


def test_scaled_update_reduces_at_beta_one():
    rng = np.random.Generator(np.random.Philox(15))
    for trial in range(30):
        dims, b, pair = random_instance(rng, 3, 2)
        assert_allclose(
            jsymm_update_scaled(b, pair, 1.0, dims),
            jsymm_update(b, pair, dims),
            atol=0.0,
        )


def test_scaled_update_keeps_jsymmetry_any_beta():
    rng = np.random.Generator(np.random.Philox(16))
    for trial in range(50):
        dims, b, pair = random_instance(rng, 2, 3)
        beta = float(rng.uniform(0.1, 1.9))
        b_new = jsymm_update_scaled(b, pair, beta, dims)
        assert jsymmetry_residual(b_new, dims) < 1e-10 * (1 + np.abs(b_new).max())


def test_scaled_update_continuous_in_beta():
    dims = SplitDims(2, 2)
    rng = np.random.Generator(np.random.Philox(17))
    _, b, pair = random_instance(rng, 2, 2)
    near = jsymm_update_scaled(b, pair, 1.0 + 1e-9, dims)
    exact = jsymm_update(b, pair, dims)
    assert np.abs(near - exact).max() < 1e-6


# ---------------------------------------------------------------------------
# inverse maintenance


def test_inverse_update_matches_dense_inverse():
    rng = np.random.Generator(np.random.Philox(18))
    for trial in range(100):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        dims, b, pair = random_instance(rng, n, m, well_conditioned=True)
        h = np.linalg.inv(b)
        b_new = jsymm_update(b, pair, dims)
        h_new = jsymm_inverse_update(h, b, pair, dims)
        k = dims.total
        assert np.linalg.norm(h_new @ b_new - np.eye(k)) < 1e-8
        assert np.linalg.norm(h_new @ pair.y - pair.s) < 1e-8 * (
            1 + np.linalg.norm(pair.s)
        )


def test_inverse_update_matches_dense_inverse_scaled():
    rng = np.random.Generator(np.random.Philox(19))
    for trial in range(100):
        dims, b, pair = random_instance(rng, 3, 2, well_conditioned=True)
        h = np.linalg.inv(b)
        beta = float(rng.uniform(0.2, 1.8))
        b_new = jsymm_update_scaled(b, pair, beta, dims)
        h_new = jsymm_inverse_update(h, b, pair, dims, beta=beta)
        assert np.abs(h_new - np.linalg.inv(b_new)).max() < 1e-8


def test_inverse_update_breakdown_raises():
    # 1-D minimization instance whose updated estimate is exactly singular
    dims = SplitDims(1, 0)
    pair = SecantPair(np.array([1.0]), np.array([0.0]))
    assert_allclose(jsymm_update(np.eye(1), pair, dims), [[0.0]], atol=1e-15)
    with pytest.raises(UpdateBreakdownError):
        jsymm_inverse_update(np.eye(1), np.eye(1), pair, dims)


# ---------------------------------------------------------------------------
# Broyden baseline


def test_broyden_update_secant():
    rng = np.random.Generator(np.random.Philox(20))
    for trial in range(50):
        k = int(rng.integers(1, 8))
        b = rng.normal(size=(k, k))
        pair = SecantPair(rng.normal(size=k), rng.normal(size=k))
        b_new = broyden_update(b, pair)
        assert np.abs(b_new @ pair.s - pair.y).max() < 1e-10 * (
            1 + np.abs(b_new).max()
        )


def test_broyden_inverse_matches_dense():
    rng = np.random.Generator(np.random.Philox(21))
    for trial in range(50):
        k = int(rng.integers(2, 7))
        b = np.eye(k) + 0.3 * rng.normal(size=(k, k))
        pair = SecantPair(rng.normal(size=k), rng.normal(size=k))
        h = np.linalg.inv(b)
        try:
            h_new = broyden_inverse_update(h, pair)
        except UpdateBreakdownError:
            continue
        b_new = broyden_update(b, pair)
        assert np.abs(h_new - np.linalg.inv(b_new)).max() < 1e-7


def test_broyden_inverse_breakdown_raises():
    # H = I and y orthogonal to s makes the denominator vanish
    pair = SecantPair(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(UpdateBreakdownError):
        broyden_inverse_update(np.eye(2), pair)


# ---------------------------------------------------------------------------
# paired-estimate checks


def test_estimate_check_passes_and_fails():
    dims = SplitDims(2, 1)
    rng = np.random.Generator(np.random.Philox(22))
    b = np.eye(3) + 0.2 * random_jsymmetric(rng, dims)
    est = estimate_from_b(b, dims)
    est.check()
    est2 = estimate_from_h(np.linalg.inv(b), dims)
    est2.check()
    bad = JacobianEstimate(b, np.eye(3) * 5.0, dims)
    with pytest.raises(SingularUpdateError):
        bad.check()


def test_estimate_check_detects_lost_structure():
    dims = SplitDims(1, 1)
    b = np.array([[1.0, 2.0], [1.0, 1.0]])  # not J-symmetric: m21 != -m12^T
    est = JacobianEstimate(b, np.linalg.inv(b), dims)
    with pytest.raises(SingularUpdateError):
        est.check()
    # same matrix accepted when structure is not claimed
    JacobianEstimate(b, np.linalg.inv(b), dims, jsymmetric=False).check()
