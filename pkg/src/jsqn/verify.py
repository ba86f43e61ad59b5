"""Brute-force oracles and diagnostics.

Everything here is deliberately slow and direct: the least-change oracle
solves the constrained projection as an explicit KKT linear system over a
basis of the J-symmetric subspace, finite differences validate Jacobians,
and the remaining checks re-evaluate closed forms independently.  Tests use
these to certify the fast paths in ``core`` and ``solvers``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SecantPair, SplitDims, ZeroStepError, jsymmetry_residual

__all__ = [
    "OracleReport",
    "kkt_least_change_oracle",
    "finite_difference_jacobian",
    "dennis_more_ratio",
    "sufficient_decrease_check",
]

ORACLE_DIM_CAP = 12


@dataclass(frozen=True)
class OracleReport:
    """Outcome of a single brute-force check."""

    max_abs_error: float
    location: object
    passed: bool
    tolerance: float


def _jsymm_basis(dims: SplitDims) -> list[tuple[tuple[int, int], float, bool]]:
    """Enumerate the J-symmetric subspace.

    Each entry ((i, j), weight, paired) describes one free parameter: the
    matrix entry (i, j) it controls, the squared Frobenius norm of its basis
    element (1 for diagonal entries, 2 otherwise), and whether a mirror
    entry exists (at (j, i), with sign +1 inside the diagonal blocks and -1
    across them).
    """
    n, m = dims.n, dims.m
    params: list[tuple[tuple[int, int], float, bool]] = []
    for i in range(n):
        for j in range(i, n):
            params.append(((i, j), 1.0 if i == j else 2.0, i != j))
    for i in range(m):
        for j in range(i, m):
            params.append(((n + i, n + j), 1.0 if i == j else 2.0, i != j))
    for i in range(n):
        for j in range(m):
            params.append(((i, n + j), 2.0, True))
    return params


def _materialize(params, coeffs: np.ndarray, dims: SplitDims) -> np.ndarray:
    k = dims.total
    out = np.zeros((k, k))
    n = dims.n
    for p, ((i, j), _, paired) in zip(coeffs, params):
        out[i, j] = p
        if paired:
            # Mirror entry: symmetric inside the diagonal blocks, negated
            # across the off-diagonal blocks.
            sign = 1.0 if (i < n) == (j < n) else -1.0
            out[j, i] = sign * p
    return out


def kkt_least_change_oracle(b: np.ndarray, pair: SecantPair, dims: SplitDims) -> np.ndarray:
    """Frobenius projection of B onto {M J-symmetric : M s = y}, solved directly.

    Parameterizes the J-symmetric subspace with n(n+1)/2 + m(m+1)/2 + n*m
    coordinates, writes the least-change problem as an equality-constrained
    quadratic program and solves its KKT system densely.  Serves as the
    independent certificate for ``core.jsymm_update``.

    Limited to n + m <= ``ORACLE_DIM_CAP`` to keep the dense system small.
    """
    b = np.asarray(b, dtype=float)
    k = dims.total
    if k > ORACLE_DIM_CAP:
        raise ValueError(f"oracle limited to n+m <= {ORACLE_DIM_CAP}, got {k}")
    s, y = pair.s, pair.y

    params = _jsymm_basis(dims)
    p_count = len(params)
    n = dims.n

    # Objective 0.5 p^T (2G) p - 2 c^T p + const, constraint M(p) s = y.
    weights = np.array([w for (_, w, _) in params])
    target = np.empty(p_count)
    constraint = np.zeros((k, p_count))
    for idx, ((i, j), _, paired) in enumerate(params):
        target[idx] = b[i, j]
        constraint[i, idx] += s[j]
        if paired:
            sign = 1.0 if (i < n) == (j < n) else -1.0
            target[idx] += sign * b[j, i]
            constraint[j, idx] += sign * s[i]
    # <E_k, B> accumulates both mirrored entries; weight already counts them.

    kkt = np.zeros((p_count + k, p_count + k))
    kkt[:p_count, :p_count] = np.diag(2.0 * weights)
    kkt[:p_count, p_count:] = constraint.T
    kkt[p_count:, :p_count] = constraint
    rhs = np.concatenate([2.0 * target, y])

    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("KKT system singular despite nonzero step") from exc
    residual = np.abs(kkt @ sol - rhs).max()
    if residual > 1e-9 * (1.0 + np.abs(rhs).max()):
        raise RuntimeError(f"KKT solve residual {residual:.3e} too large")

    out = _materialize(params, sol[:p_count], dims)
    scale = 1.0 + np.abs(out).max()
    assert np.abs(out @ s - y).max() <= 1e-10 * scale * (1.0 + np.abs(s).max())
    assert jsymmetry_residual(out, dims) <= 1e-10 * scale
    return out


def finite_difference_jacobian(problem, z: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of problem.eval_f at z, columnwise.

    If a perturbed point leaves the problem domain, the stepsize for that
    coordinate is halved up to 8 times before giving up.
    """
    z = np.asarray(z, dtype=float)
    k = z.size
    f0 = problem.eval_f(z)
    out = np.empty((f0.size, k))
    for j in range(k):
        hj = h
        for attempt in range(9):
            zp = z.copy()
            zm = z.copy()
            zp[j] += hj
            zm[j] -= hj
            if problem.domain_check(zp) and problem.domain_check(zm):
                break
            hj *= 0.5
        else:
            raise ValueError(f"coordinate {j}: perturbed points stay out of domain")
        out[:, j] = (problem.eval_f(zp) - problem.eval_f(zm)) / (2.0 * hj)
    return out


def dennis_more_ratio(b: np.ndarray, jac_star: np.ndarray, s: np.ndarray) -> float:
    """||(B - dF(z*)) s|| / ||s||; vanishing along the iteration characterizes
    Q-superlinear convergence."""
    s = np.asarray(s, dtype=float)
    ns = np.linalg.norm(s)
    if not ns > 0.0:
        raise ZeroStepError("Dennis-More ratio undefined for a zero step")
    return float(np.linalg.norm((b - jac_star) @ s) / ns)


def sufficient_decrease_check(
    m0: float, ms: float, g_norm: float, delta: float, b_norm: float
) -> OracleReport:
    """Check the Cauchy-type model decrease bound

        m(0) - m(s) >= (||g||/2) min{Delta, ||g|| / ||B||^2}

    with a small absolute slack; every trust-region step (quasi-Newton,
    Cauchy, or dogleg) is expected to satisfy it.
    """
    if not (math.isfinite(m0) and math.isfinite(ms)) or delta <= 0.0:
        raise ValueError("inputs must be finite with delta > 0")
    if g_norm > 0.0:
        ratio = g_norm / b_norm**2 if b_norm > 0.0 else math.inf
        bound = 0.5 * g_norm * min(delta, ratio)
    else:
        bound = 0.0
    tolerance = 1e-10 * (1.0 + abs(m0))
    shortfall = max(0.0, bound - (m0 - ms))
    return OracleReport(
        max_abs_error=shortfall,
        location=None,
        passed=shortfall <= tolerance,
        tolerance=tolerance,
    )
