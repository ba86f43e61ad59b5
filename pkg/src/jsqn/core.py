"""Structure-preserving secant updates for saddle-point Jacobians.

A matrix M is called J-symmetric for J = diag(I_n, -I_m) when J M = M^T J,
i.e. both diagonal blocks are symmetric and the off-diagonal blocks are
negative transposes of each other.  The Jacobian of the first-order field
F(z) = (grad_x L, -grad_w L) of a smooth minimax problem has exactly this
structure, and the updates in this module preserve it.

The central operation is ``jsymm_update``: the Frobenius-nearest matrix to a
given J-symmetric estimate B that is J-symmetric and satisfies the secant
condition B+ s = y.  Its only denominator is s^T s, so it never breaks down
for a nonzero step.  ``jsymm_inverse_update`` maintains the inverse with two
rank-1 Sherman-Morrison applications.  PSB and Broyden updates are provided
as references and baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SplitDims",
    "PrimalDualPoint",
    "JacobianEstimate",
    "SecantPair",
    "ZeroStepError",
    "UpdateBreakdownError",
    "SingularUpdateError",
    "TOL_SYM",
    "TOL_INV",
    "EPS_DEN",
    "eps_step",
    "apply_j",
    "jsymmetry_residual",
    "is_jsymmetric",
    "jsymm_update",
    "jsymm_update_scaled",
    "jsymm_inverse_update",
    "psb_update",
    "broyden_update",
    "broyden_inverse_update",
    "estimate_from_b",
    "estimate_from_h",
]

# Relative tolerances for the JacobianEstimate invariants and the rank-1
# denominator guard.  The direct update path needs none of these: its only
# denominator is s^T s.
TOL_SYM = 1e-8
TOL_INV = 1e-8
EPS_DEN = 1e-12


class ZeroStepError(ValueError):
    """Secant step too small to define an update."""


class UpdateBreakdownError(ArithmeticError):
    """A rank-1 inverse application hit a near-zero denominator.

    Callers recover by dense inversion of the directly updated matrix
    (J-symmetric drivers) or by skipping the update (Broyden driver).
    """


class SingularUpdateError(ArithmeticError):
    """The updated estimate is numerically singular."""


@dataclass(frozen=True)
class SplitDims:
    """Primal/dual split of a vector in R^(n+m)."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0 or self.n + self.m < 1:
            raise ValueError(f"invalid split ({self.n}, {self.m})")

    @property
    def total(self) -> int:
        return self.n + self.m


@dataclass(frozen=True)
class PrimalDualPoint:
    """A point z = (x, w) with its primal/dual split recorded."""

    values: np.ndarray
    dims: SplitDims

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size != self.dims.total:
            raise ValueError(
                f"point has {values.size} entries, split needs {self.dims.total}"
            )

    @property
    def x(self) -> np.ndarray:
        return self.values[: self.dims.n]

    @property
    def w(self) -> np.ndarray:
        return self.values[self.dims.n :]

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


@dataclass(frozen=True)
class SecantPair:
    """Step s and field difference y = F(z + s) - F(z)."""

    s: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "y", y)
        if s.shape != y.shape or s.ndim != 1:
            raise ValueError("s and y must be 1-d vectors of equal length")
        if not np.linalg.norm(s) > 0.0:
            raise ZeroStepError("secant step has zero norm")


@dataclass
class JacobianEstimate:
    """Paired estimate B and inverse H of a J-symmetric Jacobian."""

    b: np.ndarray
    h: np.ndarray
    dims: SplitDims
    jsymmetric: bool = field(default=True)

    def check(self, tol_sym: float = TOL_SYM, tol_inv: float = TOL_INV) -> None:
        """Assert the pairing and structure invariants (relative tolerances)."""
        k = self.dims.total
        scale = 1.0 + np.abs(self.b).max()
        inv_err = np.abs(self.b @ self.h - np.eye(k)).max()
        if inv_err > tol_inv * scale * (1.0 + np.abs(self.h).max()):
            raise SingularUpdateError(f"B*H deviates from identity by {inv_err:.3e}")
        if self.jsymmetric:
            sym_err = jsymmetry_residual(self.b, self.dims)
            if sym_err > tol_sym * scale:
                raise SingularUpdateError(f"estimate lost J-symmetry by {sym_err:.3e}")


def eps_step(z: np.ndarray) -> float:
    """Step-norm threshold below which a secant update is rejected."""
    return 1e-14 * (1.0 + float(np.linalg.norm(z)))


def apply_j(v: np.ndarray, dims: SplitDims) -> np.ndarray:
    """Apply J = diag(I_n, -I_m): negate the trailing dual block."""
    v = np.asarray(v, dtype=float)
    if v.shape != (dims.total,):
        raise ValueError(f"vector of length {v.size} does not match split {dims}")
    out = v.copy()
    out[dims.n :] *= -1.0
    return out


def jsymmetry_residual(mat: np.ndarray, dims: SplitDims) -> float:
    """Max-abs entry of J M - M^T J; zero iff M is J-symmetric."""
    jm = mat.copy()
    jm[dims.n :, :] *= -1.0
    return float(np.abs(jm - jm.T).max())


def is_jsymmetric(mat: np.ndarray, dims: SplitDims, tol: float = TOL_SYM) -> bool:
    return jsymmetry_residual(mat, dims) <= tol * (1.0 + np.abs(mat).max())


def _step_products(pair: SecantPair, min_step: float) -> tuple[np.ndarray, np.ndarray, float]:
    s, y = pair.s, pair.y
    ss = float(s @ s)
    if np.linalg.norm(s) <= min_step or ss <= 0.0 or not np.isfinite(ss):
        raise ZeroStepError(f"step norm {np.linalg.norm(s):.3e} below threshold")
    return s, y, ss


def jsymm_update(
    b: np.ndarray, pair: SecantPair, dims: SplitDims, *, min_step: float = 0.0
) -> np.ndarray:
    """Least-change J-symmetric secant update.

    Returns the minimizer of ||B+ - B||_F over J-symmetric matrices with
    B+ s = y:

        B+ = B + Js r^T J / s^Ts + r s^T / s^Ts - (s^T J r) Js s^T / (s^Ts)^2

    with r = y - B s.  The only denominator is s^T s.

    Parameters
    ----------
    b : ndarray
        Current estimate, J-symmetric for the given split.
    pair : SecantPair
        Step s and difference y.
    dims : SplitDims
        Primal/dual split defining J.
    min_step : float, optional
        Reject steps with norm at or below this threshold.

    Returns
    -------
    ndarray
        Updated estimate; satisfies B+ s = y to rounding and is J-symmetric
        whenever ``b`` is.
    """
    s, y, ss = _step_products(pair, min_step)
    r = y - b @ s
    js = apply_j(s, dims)
    jr = apply_j(r, dims)
    sjr = float(s @ jr)
    out = b + (np.outer(js, jr) + np.outer(r, s)) / ss
    out -= (sjr / ss**2) * np.outer(js, s)
    return out


def jsymm_update_scaled(
    b: np.ndarray,
    pair: SecantPair,
    beta: float,
    dims: SplitDims,
    *,
    min_step: float = 0.0,
) -> np.ndarray:
    """Scaled variant of ``jsymm_update``.

    The two rank-1 corrections enter linearly in beta and the projection
    term quadratically:

        B+ = B + beta (Js r^T J + r s^T) / s^Ts
               - beta^2 (s^T J r) Js s^T / (s^Ts)^2

    beta = 1 reproduces ``jsymm_update`` exactly.  Drawing beta from a
    neighborhood of 1 keeps the update a perturbation of the least-change
    one while making singular outcomes a measure-zero event.
    """
    s, y, ss = _step_products(pair, min_step)
    r = y - b @ s
    js = apply_j(s, dims)
    jr = apply_j(r, dims)
    sjr = float(s @ jr)
    out = b + (beta / ss) * (np.outer(js, jr) + np.outer(r, s))
    out -= (beta**2 * sjr / ss**2) * np.outer(js, s)
    return out


def jsymm_inverse_update(
    h: np.ndarray,
    b: np.ndarray,
    pair: SecantPair,
    dims: SplitDims,
    *,
    beta: float = 1.0,
    min_step: float = 0.0,
    eps_den: float = EPS_DEN,
) -> np.ndarray:
    """Inverse of the (scaled) J-symmetric update via two rank-1 solves.

    Factor the update as B+ = (B + a s^T / s^Ts) + beta Js (Jr)^T / s^Ts
    with a = beta r - beta^2 (s^T J r / s^Ts) Js, and invert each rank-1
    term with one Sherman-Morrison application.  Cost is O((n+m)^2).

    Raises
    ------
    UpdateBreakdownError
        If either Sherman-Morrison denominator has magnitude below
        ``eps_den * s^Ts``; the caller should invert the direct update
        densely instead.
    """
    s, y, ss = _step_products(pair, min_step)
    r = y - b @ s
    js = apply_j(s, dims)
    jr = apply_j(r, dims)
    sjr = float(s @ jr)

    a = beta * r - (beta**2 * sjr / ss) * js

    # First application: Q = B + a s^T / s^Ts.
    ha = h @ a
    sh = s @ h
    den1 = ss + float(s @ ha)
    if abs(den1) < eps_den * ss:
        raise UpdateBreakdownError(f"first denominator {den1:.3e} below guard")
    q_inv = h - np.outer(ha, sh) / den1

    # Second application: B+ = Q + beta Js (Jr)^T / s^Ts.
    qjs = q_inv @ js
    jrq = jr @ q_inv
    den2 = ss + beta * float(jr @ qjs)
    if abs(den2) < eps_den * ss:
        raise UpdateBreakdownError(f"second denominator {den2:.3e} below guard")
    return q_inv - (beta / den2) * np.outer(qjs, jrq)


def psb_update(b: np.ndarray, pair: SecantPair, *, min_step: float = 0.0) -> np.ndarray:
    """Powell symmetric Broyden update (symmetric least-change secant).

    Reference implementation; coincides with ``jsymm_update`` when the dual
    block is empty.
    """
    s, y, ss = _step_products(pair, min_step)
    r = y - b @ s
    out = b + (np.outer(s, r) + np.outer(r, s)) / ss
    out -= (float(s @ r) / ss**2) * np.outer(s, s)
    return out


def broyden_update(b: np.ndarray, pair: SecantPair, *, min_step: float = 0.0) -> np.ndarray:
    """Broyden's rank-1 secant update B+ = B + (y - Bs) s^T / s^Ts."""
    s, y, ss = _step_products(pair, min_step)
    return b + np.outer(y - b @ s, s) / ss


def broyden_inverse_update(
    h: np.ndarray,
    pair: SecantPair,
    *,
    min_step: float = 0.0,
    eps_den: float = EPS_DEN,
) -> np.ndarray:
    """Sherman-Morrison inverse of Broyden's update.

        H+ = H + (s - Hy) s^T H / (s^T H y)

    Unlike the J-symmetric update, the denominator s^T H y can vanish for
    a nonzero step; near-singular cases raise ``UpdateBreakdownError`` and
    the caller skips the update.
    """
    s, y, _ = _step_products(pair, min_step)
    hy = h @ y
    den = float(s @ hy)
    if abs(den) < eps_den * np.linalg.norm(s) * np.linalg.norm(y):
        raise UpdateBreakdownError(f"denominator s^T H y = {den:.3e} below guard")
    return h + np.outer(s - hy, s @ h) / den


def estimate_from_b(b: np.ndarray, dims: SplitDims, jsymmetric: bool = True) -> JacobianEstimate:
    """Pair a matrix with its dense inverse."""
    b = np.asarray(b, dtype=float)
    try:
        h = np.linalg.inv(b)
    except np.linalg.LinAlgError as exc:
        raise SingularUpdateError("initial estimate is singular") from exc
    return JacobianEstimate(b=b, h=h, dims=dims, jsymmetric=jsymmetric)


def estimate_from_h(h: np.ndarray, dims: SplitDims, jsymmetric: bool = True) -> JacobianEstimate:
    """Pair an inverse with its dense inversion."""
    h = np.asarray(h, dtype=float)
    try:
        b = np.linalg.inv(h)
    except np.linalg.LinAlgError as exc:
        raise SingularUpdateError("initial inverse is singular") from exc
    return JacobianEstimate(b=b, h=h, dims=dims, jsymmetric=jsymmetric)
