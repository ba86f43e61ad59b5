"""Iteration drivers producing uniform traces.

Three quasi-Newton drivers share the J-symmetric update machinery:

* ``solve_jsymm``      - fixed stepsize (t = 1 recovers the plain method),
* ``solve_jsymm_ls``   - backtracking on the residual norm,
* ``solve_jsymm_tr``   - dogleg trust region on the merit 0.5 ||F||^2 with a
                         randomly scaled update to keep estimates invertible.

``solve_egm`` (extragradient) and ``solve_broyden`` are the baselines.  All
five emit one ``IterationRecord`` per iteration plus a row 0 describing the
initial point, so a trace always has iterations + 1 rows.

Setting the environment variable ``JSYMM_CHECKS=strict`` turns on
per-iteration invariant assertions (secant residual, J-symmetry, inverse
pairing, and for the trust region the model-decrease bound and merit
monotonicity).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    JacobianEstimate,
    SecantPair,
    SingularUpdateError,
    SplitDims,
    UpdateBreakdownError,
    broyden_inverse_update,
    broyden_update,
    eps_step,
    jsymm_inverse_update,
    jsymm_update,
    jsymm_update_scaled,
    jsymmetry_residual,
)
from .problems import MinimaxProblem
from .verify import dennis_more_ratio, sufficient_decrease_check

__all__ = [
    "SolverConfig",
    "TrustRegionConfig",
    "IterationRecord",
    "SolveResult",
    "DEFAULT_SCHEDULE",
    "T_MIN",
    "as_schedule",
    "resolve_stepsize",
    "quasi_newton_point",
    "cauchy_point",
    "dogleg_point",
    "solve_jsymm",
    "solve_jsymm_ls",
    "solve_jsymm_tr",
    "solve_egm",
    "solve_broyden",
    "strict_checks",
]

Schedule = tuple[tuple[float, float], ...]

# Stepsize 0.01 until ||F|| drops below 1, then full steps; the standard
# protocol for the fixed-stepsize runs.  Ascending thresholds: the resolver
# returns the first qualifying pair.
DEFAULT_SCHEDULE: Schedule = ((1.0, 1.0), (math.inf, 0.01))

T_MIN = 2.0**-30
MAX_DOMAIN_HALVINGS = 50
MAX_RESAMPLES = 20
RCOND_MIN = 1e-12
BOUNDARY_FRACTION = 0.99


def strict_checks() -> bool:
    return os.environ.get("JSYMM_CHECKS", "") == "strict"


def as_schedule(stepsize: Union[None, float, Sequence[tuple[float, float]]],
                default: Schedule = DEFAULT_SCHEDULE) -> Schedule:
    """Normalize a stepsize spec into a sorted (threshold, stepsize) tuple."""
    if stepsize is None:
        stepsize = default
    if isinstance(stepsize, (int, float)):
        if stepsize <= 0.0:
            raise ValueError("stepsize must be positive")
        return ((math.inf, float(stepsize)),)
    pairs = sorted((float(thr), float(st)) for thr, st in stepsize)
    if not pairs:
        raise ValueError("empty stepsize schedule")
    for thr, st in pairs:
        if thr <= 0.0 or st <= 0.0:
            raise ValueError("schedule thresholds and stepsizes must be positive")
    if not math.isinf(pairs[-1][0]):
        raise ValueError("schedule must include an 'inf' threshold entry")
    return tuple(pairs)


def resolve_stepsize(schedule: Schedule, norm_f: float) -> float:
    """Stepsize of the qualifying pair (norm_f < threshold) with the smallest threshold."""
    for thr, st in schedule:
        if norm_f < thr:
            return st
    return schedule[-1][1]


@dataclass(frozen=True)
class SolverConfig:
    """Settings shared by the fixed-step, line-search and baseline drivers."""

    tol_f: float = 1e-4
    max_iters: int = 2000
    stepsize: Union[None, float, Schedule] = None
    c1: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tol_f <= 0.0:
            raise ValueError("tol_f must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not 0.0 < self.c1 < 0.5:
            raise ValueError("c1 must lie in (0, 1/2)")


@dataclass(frozen=True)
class TrustRegionConfig:
    """Settings of the dogleg trust-region driver."""

    r0: float = 1.0
    delta0: float = 1.0
    beta_hat: float = 0.9
    zeta: float = 1e-4
    seed: int = 0
    tol_f: float = 1e-4
    max_iters: int = 2000

    def __post_init__(self) -> None:
        if not 0.0 < self.delta0 <= self.r0:
            raise ValueError("need 0 < delta0 <= r0")
        if not 0.0 < self.beta_hat < 1.0:
            raise ValueError("beta_hat must lie in (0, 1)")
        if not 0.0 < self.zeta < 1e-3:
            raise ValueError("zeta must lie in (0, 1e-3)")
        if self.tol_f <= 0.0:
            raise ValueError("tol_f must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass
class IterationRecord:
    """One trace row; row 0 describes the initial point."""

    iter: int
    norm_f: float
    step_norm: Optional[float]
    stepsize_or_delta: Optional[float]
    rho: Optional[float]
    accepted: Optional[bool]
    dm_ratio: Optional[float]
    wall_ns: int
    flag: str = ""  # diagnostics only; not part of the trace schema

    def __post_init__(self) -> None:
        if self.norm_f < 0.0 or (self.step_norm is not None and self.step_norm < 0.0):
            raise ValueError("norms must be nonnegative")


@dataclass
class SolveResult:
    """Final point, termination status and the per-iteration trace."""

    z: np.ndarray
    status: str  # converged | max_iters | stalled | aborted
    iterations: int
    norm_f: float
    trace: list[IterationRecord]
    message: str = ""
    n_fallbacks: int = 0
    n_skipped_updates: int = 0
    n_underflow_steps: int = 0
    points: list[np.ndarray] = field(default_factory=list)


def _as_vector(z) -> np.ndarray:
    values = getattr(z, "values", z)
    return np.array(values, dtype=float)


def _jac_at_saddle(problem: MinimaxProblem) -> Optional[np.ndarray]:
    if problem.known_saddle is None:
        return None
    return problem.eval_jacobian(problem.known_saddle.values)


class _Run:
    """Shared bookkeeping: clock, trace rows, iterate history."""

    def __init__(self, problem: MinimaxProblem, z: np.ndarray):
        if not problem.domain_check(z):
            raise ValueError("initial point outside the problem domain")
        self.problem = problem
        self.t0 = time.perf_counter_ns()
        self.trace: list[IterationRecord] = []
        self.points: list[np.ndarray] = [z.copy()]
        self.n_fallbacks = 0
        self.n_skipped = 0
        self.n_underflow = 0

    def wall(self) -> int:
        return time.perf_counter_ns() - self.t0

    def row0(self, norm_f: float) -> None:
        self.trace.append(
            IterationRecord(0, norm_f, None, None, None, None, None, self.wall())
        )

    def row(self, k: int, norm_f: float, step_norm: float, step_or_delta: float,
            rho: Optional[float], accepted: bool, dm: Optional[float],
            flag: str = "") -> None:
        self.trace.append(
            IterationRecord(k, norm_f, step_norm, step_or_delta, rho, accepted,
                            dm, self.wall(), flag)
        )

    def record_point(self, z: np.ndarray) -> None:
        self.points.append(z.copy())

    def finish(self, z: np.ndarray, status: str, norm_f: float,
               message: str = "") -> SolveResult:
        return SolveResult(
            z=z,
            status=status,
            iterations=len(self.trace) - 1,
            norm_f=norm_f,
            trace=self.trace,
            message=message,
            n_fallbacks=self.n_fallbacks,
            n_skipped_updates=self.n_skipped,
            n_underflow_steps=self.n_underflow,
            points=self.points,
        )


def _invert_updated(h: np.ndarray, b: np.ndarray, b_new: np.ndarray,
                    pair: SecantPair, dims: SplitDims, beta: float,
                    run: _Run) -> np.ndarray:
    """Low-rank inverse update with dense fallback on breakdown."""
    try:
        return jsymm_inverse_update(h, b, pair, dims, beta=beta)
    except UpdateBreakdownError:
        run.n_fallbacks += 1
        try:
            return np.linalg.inv(b_new)
        except np.linalg.LinAlgError as exc:
            raise SingularUpdateError("updated estimate is singular") from exc


def _assert_update_invariants(b_new: np.ndarray, h_new: np.ndarray,
                              pair: SecantPair, dims: SplitDims) -> None:
    scale_b = 1.0 + np.abs(b_new).max()
    secant = np.abs(b_new @ pair.s - pair.y).max()
    assert secant <= 1e-10 * scale_b * (1.0 + np.linalg.norm(pair.y)), \
        f"secant residual {secant:.3e}"
    sym = jsymmetry_residual(b_new, dims)
    assert sym <= 1e-10 * scale_b, f"J-symmetry residual {sym:.3e}"
    k = dims.total
    pairing = np.abs(h_new @ b_new - np.eye(k)).max()
    assert pairing <= 1e-6 * scale_b * (1.0 + np.abs(h_new).max()), \
        f"inverse pairing residual {pairing:.3e}"


def _feasible_stepsize(problem: MinimaxProblem, z: np.ndarray, step: np.ndarray,
                       t: float) -> tuple[float, bool]:
    """Halve t until z + t*step is in-domain; False if the cap is exhausted."""
    for _ in range(MAX_DOMAIN_HALVINGS + 1):
        if problem.domain_check(z + t * step):
            return t, True
        t *= 0.5
    return t, False


def _fraction_to_boundary(problem: MinimaxProblem, z: np.ndarray,
                          step: np.ndarray, t: float) -> float:
    """Cap t so coordinates constrained positive keep a 1% margin."""
    mask = problem.positive_mask
    if mask is None:
        return t
    zb = z[mask]
    sb = step[mask]
    shrinking = sb < 0.0
    if not np.any(shrinking):
        return t
    t_max = float(np.min(zb[shrinking] / -sb[shrinking]))
    return min(t, BOUNDARY_FRACTION * t_max)


def _secant_driver(problem: MinimaxProblem, z0, h0: np.ndarray, cfg: SolverConfig,
                   *, broyden: bool, default_schedule: Schedule) -> SolveResult:
    """Common loop of solve_jsymm and solve_broyden."""
    dims = problem.dims
    z = _as_vector(z0)
    h = np.array(h0, dtype=float)
    if h.shape != (dims.total, dims.total):
        raise ValueError("initial inverse has the wrong shape")
    b = np.linalg.inv(h)
    schedule = as_schedule(cfg.stepsize, default_schedule)
    strict = strict_checks()
    jac_star = _jac_at_saddle(problem)

    run = _Run(problem, z)
    fz = problem.eval_f(z)
    nf = float(np.linalg.norm(fz))
    run.row0(nf)

    k = 0
    while True:
        if nf <= cfg.tol_f:
            return run.finish(z, "converged", nf)
        if k >= cfg.max_iters:
            return run.finish(z, "max_iters", nf)
        k += 1

        t = resolve_stepsize(schedule, nf)
        direction = -(h @ fz)
        t, ok = _feasible_stepsize(problem, z, direction, t)
        if not ok:
            return run.finish(z, "aborted", nf,
                              "step leaves the domain after 50 halvings")
        s = t * direction
        if np.linalg.norm(s) <= eps_step(z):
            return run.finish(z, "stalled", nf, "step norm below threshold")

        z_new = z + s
        f_new = problem.eval_f(z_new)
        y = f_new - fz
        pair = SecantPair(s, y)
        dm = dennis_more_ratio(b, jac_star, s) if jac_star is not None else None

        flag = ""
        if broyden:
            try:
                h_new = broyden_inverse_update(h, pair)
                b_new = broyden_update(b, pair)
            except UpdateBreakdownError:
                run.n_skipped += 1
                flag = "skipped-update"
                h_new, b_new = h, b
        else:
            b_new = jsymm_update(b, pair, dims)
            try:
                h_new = _invert_updated(h, b, b_new, pair, dims, 1.0, run)
            except SingularUpdateError as exc:
                return run.finish(z, "aborted", nf, str(exc))
            if strict:
                _assert_update_invariants(b_new, h_new, pair, dims)

        z, fz, nf = z_new, f_new, float(np.linalg.norm(f_new))
        b, h = b_new, h_new
        run.record_point(z)
        run.row(k, nf, float(np.linalg.norm(s)), t, None, True, dm, flag)


def solve_jsymm(problem: MinimaxProblem, z0, h0: np.ndarray,
                cfg: SolverConfig) -> SolveResult:
    """Fixed-stepsize J-symmetric quasi-Newton iteration.

    Each iteration takes s = -H F(z), moves z by t*s with t from the
    stepsize schedule (t = 1 gives the plain unit-step method), and updates
    the estimate pair with the least-change J-symmetric secant update.
    Steps that would leave the problem domain are halved up to 50 times.
    """
    return _secant_driver(problem, z0, h0, cfg, broyden=False,
                          default_schedule=DEFAULT_SCHEDULE)


def solve_broyden(problem: MinimaxProblem, z0, h0: np.ndarray,
                  cfg: SolverConfig) -> SolveResult:
    """Broyden baseline: same loop as ``solve_jsymm`` with the rank-1 update.

    The inverse form divides by s^T H y, which can nearly vanish; such
    iterations keep the previous estimate and are flagged in the trace.
    """
    return _secant_driver(problem, z0, h0, cfg, broyden=True,
                          default_schedule=DEFAULT_SCHEDULE)


def solve_jsymm_ls(problem: MinimaxProblem, z0, h0: np.ndarray,
                   cfg: SolverConfig) -> SolveResult:
    """Backtracking J-symmetric quasi-Newton iteration.

    Starting from t = 1 (capped by a fraction-to-boundary rule on problems
    with positivity constraints), t is halved until

        ||F(z)|| - ||F(z + t s)|| >= c1 ||F(z)||.

    If t underflows below 2^-30 the smallest step is taken anyway and the
    record flagged; the update always uses the step actually taken.
    """
    dims = problem.dims
    z = _as_vector(z0)
    h = np.array(h0, dtype=float)
    if h.shape != (dims.total, dims.total):
        raise ValueError("initial inverse has the wrong shape")
    b = np.linalg.inv(h)
    strict = strict_checks()
    jac_star = _jac_at_saddle(problem)

    run = _Run(problem, z)
    fz = problem.eval_f(z)
    nf = float(np.linalg.norm(fz))
    run.row0(nf)

    k = 0
    while True:
        if nf <= cfg.tol_f:
            return run.finish(z, "converged", nf)
        if k >= cfg.max_iters:
            return run.finish(z, "max_iters", nf)
        k += 1

        direction = -(h @ fz)
        if np.linalg.norm(direction) <= eps_step(z):
            return run.finish(z, "stalled", nf, "search direction vanished")

        t = _fraction_to_boundary(problem, z, direction, 1.0)
        underflow = False
        while True:
            z_trial = z + t * direction
            f_trial = None
            if problem.domain_check(z_trial):
                f_trial = problem.eval_f(z_trial)
                if nf - float(np.linalg.norm(f_trial)) >= cfg.c1 * nf:
                    break
            if t <= T_MIN:
                underflow = True
                if f_trial is None:
                    return run.finish(z, "aborted", nf,
                                      "no feasible line-search step above t_min")
                break
            t = max(0.5 * t, T_MIN)
        if underflow:
            run.n_underflow += 1

        s = t * direction
        if np.linalg.norm(s) <= eps_step(z):
            return run.finish(z, "stalled", nf, "accepted step below threshold")
        y = f_trial - fz
        pair = SecantPair(s, y)
        dm = dennis_more_ratio(b, jac_star, s) if jac_star is not None else None

        b_new = jsymm_update(b, pair, dims)
        try:
            h_new = _invert_updated(h, b, b_new, pair, dims, 1.0, run)
        except SingularUpdateError as exc:
            return run.finish(z, "aborted", nf, str(exc))
        if strict:
            _assert_update_invariants(b_new, h_new, pair, dims)

        z, fz, nf = z_trial, f_trial, float(np.linalg.norm(f_trial))
        b, h = b_new, h_new
        run.record_point(z)
        run.row(k, nf, float(np.linalg.norm(s)), t, None, True, dm,
                "underflow" if underflow else "")


def quasi_newton_point(b_est: JacobianEstimate, g: np.ndarray) -> np.ndarray:
    """Unconstrained minimizer -H H^T g of the quadratic model."""
    p = -b_est.h @ (b_est.h.T @ g)
    if not np.all(np.isfinite(p)):
        raise SingularUpdateError("estimate too ill-conditioned for a model step")
    return p


def cauchy_point(b_est: JacobianEstimate, g: np.ndarray, delta: float) -> np.ndarray:
    """Model minimizer along -g inside the radius:

        p = -min{||g||^2 / (g^T B^T B g), delta / ||g||} g
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    ng = float(np.linalg.norm(g))
    if ng == 0.0:
        return np.zeros_like(g)
    bg = b_est.b @ g
    curvature = float(bg @ bg)
    tau_boundary = delta / ng
    tau = min(ng**2 / curvature, tau_boundary) if curvature > 0.0 else tau_boundary
    return -tau * g


def dogleg_point(p_c: np.ndarray, p_b: np.ndarray, delta: float) -> np.ndarray:
    """Boundary point on the segment from the Cauchy point to the model minimizer.

    Requires ||p_c|| < delta < ||p_b||; returns p_c + alpha d with
    d = p_b - p_c and alpha the positive root of ||p_c + alpha d||^2 = delta^2.
    """
    norm_c = float(np.linalg.norm(p_c))
    norm_b = float(np.linalg.norm(p_b))
    if not norm_c < delta < norm_b:
        raise ValueError(
            f"dogleg needs ||p_c|| < delta < ||p_b||, got {norm_c:.3e}, {delta:.3e}, {norm_b:.3e}"
        )
    d = p_b - p_c
    a = float(d @ d)
    b2 = 2.0 * float(p_c @ d)
    c = norm_c**2 - delta**2  # negative by the precondition
    disc = math.sqrt(b2 * b2 - 4.0 * a * c)
    alpha = -2.0 * c / (b2 + disc)  # positive root, cancellation-free
    return p_c + alpha * d


def solve_jsymm_tr(problem: MinimaxProblem, z0, b0: np.ndarray,
                   cfg: TrustRegionConfig) -> SolveResult:
    """Dogleg trust-region iteration on the merit 0.5 ||F(z)||^2.

    The model at z is m(s) = 0.5||F||^2 + g^T s + 0.5 ||B s||^2 with the
    true gradient g = dF(z)^T F(z) and the current J-symmetric estimate B.
    The step is the model minimizer if it fits in the radius, otherwise the
    Cauchy point when it reaches the boundary, otherwise the dogleg point.
    The radius halves when rho <= 0.5 and otherwise doubles up to r0; the
    step is accepted when rho >= zeta.  B is updated with the trial pair
    even on rejected steps, using a scaled update whose factor beta is drawn
    uniformly from [1 - beta_hat, 1 + beta_hat] and redrawn (up to 20 times)
    whenever the updated pair looks numerically singular.

    Trial points outside the problem domain score rho = -inf: the step is
    rejected, the radius halves, and the update is skipped for that
    iteration since F is unavailable at the trial point.
    """
    dims = problem.dims
    z = _as_vector(z0)
    b = np.array(b0, dtype=float)
    if b.shape != (dims.total, dims.total):
        raise ValueError("initial estimate has the wrong shape")
    try:
        h = np.linalg.inv(b)
    except np.linalg.LinAlgError as exc:
        raise SingularUpdateError("initial estimate is singular") from exc
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    strict = strict_checks()
    jac_star = _jac_at_saddle(problem)

    run = _Run(problem, z)
    fz = problem.eval_f(z)
    nf = float(np.linalg.norm(fz))
    run.row0(nf)
    delta = cfg.delta0

    k = 0
    while True:
        if nf <= cfg.tol_f:
            return run.finish(z, "converged", nf)
        if k >= cfg.max_iters:
            return run.finish(z, "max_iters", nf)
        k += 1

        est = JacobianEstimate(b=b, h=h, dims=dims)
        g = problem.eval_jacobian(z).T @ fz
        p_b = quasi_newton_point(est, g)
        if float(np.linalg.norm(p_b)) <= delta:
            s = p_b
        else:
            p_c = cauchy_point(est, g, delta)
            if float(np.linalg.norm(p_c)) >= delta * (1.0 - 1e-12):
                s = p_c
            else:
                s = dogleg_point(p_c, p_b, delta)

        m0 = 0.5 * nf * nf
        bs = b @ s
        ms = m0 + float(g @ s) + 0.5 * float(bs @ bs)
        pred = m0 - ms
        if not pred > 0.0:
            return run.finish(z, "stalled", nf,
                              f"model predicts no decrease (pred={pred:.3e})")
        delta_used = delta
        if strict:
            assert float(np.linalg.norm(s)) <= delta_used * (1.0 + 1e-12), \
                "step left the trust region"
            report = sufficient_decrease_check(
                m0, ms, float(np.linalg.norm(g)), delta_used,
                float(np.linalg.norm(b, 2)))
            assert report.passed, \
                f"model decrease bound violated by {report.max_abs_error:.3e}"

        z_trial = z + s
        if not problem.domain_check(z_trial):
            # F is unavailable at the trial point: reject, shrink, no update.
            delta = 0.5 * delta
            run.n_skipped += 1
            run.row(k, nf, float(np.linalg.norm(s)), delta_used, -math.inf,
                    False, None, "domain-reject")
            continue

        f_trial = problem.eval_f(z_trial)
        nf_trial = float(np.linalg.norm(f_trial))
        rho = (m0 - 0.5 * nf_trial * nf_trial) / pred
        delta = 0.5 * delta if rho <= 0.5 else min(2.0 * delta, cfg.r0)
        accepted = rho >= cfg.zeta

        dm = None
        if np.linalg.norm(s) > eps_step(z):
            pair = SecantPair(s, f_trial - fz)
            if jac_star is not None:
                dm = dennis_more_ratio(b, jac_star, s)
            b_new = h_new = None
            for _ in range(MAX_RESAMPLES):
                beta = float(rng.uniform(1.0 - cfg.beta_hat, 1.0 + cfg.beta_hat))
                cand_b = jsymm_update_scaled(b, pair, beta, dims)
                try:
                    cand_h = jsymm_inverse_update(h, b, pair, dims, beta=beta)
                except UpdateBreakdownError:
                    run.n_fallbacks += 1
                    try:
                        cand_h = np.linalg.inv(cand_b)
                    except np.linalg.LinAlgError:
                        continue
                if not (np.all(np.isfinite(cand_h)) and np.all(np.isfinite(cand_b))):
                    continue
                rcond = 1.0 / (np.linalg.norm(cand_b, 1) * np.linalg.norm(cand_h, 1))
                if rcond >= RCOND_MIN:
                    b_new, h_new = cand_b, cand_h
                    break
            if b_new is None:
                return run.finish(z, "aborted", nf,
                                  f"no nonsingular update in {MAX_RESAMPLES} draws")
            if strict:
                sym = jsymmetry_residual(b_new, dims)
                assert sym <= 1e-10 * (1.0 + np.abs(b_new).max()), \
                    f"J-symmetry residual {sym:.3e}"
            b, h = b_new, h_new

        if accepted:
            if strict:
                assert nf_trial <= nf * (1.0 + 1e-12), "merit increased"
            z, fz, nf = z_trial, f_trial, nf_trial
            run.record_point(z)
        run.row(k, nf, float(np.linalg.norm(s)), delta_used, rho, accepted, dm)


def solve_egm(problem: MinimaxProblem, z0, cfg: SolverConfig) -> SolveResult:
    """Extragradient baseline: z' = z - t F(z), then z+ = z - t F(z').

    Two field evaluations per iteration; t comes from the stepsize schedule.
    If either point leaves the domain, t is halved for the iteration (up to
    50 times).
    """
    z = _as_vector(z0)
    run = _Run(problem, z)
    fz = problem.eval_f(z)
    nf = float(np.linalg.norm(fz))
    run.row0(nf)
    schedule = as_schedule(cfg.stepsize, DEFAULT_SCHEDULE)

    k = 0
    while True:
        if nf <= cfg.tol_f:
            return run.finish(z, "converged", nf)
        if k >= cfg.max_iters:
            return run.finish(z, "max_iters", nf)
        k += 1

        t = resolve_stepsize(schedule, nf)
        z_new = None
        for _ in range(MAX_DOMAIN_HALVINGS + 1):
            z_half = z - t * fz
            if not problem.domain_check(z_half):
                t *= 0.5
                continue
            candidate = z - t * problem.eval_f(z_half)
            if not problem.domain_check(candidate):
                t *= 0.5
                continue
            z_new = candidate
            break
        if z_new is None:
            return run.finish(z, "aborted", nf,
                              "extragradient step leaves the domain after 50 halvings")

        step_norm = float(np.linalg.norm(z_new - z))
        z = z_new
        fz = problem.eval_f(z)
        nf = float(np.linalg.norm(fz))
        run.record_point(z)
        run.row(k, nf, step_norm, t, None, True, None)
