"""Quasi-Newton solvers for smooth minimax problems.

The package maintains a structured (J-symmetric) secant estimate of the
Jacobian of F(z) = (grad_x L, -grad_w L) and drives it with fixed-step,
line-search and trust-region iterations; extragradient and Broyden serve
as baselines.  See ``jsqn.cli`` for the experiment runner.
"""

__version__ = "0.1.0"

from .core import (
    JacobianEstimate,
    PrimalDualPoint,
    SecantPair,
    SingularUpdateError,
    SplitDims,
    UpdateBreakdownError,
    ZeroStepError,
    apply_j,
    broyden_inverse_update,
    broyden_update,
    jsymm_inverse_update,
    jsymm_update,
    jsymm_update_scaled,
    psb_update,
)
from .problems import (
    DomainError,
    MinimaxProblem,
    QuadraticSpec,
    analytic_center_problem,
    bilinear_problem,
    generate_random_bilinear,
    generate_random_polytope,
    generate_random_quadratic,
    load_matrix_market,
    quadratic_problem,
    quartic_problem,
    save_matrix_market,
)
from .solvers import (
    IterationRecord,
    SolveResult,
    SolverConfig,
    TrustRegionConfig,
    cauchy_point,
    dogleg_point,
    quasi_newton_point,
    solve_broyden,
    solve_egm,
    solve_jsymm,
    solve_jsymm_ls,
    solve_jsymm_tr,
)
from .verify import (
    OracleReport,
    dennis_more_ratio,
    finite_difference_jacobian,
    kkt_least_change_oracle,
    sufficient_decrease_check,
)

__all__ = [
    "__version__",
    "SplitDims",
    "PrimalDualPoint",
    "JacobianEstimate",
    "SecantPair",
    "ZeroStepError",
    "UpdateBreakdownError",
    "SingularUpdateError",
    "apply_j",
    "jsymm_update",
    "jsymm_update_scaled",
    "jsymm_inverse_update",
    "psb_update",
    "broyden_update",
    "broyden_inverse_update",
    "DomainError",
    "MinimaxProblem",
    "QuadraticSpec",
    "quadratic_problem",
    "generate_random_quadratic",
    "bilinear_problem",
    "generate_random_bilinear",
    "analytic_center_problem",
    "generate_random_polytope",
    "quartic_problem",
    "load_matrix_market",
    "save_matrix_market",
    "SolverConfig",
    "TrustRegionConfig",
    "IterationRecord",
    "SolveResult",
    "solve_jsymm",
    "solve_jsymm_ls",
    "solve_jsymm_tr",
    "solve_egm",
    "solve_broyden",
    "quasi_newton_point",
    "cauchy_point",
    "dogleg_point",
    "OracleReport",
    "kkt_least_change_oracle",
    "finite_difference_jacobian",
    "dennis_more_ratio",
    "sufficient_decrease_check",
]
