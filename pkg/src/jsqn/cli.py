"""Experiment runner.

Two subcommands:

* ``run``   - solve one configured problem/solver pair and write a trace
              file (CSV or JSON), optionally rendering a figure next to it.
* ``suite`` - run every JSON config in a directory and aggregate a summary
              table (CSV + aligned text) plus a convergence overlay figure.

Exit codes: 0 when the run converged, 2 when it stopped at the iteration
cap (or stalled), 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import SingularUpdateError
from .problems import (
    MinimaxProblem,
    analytic_center_start,
    analytic_center_problem,
    bilinear_problem,
    generate_random_bilinear,
    generate_random_polytope,
    generate_random_quadratic,
    load_matrix_market,
    quadratic_problem,
    quartic_problem,
    QUARTIC_GRID_STARTS,
)
from .solvers import (
    SolveResult,
    SolverConfig,
    TrustRegionConfig,
    as_schedule,
    solve_broyden,
    solve_egm,
    solve_jsymm,
    solve_jsymm_ls,
    solve_jsymm_tr,
)

PROBLEMS = ("quadratic", "bilinear", "analytic-center", "quartic")
SOLVERS = ("egm", "broyden", "jsymm", "jsymm-ls", "jsymm-tr")
EXIT_BY_STATUS = {"converged": 0, "max_iters": 2, "stalled": 2, "aborted": 1}
TRACE_COLUMNS = (
    "iter", "norm_f", "step_norm", "stepsize_or_delta",
    "rho", "accepted", "dm_ratio", "wall_ns",
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """Resolved settings of one experiment run."""

    problem: str
    solver: str
    alpha: float = 1.0
    a_scalar: float = 1.0
    matrix: Optional[str] = None
    b: Optional[str] = None
    n: int = 25
    m: Optional[int] = None
    tol: float = 1e-4
    max_iters: int = 2000
    seed: int = 0
    stepsize: Optional[float] = None
    schedule: Optional[str] = None
    c1: float = 0.25
    r0: float = 1.0
    delta0: float = 1.0
    zeta: float = 1e-4
    beta_hat: float = 0.9
    z0: str = "auto"
    force_tr: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem: unknown kind {self.problem!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver: unknown kind {self.solver!r}")
        if self.stepsize is not None and self.schedule is not None:
            raise ConfigError("stepsize: give either --stepsize or --schedule, not both")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = sorted(set(raw) - known)
        if bad:
            raise ConfigError(f"{bad[0]}: unknown config field")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def parse_schedule(text: str):
    """Parse "inf:0.01,1.0:1.0" into ((inf, 0.01), (1.0, 1.0))."""
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            thr_text, st_text = chunk.split(":")
            thr = math.inf if thr_text.strip() in ("inf", "Inf", "INF") else float(thr_text)
            pairs.append((thr, float(st_text)))
        except ValueError:
            raise ConfigError(f"schedule: cannot parse entry {chunk!r}") from None
    try:
        return as_schedule(pairs)
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from None


def build_problem(cfg: ExperimentConfig) -> MinimaxProblem:
    m = cfg.m if cfg.m is not None else cfg.n
    if cfg.problem == "quadratic":
        spec = generate_random_quadratic(cfg.n, m, cfg.alpha, cfg.seed)
        return quadratic_problem(spec)
    if cfg.problem == "bilinear":
        if cfg.matrix is not None:
            a = load_matrix_market(cfg.matrix)
        else:
            a = generate_random_bilinear(cfg.n, m, cfg.seed)
        return bilinear_problem(a)
    if cfg.problem == "analytic-center":
        if (cfg.matrix is None) != (cfg.b is None):
            raise ConfigError("matrix: analytic-center needs both --matrix and --b, or neither")
        if cfg.matrix is not None:
            a = load_matrix_market(cfg.matrix)
            rhs = load_matrix_market(cfg.b).reshape(-1)
        else:
            a, rhs = generate_random_polytope(cfg.n, m, cfg.seed)
        return analytic_center_problem(a, rhs)
    return quartic_problem(cfg.a_scalar)


def _unit_vector(k: int, seed: int, salt: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, salt])))
    v = gen.normal(size=k)
    return v / np.linalg.norm(v)


def resolve_z0(cfg: ExperimentConfig, problem: MinimaxProblem) -> np.ndarray:
    """Turn a z0 spec string into a start vector.

    Accepted forms: "auto", "zeros", "saddle", "near-saddle:R",
    "random-unit", "preset:quartic-grid:I", "preset:ac-default", or
    comma-separated floats.
    """
    spec = cfg.z0.strip()
    k = problem.dims.total
    if spec == "auto":
        if cfg.problem == "analytic-center":
            spec = "preset:ac-default"
        elif cfg.problem == "quartic":
            spec = "preset:quartic-grid:7"
        else:
            spec = "random-unit"
    if spec == "zeros":
        return np.zeros(k)
    if spec == "random-unit":
        return _unit_vector(k, cfg.seed, 101)
    if spec in ("saddle",) or spec.startswith("near-saddle"):
        if problem.known_saddle is None:
            raise ConfigError(f"z0: {spec!r} needs a problem with a known saddle")
        z = problem.known_saddle.values.copy()
        if spec == "saddle":
            return z
        try:
            radius = float(spec.split(":", 1)[1])
        except (IndexError, ValueError):
            raise ConfigError("z0: expected near-saddle:<radius>") from None
        return z + radius * _unit_vector(k, cfg.seed, 101)
    if spec.startswith("preset:quartic-grid:"):
        if cfg.problem != "quartic":
            raise ConfigError("z0: quartic-grid presets apply to the quartic problem")
        try:
            idx = int(spec.rsplit(":", 1)[1])
            start = QUARTIC_GRID_STARTS[idx]
        except (ValueError, IndexError):
            raise ConfigError(
                f"z0: quartic-grid index must be 0..{len(QUARTIC_GRID_STARTS) - 1}"
            ) from None
        return np.array(start)
    if spec == "preset:ac-default":
        if cfg.problem != "analytic-center":
            raise ConfigError("z0: ac-default applies to the analytic-center problem")
        m = cfg.m if cfg.m is not None else cfg.n
        if cfg.matrix is not None:
            a = load_matrix_market(cfg.matrix)
            rhs = load_matrix_market(cfg.b).reshape(-1)
        else:
            a, rhs = generate_random_polytope(cfg.n, m, cfg.seed)
        return analytic_center_start(a, rhs)
    try:
        values = np.array([float(tok) for tok in spec.split(",")])
    except ValueError:
        raise ConfigError(f"z0: cannot parse {spec!r}") from None
    if values.size != k:
        raise ConfigError(f"z0: expected {k} coordinates, got {values.size}")
    return values


def execute(cfg: ExperimentConfig) -> tuple[MinimaxProblem, SolveResult]:
    """Build the problem, resolve the start and run the configured solver."""
    problem = build_problem(cfg)
    z0 = resolve_z0(cfg, problem)
    k = problem.dims.total

    if cfg.solver == "jsymm-tr":
        if problem.positive_mask is not None and not cfg.force_tr:
            raise ConfigError(
                "solver: trust region is disabled for domain-constrained problems; "
                "pass --force-tr to override"
            )
        tr_cfg = TrustRegionConfig(
            r0=cfg.r0, delta0=cfg.delta0, beta_hat=cfg.beta_hat, zeta=cfg.zeta,
            seed=cfg.seed, tol_f=cfg.tol, max_iters=cfg.max_iters,
        )
        return problem, solve_jsymm_tr(problem, z0, np.eye(k), tr_cfg)

    stepsize = cfg.stepsize if cfg.schedule is None else parse_schedule(cfg.schedule)
    run_cfg = SolverConfig(
        tol_f=cfg.tol, max_iters=cfg.max_iters, stepsize=stepsize,
        c1=cfg.c1, seed=cfg.seed,
    )
    if cfg.solver == "egm":
        return problem, solve_egm(problem, z0, run_cfg)
    if cfg.solver == "broyden":
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 202])))
        h0 = np.diag(gen.uniform(0.0, 1.0, size=k))
        return problem, solve_broyden(problem, z0, h0, run_cfg)
    if cfg.solver == "jsymm":
        return problem, solve_jsymm(problem, z0, np.eye(k), run_cfg)
    return problem, solve_jsymm_ls(problem, z0, np.eye(k), run_cfg)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain repr even for numpy scalars
    return str(value)


def _record_cells(rec) -> list[str]:
    return [
        str(rec.iter), _cell(rec.norm_f), _cell(rec.step_norm),
        _cell(rec.stepsize_or_delta), _cell(rec.rho), _cell(rec.accepted),
        _cell(rec.dm_ratio), str(rec.wall_ns),
    ]


def write_trace(path, cfg: ExperimentConfig, problem: MinimaxProblem,
                result: SolveResult, fmt: str) -> None:
    """Persist the run trace.

    The header carries the config echo, the seed and the artifact version;
    the timestamp sits in its own header field so reproducibility checks can
    ignore exactly that field (and the wall_ns column).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    echo = {key: val for key, val in asdict(cfg).items() if val is not None}
    echo["problem_name"] = problem.name
    echo["status"] = result.status
    stamp = datetime.now(timezone.utc).isoformat()
    if fmt == "json":
        payload = {
            "config": echo,
            "seed": cfg.seed,
            "version": f"jsqn {__version__}",
            "timestamp": stamp,
            "records": [
                {col: getattr(rec, col) for col in TRACE_COLUMNS}
                for rec in result.trace
            ],
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                                   allow_nan=True) + "\n", encoding="utf-8")
        return
    lines = [
        f"# config: {json.dumps(echo, sort_keys=True)}",
        f"# seed: {cfg.seed}",
        f"# version: jsqn {__version__}",
        f"# timestamp: {stamp}",
        ",".join(TRACE_COLUMNS),
    ]
    lines.extend(",".join(_record_cells(rec)) for rec in result.trace)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig(
        problem=args.problem, solver=args.solver, alpha=args.alpha,
        a_scalar=args.a_scalar, matrix=args.matrix, b=args.b, n=args.n,
        m=args.m, tol=args.tol, max_iters=args.max_iters, seed=args.seed,
        stepsize=args.stepsize, schedule=args.schedule, c1=args.c1,
        r0=args.r0, delta0=args.delta0, zeta=args.zeta,
        beta_hat=args.beta_hat, z0=args.z0, force_tr=args.force_tr,
    )
    problem, result = execute(cfg)
    write_trace(args.out, cfg, problem, result, args.format)
    if args.fig:
        from .plotting import save_run_figure

        save_run_figure(args.fig, result, problem,
                        title=f"{problem.name} / {cfg.solver}")
    print(
        f"{problem.name} {cfg.solver}: {result.status} after "
        f"{result.iterations} iterations, |F| = {result.norm_f:.3e}"
        + (f" ({result.message})" if result.message else "")
    )
    return EXIT_BY_STATUS[result.status]


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(row[j]) for row in rows) for j in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip()
        for row in rows
    )


def cmd_suite(args: argparse.Namespace) -> int:
    cfg_dir = Path(args.dir)
    if not cfg_dir.is_dir():
        print(f"error: {cfg_dir} is not a directory", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    trace_dir = out.parent / (out.stem + "_traces")

    header = ["label", "problem", "solver", "iterations", "final_norm_f", "reason"]
    rows: list[list[str]] = []
    curves = []
    for cfg_path in sorted(cfg_dir.glob("*.json")):
        label = cfg_path.stem
        try:
            raw = json.loads(cfg_path.read_text(encoding="utf-8"))
            cfg = ExperimentConfig.from_dict(raw)
            if not cfg.label:
                cfg = replace(cfg, label=label)
            problem, result = execute(cfg)
        except (ConfigError, SingularUpdateError, ValueError, OSError,
                json.JSONDecodeError) as exc:
            rows.append([label, "?", "?", "-", "", f"error: {exc}"])
            continue
        converged = result.status == "converged"
        rows.append([
            cfg.label, problem.name, cfg.solver,
            str(result.iterations) if converged else "-",
            repr(result.norm_f),
            "" if converged else (result.message or result.status),
        ])
        write_trace(trace_dir / f"{cfg.label}.csv", cfg, problem, result, "csv")
        curves.append((f"{cfg.label} ({cfg.solver})",
                       [rec.norm_f for rec in result.trace]))

    out.write_text("\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n",
                   encoding="utf-8")
    out.with_suffix(".txt").write_text(_align([header] + rows) + "\n",
                                       encoding="utf-8")
    from .plotting import save_suite_figure

    save_suite_figure(out.with_suffix(".png"), curves)
    print(f"suite: {len(rows)} runs -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jsqn",
        description="Quasi-Newton experiments on smooth minimax problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its trace")
    run.add_argument("--problem", required=True, choices=PROBLEMS)
    run.add_argument("--alpha", type=float, default=1.0,
                     help="curvature scale of the generated quadratic")
    run.add_argument("--a-scalar", type=float, default=1.0, dest="a_scalar",
                     help="coupling strength of the quartic problem")
    run.add_argument("--matrix", help="Matrix Market file for the coupling/constraint matrix")
    run.add_argument("--b", help="Matrix Market file with the right-hand side")
    run.add_argument("--n", type=int, default=25, help="primal dimension of generated instances")
    run.add_argument("--m", type=int, default=None,
                     help="dual dimension of generated instances (default: n)")
    run.add_argument("--solver", required=True, choices=SOLVERS)
    run.add_argument("--tol", type=float, default=1e-4)
    run.add_argument("--max-iters", type=int, default=2000, dest="max_iters")
    run.add_argument("--seed", type=int, default=0)
    step = run.add_mutually_exclusive_group()
    step.add_argument("--stepsize", type=float, default=None)
    step.add_argument("--schedule", default=None,
                      help='stepsize schedule such as "inf:0.01,1.0:1.0"')
    run.add_argument("--c1", type=float, default=0.25, help="line-search decrease fraction")
    run.add_argument("--r0", type=float, default=1.0, help="maximum trust-region radius")
    run.add_argument("--delta0", type=float, default=1.0, help="initial trust-region radius")
    run.add_argument("--zeta", type=float, default=1e-4, help="trust-region acceptance threshold")
    run.add_argument("--beta-hat", type=float, default=0.9, dest="beta_hat",
                     help="half-width of the update scaling interval")
    run.add_argument("--z0", default="auto",
                     help="start: auto|zeros|saddle|near-saddle:R|random-unit|"
                          "preset:quartic-grid:I|preset:ac-default|x1,x2,...")
    run.add_argument("--force-tr", action="store_true", dest="force_tr",
                     help="allow the trust region on domain-constrained problems")
    run.add_argument("--out", required=True, help="trace output path")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--fig", default=None, help="also render a figure to this path")
    run.set_defaults(func=cmd_run)

    suite = sub.add_parser("suite", help="run every JSON config in a directory")
    suite.add_argument("--dir", required=True, help="directory of experiment configs")
    suite.add_argument("--out", required=True, help="summary CSV path")
    suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularUpdateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
