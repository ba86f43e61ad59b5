"""Benchmark minimax problems behind a uniform first-order oracle.

Each factory returns a ``MinimaxProblem`` exposing the field
F(z) = (grad_x L, -grad_w L), its dense Jacobian, a domain predicate and,
when known, a saddle point.  Zeros of F are the first-order saddle points
of the underlying L(x, w); the Jacobian of F is J-symmetric everywhere.

Random instances use counter-based Philox streams seeded through
``numpy.random.SeedSequence`` so generation is reproducible bitwise across
platforms.  A small Matrix Market reader/writer handles user-supplied
matrices (e.g. LP constraint blocks for bilinear games).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import PrimalDualPoint, SplitDims

__all__ = [
    "DomainError",
    "MinimaxProblem",
    "QuadraticSpec",
    "quadratic_problem",
    "generate_random_quadratic",
    "bilinear_problem",
    "generate_random_bilinear",
    "analytic_center_problem",
    "analytic_center_start",
    "generate_random_polytope",
    "quartic_problem",
    "QUARTIC_GRID_STARTS",
    "load_matrix_market",
    "save_matrix_market",
]


class DomainError(ValueError):
    """Evaluation requested outside the oracle's open domain."""


@dataclass(frozen=True)
class MinimaxProblem:
    """Oracle bundle for one saddle-point problem.

    Fields
    ------
    dims : primal/dual split of z.
    eval_f : z -> F(z).
    eval_jacobian : z -> dense (n+m) x (n+m) Jacobian of F.
    domain_check : z -> True iff z lies in the open domain.
    known_saddle : a zero of F when one is known, else None.
    positive_mask : boolean mask of coordinates constrained positive (used
        by line searches for a fraction-to-boundary cap), or None.
    name : short identifier used in traces and tables.
    """

    dims: SplitDims
    eval_f: Callable[[np.ndarray], np.ndarray]
    eval_jacobian: Callable[[np.ndarray], np.ndarray]
    domain_check: Callable[[np.ndarray], bool] = field(default=lambda z: True)
    known_saddle: Optional[PrimalDualPoint] = None
    positive_mask: Optional[np.ndarray] = None
    name: str = ""


@dataclass(frozen=True)
class QuadraticSpec:
    """Data of a convex-concave quadratic L(x, w).

    ``d_matrix`` and ``c_matrix`` are the (already scaled) curvature blocks;
    ``alpha`` records the scale they were built with.
    """

    d_matrix: np.ndarray
    c_matrix: np.ndarray
    a_matrix: np.ndarray
    x_star: np.ndarray
    w_star: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        d = np.asarray(self.d_matrix, dtype=float)
        c = np.asarray(self.c_matrix, dtype=float)
        a = np.asarray(self.a_matrix, dtype=float)
        object.__setattr__(self, "d_matrix", d)
        object.__setattr__(self, "c_matrix", c)
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "x_star", np.asarray(self.x_star, dtype=float))
        object.__setattr__(self, "w_star", np.asarray(self.w_star, dtype=float))
        m, n = a.shape
        if d.shape != (n, n) or c.shape != (m, m):
            raise ValueError("block shapes inconsistent with coupling matrix")
        if self.x_star.shape != (n,) or self.w_star.shape != (m,):
            raise ValueError("saddle point shapes inconsistent")
        if np.abs(d - d.T).max() > 1e-12 * (1.0 + np.abs(d).max()):
            raise ValueError("d_matrix not symmetric")
        if np.abs(c - c.T).max() > 1e-12 * (1.0 + np.abs(c).max()):
            raise ValueError("c_matrix not symmetric")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")


def quadratic_problem(spec: QuadraticSpec) -> MinimaxProblem:
    """Convex-concave quadratic: F is affine with constant J-symmetric Jacobian."""
    d, c, a = spec.d_matrix, spec.c_matrix, spec.a_matrix
    m, n = a.shape
    dims = SplitDims(n, m)
    saddle = np.concatenate([spec.x_star, spec.w_star])
    jac = np.zeros((n + m, n + m))
    jac[:n, :n] = d
    jac[:n, n:] = a.T
    jac[n:, :n] = -a
    jac[n:, n:] = c

    def eval_f(z: np.ndarray) -> np.ndarray:
        return jac @ (np.asarray(z, dtype=float) - saddle)

    return MinimaxProblem(
        dims=dims,
        eval_f=eval_f,
        eval_jacobian=lambda z: jac.copy(),
        known_saddle=PrimalDualPoint(saddle, dims),
        name=f"quadratic(n={n},m={m},alpha={spec.alpha:g})",
    )


def _shifted_symmetric(gen: np.random.Generator, n: int, scale: float) -> np.ndarray:
    """Symmetrized Gaussian matrix shifted to have smallest eigenvalue 1."""
    s = gen.normal(0.0, scale, size=(n, n))
    s = 0.5 * (s + s.T)
    lam_min = np.linalg.eigvalsh(s)[0]
    return s + (abs(lam_min) + 1.0) * np.eye(n)


def generate_random_quadratic(n: int, m: int, alpha: float, seed: int) -> QuadraticSpec:
    """Random quadratic instance with N(0, 1/sqrt(n)) entries.

    The curvature blocks are symmetrized Gaussian matrices shifted so the
    smallest eigenvalue is 1, then scaled by alpha (alpha = 0 degenerates
    to a bilinear instance).  Separate Philox substreams drive each block,
    so instances are bitwise reproducible for a fixed seed.
    """
    if n != m:
        raise ValueError("generator uses square blocks (n == m)")
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    seq = np.random.SeedSequence(seed)
    kids = seq.spawn(5)
    gens = [np.random.Generator(np.random.Philox(k)) for k in kids]
    std = 1.0 / np.sqrt(n)
    a = gens[0].normal(0.0, std, size=(m, n))
    d = alpha * _shifted_symmetric(gens[1], n, std)
    c = alpha * _shifted_symmetric(gens[2], m, std)
    x_star = gens[3].normal(size=n)
    w_star = gens[4].normal(size=m)
    return QuadraticSpec(d, c, a, x_star, w_star, alpha)


def bilinear_problem(a_matrix: np.ndarray) -> MinimaxProblem:
    """Bilinear zero-sum game: F(x, y) = (A^T y, -A x)."""
    a = np.asarray(a_matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("coupling matrix must be a nonempty 2-d array")
    m, n = a.shape
    dims = SplitDims(n, m)
    jac = np.zeros((n + m, n + m))
    jac[:n, n:] = a.T
    jac[n:, :n] = -a

    def eval_f(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.concatenate([a.T @ z[n:], -(a @ z[:n])])

    return MinimaxProblem(
        dims=dims,
        eval_f=eval_f,
        eval_jacobian=lambda z: jac.copy(),
        known_saddle=PrimalDualPoint(np.zeros(n + m), dims),
        name=f"bilinear({m}x{n})",
    )


def generate_random_bilinear(n: int, m: int, seed: int) -> np.ndarray:
    """Dense Gaussian coupling matrix with N(0, 1/sqrt(n)) entries."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return gen.normal(0.0, 1.0 / np.sqrt(n), size=(m, n))


def analytic_center_problem(a_matrix: np.ndarray, b: np.ndarray) -> MinimaxProblem:
    """Analytic center of {x : Ax <= b} via dualized slack formulation.

    Variables are z = (x, y, w) with slacks y > 0 and multipliers w; the
    primal block is (x, y), the dual block is w.  The field is

        F(z) = (A^T w, -1/y + w, -(Ax - b + y))

    with elementwise 1/y, so the Jacobian's y-block is diag(1/y^2).
    """
    a = np.asarray(a_matrix, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2:
        raise ValueError("constraint matrix must be 2-d")
    m_ineq, n = a.shape
    if b.shape != (m_ineq,):
        raise ValueError("right-hand side length does not match constraint rows")
    dims = SplitDims(n + m_ineq, m_ineq)
    total = n + 2 * m_ineq
    mask = np.zeros(total, dtype=bool)
    mask[n : n + m_ineq] = True

    def split(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        return z[:n], z[n : n + m_ineq], z[n + m_ineq :]

    def domain_check(z: np.ndarray) -> bool:
        _, y, _ = split(z)
        return bool(np.all(y > 0.0))

    def eval_f(z: np.ndarray) -> np.ndarray:
        x, y, w = split(z)
        if not np.all(y > 0.0):
            raise DomainError("slack block must stay strictly positive")
        return np.concatenate([a.T @ w, -1.0 / y + w, -(a @ x - b + y)])

    def eval_jacobian(z: np.ndarray) -> np.ndarray:
        x, y, w = split(z)
        if not np.all(y > 0.0):
            raise DomainError("slack block must stay strictly positive")
        jac = np.zeros((total, total))
        jac[:n, n + m_ineq :] = a.T
        jac[n : n + m_ineq, n : n + m_ineq] = np.diag(1.0 / y**2)
        jac[n : n + m_ineq, n + m_ineq :] = np.eye(m_ineq)
        jac[n + m_ineq :, :n] = -a
        jac[n + m_ineq :, n : n + m_ineq] = -np.eye(m_ineq)
        return jac

    return MinimaxProblem(
        dims=dims,
        eval_f=eval_f,
        eval_jacobian=eval_jacobian,
        domain_check=domain_check,
        positive_mask=mask,
        name=f"analytic-center(n={n},m={m_ineq})",
    )


def analytic_center_start(a_matrix: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Interior default start x = 0, y = b, w = 1/b.

    Valid whenever the origin is strictly feasible (b > 0); the slack block
    then starts safely inside the domain.
    """
    a = np.asarray(a_matrix, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0.0):
        raise DomainError("default start needs b > 0 (origin strictly feasible)")
    return np.concatenate([np.zeros(a.shape[1]), b, 1.0 / b])


def generate_random_polytope(n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Random inequality system Ax <= b containing the origin strictly.

    Rows of A are unit Gaussian directions and b is uniform on [1, 2], so
    x = 0 satisfies every constraint with slack at least 1.
    """
    seq = np.random.SeedSequence(seed)
    g_a, g_b = (np.random.Generator(np.random.Philox(k)) for k in seq.spawn(2))
    a = g_a.normal(size=(m, n))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = g_b.uniform(1.0, 2.0, size=m)
    return a, b


def quartic_problem(a_scalar: float) -> MinimaxProblem:
    """Two-dimensional nonconvex-nonconcave double-well coupling.

        L(x, y) = (x^2 - 1)(x^2 - 9) + A x y - (y^2 - 1)(y^2 - 9)

    F(x, y) = (4x^3 - 20x + Ay, -Ax + 4y^3 - 20y) has multiple zeros; which
    one an iteration finds depends on the start.
    """
    a = float(a_scalar)
    dims = SplitDims(1, 1)

    def eval_f(z: np.ndarray) -> np.ndarray:
        x, y = np.asarray(z, dtype=float)
        return np.array([4.0 * x**3 - 20.0 * x + a * y, -a * x + 4.0 * y**3 - 20.0 * y])

    def eval_jacobian(z: np.ndarray) -> np.ndarray:
        x, y = np.asarray(z, dtype=float)
        return np.array([[12.0 * x**2 - 20.0, a], [-a, 12.0 * y**2 - 20.0]])

    return MinimaxProblem(
        dims=dims,
        eval_f=eval_f,
        eval_jacobian=eval_jacobian,
        name=f"quartic(A={a:g})",
    )


# Start grid used by the two-dimensional quartic experiments.
QUARTIC_GRID_STARTS: tuple[tuple[float, float], ...] = (
    (-4.0, -2.0),
    (-4.0, 0.0),
    (-4.0, 2.0),
    (-2.0, -4.0),
    (-2.0, 4.0),
    (0.0, -4.0),
    (0.0, 4.0),
    (2.0, -4.0),
    (2.0, 4.0),
    (4.0, -2.0),
    (4.0, 0.0),
    (4.0, 2.0),
)


def load_matrix_market(path) -> np.ndarray:
    """Read a real Matrix Market file (coordinate or array) densely.

    Duplicate coordinate entries are summed.  Complex and pattern fields are
    rejected; ``symmetric`` and ``skew-symmetric`` storage is expanded.
    Parse failures report the offending line number.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket" or header[1].lower() != "matrix":
        raise ValueError(f"{path}:1: not a Matrix Market matrix header")
    layout, field_kind, symmetry = (tok.lower() for tok in header[2:5])
    if field_kind not in ("real", "integer"):
        raise ValueError(f"{path}:1: unsupported field type {field_kind!r}")
    if layout not in ("coordinate", "array"):
        raise ValueError(f"{path}:1: unsupported layout {layout!r}")
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise ValueError(f"{path}:1: unsupported symmetry {symmetry!r}")

    body = [
        (lineno, line.strip())
        for lineno, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise ValueError(f"{path}: missing size line")
    size_lineno, size_line = body[0]
    sizes = size_line.split()

    def parse_int(tok: str, lineno: int) -> int:
        try:
            return int(tok)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad integer {tok!r}") from None

    def parse_real(tok: str, lineno: int) -> float:
        try:
            return float(tok)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad number {tok!r}") from None

    if layout == "coordinate":
        if len(sizes) != 3:
            raise ValueError(f"{path}:{size_lineno}: coordinate size line needs 3 fields")
        rows, cols, nnz = (parse_int(t, size_lineno) for t in sizes)
        out = np.zeros((rows, cols))
        entries = body[1:]
        if len(entries) != nnz:
            raise ValueError(
                f"{path}:{size_lineno}: declared {nnz} entries, found {len(entries)}"
            )
        for lineno, line in entries:
            toks = line.split()
            if len(toks) != 3:
                raise ValueError(f"{path}:{lineno}: entry needs i j value")
            i = parse_int(toks[0], lineno) - 1
            j = parse_int(toks[1], lineno) - 1
            v = parse_real(toks[2], lineno)
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"{path}:{lineno}: index out of range")
            out[i, j] += v
            if symmetry != "general" and i != j:
                out[j, i] += -v if symmetry == "skew-symmetric" else v
        return out

    if len(sizes) != 2:
        raise ValueError(f"{path}:{size_lineno}: array size line needs 2 fields")
    rows, cols = (parse_int(t, size_lineno) for t in sizes)
    values = [(lineno, tok) for lineno, line in body[1:] for tok in line.split()]
    if symmetry == "general":
        expected = rows * cols
    else:
        expected = rows * (rows + 1) // 2
    if len(values) != expected:
        raise ValueError(f"{path}: expected {expected} array values, found {len(values)}")
    out = np.zeros((rows, cols))
    it = iter(values)
    if symmetry == "general":
        for j in range(cols):
            for i in range(rows):
                lineno, tok = next(it)
                out[i, j] = parse_real(tok, lineno)
    else:
        for j in range(cols):
            for i in range(j, rows):
                lineno, tok = next(it)
                v = parse_real(tok, lineno)
                out[i, j] = v
                if i != j:
                    out[j, i] = -v if symmetry == "skew-symmetric" else v
    return out


def save_matrix_market(path, mat: np.ndarray) -> None:
    """Write a dense matrix as coordinate real general with full precision."""
    mat = np.asarray(mat, dtype=float)
    rows, cols = mat.shape
    nz = [
        (i, j, float(mat[i, j]))
        for j in range(cols)
        for i in range(rows)
        if mat[i, j] != 0.0
    ]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{rows} {cols} {len(nz)}\n")
        for i, j, v in nz:
            fh.write(f"{i + 1} {j + 1} {v!r}\n")
