"""Figure rendering for run and suite reports.

Figures are written straight to files (Agg backend); the CLI calls these
next to its delimited trace output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_run_figure", "save_suite_figure"]


def _convergence_axis(ax, norms, label=None) -> None:
    norms = np.asarray(norms, dtype=float)
    positive = np.where(norms > 0.0, norms, np.nan)
    ax.semilogy(np.arange(norms.size), positive, lw=1.6, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\|F(z_k)\|$")
    ax.grid(True, which="both", alpha=0.3)


def save_run_figure(path, result, problem, title: str | None = None) -> None:
    """Render one run: convergence curve, plus the iterate path for 2-d problems."""
    norms = [rec.norm_f for rec in result.trace]
    two_d = problem.dims.total == 2 and len(result.points) > 1
    if two_d:
        fig, (ax_path, ax_conv) = plt.subplots(1, 2, figsize=(9.6, 4.2))
        pts = np.asarray(result.points)
        ax_path.plot(pts[:, 0], pts[:, 1], "-o", ms=2.5, lw=1.0, alpha=0.8)
        ax_path.plot(pts[0, 0], pts[0, 1], "s", ms=7, color="tab:green", label="start")
        ax_path.plot(pts[-1, 0], pts[-1, 1], "*", ms=11, color="tab:red", label="final")
        ax_path.set_xlabel("x")
        ax_path.set_ylabel("y")
        ax_path.grid(True, alpha=0.3)
        ax_path.legend(loc="best", fontsize=8)
        ax_path.set_title("iterate path")
    else:
        fig, ax_conv = plt.subplots(figsize=(6.0, 4.2))
    _convergence_axis(ax_conv, norms)
    ax_conv.set_title("convergence")
    fig.suptitle(title or problem.name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_suite_figure(path, curves) -> None:
    """Overlay the convergence curves of several runs.

    ``curves`` is a sequence of (label, norms) pairs.
    """
    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    for label, norms in curves:
        _convergence_axis(ax, norms, label=label)
    if curves:
        ax.legend(loc="best", fontsize=8)
    ax.set_title("suite convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
