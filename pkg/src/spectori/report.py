"""Figures written next to the delimited CLI output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_contours(systems, path) -> Path:
    """Branch points and cycle projections, one panel per quotient curve."""
    path = Path(path)
    fig, axes = plt.subplots(1, len(systems), figsize=(6 * len(systems), 5), squeeze=False)
    for ax, sysm in zip(axes[0], systems):
        for cyc in sysm.a_cycles:
            z = cyc.path.polyline()
            ax.plot(z.real, z.imag, color="tab:blue", lw=1)
        for cyc in sysm.b_cycles:
            z = cyc.path.polyline()
            ax.plot(z.real, z.imag, color="tab:red", lw=1)
        for cyc in sysm.open_curves.values():
            z = cyc.path.polyline()
            ax.plot(z.real, z.imag, color="tab:green", lw=0.8, ls="--")
        pts = sysm.curve.smooth_branch_points
        ax.plot(pts.real, pts.imag, "k.", ms=8)
        ax.set_title(f"C_{'+' if sysm.curve.sign.value == 'PLUS' else '-'}: a blue, b red, c dashed")
        ax.set_aspect("equal", adjustable="datalim")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_probe(probe, path) -> Path:
    """|value - model| against mu on log-log axes with the fitted slope."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    res = np.abs(probe.residuals)
    ax.loglog(probe.mus, res, "o-", label=f"residual, slope {probe.fitted_order:.3f}")
    ax.set_xlabel("mu")
    ax.set_ylabel("|period - model|")
    ax.set_title(f"{probe.kind} on C_{'+' if probe.sign.value == 'PLUS' else '-'}")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_newton(history, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    h = np.maximum(np.asarray(history, dtype=float), 1e-18)
    ax.semilogy(range(len(h)), h, "s-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("chart residual")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
