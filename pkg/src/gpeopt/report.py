"""Figure rendering for CLI runs.

Every public function takes data plus an output path and writes one PNG.
Rendering uses the Agg backend so runs work headless; figures are closed
after saving so long batch runs do not accumulate state.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import ComplexField

__all__ = [
    "control_figure",
    "convergence_figure",
    "density_figure",
    "modes_figure",
    "series_figure",
]

_DPI = 150


def _save(fig, path: str | Path) -> None:
    fig.tight_layout()
    fig.savefig(Path(path), dpi=_DPI)
    plt.close(fig)


def control_figure(
    path: str | Path,
    times_ms: np.ndarray,
    samples: np.ndarray,
    *,
    title: str = "control parameters",
) -> None:
    """Plot control parameter trajectories over time."""
    samples = np.atleast_2d(np.asarray(samples))
    fig, ax = plt.subplots(figsize=(6, 4))
    for j in range(samples.shape[1]):
        ax.plot(times_ms, samples[:, j], label=rf"$\lambda_{j + 1}$")
    ax.set_xlabel("t [ms]")
    ax.set_ylabel("control value")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def convergence_figure(path: str | Path, costs: Sequence[float]) -> None:
    """Semilog plot of the cost history over optimizer iterations."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(np.arange(len(costs)), np.asarray(costs), marker="o", markersize=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax.set_title("optimizer convergence")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def series_figure(
    path: str | Path,
    times_ms: np.ndarray,
    values: np.ndarray,
    *,
    ylabel: str = "value",
    mark_ms: float | None = None,
    logy: bool = True,
) -> None:
    """Plot a scalar time series, optionally marking the horizon."""
    fig, ax = plt.subplots(figsize=(6, 4))
    plot = ax.semilogy if logy else ax.plot
    plot(times_ms, values)
    if mark_ms is not None:
        ax.axvline(mark_ms, color="k", linestyle="--", linewidth=0.8, label="T")
        ax.legend()
    ax.set_xlabel("t [ms]")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def density_figure(path: str | Path, psi: ComplexField, *, title: str = "density") -> None:
    """Mid-plane density slices of a field (one panel per axis pair)."""
    grid = psi.grid
    density = np.abs(psi.values) ** 2
    if grid.ndim == 1:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(grid.axes[0], density)
        ax.set_xlabel("x")
        ax.set_ylabel(r"$|\psi|^2$")
        ax.set_title(title)
        _save(fig, path)
        return

    # Pairs of axes to show; the remaining axis is sliced at its midpoint.
    pairs = [(0, 1)] if grid.ndim == 2 else [(0, 1), (0, 2), (1, 2)]
    fig, axes = plt.subplots(1, len(pairs), figsize=(4.2 * len(pairs), 3.6))
    axes = np.atleast_1d(axes)
    names = "xyz"
    for ax, (a, b) in zip(axes, pairs):
        sl: list = [n // 2 for n in grid.dims]
        sl[a] = slice(None)
        sl[b] = slice(None)
        plane = density[tuple(sl)]
        ext = [
            -grid.extent[a], grid.extent[a],
            -grid.extent[b], grid.extent[b],
        ]
        ax.imshow(plane.T, origin="lower", extent=ext, aspect="auto", cmap="viridis")
        ax.set_xlabel(names[a])
        ax.set_ylabel(names[b])
    fig.suptitle(title)
    _save(fig, path)


def modes_figure(
    path: str | Path,
    omegas: Sequence[float],
    us: Sequence[ComplexField],
    vs: Sequence[ComplexField],
    *,
    axis: int = 0,
) -> None:
    """Plot quasiparticle amplitudes u, v along one axis through the center."""
    fig, axes = plt.subplots(len(omegas), 1, figsize=(6, 2.4 * len(omegas)), sharex=True)
    axes = np.atleast_1d(axes)
    for ax, omega, u, v in zip(axes, omegas, us, vs):
        grid = u.grid
        sl: list = [n // 2 for n in grid.dims]
        sl[axis] = slice(None)
        x = grid.axes[axis]
        ax.plot(x, np.real(u.values[tuple(sl)]), label="u")
        ax.plot(x, np.real(v.values[tuple(sl)]), label="v")
        ax.set_ylabel(f"$\\omega = {omega:.4f}$")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("xyz"[axis])
    _save(fig, path)
