"""Reduction of a cigar-shaped 3D condensate to an effective 1D model.

When the transverse profile is frozen, writing psi(x, y, z) ~ f(x) *
phi_t(y, z) with a normalized transverse profile phi_t collapses the 3D
equation onto the first axis with the contact strength

    g_1d = g * int |phi_t(y, z)|^4 dy dz.

The transverse profile is taken as the x = 0 slice of the full ground
state, renormalized over the transverse plane.  The reduced potential is
the trap sampled on the line (x, 0, 0), which a 1D grid produces
directly.
"""

from __future__ import annotations

import numpy as np

from .grid import ComplexField, Grid
from .units import H_PLANCK, UnitSystem


def transverse_profile(phi: ComplexField) -> np.ndarray:
    """x = 0 slice of a 3D state, renormalized over the transverse plane."""
    grid = phi.grid
    if grid.ndim != 3:
        raise ValueError("transverse profile requires a 3D state")
    sl = phi.values[grid.dims[0] // 2]
    area = grid.spacing[1] * grid.spacing[2]
    nrm = np.sqrt(np.sum(np.abs(sl) ** 2) * area)
    if nrm == 0.0:
        raise ValueError("state vanishes on the x = 0 plane")
    return sl / nrm


def effective_g1d(phi: ComplexField, g: float) -> float:
    """Effective 1D interaction strength, dimensionless."""
    grid = phi.grid
    prof = transverse_profile(phi)
    area = grid.spacing[1] * grid.spacing[2]
    return float(g * np.sum(np.abs(prof) ** 4) * area)


def interaction_hz_um(g1d: float, units: UnitSystem) -> float:
    """Convert a dimensionless 1D interaction strength to h * Hz * um.

    The dimensionful strength is g1d * (hbar / t0) * l0; dividing by
    Planck's constant and micrometers gives the conventional quotation.
    """
    energy_hz = units.energy_unit / H_PLANCK
    return g1d * energy_hz * (units.length_unit / 1e-6)


def line_grid(grid3d: Grid, points: int | None = None) -> Grid:
    """1D grid along the first axis of a 3D grid, same extent."""
    if grid3d.ndim != 3:
        raise ValueError("line_grid expects a 3D grid")
    return Grid(dims=(points or grid3d.dims[0],), extent=(grid3d.extent[0],))


def reduce_model(model, grid3d: Grid, points: int | None = None):
    """1D view of a trap: the unchanged model plus a line grid along x.

    Potentials evaluate lower dimensional grids as slices through the
    origin, so the model itself needs no modification; pairing it with a
    1D grid yields V(x, 0, 0) with the same control parameterization and
    jacobians.  Returns ``(model, line_grid(grid3d, points))``.
    """
    return model, line_grid(grid3d, points)
