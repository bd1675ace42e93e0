"""Uniform tensor grids and complex fields on them.

The computational domain is a centered box [-Lx/2, Lx/2) x ... sampled on a
regular tensor grid whose point count per axis is even, so the origin is a
grid point and the FFT wavenumbers come in symmetric pairs.  Fields are
stored as C-ordered complex arrays of shape ``grid.dims``; flattening such
an array yields the documented linear order (first axis major, last axis
fastest).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Regular centered grid with periodic Fourier wavenumbers.

    Attributes
    ----------
    dims : tuple[int, ...]
        Points per axis, each even and >= 4.  One to three axes.
    extent : tuple[float, ...]
        Half box length per axis; axis j covers [-extent[j], extent[j]).
    """

    dims: tuple[int, ...]
    extent: tuple[float, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(j) for j in self.dims)
        extent = tuple(float(e) for e in self.extent)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "extent", extent)
        if not 1 <= len(dims) <= 3:
            raise ValueError("grid must have one to three axes")
        if len(extent) != len(dims):
            raise ValueError("dims and extent must have the same length")
        if any(j < 4 or j % 2 for j in dims):
            raise ValueError("each axis needs an even point count >= 4")
        if any(e <= 0 for e in extent):
            raise ValueError("extents must be positive")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * e / j for e, j in zip(self.extent, self.dims))

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1D coordinate arrays, x_i = -extent + i*spacing."""
        return tuple(
            -e + h * np.arange(j)
            for e, h, j in zip(self.extent, self.spacing, self.dims)
        )

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """FFT angular wavenumbers per axis, k = 2*pi*fftfreq(J, dx)."""
        return tuple(
            2.0 * np.pi * np.fft.fftfreq(j, d=h)
            for j, h in zip(self.dims, self.spacing)
        )

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays (sparse meshgrid)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij", sparse=True))

    @cached_property
    def ksquared(self) -> np.ndarray:
        """|k|^2 on the full grid, broadcast to shape ``dims``."""
        ks = np.meshgrid(*self.wavenumbers, indexing="ij", sparse=True)
        out = np.zeros(self.dims)
        for k in ks:
            out = out + k**2
        return out

    def coordinates_3d(self) -> tuple[np.ndarray, ...]:
        """Broadcastable (x, y, z) with missing trailing axes pinned to 0.

        Lower dimensional grids describe slices through the origin of a
        three dimensional model, so potentials can always be written in
        terms of three coordinates.
        """
        coords = list(self.meshgrid())
        while len(coords) < 3:
            coords.append(np.zeros((1,) * self.ndim))
        return tuple(coords)


@dataclass
class ComplexField:
    """A complex scalar field sampled on a :class:`Grid`.

    ``values`` has shape ``grid.dims`` and dtype complex128.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.dims:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.dims}"
            )
        self.values = values

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def norm(self) -> float:
        """L2 norm with the grid quadrature weight."""
        return float(
            np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume)
        )

    def normalized(self) -> "ComplexField":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero field")
        return ComplexField(self.grid, self.values / n)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """Discrete L2 inner product <a, b> = sum conj(a)*b * cell_volume.

    The rectangle rule is spectrally accurate for fields that decay below
    roundoff at the box boundary, which every trapped state here does.
    """
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return complex(np.vdot(a.values, b.values) * a.grid.cell_volume)


def from_callable(grid: Grid, fn) -> ComplexField:
    """Sample ``fn(*coords)`` on the grid; fn receives broadcastable axes."""
    values = np.asarray(fn(*grid.meshgrid()), dtype=np.complex128)
    return ComplexField(grid, np.broadcast_to(values, grid.dims).copy())


def gaussian_field(
    grid: Grid, widths: Sequence[float], centers: Sequence[float] | None = None
) -> ComplexField:
    """Normalized Gaussian exp(-sum (x-c)^2/(2 w^2)), handy as a seed state."""
    if centers is None:
        centers = [0.0] * grid.ndim
    if len(widths) != grid.ndim or len(centers) != grid.ndim:
        raise ValueError("widths/centers must match the grid dimension")
    coords = grid.meshgrid()
    expo = np.zeros(grid.dims)
    for x, w, c in zip(coords, widths, centers):
        expo = expo + (x - c) ** 2 / (2.0 * float(w) ** 2)
    return ComplexField(grid, np.exp(-expo).astype(np.complex128)).normalized()
