"""Grid geometry, field quadrature and constructor validation."""

import numpy as np
import pytest

from gpeopt import ComplexField, Grid, from_callable, gaussian_field, inner_product


def test_grid_axes_cover_centered_half_open_box():
    grid = Grid((8, 4), (2.0, 1.0))
    x, y = grid.axes
    assert x[0] == -2.0 and y[0] == -1.0
    # Half open on the right: the last point is one spacing short of +extent.
    assert np.isclose(x[-1], 2.0 - grid.spacing[0])
    assert 0.0 in x and 0.0 in y
    assert np.allclose(np.diff(x), grid.spacing[0])


def test_grid_cell_volume_and_size():
    grid = Grid((8, 6, 4), (2.0, 3.0, 1.0))
    assert grid.size == 8 * 6 * 4
    assert np.isclose(grid.cell_volume, (4.0 / 8) * (6.0 / 6) * (2.0 / 4))


def test_grid_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Grid((7, 8), (1.0, 1.0))  # odd count
    with pytest.raises(ValueError):
        Grid((2, 8), (1.0, 1.0))  # below minimum
    with pytest.raises(ValueError):
        Grid((8,), (1.0, 2.0))  # length mismatch
    with pytest.raises(ValueError):
        Grid((8, 8), (1.0, -1.0))  # negative extent
    with pytest.raises(ValueError):
        Grid((8, 8, 8, 8), (1.0, 1.0, 1.0, 1.0))  # too many axes


def test_wavenumbers_match_fft_convention():
    grid = Grid((16,), (4.0,))
    (k,) = grid.wavenumbers
    assert np.allclose(k, 2 * np.pi * np.fft.fftfreq(16, d=grid.spacing[0]))
    assert grid.ksquared.shape == (16,)


def test_coordinates_3d_pads_missing_axes_with_zero():
    grid = Grid((8, 8), (2.0, 2.0))
    x, y, z = grid.coordinates_3d()
    assert z.max() == 0.0 and z.min() == 0.0
    assert (x + y + z).shape == (8, 8)


def test_field_shape_validation():
    grid = Grid((8, 8), (1.0, 1.0))
    with pytest.raises(ValueError):
        ComplexField(grid, np.zeros((8, 4)))


def test_normalization_and_inner_product_agree():
    grid = Grid((32, 32), (5.0, 5.0))
    f = gaussian_field(grid, (1.0, 0.7))
    assert np.isclose(f.norm(), 1.0, atol=1e-13)
    assert np.isclose(inner_product(f, f).real, 1.0, atol=1e-13)
    assert abs(inner_product(f, f).imag) < 1e-15


def test_gaussian_quadrature_is_spectrally_accurate():
    # Rectangle rule on a decayed analytic integrand: error near roundoff.
    grid = Grid((64,), (8.0,))
    f = from_callable(grid, lambda x: np.exp(-(x**2) / 2.0))
    assert np.isclose(f.norm() ** 2, np.sqrt(np.pi), rtol=1e-13)


def test_inner_product_conjugate_linearity():
    grid = Grid((16,), (2.0,))
    rng = np.random.default_rng(3)
    a = ComplexField(grid, rng.normal(size=16) + 1j * rng.normal(size=16))
    b = ComplexField(grid, rng.normal(size=16) + 1j * rng.normal(size=16))
    assert np.isclose(inner_product(a, b), np.conj(inner_product(b, a)))
    c = ComplexField(grid, (2.0 + 1j) * b.values)
    assert np.isclose(inner_product(a, c), (2.0 + 1j) * inner_product(a, b))


def test_inner_product_rejects_grid_mismatch():
    a = gaussian_field(Grid((8,), (2.0,)), (1.0,))
    b = gaussian_field(Grid((8,), (3.0,)), (1.0,))
    with pytest.raises(ValueError):
        inner_product(a, b)


def test_from_callable_broadcasts_constants():
    grid = Grid((8, 4), (1.0, 1.0))
    f = from_callable(grid, lambda x, y: 1.0 + 0.0 * x)
    assert f.values.shape == (8, 4)
    assert np.all(f.values == 1.0)
