"""Control curves, ramps, resampling and the H1_0 inner product."""

import numpy as np
import pytest

from gpeopt import ControlCurve, h1_inner_product, h1_norm, linear_ramp, resample_control, sine_offset_ramp
from gpeopt.controls import second_time_derivative, time_derivative


def test_curve_promotes_1d_samples_and_validates():
    c = ControlCurve(1.0, np.array([0.0, 0.5, 1.0]))
    assert c.samples.shape == (3, 1)
    assert c.steps == 2 and c.n_params == 1
    with pytest.raises(ValueError):
        ControlCurve(1.0, np.array([0.0, 1.0]))  # fewer than 3 nodes
    with pytest.raises(ValueError):
        ControlCurve(0.0, np.array([0.0, 0.5, 1.0]))  # no horizon


def test_midpoint_is_interval_average():
    c = linear_ramp(2.0, 4, [0.0], [4.0])
    assert np.allclose(c.midpoint(0), [0.5])
    assert np.allclose(c.midpoint(3), [3.5])


def test_arithmetic_requires_same_sampling():
    a = linear_ramp(1.0, 4, [0.0], [1.0])
    b = linear_ramp(1.0, 5, [0.0], [1.0])
    with pytest.raises(ValueError):
        _ = a + b
    c = a + a
    assert np.allclose(c.samples, 2.0 * a.samples)
    assert np.allclose((2.0 * a).samples, c.samples)


def test_ramp_endpoints_are_exact():
    start, end = np.array([0.1, -0.3]), np.array([0.9, 1.4])
    lin = linear_ramp(3.0, 7, start, end)
    assert np.array_equal(lin.start, start) and np.array_equal(lin.end, end)
    bump = sine_offset_ramp(3.0, 7, start, end, [0.25, -0.25])
    # The sine bump is zeroed at the boundary nodes, not just small.
    assert np.array_equal(bump.start, start) and np.array_equal(bump.end, end)


def test_sine_offset_requires_matching_amplitudes():
    with pytest.raises(ValueError):
        sine_offset_ramp(1.0, 4, [0.0, 0.0], [1.0, 1.0], [0.25])


def test_time_derivative_exact_for_quadratics():
    t = np.linspace(0.0, 2.0, 9)
    c = ControlCurve(2.0, 3.0 * t**2 - 2.0 * t + 1.0)
    assert np.allclose(time_derivative(c)[:, 0], 6.0 * t - 2.0, atol=1e-12)
    assert np.allclose(second_time_derivative(c)[:, 0], 6.0, atol=1e-11)


def test_h1_inner_product_is_exact_for_piecewise_linear():
    # Refining a piecewise linear curve by inserting midpoints leaves the
    # interpolant unchanged, so the inner product must not move at all.
    rng = np.random.default_rng(5)
    u = ControlCurve(2.0, rng.normal(size=(9, 2)))
    v = ControlCurve(2.0, rng.normal(size=(9, 2)))

    def refine(c):
        s = np.empty((2 * c.steps + 1, c.n_params))
        s[0::2] = c.samples
        s[1::2] = 0.5 * (c.samples[:-1] + c.samples[1:])
        return ControlCurve(c.horizon, s)

    coarse = h1_inner_product(u, v)
    fine = h1_inner_product(refine(u), refine(v))
    assert np.isclose(coarse, fine, rtol=1e-14)


def test_h1_inner_product_analytic_value():
    # u = t(T-t) has int (u')^2 = T^3/3; the piecewise linear interpolant
    # underestimates it by exactly dt^2/3 * T (second order).
    T, steps = 2.0, 400
    t = np.linspace(0.0, T, steps + 1)
    u = ControlCurve(T, t * (T - t))
    exact = T**3 / 3.0
    assert np.isclose(h1_inner_product(u, u), exact, rtol=1e-4)
    assert np.isclose(h1_norm(u), np.sqrt(h1_inner_product(u, u)))


def test_h1_inner_product_rejects_mismatched_curves():
    u = linear_ramp(1.0, 4, [0.0], [1.0])
    v = linear_ramp(1.0, 6, [0.0], [1.0])
    with pytest.raises(ValueError):
        h1_inner_product(u, v)


def test_resample_preserves_endpoints_verbatim():
    c = sine_offset_ramp(1.5, 11, [0.2, 0.0], [0.8, 1.0], [0.3, -0.1])
    fine = resample_control(c, 40)
    assert fine.steps == 40
    assert np.array_equal(fine.start, c.start)
    assert np.array_equal(fine.end, c.end)


def test_resample_reproduces_cubics_exactly():
    t = np.linspace(0.0, 1.0, 13)
    c = ControlCurve(1.0, t**3 - 0.5 * t**2 + 0.25 * t)
    fine = resample_control(c, 31)
    tf = fine.times
    assert np.allclose(fine.samples[:, 0], tf**3 - 0.5 * tf**2 + 0.25 * tf, atol=1e-12)
