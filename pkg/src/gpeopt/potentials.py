"""Control-parameterized trap potentials.

All potentials are evaluated in dimensionless units (see :mod:`gpeopt.units`)
on the coordinates of a :class:`~gpeopt.grid.Grid`; grids with fewer than
three axes are treated as slices through the origin, so a 1D grid samples
V(x, 0, 0).  Three trap families are implemented:

* ``harmonic-2p``: anisotropic harmonic trap whose x and y frequencies
  interpolate linearly in two controls.
* ``toroidal-2p``: harmonic trap plus a Gaussian barrier on the z axis whose
  height follows a saturation curve in the second control.
* ``rf-split-1p``/``rf-split-2p``: radio-frequency dressed Ioffe-Pritchard
  trap; the first control drives the Rabi frequency through a saturation
  curve (splitting a single well into a double well), the optional second
  control scales the longitudinal trap frequency.

Evaluated potentials have their grid minimum subtracted, which only shifts
the global phase of the dynamics.  Control jacobians are always taken on
the raw, un-shifted potential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .grid import Grid

DEFAULT_SATURATION_KNOTS = (
    (-0.5, 0.0),
    (0.0, 0.0),
    (0.5, 0.4),
    (1.0, 1.0),
    (1.5, 1.15),
)


@dataclass(frozen=True)
class SaturationCurve:
    """Monotone piecewise-cubic Hermite curve chi(s), clamped outside its knots.

    Experimental control voltages rarely map linearly onto the physical
    drive amplitude; this curve models the saturating response.  Knot
    values must be non-decreasing; the Fritsch-Carlson slopes keep the
    interpolant monotone, and outside the knot span the curve continues
    with the nearest knot value.
    """

    knots: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 2:
            raise ValueError("need matching 1D knot/value arrays, >= 2 knots")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("saturation knots must be strictly increasing")
        if np.any(np.diff(values) < 0):
            raise ValueError("saturation values must be non-decreasing")
        object.__setattr__(self, "knots", tuple(knots))
        object.__setattr__(self, "values", tuple(values))

    @classmethod
    def default(cls) -> "SaturationCurve":
        k, v = zip(*DEFAULT_SATURATION_KNOTS)
        return cls(k, v)

    @cached_property
    def _slopes(self) -> np.ndarray:
        pchip = PchipInterpolator(np.asarray(self.knots), np.asarray(self.values))
        return pchip.derivative()(np.asarray(self.knots))

    def __call__(self, s):
        return saturation_eval(self, s)[0]

    def derivative(self, s):
        return saturation_eval(self, s)[1]


def saturation_eval(curve: SaturationCurve, s):
    """Evaluate chi(s) and dchi/ds.

    Works on real arrays and, for complex-step differentiation, on complex
    inputs: the Hermite polynomial of the segment selected by Re(s) is
    evaluated as-is, which is the analytic continuation needed for the
    imaginary perturbation trick.  In the clamped regions the value is
    constant and the derivative zero.
    """
    x = np.asarray(curve.knots)
    y = np.asarray(curve.values)
    d = curve._slopes
    s_arr = np.asarray(s)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    s_re = s_arr.real if np.iscomplexobj(s_arr) else s_arr

    seg = np.clip(np.searchsorted(x, s_re, side="right") - 1, 0, x.size - 2)
    h = x[seg + 1] - x[seg]
    t = (s_arr - x[seg]) / h
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    val = y[seg] * h00 + h * d[seg] * h10 + y[seg + 1] * h01 + h * d[seg + 1] * h11
    dh00 = (6.0 * t2 - 6.0 * t) / h
    dh10 = (3.0 * t2 - 4.0 * t + 1.0) / h
    dh01 = (-6.0 * t2 + 6.0 * t) / h
    dh11 = (3.0 * t2 - 2.0 * t) / h
    der = y[seg] * dh00 + h * d[seg] * dh10 + y[seg + 1] * dh01 + h * d[seg + 1] * dh11

    below = s_re < x[0]
    above = s_re > x[-1]
    if np.any(below) or np.any(above):
        val = np.where(below, y[0], np.where(above, y[-1], val))
        der = np.where(below | above, 0.0, der)
    if scalar:
        return val[0], der[0]
    return val, der


@dataclass(frozen=True)
class HarmonicTrap2P:
    """Harmonic trap with linearly interpolated x and y frequencies.

    omega_x(l1) = omega_x_initial + l1*(omega_x_final - omega_x_initial),
    same for omega_y(l2); omega_z is fixed.  All frequencies dimensionless.
    """

    omega_x_initial: float
    omega_x_final: float
    omega_y_initial: float
    omega_y_final: float
    omega_z: float

    variant = "harmonic-2p"
    n_controls = 2

    def frequencies(self, lam):
        wx = self.omega_x_initial + lam[0] * (self.omega_x_final - self.omega_x_initial)
        wy = self.omega_y_initial + lam[1] * (self.omega_y_final - self.omega_y_initial)
        return wx, wy


@dataclass(frozen=True)
class ToroidalTrap2P:
    """Harmonic trap plus a repulsive Gaussian plug along the z axis.

    V = 1/2*(omega_x(l1)^2 x^2 + omega_y^2 y^2 + omega_z^2 z^2)
        + barrier_height * chi(l2) * exp(-2 (x^2+y^2)/barrier_waist^2)

    Ramping l2 from 0 to 1 pierces the cloud and deforms it into a ring.
    """

    omega_x_initial: float
    omega_x_final: float
    omega_y: float
    omega_z: float
    barrier_height: float
    barrier_waist: float
    saturation: SaturationCurve = field(default_factory=SaturationCurve.default)

    variant = "toroidal-2p"
    n_controls = 2


@dataclass(frozen=True)
class RfSplitTrap:
    """Radio-frequency dressed Ioffe-Pritchard trap for |F=2, mF=2>.

    The static field is the standard Ioffe-Pritchard configuration with
    offset b0 = omega_larmor/m_f, gradient b1 = sqrt(b0/m_f)*omega_perp and
    curvature b2 = omega_long^2/m_f, all expressed as angular frequencies
    (field magnitude times gF*muB/hbar) in dimensionless units.  Dressing
    with an RF field of Rabi frequency Omega and detuning delta0 at the
    trap center gives the adiabatic potential

        V = mf_dressed * sqrt(delta(r)^2 + Omega^2),
        delta(r) = |b(r)| - omega_rf,   omega_rf = b0 - delta0.

    The conventional detuning delta0 = delta(0) is negative, which puts
    the RF frequency above the Larmor frequency at the field minimum; the
    detuning then crosses zero on a shell of finite radius, and ramping
    Omega up deforms the single well into a double well with minima near
    that shell.  The first control sets Omega = rabi_max * chi(l1).  With
    ``two_param=True`` a second control scales the longitudinal frequency,
    omega_long(l2) = omega_long * l2 (l2 = 1 at both ends of a protocol).
    """

    omega_perp: float
    omega_long: float
    omega_larmor: float
    detuning: float
    rabi_max: float
    mf: int = 2
    mf_dressed: int = 2
    two_param: bool = False
    saturation: SaturationCurve = field(default_factory=SaturationCurve.default)

    @property
    def variant(self) -> str:
        return "rf-split-2p" if self.two_param else "rf-split-1p"

    @property
    def n_controls(self) -> int:
        return 2 if self.two_param else 1

    @property
    def b0(self) -> float:
        return self.omega_larmor / self.mf

    @property
    def b1(self) -> float:
        return np.sqrt(self.b0 / self.mf) * self.omega_perp

    def b2(self, lam) -> float:
        scale = lam[1] if self.two_param else 1.0
        return (self.omega_long * scale) ** 2 / self.mf

    @property
    def rf_frequency(self) -> float:
        # Chosen so the detuning at the trap center is the configured one;
        # delta(r) = |b(r)| - rf_frequency and |b(0)| = b0.
        return self.b0 - self.detuning


TrapModel = Union[HarmonicTrap2P, ToroidalTrap2P, RfSplitTrap]


def ioffe_field(x, y, z, b0: float, b1: float, b2: float):
    """Ioffe-Pritchard field components in angular-frequency units.

    Satisfies div B = 0 and curl B = 0 exactly; near the axis the modulus
    grows quadratically, giving transverse confinement ~ b1^2/b0 and
    longitudinal confinement ~ b2.
    """
    bx = b1 * x - 0.5 * b2 * x * y
    bz = -b1 * z - 0.5 * b2 * z * y
    by = b0 + 0.5 * b2 * (y**2 - 0.5 * (x**2 + z**2))
    return bx, by, bz


def _field_modulus(bx, by, bz):
    # sqrt of the component squares (not abs), so complex-step inputs
    # propagate through as an analytic function.
    return np.sqrt(bx * bx + by * by + bz * bz)


def _raw_potential(model: TrapModel, lam, grid: Grid) -> np.ndarray:
    x, y, z = grid.coordinates_3d()
    if isinstance(model, HarmonicTrap2P):
        wx, wy = model.frequencies(lam)
        v = 0.5 * (wx**2 * x**2 + wy**2 * y**2 + model.omega_z**2 * z**2)
    elif isinstance(model, ToroidalTrap2P):
        wx = model.omega_x_initial + lam[0] * (
            model.omega_x_final - model.omega_x_initial
        )
        chi, _ = saturation_eval(model.saturation, lam[1])
        v = 0.5 * (
            wx**2 * x**2 + model.omega_y**2 * y**2 + model.omega_z**2 * z**2
        ) + model.barrier_height * chi * np.exp(
            -2.0 * (x**2 + y**2) / model.barrier_waist**2
        )
    elif isinstance(model, RfSplitTrap):
        bx, by, bz = ioffe_field(x, y, z, model.b0, model.b1, model.b2(lam))
        delta = _field_modulus(bx, by, bz) - model.rf_frequency
        chi, _ = saturation_eval(model.saturation, lam[0])
        omega_rabi = model.rabi_max * chi
        v = model.mf_dressed * np.sqrt(delta**2 + omega_rabi**2)
    else:
        raise TypeError(f"unknown trap model {type(model).__name__}")
    out = np.empty(grid.dims, dtype=v.dtype)
    out[...] = v
    return out


def _check_controls(model: TrapModel, lam) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam))
    if lam.shape != (model.n_controls,):
        raise ValueError(
            f"{model.variant} expects {model.n_controls} controls, got {lam.shape}"
        )
    return lam


def eval_potential(
    model: TrapModel, lam, grid: Grid, *, remove_offset: bool = True
) -> np.ndarray:
    """Evaluate V(r; lambda) on the grid.

    With ``remove_offset`` (the default) the grid minimum is subtracted;
    the remaining time-dependent constant only rotates the global phase.
    """
    lam = _check_controls(model, lam)
    v = _raw_potential(model, lam, grid)
    if remove_offset:
        v = v - v.min()
    return v


def _analytic_jacobian(model: TrapModel, lam, grid: Grid) -> np.ndarray:
    x, y, z = grid.coordinates_3d()
    jac = np.zeros((model.n_controls,) + grid.dims)
    if isinstance(model, HarmonicTrap2P):
        wx, wy = model.frequencies(lam)
        jac[0] = wx * (model.omega_x_final - model.omega_x_initial) * x**2
        jac[1] = wy * (model.omega_y_final - model.omega_y_initial) * y**2
    elif isinstance(model, ToroidalTrap2P):
        wx = model.omega_x_initial + lam[0] * (
            model.omega_x_final - model.omega_x_initial
        )
        jac[0] = wx * (model.omega_x_final - model.omega_x_initial) * x**2
        _, dchi = saturation_eval(model.saturation, lam[1])
        jac[1] = (
            model.barrier_height
            * dchi
            * np.exp(-2.0 * (x**2 + y**2) / model.barrier_waist**2)
        )
    elif isinstance(model, RfSplitTrap):
        b2 = model.b2(lam)
        bx, by, bz = ioffe_field(x, y, z, model.b0, model.b1, b2)
        modulus = _field_modulus(bx, by, bz)
        delta = modulus - model.rf_frequency
        chi, dchi = saturation_eval(model.saturation, lam[0])
        omega_rabi = model.rabi_max * chi
        root = np.sqrt(delta**2 + omega_rabi**2)
        jac[0] = model.mf_dressed * omega_rabi * model.rabi_max * dchi / root
        if model.two_param:
            # delta depends on l2 through the field curvature b2.
            db2 = 2.0 * model.omega_long**2 * lam[1] / model.mf
            dmod = (
                bx * (-0.5 * x * y)
                + bz * (-0.5 * z * y)
                + by * 0.5 * (y**2 - 0.5 * (x**2 + z**2))
            ) / modulus
            jac[1] = model.mf_dressed * delta * dmod * db2 / root
    else:
        raise TypeError(f"unknown trap model {type(model).__name__}")
    return jac


def eval_potential_jacobian(
    model: TrapModel, lam, grid: Grid, *, method: str = "analytic"
) -> np.ndarray:
    """d V / d lambda_j on the raw (non-offset-subtracted) potential.

    Returns an array of shape (n_controls,) + grid.dims.  ``method`` is
    one of ``analytic`` (closed form, default), ``complex-step`` (step
    1e-20, exact to machine precision) or ``central-diff`` (step 1e-6).
    """
    lam = _check_controls(model, lam)
    if method == "analytic":
        return _analytic_jacobian(model, lam, grid)
    if method == "complex-step":
        h = 1e-20
        jac = np.zeros((model.n_controls,) + grid.dims)
        for j in range(model.n_controls):
            lam_c = lam.astype(complex)
            lam_c[j] += 1j * h
            jac[j] = _raw_potential(model, lam_c, grid).imag / h
        return jac
    if method == "central-diff":
        h = 1e-6
        jac = np.zeros((model.n_controls,) + grid.dims)
        for j in range(model.n_controls):
            lam_p = lam.copy()
            lam_m = lam.copy()
            lam_p[j] += h
            lam_m[j] -= h
            jac[j] = (
                _raw_potential(model, lam_p, grid)
                - _raw_potential(model, lam_m, grid)
            ) / (2.0 * h)
        return jac
    raise ValueError(f"unknown jacobian method {method!r}")


def frequency_floor(model: TrapModel, lam) -> float:
    """Smallest trap frequency at the given control values.

    Spectral tolerances (Goldstone filtering, shift selection) need a
    reference frequency scale.  For the harmonic families this is the
    smallest oscillator frequency; the rf-dressed trap exposes no dressed
    well frequency directly, so the longitudinal frequency (times its
    control scale, if present) serves as the floor.
    """
    lam = _check_controls(model, lam)
    if isinstance(model, HarmonicTrap2P):
        wx, wy = model.frequencies(lam)
        return float(min(wx, wy, model.omega_z))
    if isinstance(model, ToroidalTrap2P):
        wx = model.omega_x_initial + lam[0] * (
            model.omega_x_final - model.omega_x_initial
        )
        return float(min(wx, model.omega_y, model.omega_z))
    if isinstance(model, RfSplitTrap):
        scale = lam[1] if model.two_param else 1.0
        return float(min(model.omega_perp, model.omega_long * scale))
    raise TypeError(f"unknown trap model {type(model).__name__}")
