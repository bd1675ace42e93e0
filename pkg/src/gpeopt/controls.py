"""Control curves on a uniform time grid and their H1_0 geometry.

A control curve holds m real parameters sampled at N+1 equispaced nodes on
[0, T].  Optimization never moves the endpoint values: search directions
and gradients vanish at t=0 and t=T, so the physical boundary conditions
of a transfer protocol stay pinned by construction.

The natural geometry for gradients here is the H1_0 inner product
(u, v) = int_0^T du/dt * dv/dt dt, evaluated exactly for the piecewise
linear interpolant of the samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline


@dataclass
class ControlCurve:
    """Uniformly sampled control parameters on [0, horizon].

    Attributes
    ----------
    horizon : float
        Final time T (dimensionless).
    samples : np.ndarray
        Shape (N+1, m) float array; row n holds lambda(t_n).
    """

    horizon: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2 or samples.shape[0] < 3:
            raise ValueError("samples must be (N+1, m) with N >= 2")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        self.samples = samples

    @property
    def steps(self) -> int:
        """Number of intervals N."""
        return self.samples.shape[0] - 1

    @property
    def n_params(self) -> int:
        return self.samples.shape[1]

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def start(self) -> np.ndarray:
        return self.samples[0]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def value(self, n: int) -> np.ndarray:
        return self.samples[n]

    def midpoint(self, n: int) -> np.ndarray:
        """Control at the interval midpoint, 0.5*(lambda_n + lambda_{n+1})."""
        return 0.5 * (self.samples[n] + self.samples[n + 1])

    def with_samples(self, samples: np.ndarray) -> "ControlCurve":
        return ControlCurve(self.horizon, samples)

    def copy(self) -> "ControlCurve":
        return ControlCurve(self.horizon, self.samples.copy())

    def same_sampling(self, other: "ControlCurve") -> bool:
        return (
            self.horizon == other.horizon
            and self.samples.shape == other.samples.shape
        )

    def __add__(self, other: "ControlCurve") -> "ControlCurve":
        if not self.same_sampling(other):
            raise ValueError("curves sampled differently")
        return ControlCurve(self.horizon, self.samples + other.samples)

    def __sub__(self, other: "ControlCurve") -> "ControlCurve":
        if not self.same_sampling(other):
            raise ValueError("curves sampled differently")
        return ControlCurve(self.horizon, self.samples - other.samples)

    def __mul__(self, scalar: float) -> "ControlCurve":
        return ControlCurve(self.horizon, self.samples * float(scalar))

    __rmul__ = __mul__


def time_derivative(curve: ControlCurve) -> np.ndarray:
    """d lambda/dt at the nodes: central differences inside, one sided
    second order stencils at the ends."""
    return np.gradient(curve.samples, curve.dt, axis=0, edge_order=2)


def second_time_derivative(curve: ControlCurve) -> np.ndarray:
    """d^2 lambda/dt^2 at the nodes.

    Central three point stencil on interior nodes; at the two boundary
    nodes the one sided second order four point stencil.
    """
    lam = curve.samples
    dt2 = curve.dt**2
    out = np.empty_like(lam)
    out[1:-1] = (lam[2:] - 2.0 * lam[1:-1] + lam[:-2]) / dt2
    out[0] = (2.0 * lam[0] - 5.0 * lam[1] + 4.0 * lam[2] - lam[3]) / dt2
    out[-1] = (2.0 * lam[-1] - 5.0 * lam[-2] + 4.0 * lam[-3] - lam[-4]) / dt2
    return out


def h1_inner_product(u: ControlCurve, v: ControlCurve) -> float:
    """H1_0 inner product int du/dt . dv/dt dt over all components.

    Sampled curves are piecewise linear, and for those the integral is the
    forward difference sum (1/dt) * sum (u_{n+1}-u_n).(v_{n+1}-v_n) exactly,
    no quadrature error.  This form is also the exact dual of the compact
    second difference used by the gradient assembly: summation by parts
    turns it into -sum u'' v dt for curves vanishing at the endpoints.
    Both curves must share the sampling.
    """
    if not u.same_sampling(v):
        raise ValueError("curves sampled differently")
    du = np.diff(u.samples, axis=0)
    dv = np.diff(v.samples, axis=0)
    return float(np.sum(du * dv) / u.dt)


def h1_norm(u: ControlCurve) -> float:
    return float(np.sqrt(max(h1_inner_product(u, u), 0.0)))


def resample_control(curve: ControlCurve, steps: int) -> ControlCurve:
    """Resample onto ``steps`` uniform intervals by cubic spline.

    Endpoint rows are copied verbatim so pinned boundary values survive
    refinement exactly.
    """
    if steps < 2:
        raise ValueError("need at least 2 intervals")
    t_new = np.linspace(0.0, curve.horizon, steps + 1)
    spline = CubicSpline(curve.times, curve.samples, axis=0)
    samples = spline(t_new)
    samples[0] = curve.samples[0]
    samples[-1] = curve.samples[-1]
    return ControlCurve(curve.horizon, samples)


def linear_ramp(
    horizon: float, steps: int, start: np.ndarray, end: np.ndarray
) -> ControlCurve:
    """Straight line control from ``start`` to ``end``."""
    start = np.atleast_1d(np.asarray(start, dtype=float))
    end = np.atleast_1d(np.asarray(end, dtype=float))
    s = np.linspace(0.0, 1.0, steps + 1)[:, None]
    return ControlCurve(horizon, (1.0 - s) * start[None, :] + s * end[None, :])


def sine_offset_ramp(
    horizon: float,
    steps: int,
    start: np.ndarray,
    end: np.ndarray,
    amplitudes: np.ndarray,
) -> ControlCurve:
    """Linear ramp plus a half sine bump, a_j * sin(pi t / T) per component.

    The bump vanishes at both endpoints, so the boundary values equal the
    plain ramp.
    """
    base = linear_ramp(horizon, steps, start, end)
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    if amplitudes.shape[0] != base.n_params:
        raise ValueError("one amplitude per control component required")
    bump = np.sin(np.pi * base.times / horizon)[:, None] * amplitudes[None, :]
    bump[0] = 0.0
    bump[-1] = 0.0
    return ControlCurve(horizon, base.samples + bump)
