"""Time propagation of the Gross-Pitaevskii equation.

Real time evolution of i dpsi/dt = (-1/2 Laplace + V(t) + g|psi|^2) psi uses
symmetric Strang splitting: a half step of the pointwise potential plus
nonlinearity, a full spectral free-flight step, and a second pointwise half
step evaluated with the post-flight density.  Each sub-flow is solved
exactly (the pointwise part leaves |psi| invariant), so the step is norm
preserving to roundoff, second order in dt, and exactly time reversible.
The control enters through the potential evaluated at the interval
midpoint value lambda((n+1/2) dt).

Ground states come from the same splitting run in imaginary time with
renormalization after every step (normalized gradient flow), with an
adaptive step that halves whenever the energy fails to decrease.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Mapping

import numpy as np
import scipy.fft as sfft

from .controls import ControlCurve
from .grid import ComplexField, Grid, gaussian_field, inner_product
from .potentials import TrapModel, eval_potential

_FFT_WORKERS = max(1, min(8, os.cpu_count() or 1))


def set_fft_workers(n: int) -> None:
    """Cap the number of threads used by the spectral transforms."""
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(n))


def get_fft_workers() -> int:
    return _FFT_WORKERS


def _fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, workers=_FFT_WORKERS)


def _ifftn(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, workers=_FFT_WORKERS)


class NumericalBlowupError(RuntimeError):
    """Raised when the state develops non-finite entries."""

    def __init__(self, step: int):
        super().__init__(f"non-finite values in the state after step {step}")
        self.step = step


@dataclass
class PropagatorConfig:
    """Stepping parameters for :func:`propagate`.

    ``dt`` and ``steps`` fix the time grid (dimensionless), ``g`` the
    nonlinearity; observers are sampled every ``record_stride`` steps.
    """

    dt: float
    steps: int
    g: float
    record_stride: int = 1

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.steps < 1:
            raise ValueError("dt must be positive and steps >= 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class ObservationPoint:
    """Snapshot handed to observers during propagation."""

    step: int
    t: float
    field: ComplexField
    potential: np.ndarray
    g: float


Observer = Callable[[ObservationPoint], float]


@dataclass
class PropagationResult:
    final: ComplexField
    times: np.ndarray
    records: dict[str, np.ndarray]


def _split_step(
    values: np.ndarray,
    potential: np.ndarray,
    kinetic_phase: np.ndarray,
    dt: float,
    g: float,
    sign: float,
) -> np.ndarray:
    """One symmetric split step; sign=+1 forward, sign=-1 exact inverse."""
    phase = -0.5j * sign * dt
    values = values * np.exp(phase * (potential + g * np.abs(values) ** 2))
    values = _ifftn(kinetic_phase * _fftn(values))
    values = values * np.exp(phase * (potential + g * np.abs(values) ** 2))
    return values


def kinetic_phase(grid: Grid, dt: float, sign: float = 1.0) -> np.ndarray:
    """Spectral multiplier exp(-i |k|^2/2 dt) of the free flight."""
    return np.exp(-0.5j * sign * dt * grid.ksquared)


def strang_step(
    state: ComplexField, potential_mid: np.ndarray, dt: float, g: float
) -> ComplexField:
    """Advance one step with the potential frozen at the interval midpoint."""
    phase = kinetic_phase(state.grid, dt)
    values = _split_step(state.values, potential_mid, phase, dt, g, 1.0)
    return ComplexField(state.grid, values)


def inverse_strang_step(
    state: ComplexField, potential_mid: np.ndarray, dt: float, g: float
) -> ComplexField:
    """Undo one step exactly (up to roundoff); used by the adjoint sweep."""
    phase = kinetic_phase(state.grid, -dt)
    values = _split_step(state.values, potential_mid, phase, dt, g, -1.0)
    return ComplexField(state.grid, values)


def propagate(
    psi0: ComplexField,
    model: TrapModel,
    control: ControlCurve,
    cfg: PropagatorConfig,
    *,
    observers: Mapping[str, Observer] | None = None,
    extra_steps: int = 0,
) -> PropagationResult:
    """Propagate psi0 over the control horizon, optionally beyond it.

    The horizon of ``control`` must equal ``cfg.steps * cfg.dt`` (to 1e-9
    relative); one split step is taken per control interval.  With
    ``extra_steps`` the evolution continues past T with the control frozen
    at its final value.  Observers are sampled every ``record_stride``
    steps and always at the first and last node.
    """
    if abs(control.horizon - cfg.steps * cfg.dt) > 1e-9 * control.horizon:
        raise ValueError("control horizon does not match steps * dt")
    if control.steps != cfg.steps:
        raise ValueError("control sampling does not match cfg.steps")
    if abs(psi0.norm() - 1.0) > 1e-8:
        raise ValueError("initial state is not normalized")

    grid = psi0.grid
    observers = dict(observers or {})
    phase = kinetic_phase(grid, cfg.dt)
    values = psi0.values.copy()
    total = cfg.steps + extra_steps

    times = []
    records: dict[str, list[float]] = {name: [] for name in observers}

    def observe(step: int) -> None:
        if not observers and not records:
            times.append(step * cfg.dt)
            return
        lam = control.value(min(step, control.steps))
        v_node = eval_potential(model, lam, grid)
        point = ObservationPoint(
            step, step * cfg.dt, ComplexField(grid, values), v_node, cfg.g
        )
        times.append(point.t)
        for name, fn in observers.items():
            records[name].append(float(fn(point)))

    observe(0)
    v_frozen = None
    if np.all(control.samples == control.samples[0]):
        # Constant control: one potential evaluation serves every step.
        v_frozen = eval_potential(model, control.end, grid)
    for n in range(total):
        if v_frozen is not None:
            v_mid = v_frozen
        elif n < cfg.steps:
            v_mid = eval_potential(model, control.midpoint(n), grid)
        else:
            if v_frozen is None:
                v_frozen = eval_potential(model, control.end, grid)
            v_mid = v_frozen
        values = _split_step(values, v_mid, phase, cfg.dt, cfg.g, 1.0)
        if not np.isfinite(values.real.min()) or not np.isfinite(values.imag.min()):
            raise NumericalBlowupError(n + 1)
        if (n + 1) % cfg.record_stride == 0 or n + 1 == total:
            observe(n + 1)

    return PropagationResult(
        final=ComplexField(grid, values),
        times=np.asarray(times),
        records={k: np.asarray(v) for k, v in records.items()},
    )


def hamiltonian_terms(
    field: ComplexField, potential: np.ndarray, g: float
) -> tuple[float, float, float]:
    """(kinetic, potential, quartic) pieces of the energy functionals.

    Returns int 1/2|grad psi|^2, int V|psi|^2 and int |psi|^4; energy and
    chemical potential are assembled from these with weights g/2 and g.
    """
    grid = field.grid
    hat = _fftn(field.values)
    # Parseval for the unnormalized DFT: sum |psi|^2 = sum |hat|^2 / size.
    kinetic = (
        0.5
        * float(np.sum(grid.ksquared * np.abs(hat) ** 2))
        * grid.cell_volume
        / grid.size
    )
    dens = field.density()
    pot = float(np.sum(potential * dens)) * grid.cell_volume
    quartic = float(np.sum(dens**2)) * grid.cell_volume
    return kinetic, pot, quartic


def energy(field: ComplexField, potential: np.ndarray, g: float) -> float:
    kin, pot, quartic = hamiltonian_terms(field, potential, g)
    return kin + pot + 0.5 * g * quartic


def chemical_potential(field: ComplexField, potential: np.ndarray, g: float) -> float:
    kin, pot, quartic = hamiltonian_terms(field, potential, g)
    return kin + pot + g * quartic


def infidelity(target: ComplexField, state: ComplexField) -> float:
    """1 - |<target, state>|^2; zero iff the states agree up to phase."""
    return 1.0 - abs(inner_product(target, state)) ** 2


def norm_observer() -> Observer:
    return lambda p: p.field.norm()


def energy_observer() -> Observer:
    return lambda p: energy(p.field, p.potential, p.g)


def infidelity_observer(target: ComplexField) -> Observer:
    return lambda p: infidelity(target, p.field)


@dataclass
class GroundStateResult:
    state: ComplexField
    mu: float
    energy: float
    iterations: int
    residual: float = dataclass_field(default=np.nan)


def _imag_splitting_step(
    values: np.ndarray, potential: np.ndarray, grid: Grid, dtau: float, g: float
) -> np.ndarray:
    decay = np.exp(-0.5 * dtau * grid.ksquared)
    values = values * np.exp(-0.5 * dtau * (potential + g * np.abs(values) ** 2))
    values = _ifftn(decay * _fftn(values))
    values = values * np.exp(-0.5 * dtau * (potential + g * np.abs(values) ** 2))
    return values


def _fd_energy(values: np.ndarray, potential: np.ndarray, grid: Grid, g: float) -> float:
    # Energy functional of the finite difference discretization; the
    # imaginary-time monitor must measure the functional its flow actually
    # descends, otherwise legitimate progress reads as instability.
    from .bdg import fd_laplacian

    kin = -0.5 * np.real(np.vdot(values, fd_laplacian(values, grid))) * grid.cell_volume
    dens = np.abs(values) ** 2
    pot = float(np.sum(potential * dens) * grid.cell_volume)
    quartic = float(np.sum(dens**2) * grid.cell_volume)
    return float(kin) + pot + 0.5 * g * quartic


def _imag_fd_rk4_step(
    values: np.ndarray, potential: np.ndarray, grid: Grid, dtau: float, g: float
) -> np.ndarray:
    # Classical RK4 on the projected gradient flow
    #   dphi/dtau = -(H phi - mu(phi) phi),  mu = <phi, H phi>/<phi, phi>,
    # with the 6th order finite difference Laplacian.  Projecting out the
    # chemical potential makes discrete eigenstates exact equilibria of the
    # map for any dtau; the raw flow instead has an O(dtau*g) biased fixed
    # point because the stages see norm-decayed densities, which would
    # poison the finite difference stability analysis seeded from here.
    from .bdg import fd_laplacian

    def rhs(v: np.ndarray) -> np.ndarray:
        hv = -0.5 * fd_laplacian(v, grid) + (potential + g * np.abs(v) ** 2) * v
        mu = np.real(np.vdot(v, hv)) / np.real(np.vdot(v, v))
        return -(hv - mu * v)

    k1 = rhs(values)
    k2 = rhs(values + 0.5 * dtau * k1)
    k3 = rhs(values + 0.5 * dtau * k2)
    k4 = rhs(values + dtau * k3)
    return values + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def ground_state(
    model: TrapModel,
    lam: np.ndarray,
    grid: Grid,
    g: float,
    *,
    dtau: float = 1e-2,
    dtau_floor: float = 1e-5,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    integrator: str = "splitting",
    seed: ComplexField | None = None,
) -> GroundStateResult:
    """Minimize the energy functional by normalized imaginary-time flow.

    Each step applies the imaginary-time propagator and renormalizes.  A
    step that raises the energy is rejected and retried with dtau halved,
    down to ``dtau_floor``; convergence requires both the per-step energy
    decrease and the flow speed ||phi_new - phi|| / dtau to fall below
    ``tol``.  ``integrator`` selects ``splitting`` (spectral, default) or
    ``fd-rk4`` (6th order finite differences with classical Runge-Kutta).
    """
    if dtau <= 0 or tol <= 0:
        raise ValueError("dtau and tol must be positive")
    steppers = {"splitting": _imag_splitting_step, "fd-rk4": _imag_fd_rk4_step}
    if integrator not in steppers:
        raise ValueError(f"unknown integrator {integrator!r}")
    stepper = steppers[integrator]

    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    potential = eval_potential(model, lam, grid)
    if seed is None:
        widths = [e / 5.0 for e in grid.extent]
        seed = gaussian_field(grid, widths)
    values = seed.normalized().values.copy()

    # The monitored energy must belong to the discretization the stepper
    # descends; measuring the spectral functional along the finite
    # difference flow (or vice versa) misreads its progress as increases.
    if integrator == "fd-rk4":
        def monitor(vals: np.ndarray) -> float:
            return _fd_energy(vals, potential, grid, g)
    else:
        def monitor(vals: np.ndarray) -> float:
            return energy(ComplexField(grid, vals), potential, g)

    e_prev = monitor(values)
    dtau0 = dtau
    streak = 0
    iterations = 0
    speed = np.nan
    while iterations < max_iters:
        iterations += 1
        trial = stepper(values, potential, grid, dtau, g)
        nrm = np.sqrt(np.sum(np.abs(trial) ** 2) * grid.cell_volume)
        if not np.isfinite(nrm) or nrm == 0.0:
            if dtau > dtau_floor:
                dtau = max(0.5 * dtau, dtau_floor)
                streak = 0
                continue
            raise NumericalBlowupError(iterations)
        trial = trial / nrm
        e_new = monitor(trial)
        # Upticks below the roundoff scale of the energy sum are noise,
        # not instability; rejecting them strands dtau at the floor where
        # the flow contracts too slowly to ever meet the speed criterion.
        jitter = 1e-12 * max(1.0, abs(e_prev))
        if e_new > e_prev + jitter and dtau > dtau_floor:
            dtau = max(0.5 * dtau, dtau_floor)
            streak = 0
            continue
        streak += 1
        if streak >= 100 and dtau < dtau0:
            dtau = min(2.0 * dtau, dtau0)
            streak = 0
        diff = np.sqrt(np.sum(np.abs(trial - values) ** 2) * grid.cell_volume)
        speed = diff / dtau
        values = trial
        decrease = e_prev - e_new
        e_prev = e_new
        if abs(decrease) < tol and speed < tol:
            break
    else:
        raise RuntimeError(
            f"ground state did not converge within {max_iters} iterations"
        )

    state = ComplexField(grid, values)
    if integrator == "fd-rk4":
        from .bdg import fd_chemical_potential

        mu = fd_chemical_potential(state, potential, g)
        e_final = monitor(values)
    else:
        mu = chemical_potential(state, potential, g)
        kin, pot, quartic = hamiltonian_terms(state, potential, g)
        e_final = kin + pot + 0.5 * g * quartic
    return GroundStateResult(
        state=state,
        mu=mu,
        energy=e_final,
        iterations=iterations,
        residual=speed,
    )
