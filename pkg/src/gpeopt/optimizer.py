"""Descent methods over control curves in the H1_0 geometry.

Everything an optimizer needs to know about a problem is wrapped in a
:class:`~gpeopt.adjoint.Scenario`; the decision variables are the interior
samples of a :class:`~gpeopt.controls.ControlCurve` (endpoints stay pinned
because gradients vanish there).  All inner products, norms and curvature
updates use the H1_0 product int du/dt dv/dt dt - plain steepest descent
in that geometry already smooths the iterates, and the Hager-Zhang
nonlinear conjugate gradient update accelerates it at no extra evaluation
cost.

A multilevel driver optimizes on a coarse grid and time step first and
prolongates the control to finer levels, which removes most of the fine
grid iterations in practice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .adjoint import CostBreakdown, GradientCurve, Scenario, cost_and_gradient
from .controls import ControlCurve, h1_inner_product, h1_norm, resample_control


class LineSearchError(RuntimeError):
    """No step with a cost decrease was found within the budget."""


@dataclass
class OptimizerConfig:
    """Knobs for :func:`minimize`.

    ``method`` is ``hz-nlcg`` (default) or ``steepest-descent``.  The line
    search accepts a step once the sufficient-decrease condition with
    slope fraction ``wolfe_delta`` holds together with a model-curvature
    condition equivalent to the weak Wolfe bound with fraction
    ``wolfe_sigma``; it expands while the step looks too short and
    interpolates while too long, within ``ls_max_evals`` cost evaluations.
    """

    method: str = "hz-nlcg"
    max_iters: int = 50
    cost_tol: float = 1e-8
    window: int = 5
    grad_tol: float = 1e-10
    wolfe_delta: float = 0.1
    wolfe_sigma: float = 0.9
    ls_max_evals: int = 12
    expand: float = 2.0
    nlcg_eta: float = 0.01
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.method not in ("hz-nlcg", "steepest-descent"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0.0 < self.wolfe_delta < self.wolfe_sigma < 1.0:
            raise ValueError("need 0 < wolfe_delta < wolfe_sigma < 1")


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    terminal: float
    penalty: float
    grad_norm: float
    alpha: float
    cost_evals: int


@dataclass
class IterationLog:
    records: list[IterationRecord] = field(default_factory=list)

    def append(self, rec: IterationRecord) -> None:
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def costs(self) -> np.ndarray:
        return np.asarray([r.cost for r in self.records])


@dataclass
class OptimizeResult:
    control: ControlCurve
    cost: CostBreakdown
    gradient: GradientCurve
    log: IterationLog
    status: str
    cost_evals: int
    gradient_evals: int


def line_search(
    phi: Callable[[float], float],
    phi0: float,
    dphi0: float,
    *,
    alpha0: float = 1.0,
    delta: float = 0.1,
    sigma: float = 0.9,
    max_evals: int = 12,
    expand: float = 2.0,
) -> tuple[float, float, int]:
    """Find alpha > 0 with phi(alpha) < phi(0) along a descent direction.

    ``phi`` maps the step length to the cost; ``dphi0`` is the directional
    derivative at 0 in the H1_0 product and must be negative.  Acceptance
    combines sufficient decrease, phi(a) <= phi(0) + delta*a*dphi0, with a
    curvature condition evaluated on the quadratic model through
    (0, phi0, dphi0) and (a, phi(a)): the model slope at ``a`` must reach
    sigma*dphi0, else the step is expanded.  A failed decrease triggers
    safeguarded quadratic backtracking.  Returns (alpha, phi(alpha),
    evaluations); raises :class:`LineSearchError` if nothing below phi0
    was found within ``max_evals``.
    """
    if not np.isfinite(dphi0) or dphi0 >= 0.0:
        raise LineSearchError(f"not a descent direction (slope {dphi0:.3e})")
    if alpha0 <= 0.0:
        raise LineSearchError("initial step must be positive")

    alpha = float(alpha0)
    evals = 0
    best_alpha = 0.0
    best_phi = phi0

    def probe(a: float) -> float:
        nonlocal evals, best_alpha, best_phi
        evals += 1
        f = float(phi(a))
        if np.isfinite(f) and f < best_phi:
            best_alpha, best_phi = a, f
        return f

    while evals < max_evals:
        f = probe(alpha)
        if not np.isfinite(f):
            alpha *= 0.1
            continue
        denom = f - phi0 - dphi0 * alpha  # curvature of the quadratic model
        if f <= phi0 + delta * alpha * dphi0:
            # Sufficient decrease holds.  Model slope at alpha is
            # dphi0 + 2*denom/alpha; weak Wolfe needs it >= sigma*dphi0.
            if denom >= 0.5 * (1.0 - sigma) * (-dphi0) * alpha:
                if denom > 0.0:
                    refined = -0.5 * dphi0 * alpha**2 / denom
                    if (
                        0.0 < refined
                        and abs(refined - alpha) > 1e-12 * alpha
                        and evals < max_evals
                    ):
                        f_ref = probe(refined)
                        if np.isfinite(f_ref) and f_ref < f:
                            return refined, f_ref, evals
                return alpha, f, evals
            # Too short a step: the model says the slope is still steep.
            alpha *= expand
        else:
            # Too long: backtrack to the safeguarded model minimizer.
            if denom > 0.0:
                trial = -0.5 * dphi0 * alpha**2 / denom
            else:
                trial = 0.5 * alpha
            alpha = float(np.clip(trial, 0.05 * alpha, 0.9 * alpha))

    if best_alpha > 0.0 and best_phi < phi0:
        return best_alpha, best_phi, evals
    raise LineSearchError(
        f"no decrease within {max_evals} evaluations (phi0 = {phi0:.6e})"
    )


def _hager_zhang_beta(
    grad_new: GradientCurve,
    grad_old: GradientCurve,
    direction: ControlCurve,
    eta: float,
) -> float:
    """Hager-Zhang CG coefficient with the standard lower truncation."""
    y = grad_new - grad_old
    dy = h1_inner_product(direction, y)
    if abs(dy) < 1e-300:
        return 0.0
    yy = h1_inner_product(y, y)
    beta = (
        h1_inner_product(y, grad_new) - 2.0 * yy * h1_inner_product(direction, grad_new) / dy
    ) / dy
    d_norm = h1_norm(direction)
    g_norm = h1_norm(grad_old)
    if d_norm == 0.0 or g_norm == 0.0:
        return max(beta, 0.0)
    eta_k = -1.0 / (d_norm * min(eta, g_norm))
    return max(beta, eta_k)


def minimize(
    lam0: ControlCurve,
    scenario: Scenario,
    cfg: OptimizerConfig | None = None,
) -> OptimizeResult:
    """Descend the transfer cost from ``lam0``; endpoints never move.

    Runs steepest descent or Hager-Zhang NLCG (identical on their first
    iteration) until the relative cost decrease over ``cfg.window``
    iterations drops below ``cfg.cost_tol``, the H1 gradient norm drops
    below ``cfg.grad_tol``, or ``cfg.max_iters`` is reached.  A failed
    line search restarts along steepest descent once before giving up and
    returning the best iterate with status ``line-search-failed``.
    """
    cfg = cfg or OptimizerConfig()
    lam = lam0.copy()
    breakdown, grad = cost_and_gradient(lam, scenario)
    cost_evals = 1
    grad_evals = 1
    log = IterationLog()
    direction: ControlCurve = -1.0 * grad
    status = "max-iterations"
    alpha_prev: float | None = None
    dphi_prev: float | None = None

    for it in range(1, cfg.max_iters + 1):
        g_norm = h1_norm(grad)
        if g_norm < cfg.grad_tol:
            status = "gradient-converged"
            break
        dphi0 = h1_inner_product(grad, direction)
        if dphi0 >= 0.0:
            direction = -1.0 * grad
            dphi0 = -(g_norm**2)

        if alpha_prev is None:
            alpha0 = min(1.0, 2.0 * breakdown.total / max(-dphi0, 1e-300))
        else:
            # Transpose the previous step onto the new slope; same-scale
            # quadratic guess.
            alpha0 = alpha_prev * dphi_prev / dphi0
            alpha0 = float(np.clip(alpha0, 1e-3 * alpha_prev, 1e3 * alpha_prev))

        evals_before = cost_evals

        def phi(a: float) -> float:
            nonlocal cost_evals
            cost_evals += 1
            return scenario.cost(lam + a * direction).total

        try:
            alpha, _, _ = line_search(
                phi,
                breakdown.total,
                dphi0,
                alpha0=alpha0,
                delta=cfg.wolfe_delta,
                sigma=cfg.wolfe_sigma,
                max_evals=cfg.ls_max_evals,
                expand=cfg.expand,
            )
        except LineSearchError:
            if h1_inner_product(direction, -1.0 * grad) < 0.999 * g_norm**2:
                # Not (close to) steepest descent yet: restart and retry.
                direction = -1.0 * grad
                dphi0 = -(g_norm**2)
                try:
                    alpha, _, _ = line_search(
                        phi,
                        breakdown.total,
                        dphi0,
                        alpha0=min(1.0, 2.0 * breakdown.total / max(g_norm**2, 1e-300)),
                        delta=cfg.wolfe_delta,
                        sigma=cfg.wolfe_sigma,
                        max_evals=cfg.ls_max_evals,
                        expand=cfg.expand,
                    )
                except LineSearchError:
                    status = "line-search-failed"
                    break
            else:
                status = "line-search-failed"
                break

        lam = lam + alpha * direction
        breakdown, grad_new = cost_and_gradient(lam, scenario)
        cost_evals += 1
        grad_evals += 1
        log.append(
            IterationRecord(
                iteration=it,
                cost=breakdown.total,
                terminal=breakdown.terminal,
                penalty=breakdown.penalty,
                grad_norm=h1_norm(grad_new),
                alpha=alpha,
                cost_evals=cost_evals - evals_before,
            )
        )
        if cfg.verbose:
            print(
                f"iter {it:3d}  cost {breakdown.total:.6e}  "
                f"|g| {log.records[-1].grad_norm:.3e}  alpha {alpha:.3e}"
            )

        if cfg.method == "hz-nlcg":
            beta = _hager_zhang_beta(grad_new, grad, direction, cfg.nlcg_eta)
            direction = -1.0 * grad_new + beta * direction
        else:
            direction = -1.0 * grad_new
        grad = grad_new
        alpha_prev = alpha
        dphi_prev = dphi0

        costs = log.costs()
        if len(costs) > cfg.window:
            recent = costs[-(cfg.window + 1) :]
            rel_drop = (recent[0] - recent[-1]) / max(abs(recent[0]), 1e-300)
            if rel_drop < cfg.cost_tol:
                status = "cost-plateau"
                break

    return OptimizeResult(
        control=lam,
        cost=breakdown,
        gradient=grad,
        log=log,
        status=status,
        cost_evals=cost_evals,
        gradient_evals=grad_evals,
    )


@dataclass
class LevelSpec:
    """One multilevel stage: spatial points per axis and time step."""

    dims: tuple[int, ...]
    dt: float


@dataclass
class LevelSchedule:
    """Coarse-to-fine refinement plan with an early-exit tolerance.

    If the optimized control of a level differs from its prolongated
    initial guess by less than ``settle_tol`` in H1 norm, the remaining
    finer levels are skipped.
    """

    levels: Sequence[LevelSpec]
    settle_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("schedule needs at least one level")


@dataclass
class LevelOutcome:
    spec: LevelSpec
    result: OptimizeResult


@dataclass
class MultilevelResult:
    control: ControlCurve
    levels: list[LevelOutcome]
    status: str

    @property
    def final(self) -> OptimizeResult:
        return self.levels[-1].result


ScenarioFactory = Callable[[tuple[int, ...], float], Scenario]


def multilevel_optimize(
    lam0: ControlCurve,
    scenario_factory: ScenarioFactory,
    schedule: LevelSchedule,
    cfg: OptimizerConfig | None = None,
) -> MultilevelResult:
    """Optimize through a coarse-to-fine schedule of discretizations.

    ``scenario_factory(dims, dt)`` must build the transfer problem at the
    requested resolution (including its ground states).  The control is
    resampled to each level's time grid by cubic interpolation; endpoint
    values are preserved exactly.
    """
    cfg = cfg or OptimizerConfig()
    lam = lam0.copy()
    outcomes: list[LevelOutcome] = []
    status = "completed"
    for i, spec in enumerate(schedule.levels):
        steps = int(round(lam.horizon / spec.dt))
        if steps < 2:
            raise ValueError(f"level {i}: dt {spec.dt} too coarse for the horizon")
        lam_in = resample_control(lam, steps) if steps != lam.steps else lam
        scenario = scenario_factory(tuple(spec.dims), spec.dt)
        result = minimize(lam_in, scenario, cfg)
        outcomes.append(LevelOutcome(spec=spec, result=result))
        lam = result.control
        settled = h1_norm(lam - lam_in) < schedule.settle_tol
        if settled and i + 1 < len(schedule.levels):
            status = f"settled-after-level-{i}"
            break
    return MultilevelResult(control=lam, levels=outcomes, status=status)
