"""Command line interface: run scenarios, write artifacts.

Subcommands
-----------
groundstate
    Imaginary-time ground state at the start control values.
propagate
    Real-time evolution under a control (the configured guess, or one
    loaded from CSV), optionally continued past T with frozen controls.
optimize
    Minimize the transfer cost, multilevel if the config lists levels.
bdg
    Quasiparticle modes around the ground state at a control endpoint.
reduce1d
    Effective 1D coupling from the 3D ground state, plus the 1D ground
    state of the reduced model.
extract
    Excitation extraction: subtract the phase-aligned target from the
    post-protocol evolution.

Every run writes a JSON summary plus CSV, field snapshot and PNG
artifacts into the output directory.  ``--assert`` expressions of the
form ``key.path<=value`` are evaluated against the summary after the run;
any failure sets exit code 3.  Exit codes: 0 success, 1 configuration
error, 2 numerical failure, 3 failed assertion.
"""

from __future__ import annotations

import argparse
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import io, report
from .adjoint import Scenario
from .bdg import extract_excitation, solve_bdg
from .config import (
    ConfigError,
    ScenarioConfig,
    build_control,
    build_grid,
    build_trap,
    build_units,
    control_point_values,
    load_config,
    parse_config,
    protocol_steps,
)
from .controls import ControlCurve, linear_ramp, resample_control
from .grid import ComplexField, Grid
from .optimizer import (
    LevelSchedule,
    LevelSpec,
    LineSearchError,
    OptimizerConfig,
    multilevel_optimize,
)
from .potentials import eval_potential, frequency_floor
from .propagator import (
    GroundStateResult,
    NumericalBlowupError,
    PropagatorConfig,
    ground_state,
    infidelity_observer,
    norm_observer,
    energy_observer,
    propagate,
    set_fft_workers,
)
from .reduce1d import effective_g1d, interaction_hz_um, reduce_model
from .units import UnitSystem

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ASSERT = 3


# ---------------------------------------------------------------------------
# config resolution and common assembly

def available_presets() -> list[str]:
    root = resources.files("gpeopt") / "presets"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_config(spec: str) -> ScenarioConfig:
    """Load a scenario from a filesystem path or a packaged preset name."""
    path = Path(spec)
    if path.exists():
        return load_config(path)
    name = spec[: -len(".toml")] if spec.endswith(".toml") else spec
    candidate = resources.files("gpeopt") / "presets" / f"{name}.toml"
    if candidate.is_file():
        return parse_config(candidate.read_text(encoding="utf-8"))
    raise ConfigError(
        f"no such config file or preset: {spec!r}; presets: {', '.join(available_presets())}"
    )


def _ground(
    cfg: ScenarioConfig,
    model,
    grid: Grid,
    g: float,
    lam: np.ndarray,
    *,
    integrator: str | None = None,
    seed: ComplexField | None = None,
) -> GroundStateResult:
    gs = cfg.groundstate
    return ground_state(
        model,
        lam,
        grid,
        g,
        dtau=gs.dtau,
        dtau_floor=gs.dtau_floor,
        tol=gs.tol,
        max_iters=gs.max_iters,
        integrator=integrator or gs.integrator,
        seed=seed,
    )


def _fd_ground(cfg: ScenarioConfig, model, grid: Grid, g: float, lam: np.ndarray) -> GroundStateResult:
    # Two stage: fast spectral flow first, then finite-difference polish so
    # the state is stationary for the discretization the mode solver uses.
    coarse = _ground(cfg, model, grid, g, lam, integrator="splitting")
    return _ground(cfg, model, grid, g, lam, integrator="fd-rk4", seed=coarse.state)


def _ms(units: UnitSystem, t: float | np.ndarray):
    return units.time_from_dimless(t) * 1e3


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    return obj


def _finish(out: Path, summary: dict[str, Any], started: float) -> dict[str, Any]:
    summary["elapsed_s"] = round(time.perf_counter() - started, 3)
    summary["artifacts"] = sorted(p.name for p in out.iterdir() if p.is_file())
    safe = _json_safe(summary)
    io.write_summary(out / "summary.json", safe)
    return safe


# ---------------------------------------------------------------------------
# subcommands

def cmd_groundstate(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    grid = build_grid(cfg)
    model = build_trap(cfg, units)
    lam = control_point_values(cfg, "start")
    result = _ground(cfg, model, grid, units.g, lam)
    io.write_field_snapshot(
        out / "groundstate.bin",
        result.state,
        kind="groundstate",
        units=units,
        extra={"lambda": list(lam), "mu": result.mu, "energy": result.energy},
    )
    report.density_figure(out / "density.png", result.state, title="ground state density")
    summary = {
        "scenario": cfg.name,
        "subcommand": "groundstate",
        "lambda": list(lam),
        "energy": result.energy,
        "mu": result.mu,
        "iterations": result.iterations,
        "residual": result.residual,
    }
    return _finish(out, summary, started)


def _input_control(cfg: ScenarioConfig, units: UnitSystem, model, args) -> ControlCurve:
    """The control to propagate: a --control CSV, else the configured guess."""
    steps = protocol_steps(cfg)
    if getattr(args, "control", None):
        times_ms, samples = io.read_control_csv(args.control)
        if samples.shape[1] != model.n_controls:
            raise ConfigError(
                f"control file has {samples.shape[1]} parameters, trap needs {model.n_controls}"
            )
        horizon = units.time_to_dimless(times_ms[-1] * 1e-3)
        curve = ControlCurve(horizon, samples)
        if curve.steps != steps:
            curve = resample_control(curve, steps)
        return curve
    return build_control(cfg, units)


def _continuation_steps(cfg: ScenarioConfig, args, dt_ms: float) -> int:
    continue_ms = getattr(args, "continue_ms", None)
    if continue_ms is None:
        continue_ms = cfg.propagate.continue_to_ms
    if continue_ms is None:
        return 0
    if continue_ms <= cfg.protocol.horizon_ms:
        raise ConfigError("--continue-ms must exceed the protocol horizon")
    extra = round((continue_ms - cfg.protocol.horizon_ms) / dt_ms)
    if extra < 2:
        raise ConfigError("continuation must cover at least two steps")
    return extra


def cmd_propagate(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    grid = build_grid(cfg)
    model = build_trap(cfg, units)
    control = _input_control(cfg, units, model, args)

    psi0 = _ground(cfg, model, grid, units.g, control.samples[0]).state
    target = _ground(cfg, model, grid, units.g, control.samples[-1]).state

    dt = control.horizon / control.steps
    pcfg = PropagatorConfig(
        dt=dt, steps=control.steps, g=units.g, record_stride=cfg.propagate.record_stride
    )
    observers = {
        "infidelity": infidelity_observer(target),
        "norm": norm_observer(),
        "energy": energy_observer(),
    }
    run = propagate(psi0, model, control, pcfg, observers=observers)
    times = run.times
    records = {k: v for k, v in run.records.items()}
    io.write_field_snapshot(
        out / "psi_T.bin",
        run.final,
        kind="final",
        t_ms=cfg.protocol.horizon_ms,
        units=units,
        extra={"lambda": list(control.samples[-1])},
    )

    extra = _continuation_steps(cfg, args, dt_ms=cfg.protocol.horizon_ms / control.steps)
    psi_end = run.final
    if extra:
        frozen = linear_ramp(extra * dt, extra, control.samples[-1], control.samples[-1])
        run2 = propagate(psi_end, model, frozen, pcfg_replace(pcfg, steps=extra), observers=observers)
        times = np.concatenate([times, control.horizon + run2.times[1:]])
        for k in records:
            records[k] = np.concatenate([records[k], run2.records[k][1:]])
        psi_end = run2.final
        io.write_field_snapshot(
            out / "psi_end.bin",
            psi_end,
            kind="snapshot",
            t_ms=float(_ms(units, times[-1])),
            units=units,
            extra={"lambda": list(control.samples[-1])},
        )

    times_ms = _ms(units, times)
    io.write_control_csv(out / "control.csv", _ms(units, control.times), control.samples)
    io.write_series_csv(out / "infidelity.csv", times_ms, records["infidelity"])
    io.write_series_csv(out / "norm.csv", times_ms, records["norm"])
    io.write_series_csv(out / "energy.csv", times_ms, records["energy"])
    report.control_figure(out / "control.png", _ms(units, control.times), control.samples)
    report.series_figure(
        out / "infidelity.png",
        times_ms,
        np.maximum(records["infidelity"], 1e-18),
        ylabel="infidelity",
        mark_ms=cfg.protocol.horizon_ms,
    )
    report.density_figure(out / "density.png", psi_end, title="final density")

    at_T = int(np.argmin(np.abs(times - control.horizon)))
    after = records["infidelity"][times > control.horizon + 1e-12]
    summary = {
        "scenario": cfg.name,
        "subcommand": "propagate",
        "steps": control.steps,
        "extra_steps": extra,
        "infidelity_at_T": float(records["infidelity"][at_T]),
        "infidelity_final": float(records["infidelity"][-1]),
        "max_infidelity_after_T": float(after.max()) if after.size else None,
        "norm_drift": float(np.abs(records["norm"] - 1.0).max()),
        "energy_initial": float(records["energy"][0]),
        "energy_final": float(records["energy"][-1]),
    }
    return _finish(out, summary, started)


def pcfg_replace(pcfg: PropagatorConfig, **kw) -> PropagatorConfig:
    from dataclasses import replace

    return replace(pcfg, **kw)


def _optimizer_config(cfg: ScenarioConfig) -> OptimizerConfig:
    o = cfg.optimize
    return OptimizerConfig(
        method=o.method,
        max_iters=o.max_iters,
        cost_tol=o.cost_tol,
        window=o.window,
        grad_tol=o.grad_tol,
        wolfe_delta=o.wolfe_delta,
        wolfe_sigma=o.wolfe_sigma,
        ls_max_evals=o.ls_max_evals,
        verbose=o.verbose,
    )


def cmd_optimize(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    model = build_trap(cfg, units)

    level_list = list(cfg.optimize.levels) or [None]
    if args.level is not None:
        if not 1 <= args.level <= len(level_list):
            raise ConfigError(f"--level must be in 1..{len(level_list)}")
        level_list = [level_list[args.level - 1]]
    specs = []
    for entry in level_list:
        dims = cfg.grid.dims if entry is None else tuple(entry.dims)
        dt_ms = cfg.protocol.dt_ms if entry is None else entry.dt_ms
        specs.append(LevelSpec(dims=dims, dt=units.time_to_dimless(dt_ms * 1e-3)))

    cache: dict[tuple[int, ...], tuple[ComplexField, ComplexField]] = {}

    def factory(dims: tuple[int, ...], dt: float) -> Scenario:
        if dims not in cache:
            grid = build_grid(cfg, dims)
            lam0 = control_point_values(cfg, "start")
            lam1 = control_point_values(cfg, "end")
            psi0 = _ground(cfg, model, grid, units.g, lam0).state
            target = _ground(cfg, model, grid, units.g, lam1).state
            cache[dims] = (psi0, target)
        psi0, target = cache[dims]
        return Scenario(
            grid=psi0.grid,
            model=model,
            g=units.g,
            gamma=cfg.gamma,
            psi0=psi0,
            psi_target=target,
        )

    first_dt_ms = cfg.protocol.dt_ms if level_list[0] is None else level_list[0].dt_ms
    lam0 = build_control(cfg, units, dt_ms=first_dt_ms)
    initial = factory(specs[0].dims, specs[0].dt).cost(lam0)

    schedule = LevelSchedule(levels=specs, settle_tol=cfg.optimize.settle_tol)
    result = multilevel_optimize(lam0, factory, schedule, _optimizer_config(cfg))
    final = result.final.cost

    # Measured infidelity of the optimized control on the finest level.
    finest = factory(specs[-1].dims, specs[-1].dt)
    control = result.control
    pcfg = finest.propagator_config(control)
    run = propagate(
        finest.psi0,
        model,
        control,
        pcfg_replace(pcfg, record_stride=max(1, control.steps // 200)),
        observers={"infidelity": infidelity_observer(finest.psi_target)},
    )
    io.write_field_snapshot(
        out / "psi_T.bin",
        run.final,
        kind="final",
        t_ms=cfg.protocol.horizon_ms,
        units=units,
        extra={"lambda": list(control.samples[-1])},
    )

    io.write_control_csv(out / "control_initial.csv", _ms(units, lam0.times), lam0.samples)
    io.write_control_csv(out / "control_optimal.csv", _ms(units, control.times), control.samples)
    all_costs = [initial.total]
    for outcome in result.levels:
        all_costs.extend(outcome.result.log.costs().tolist())
    io.write_series_csv(
        out / "cost_history.csv", np.arange(len(all_costs), dtype=float), np.asarray(all_costs)
    )
    report.control_figure(out / "control.png", _ms(units, control.times), control.samples,
                          title="optimized control")
    report.convergence_figure(out / "convergence.png", all_costs)
    report.series_figure(
        out / "infidelity.png",
        _ms(units, run.times),
        np.maximum(run.records["infidelity"], 1e-18),
        ylabel="infidelity",
        logy=True,
    )

    summary = {
        "scenario": cfg.name,
        "subcommand": "optimize",
        "status": result.status,
        "levels": [
            {
                "dims": list(o.spec.dims),
                "dt_ms": float(round(_ms(units, o.spec.dt), 12)),
                "iterations": len(o.result.log),
                "status": o.result.status,
                "cost": o.result.cost.total,
                "terminal": o.result.cost.terminal,
                "penalty": o.result.cost.penalty,
                "cost_evals": o.result.cost_evals,
            }
            for o in result.levels
        ],
        "cost": {
            "initial": initial.total,
            "final": final.total,
            "terminal": final.terminal,
            "penalty": final.penalty,
            "reduction_factor": initial.total / final.total if final.total > 0 else None,
        },
        "infidelity_at_T": float(run.records["infidelity"][-1]),
        "endpoints_fixed": bool(
            np.array_equal(control.samples[0], lam0.samples[0])
            and np.array_equal(control.samples[-1], lam0.samples[-1])
        ),
    }
    return _finish(out, summary, started)


def cmd_bdg(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    dims = cfg.bdg.dims if cfg.bdg.dims is not None else None
    grid = build_grid(cfg, dims)
    model = build_trap(cfg, units)
    lam = control_point_values(cfg, cfg.bdg.control_point)

    gs = _fd_ground(cfg, model, grid, units.g, lam)
    potential = eval_potential(model, lam, grid)
    if cfg.bdg.frequency_scale_hz is not None:
        scale = units.omega_to_dimless(cfg.bdg.frequency_scale_hz.rad_s)
    else:
        scale = frequency_floor(model, lam)
    modes = solve_bdg(
        gs.state,
        potential,
        units.g,
        n_modes=cfg.bdg.n_modes,
        frequency_scale=scale,
        sigma=cfg.bdg.sigma,
        goldstone_tol=cfg.bdg.goldstone_tol,
    )

    mode_rows = []
    for i, mode in enumerate(modes, start=1):
        omega_rad_s = units.omega_from_dimless(mode.omega)
        norm = mode.u.norm() ** 2 - mode.v.norm() ** 2
        mode_rows.append(
            {
                "index": i,
                "omega": mode.omega,
                "omega_rad_s": omega_rad_s,
                "frequency_hz": omega_rad_s / (2.0 * np.pi),
                "effective_period_ms": float(_ms(units, mode.effective_period)),
                "residual": mode.residual,
                "normalization": norm,
            }
        )
        for tag, f in (("u", mode.u), ("v", mode.v)):
            io.write_field_snapshot(
                out / f"mode_{i}_{tag}.bin",
                f,
                kind=f"bdg-{tag}",
                units=units,
                extra={"mode": i, "omega": mode.omega},
            )

    report.modes_figure(
        out / "modes.png",
        [m.omega for m in modes],
        [m.u for m in modes],
        [m.v for m in modes],
        axis=0,
    )
    report.density_figure(out / "density.png", gs.state, title="stationary state density")

    summary = {
        "scenario": cfg.name,
        "subcommand": "bdg",
        "lambda": list(lam),
        "dims": list(grid.dims),
        "mu": gs.mu,
        "frequency_scale": scale,
        "modes": mode_rows,
    }
    return _finish(out, summary, started)


def cmd_reduce1d(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    grid = build_grid(cfg)
    model = build_trap(cfg, units)
    lam = control_point_values(cfg, cfg.reduce1d.control_point)

    gs3 = _ground(cfg, model, grid, units.g, lam)
    g1d = effective_g1d(gs3.state, units.g)
    g1d_hz_um = interaction_hz_um(g1d, units)

    model1d, grid1d = reduce_model(model, grid)
    gs1 = _ground(cfg, model1d, grid1d, g1d, lam)
    io.write_field_snapshot(
        out / "groundstate_1d.bin",
        gs1.state,
        kind="groundstate-1d",
        units=units,
        extra={"lambda": list(lam), "g1d": g1d},
    )

    # Axis densities: 3D marginal over the transverse plane vs reduced 1D.
    density3 = np.abs(gs3.state.values) ** 2
    marginal = density3.sum(axis=(1, 2)) * grid.spacing[1] * grid.spacing[2]
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(grid.axes[0], marginal, label="3D marginal")
    ax.plot(grid1d.axes[0], np.abs(gs1.state.values) ** 2, "--", label="1D model")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "profile.png", dpi=150)
    plt.close(fig)

    summary = {
        "scenario": cfg.name,
        "subcommand": "reduce1d",
        "lambda": list(lam),
        "g": units.g,
        "g1d": g1d,
        "g1d_h_hz_um": g1d_hz_um,
        "mu_3d": gs3.mu,
        "mu_1d": gs1.mu,
        "energy_1d": gs1.energy,
    }
    return _finish(out, summary, started)


def cmd_extract(cfg: ScenarioConfig, out: Path, args: argparse.Namespace) -> dict:
    started = time.perf_counter()
    units = build_units(cfg)
    grid = build_grid(cfg)
    model = build_trap(cfg, units)
    control = _input_control(cfg, units, model, args)

    psi0 = _ground(cfg, model, grid, units.g, control.samples[0]).state
    target_res = _ground(cfg, model, grid, units.g, control.samples[-1])
    target = target_res.state

    dt = control.horizon / control.steps
    pcfg = PropagatorConfig(
        dt=dt, steps=control.steps, g=units.g, record_stride=cfg.propagate.record_stride
    )
    run = propagate(psi0, model, control, pcfg)
    psi_T = run.final

    extra = _continuation_steps(cfg, args, dt_ms=cfg.protocol.horizon_ms / control.steps)
    snapshots: list[tuple[float, ComplexField]] = [(control.horizon, psi_T)]
    state = psi_T
    if extra:
        chunk = max(cfg.propagate.record_stride, 2)
        done = 0
        while done < extra:
            n = min(chunk, extra - done)
            if n < 2:
                n = extra - done  # final short remainder merges into one call
            frozen = linear_ramp(n * dt, n, control.samples[-1], control.samples[-1])
            state = propagate(state, model, frozen, pcfg_replace(pcfg, steps=n, record_stride=n)).final
            done += n
            snapshots.append((control.horizon + done * dt, state))

    theta, deltas = extract_excitation(snapshots, psi_T, target, target_res.mu, control.horizon)
    times = np.asarray([t for t, _ in deltas])
    norms = np.asarray([d.norm() for _, d in deltas])
    io.write_series_csv(out / "deviation.csv", _ms(units, times), norms)
    io.write_field_snapshot(
        out / "delta_end.bin",
        deltas[-1][1],
        kind="excitation",
        t_ms=float(_ms(units, times[-1])),
        units=units,
        extra={"theta": theta, "mu": target_res.mu},
    )
    report.series_figure(
        out / "deviation.png",
        _ms(units, times),
        np.maximum(norms, 1e-18),
        ylabel="|delta psi|",
        logy=True,
    )

    overlap_T = abs(np.vdot(target.values, psi_T.values)) * grid.cell_volume
    summary = {
        "scenario": cfg.name,
        "subcommand": "extract",
        "theta": theta,
        "mu": target_res.mu,
        "overlap_at_T": float(overlap_T),
        "deviation_at_T": float(norms[0]),
        "deviation_max": float(norms.max()),
        "snapshots": len(deltas),
    }
    return _finish(out, summary, started)


# ---------------------------------------------------------------------------
# assertion mode

def _lookup(summary: dict, dotted: str) -> Any:
    node: Any = summary
    for part in dotted.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise KeyError(dotted)
    return node

_OPS: dict[str, Callable[[float, float], bool]] = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def run_assertions(summary: dict, expressions: list[str]) -> bool:
    """Evaluate ``key.path OP value`` checks against a run summary."""
    ok = True
    for expr in expressions:
        for op in ("<=", ">=", "==", "!=", "<", ">"):
            if op in expr:
                key, _, rhs = expr.partition(op)
                break
        else:
            print(f"assert {expr}: MALFORMED (no comparison operator)")
            ok = False
            continue
        try:
            actual = float(_lookup(summary, key.strip()))
            bound = float(rhs)
        except (KeyError, TypeError, ValueError) as exc:
            print(f"assert {expr}: ERROR ({exc})")
            ok = False
            continue
        passed = _OPS[op](actual, bound)
        print(f"assert {expr}: {'PASS' if passed else 'FAIL'} (actual {actual:.6g})")
        ok = ok and passed
    return ok


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "groundstate": cmd_groundstate,
    "propagate": cmd_propagate,
    "optimize": cmd_optimize,
    "bdg": cmd_bdg,
    "reduce1d": cmd_reduce1d,
    "extract": cmd_extract,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpeopt", description="Optimal control of trapped condensates."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("groundstate", "imaginary-time ground state"),
        ("propagate", "real-time evolution under a control"),
        ("optimize", "minimize the transfer cost"),
        ("bdg", "quasiparticle modes around a stationary state"),
        ("reduce1d", "effective 1D reduction"),
        ("extract", "excitation extraction after the protocol"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file path or preset name")
        p.add_argument("--out", default=None, help="output directory (default runs/<name>/<cmd>)")
        p.add_argument("--threads", type=int, default=None, help="FFT worker threads")
        p.add_argument(
            "--assert",
            dest="checks",
            action="append",
            default=[],
            metavar="EXPR",
            help="summary assertion like cost.reduction_factor>=100 (repeatable)",
        )
        if name == "optimize":
            p.add_argument("--level", type=int, default=None, help="run one schedule level (1-based)")
        if name in ("propagate", "extract"):
            p.add_argument("--control", default=None, help="control curve CSV to propagate")
            p.add_argument(
                "--continue-ms",
                dest="continue_ms",
                type=float,
                default=None,
                help="continue with frozen control until this time",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    try:
        cfg = resolve_config(args.config)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be at least 1")
            set_fft_workers(args.threads)
        out = Path(args.out) if args.out else Path("runs") / cfg.name / args.command
        out.mkdir(parents=True, exist_ok=True)
        summary = _COMMANDS[args.command](cfg, out, args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowupError, LineSearchError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    print(f"{args.command} finished; summary at {out / 'summary.json'}")
    if args.checks and not run_assertions(summary, args.checks):
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
