"""TOML scenario configuration: parsing, validation, serialization.

A configuration file describes one physical scenario end to end: unit
system, grid, trap model with physical frequencies, protocol horizon and
step size, initial control guess, cost weights, ground state solver
settings, optimizer settings with an optional multilevel schedule, and
the stability/reduction post-processing sections.  All physical values
live here; the numerical core only ever sees dimensionless quantities.

Frequencies are written as inline tables ``{hz = 2000.0, angular =
false}``: with ``angular = false`` the number is an ordinary frequency
that picks up 2*pi, with ``angular = true`` it already is an angular
frequency in rad/s.  Unknown keys anywhere in the file are rejected so
typos fail loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

try:  # tomllib landed in 3.11; tomli is the same parser for 3.10
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .controls import ControlCurve, linear_ramp, sine_offset_ramp
from .grid import Grid
from .potentials import (
    HarmonicTrap2P,
    RfSplitTrap,
    SaturationCurve,
    ToroidalTrap2P,
    TrapModel,
)
from .units import UnitSystem, angular_frequency, dimensionless_units

TRAP_KINDS = ("harmonic-2p", "toroidal-2p", "rf-split-1p", "rf-split-2p")
CONTROL_GUESSES = ("linear", "sine-offset")
CONTROL_POINTS = ("start", "end")


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


@dataclass(frozen=True)
class FrequencySpec:
    """A configured frequency: value in Hz plus the angular flag."""

    hz: float
    angular: bool = False

    @property
    def rad_s(self) -> float:
        return angular_frequency(self.hz, self.angular)

    def to_dict(self) -> dict[str, Any]:
        return {"hz": self.hz, "angular": self.angular}


@dataclass(frozen=True)
class UnitsConfig:
    atom_count: int
    scattering_length_m: float = 5.24e-9
    mass_kg: float = 1.44e-25
    length_unit_m: float = 1e-6


@dataclass(frozen=True)
class GridConfig:
    dims: tuple[int, ...]
    extent: tuple[float, ...]  # half box length per axis, in length units


@dataclass(frozen=True)
class TrapConfig:
    kind: str
    frequencies: dict[str, FrequencySpec]
    barrier_height_hz: float | None = None  # toroidal: energy as h*f
    barrier_waist: float | None = None  # toroidal: in length units
    mf: int = 2
    mf_dressed: int = 2
    saturation_knots: tuple[float, ...] | None = None
    saturation_values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ProtocolConfig:
    horizon_ms: float
    dt_ms: float


@dataclass(frozen=True)
class ControlConfig:
    guess: str
    start: tuple[float, ...]
    end: tuple[float, ...]
    amplitudes: tuple[float, ...] | None = None  # sine-offset only


@dataclass(frozen=True)
class GroundStateConfig:
    dtau: float = 1e-2
    dtau_floor: float = 1e-5
    tol: float = 1e-10
    max_iters: int = 100_000
    integrator: str = "splitting"


@dataclass(frozen=True)
class LevelConfig:
    dims: tuple[int, ...]
    dt_ms: float


@dataclass(frozen=True)
class OptimizeConfig:
    method: str = "hz-nlcg"
    max_iters: int = 50
    cost_tol: float = 1e-8
    grad_tol: float = 1e-10
    window: int = 5
    wolfe_delta: float = 0.1
    wolfe_sigma: float = 0.9
    ls_max_evals: int = 12
    settle_tol: float = 1e-6
    verbose: bool = False
    levels: tuple[LevelConfig, ...] = ()


@dataclass(frozen=True)
class BdgConfig:
    n_modes: int = 3
    control_point: str = "end"
    dims: tuple[int, ...] | None = None
    sigma: float | None = None
    goldstone_tol: float = 1e-3
    frequency_scale_hz: FrequencySpec | None = None


@dataclass(frozen=True)
class Reduce1dConfig:
    control_point: str = "start"


@dataclass(frozen=True)
class PropagateConfig:
    record_stride: int = 10
    # Frozen-control continuation horizon; None means stop at T.
    continue_to_ms: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated, typed view of one scenario TOML file."""

    name: str
    units: UnitsConfig
    grid: GridConfig
    trap: TrapConfig
    protocol: ProtocolConfig
    control: ControlConfig
    gamma: float = 1e-6
    groundstate: GroundStateConfig = field(default_factory=GroundStateConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    bdg: BdgConfig = field(default_factory=BdgConfig)
    reduce1d: Reduce1dConfig = field(default_factory=Reduce1dConfig)
    propagate: PropagateConfig = field(default_factory=PropagateConfig)


# ---------------------------------------------------------------------------
# parsing helpers

def _require(table: dict, key: str, where: str) -> Any:
    if key not in table:
        raise ConfigError(f"missing required key '{where}.{key}'")
    return table[key]


def _reject_unknown(table: dict, known: set[str], where: str) -> None:
    unknown = set(table) - known
    if unknown:
        names = ", ".join(sorted(unknown))
        raise ConfigError(f"unknown key(s) in [{where}]: {names}")


def _as_float(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{where}' must be a number, got {value!r}")
    return float(value)


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{where}' must be an integer, got {value!r}")
    return value


def _as_bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"'{where}' must be a boolean, got {value!r}")
    return value


def _as_str(value: Any, where: str, allowed: tuple[str, ...] | None = None) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"'{where}' must be a string, got {value!r}")
    if allowed is not None and value not in allowed:
        raise ConfigError(f"'{where}' must be one of {allowed}, got {value!r}")
    return value


def _as_float_list(value: Any, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{where}' must be a non-empty array of numbers")
    return tuple(_as_float(v, f"{where}[{i}]") for i, v in enumerate(value))


def _as_int_list(value: Any, where: str) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"'{where}' must be a non-empty array of integers")
    return tuple(_as_int(v, f"{where}[{i}]") for i, v in enumerate(value))


def _as_frequency(value: Any, where: str) -> FrequencySpec:
    if not isinstance(value, dict):
        raise ConfigError(
            f"'{where}' must be a table like {{hz = 2000.0, angular = false}}"
        )
    _reject_unknown(value, {"hz", "angular"}, where)
    hz = _as_float(_require(value, "hz", where), f"{where}.hz")
    angular = _as_bool(value.get("angular", False), f"{where}.angular")
    return FrequencySpec(hz=hz, angular=angular)


_TRAP_FREQ_KEYS: dict[str, tuple[str, ...]] = {
    "harmonic-2p": (
        "omega_x_initial",
        "omega_x_final",
        "omega_y_initial",
        "omega_y_final",
        "omega_z",
    ),
    "toroidal-2p": ("omega_x_initial", "omega_x_final", "omega_y", "omega_z"),
    "rf-split-1p": ("omega_perp", "omega_long", "omega_larmor", "detuning", "rabi_max"),
    "rf-split-2p": ("omega_perp", "omega_long", "omega_larmor", "detuning", "rabi_max"),
}


def _parse_trap(table: dict) -> TrapConfig:
    kind = _as_str(_require(table, "kind", "trap"), "trap.kind", TRAP_KINDS)
    freq_keys = _TRAP_FREQ_KEYS[kind]
    known = {"kind", "saturation", *freq_keys}
    if kind == "toroidal-2p":
        known |= {"barrier_height_hz", "barrier_waist"}
    if kind.startswith("rf-split"):
        known |= {"mf", "mf_dressed"}
    _reject_unknown(table, known, "trap")

    freqs = {k: _as_frequency(_require(table, k, "trap"), f"trap.{k}") for k in freq_keys}

    barrier_height_hz = None
    barrier_waist = None
    if kind == "toroidal-2p":
        barrier_height_hz = _as_float(
            _require(table, "barrier_height_hz", "trap"), "trap.barrier_height_hz"
        )
        barrier_waist = _as_float(
            _require(table, "barrier_waist", "trap"), "trap.barrier_waist"
        )

    mf = _as_int(table.get("mf", 2), "trap.mf") if kind.startswith("rf-split") else 2
    mf_dressed = (
        _as_int(table.get("mf_dressed", 2), "trap.mf_dressed")
        if kind.startswith("rf-split")
        else 2
    )

    knots = values = None
    if "saturation" in table:
        sat = table["saturation"]
        if not isinstance(sat, dict):
            raise ConfigError("'trap.saturation' must be a table")
        _reject_unknown(sat, {"knots", "values"}, "trap.saturation")
        knots = _as_float_list(_require(sat, "knots", "trap.saturation"), "trap.saturation.knots")
        values = _as_float_list(
            _require(sat, "values", "trap.saturation"), "trap.saturation.values"
        )
        if len(knots) != len(values):
            raise ConfigError("'trap.saturation' knots and values must have equal length")

    return TrapConfig(
        kind=kind,
        frequencies=freqs,
        barrier_height_hz=barrier_height_hz,
        barrier_waist=barrier_waist,
        mf=mf,
        mf_dressed=mf_dressed,
        saturation_knots=knots,
        saturation_values=values,
    )


def _parse_levels(raw: Any) -> tuple[LevelConfig, ...]:
    if not isinstance(raw, list):
        raise ConfigError("'optimize.levels' must be an array of tables")
    levels = []
    for i, entry in enumerate(raw):
        where = f"optimize.levels[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"'{where}' must be a table")
        _reject_unknown(entry, {"dims", "dt_ms"}, where)
        dims = _as_int_list(_require(entry, "dims", where), f"{where}.dims")
        dt_ms = _as_float(_require(entry, "dt_ms", where), f"{where}.dt_ms")
        levels.append(LevelConfig(dims=dims, dt_ms=dt_ms))
    return tuple(levels)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario configuration from TOML text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc

    _reject_unknown(
        raw,
        {
            "scenario",
            "units",
            "grid",
            "trap",
            "protocol",
            "control",
            "cost",
            "groundstate",
            "optimize",
            "bdg",
            "reduce1d",
            "propagate",
        },
        "root",
    )

    scen = raw.get("scenario", {})
    _reject_unknown(scen, {"name"}, "scenario")
    name = _as_str(scen.get("name", "unnamed"), "scenario.name")

    units_t = _require(raw, "units", "root")
    _reject_unknown(
        units_t,
        {"atom_count", "scattering_length_m", "mass_kg", "length_unit_m"},
        "units",
    )
    units = UnitsConfig(
        atom_count=_as_int(_require(units_t, "atom_count", "units"), "units.atom_count"),
        scattering_length_m=_as_float(
            units_t.get("scattering_length_m", 5.24e-9), "units.scattering_length_m"
        ),
        mass_kg=_as_float(units_t.get("mass_kg", 1.44e-25), "units.mass_kg"),
        length_unit_m=_as_float(units_t.get("length_unit_m", 1e-6), "units.length_unit_m"),
    )
    if units.atom_count <= 0:
        raise ConfigError("'units.atom_count' must be positive")

    grid_t = _require(raw, "grid", "root")
    _reject_unknown(grid_t, {"dims", "extent"}, "grid")
    grid = GridConfig(
        dims=_as_int_list(_require(grid_t, "dims", "grid"), "grid.dims"),
        extent=_as_float_list(_require(grid_t, "extent", "grid"), "grid.extent"),
    )
    if len(grid.dims) != len(grid.extent):
        raise ConfigError("'grid.dims' and 'grid.extent' must have equal length")

    trap = _parse_trap(_require(raw, "trap", "root"))

    proto_t = _require(raw, "protocol", "root")
    _reject_unknown(proto_t, {"horizon_ms", "dt_ms"}, "protocol")
    protocol = ProtocolConfig(
        horizon_ms=_as_float(_require(proto_t, "horizon_ms", "protocol"), "protocol.horizon_ms"),
        dt_ms=_as_float(_require(proto_t, "dt_ms", "protocol"), "protocol.dt_ms"),
    )
    if protocol.horizon_ms <= 0 or protocol.dt_ms <= 0:
        raise ConfigError("'protocol' horizon_ms and dt_ms must be positive")

    control_t = _require(raw, "control", "root")
    _reject_unknown(control_t, {"guess", "start", "end", "amplitudes"}, "control")
    control = ControlConfig(
        guess=_as_str(control_t.get("guess", "linear"), "control.guess", CONTROL_GUESSES),
        start=_as_float_list(_require(control_t, "start", "control"), "control.start"),
        end=_as_float_list(_require(control_t, "end", "control"), "control.end"),
        amplitudes=(
            _as_float_list(control_t["amplitudes"], "control.amplitudes")
            if "amplitudes" in control_t
            else None
        ),
    )
    n_params = 2 if trap.kind in ("harmonic-2p", "toroidal-2p", "rf-split-2p") else 1
    if len(control.start) != n_params or len(control.end) != n_params:
        raise ConfigError(
            f"trap kind '{trap.kind}' has {n_params} control parameter(s); "
            f"'control.start'/'control.end' must match"
        )
    if control.guess == "sine-offset":
        if control.amplitudes is None or len(control.amplitudes) != n_params:
            raise ConfigError(
                "'control.amplitudes' must be given per parameter for the sine-offset guess"
            )

    cost_t = raw.get("cost", {})
    _reject_unknown(cost_t, {"gamma"}, "cost")
    gamma = _as_float(cost_t.get("gamma", 1e-6), "cost.gamma")
    if gamma < 0:
        raise ConfigError("'cost.gamma' must be non-negative")

    gs_t = raw.get("groundstate", {})
    _reject_unknown(gs_t, {"dtau", "dtau_floor", "tol", "max_iters", "integrator"}, "groundstate")
    groundstate = GroundStateConfig(
        dtau=_as_float(gs_t.get("dtau", 1e-2), "groundstate.dtau"),
        dtau_floor=_as_float(gs_t.get("dtau_floor", 1e-5), "groundstate.dtau_floor"),
        tol=_as_float(gs_t.get("tol", 1e-10), "groundstate.tol"),
        max_iters=_as_int(gs_t.get("max_iters", 100_000), "groundstate.max_iters"),
        integrator=_as_str(
            gs_t.get("integrator", "splitting"),
            "groundstate.integrator",
            ("splitting", "fd-rk4"),
        ),
    )

    opt_t = raw.get("optimize", {})
    _reject_unknown(
        opt_t,
        {
            "method",
            "max_iters",
            "cost_tol",
            "grad_tol",
            "window",
            "wolfe_delta",
            "wolfe_sigma",
            "ls_max_evals",
            "settle_tol",
            "verbose",
            "levels",
        },
        "optimize",
    )
    optimize = OptimizeConfig(
        method=_as_str(
            opt_t.get("method", "hz-nlcg"),
            "optimize.method",
            ("hz-nlcg", "steepest-descent"),
        ),
        max_iters=_as_int(opt_t.get("max_iters", 50), "optimize.max_iters"),
        cost_tol=_as_float(opt_t.get("cost_tol", 1e-8), "optimize.cost_tol"),
        grad_tol=_as_float(opt_t.get("grad_tol", 1e-10), "optimize.grad_tol"),
        window=_as_int(opt_t.get("window", 5), "optimize.window"),
        wolfe_delta=_as_float(opt_t.get("wolfe_delta", 0.1), "optimize.wolfe_delta"),
        wolfe_sigma=_as_float(opt_t.get("wolfe_sigma", 0.9), "optimize.wolfe_sigma"),
        ls_max_evals=_as_int(opt_t.get("ls_max_evals", 12), "optimize.ls_max_evals"),
        settle_tol=_as_float(opt_t.get("settle_tol", 1e-6), "optimize.settle_tol"),
        verbose=_as_bool(opt_t.get("verbose", False), "optimize.verbose"),
        levels=_parse_levels(opt_t["levels"]) if "levels" in opt_t else (),
    )

    bdg_t = raw.get("bdg", {})
    _reject_unknown(
        bdg_t,
        {"n_modes", "control_point", "dims", "sigma", "goldstone_tol", "frequency_scale"},
        "bdg",
    )
    bdg = BdgConfig(
        n_modes=_as_int(bdg_t.get("n_modes", 3), "bdg.n_modes"),
        control_point=_as_str(
            bdg_t.get("control_point", "end"), "bdg.control_point", CONTROL_POINTS
        ),
        dims=_as_int_list(bdg_t["dims"], "bdg.dims") if "dims" in bdg_t else None,
        sigma=_as_float(bdg_t["sigma"], "bdg.sigma") if "sigma" in bdg_t else None,
        goldstone_tol=_as_float(bdg_t.get("goldstone_tol", 1e-3), "bdg.goldstone_tol"),
        frequency_scale_hz=(
            _as_frequency(bdg_t["frequency_scale"], "bdg.frequency_scale")
            if "frequency_scale" in bdg_t
            else None
        ),
    )

    red_t = raw.get("reduce1d", {})
    _reject_unknown(red_t, {"control_point"}, "reduce1d")
    reduce1d = Reduce1dConfig(
        control_point=_as_str(
            red_t.get("control_point", "start"), "reduce1d.control_point", CONTROL_POINTS
        )
    )

    prop_t = raw.get("propagate", {})
    _reject_unknown(prop_t, {"record_stride", "continue_to_ms"}, "propagate")
    propagate = PropagateConfig(
        record_stride=_as_int(prop_t.get("record_stride", 10), "propagate.record_stride"),
        continue_to_ms=(
            _as_float(prop_t["continue_to_ms"], "propagate.continue_to_ms")
            if "continue_to_ms" in prop_t
            else None
        ),
    )
    if propagate.record_stride < 1:
        raise ConfigError("'propagate.record_stride' must be at least 1")
    if propagate.continue_to_ms is not None and propagate.continue_to_ms <= protocol.horizon_ms:
        raise ConfigError("'propagate.continue_to_ms' must exceed 'protocol.horizon_ms'")

    return ScenarioConfig(
        name=name,
        units=units,
        grid=grid,
        trap=trap,
        protocol=protocol,
        control=control,
        gamma=gamma,
        groundstate=groundstate,
        optimize=optimize,
        bdg=bdg,
        reduce1d=reduce1d,
        propagate=propagate,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario configuration file."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# serialization (round trip partner of parse_config)

def _toml_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"cannot serialize non-finite float {value!r}")
        text = f"{value:.17g}"
        # TOML floats need a dot or exponent to stay floats on re-read.
        if "." not in text and "e" not in text and "E" not in text:
            text += ".0"
        return text
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    if isinstance(value, dict):
        inner = ", ".join(f"{k} = {_toml_scalar(v)}" for k, v in value.items())
        return "{" + inner + "}"
    raise ConfigError(f"cannot serialize value of type {type(value).__name__}")


def _emit_table(name: str, table: dict[str, Any], lines: list[str]) -> None:
    scalars = {
        k: v for k, v in table.items() if not isinstance(v, (dict, list)) or _is_inline(v)
    }
    subtables = {k: v for k, v in table.items() if isinstance(v, dict) and k not in scalars}
    arrays = {
        k: v
        for k, v in table.items()
        if isinstance(v, list) and v and isinstance(v[0], dict)
    }
    lines.append(f"[{name}]")
    for k, v in scalars.items():
        if k in arrays:
            continue
        lines.append(f"{k} = {_toml_scalar(v)}")
    lines.append("")
    for k, v in subtables.items():
        _emit_table(f"{name}.{k}", v, lines)
    for k, entries in arrays.items():
        for entry in entries:
            lines.append(f"[[{name}.{k}]]")
            for kk, vv in entry.items():
                lines.append(f"{kk} = {_toml_scalar(vv)}")
            lines.append("")


def _is_inline(value: Any) -> bool:
    if isinstance(value, dict):
        return all(not isinstance(v, (dict, list)) for v in value.values())
    if isinstance(value, list):
        return not (value and isinstance(value[0], dict))
    return True


def config_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    """Nested plain-dict form of a configuration, TOML-serializable."""
    out: dict[str, Any] = {
        "scenario": {"name": cfg.name},
        "units": {
            "atom_count": cfg.units.atom_count,
            "scattering_length_m": cfg.units.scattering_length_m,
            "mass_kg": cfg.units.mass_kg,
            "length_unit_m": cfg.units.length_unit_m,
        },
        "grid": {"dims": list(cfg.grid.dims), "extent": list(cfg.grid.extent)},
    }
    trap: dict[str, Any] = {"kind": cfg.trap.kind}
    for k, f in cfg.trap.frequencies.items():
        trap[k] = f.to_dict()
    if cfg.trap.kind == "toroidal-2p":
        trap["barrier_height_hz"] = cfg.trap.barrier_height_hz
        trap["barrier_waist"] = cfg.trap.barrier_waist
    if cfg.trap.kind.startswith("rf-split"):
        trap["mf"] = cfg.trap.mf
        trap["mf_dressed"] = cfg.trap.mf_dressed
    if cfg.trap.saturation_knots is not None:
        trap["saturation"] = {
            "knots": list(cfg.trap.saturation_knots),
            "values": list(cfg.trap.saturation_values),
        }
    out["trap"] = trap
    out["protocol"] = {"horizon_ms": cfg.protocol.horizon_ms, "dt_ms": cfg.protocol.dt_ms}
    control: dict[str, Any] = {
        "guess": cfg.control.guess,
        "start": list(cfg.control.start),
        "end": list(cfg.control.end),
    }
    if cfg.control.amplitudes is not None:
        control["amplitudes"] = list(cfg.control.amplitudes)
    out["control"] = control
    out["cost"] = {"gamma": cfg.gamma}
    out["groundstate"] = {
        "dtau": cfg.groundstate.dtau,
        "dtau_floor": cfg.groundstate.dtau_floor,
        "tol": cfg.groundstate.tol,
        "max_iters": cfg.groundstate.max_iters,
        "integrator": cfg.groundstate.integrator,
    }
    optimize: dict[str, Any] = {
        "method": cfg.optimize.method,
        "max_iters": cfg.optimize.max_iters,
        "cost_tol": cfg.optimize.cost_tol,
        "grad_tol": cfg.optimize.grad_tol,
        "window": cfg.optimize.window,
        "wolfe_delta": cfg.optimize.wolfe_delta,
        "wolfe_sigma": cfg.optimize.wolfe_sigma,
        "ls_max_evals": cfg.optimize.ls_max_evals,
        "settle_tol": cfg.optimize.settle_tol,
        "verbose": cfg.optimize.verbose,
    }
    if cfg.optimize.levels:
        optimize["levels"] = [
            {"dims": list(lv.dims), "dt_ms": lv.dt_ms} for lv in cfg.optimize.levels
        ]
    out["optimize"] = optimize
    bdg: dict[str, Any] = {
        "n_modes": cfg.bdg.n_modes,
        "control_point": cfg.bdg.control_point,
        "goldstone_tol": cfg.bdg.goldstone_tol,
    }
    if cfg.bdg.dims is not None:
        bdg["dims"] = list(cfg.bdg.dims)
    if cfg.bdg.sigma is not None:
        bdg["sigma"] = cfg.bdg.sigma
    if cfg.bdg.frequency_scale_hz is not None:
        bdg["frequency_scale"] = cfg.bdg.frequency_scale_hz.to_dict()
    out["bdg"] = bdg
    out["reduce1d"] = {"control_point": cfg.reduce1d.control_point}
    propagate: dict[str, Any] = {"record_stride": cfg.propagate.record_stride}
    if cfg.propagate.continue_to_ms is not None:
        propagate["continue_to_ms"] = cfg.propagate.continue_to_ms
    out["propagate"] = propagate
    return out


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize a configuration back to TOML text (lossless round trip)."""
    lines: list[str] = []
    for name, table in config_to_dict(cfg).items():
        _emit_table(name, table, lines)
    return "\n".join(lines).rstrip() + "\n"


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")


# ---------------------------------------------------------------------------
# scenario assembly

def build_units(cfg: ScenarioConfig) -> UnitSystem:
    return dimensionless_units(
        cfg.units.atom_count,
        scattering_length=cfg.units.scattering_length_m,
        mass=cfg.units.mass_kg,
        length_unit=cfg.units.length_unit_m,
    )


def build_grid(cfg: ScenarioConfig, dims: tuple[int, ...] | None = None) -> Grid:
    use = tuple(dims) if dims is not None else cfg.grid.dims
    if len(use) != len(cfg.grid.extent):
        raise ConfigError("grid dims override must keep the number of axes")
    return Grid(dims=use, extent=cfg.grid.extent)


def _saturation(cfg: ScenarioConfig) -> SaturationCurve:
    if cfg.trap.saturation_knots is None:
        return SaturationCurve.default()
    return SaturationCurve(knots=cfg.trap.saturation_knots, values=cfg.trap.saturation_values)


def build_trap(cfg: ScenarioConfig, units: UnitSystem) -> TrapModel:
    """Dimensionless trap model for a configuration."""
    f = {k: units.omega_to_dimless(v.rad_s) for k, v in cfg.trap.frequencies.items()}
    kind = cfg.trap.kind
    if kind == "harmonic-2p":
        return HarmonicTrap2P(
            omega_x_initial=f["omega_x_initial"],
            omega_x_final=f["omega_x_final"],
            omega_y_initial=f["omega_y_initial"],
            omega_y_final=f["omega_y_final"],
            omega_z=f["omega_z"],
        )
    if kind == "toroidal-2p":
        return ToroidalTrap2P(
            omega_x_initial=f["omega_x_initial"],
            omega_x_final=f["omega_x_final"],
            omega_y=f["omega_y"],
            omega_z=f["omega_z"],
            barrier_height=units.energy_hz_to_dimless(cfg.trap.barrier_height_hz),
            barrier_waist=cfg.trap.barrier_waist,
            saturation=_saturation(cfg),
        )
    return RfSplitTrap(
        omega_perp=f["omega_perp"],
        omega_long=f["omega_long"],
        omega_larmor=f["omega_larmor"],
        detuning=f["detuning"],
        rabi_max=f["rabi_max"],
        mf=cfg.trap.mf,
        mf_dressed=cfg.trap.mf_dressed,
        two_param=(kind == "rf-split-2p"),
        saturation=_saturation(cfg),
    )


def protocol_steps(cfg: ScenarioConfig, dt_ms: float | None = None) -> int:
    dt = dt_ms if dt_ms is not None else cfg.protocol.dt_ms
    steps = round(cfg.protocol.horizon_ms / dt)
    if steps < 2 or abs(steps * dt - cfg.protocol.horizon_ms) > 1e-9 * cfg.protocol.horizon_ms:
        raise ConfigError(
            f"horizon {cfg.protocol.horizon_ms} ms is not an integer number of "
            f"{dt} ms steps"
        )
    return steps


def build_control(
    cfg: ScenarioConfig,
    units: UnitSystem,
    dt_ms: float | None = None,
) -> ControlCurve:
    """Initial control guess on the protocol's time mesh, dimensionless."""
    steps = protocol_steps(cfg, dt_ms)
    horizon = units.time_to_dimless(cfg.protocol.horizon_ms * 1e-3)
    start = np.asarray(cfg.control.start)
    end = np.asarray(cfg.control.end)
    if cfg.control.guess == "linear":
        return linear_ramp(horizon, steps, start, end)
    return sine_offset_ramp(horizon, steps, start, end, np.asarray(cfg.control.amplitudes))


def control_point_values(cfg: ScenarioConfig, which: str) -> np.ndarray:
    if which not in CONTROL_POINTS:
        raise ConfigError(f"control point must be one of {CONTROL_POINTS}")
    return np.asarray(cfg.control.start if which == "start" else cfg.control.end, dtype=float)
