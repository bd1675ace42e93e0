"""Optimal control, stability analysis and 1D reduction for trapped BECs.

The package is organized bottom-up:

* :mod:`gpeopt.units` - dimensionless unit system.
* :mod:`gpeopt.grid` - tensor grids and complex fields.
* :mod:`gpeopt.controls` - control curves and their H1_0 geometry.
* :mod:`gpeopt.potentials` - control-parameterized trap potentials.
* :mod:`gpeopt.propagator` - split-step propagation and ground states.
* :mod:`gpeopt.adjoint` - transfer cost and its adjoint-state gradient.
* :mod:`gpeopt.optimizer` - line search, NLCG and multilevel driver.
* :mod:`gpeopt.bdg` - Bogoliubov-de Gennes modes and excitation tools.
* :mod:`gpeopt.reduce1d` - effective one-dimensional models.
* :mod:`gpeopt.config` / :mod:`gpeopt.io` / :mod:`gpeopt.cli` - scenario
  configuration, file formats and the command line front end.
"""

from .grid import ComplexField, Grid, from_callable, gaussian_field, inner_product
from .controls import (
    ControlCurve,
    h1_inner_product,
    h1_norm,
    linear_ramp,
    resample_control,
    sine_offset_ramp,
)
from .potentials import (
    HarmonicTrap2P,
    RfSplitTrap,
    SaturationCurve,
    ToroidalTrap2P,
    eval_potential,
    eval_potential_jacobian,
    ioffe_field,
    saturation_eval,
)
from .propagator import (
    GroundStateResult,
    PropagatorConfig,
    ground_state,
    infidelity,
    propagate,
    strang_step,
)
from .adjoint import (
    CostBreakdown,
    GradientCurve,
    Scenario,
    adjoint_source,
    cost_and_gradient,
    evaluate_cost,
    gradient_check,
    h1_gradient,
)
from .optimizer import (
    LevelSchedule,
    LevelSpec,
    MultilevelResult,
    OptimizeResult,
    OptimizerConfig,
    minimize,
    multilevel_optimize,
)
from .bdg import (
    BdgMode,
    evolve_excitation,
    excitation_phase,
    extract_excitation,
    fd_chemical_potential,
    overlap_series,
    solve_bdg,
)
from .reduce1d import (
    effective_g1d,
    interaction_hz_um,
    line_grid,
    reduce_model,
    transverse_profile,
)
from .config import (
    ConfigError,
    ScenarioConfig,
    build_control,
    build_grid,
    build_trap,
    build_units,
    dump_config,
    load_config,
    parse_config,
    save_config,
)
from .units import UnitSystem, dimensionless_units

__version__ = "0.1.0"

__all__ = [
    "BdgMode",
    "ComplexField",
    "ConfigError",
    "ControlCurve",
    "CostBreakdown",
    "GradientCurve",
    "GroundStateResult",
    "Grid",
    "HarmonicTrap2P",
    "LevelSchedule",
    "LevelSpec",
    "MultilevelResult",
    "OptimizeResult",
    "OptimizerConfig",
    "PropagatorConfig",
    "RfSplitTrap",
    "SaturationCurve",
    "Scenario",
    "ScenarioConfig",
    "ToroidalTrap2P",
    "UnitSystem",
    "adjoint_source",
    "build_control",
    "build_grid",
    "build_trap",
    "build_units",
    "cost_and_gradient",
    "dimensionless_units",
    "dump_config",
    "effective_g1d",
    "eval_potential",
    "eval_potential_jacobian",
    "evaluate_cost",
    "evolve_excitation",
    "excitation_phase",
    "extract_excitation",
    "fd_chemical_potential",
    "from_callable",
    "gaussian_field",
    "gradient_check",
    "ground_state",
    "h1_gradient",
    "h1_inner_product",
    "h1_norm",
    "infidelity",
    "inner_product",
    "interaction_hz_um",
    "ioffe_field",
    "line_grid",
    "linear_ramp",
    "load_config",
    "minimize",
    "multilevel_optimize",
    "overlap_series",
    "parse_config",
    "propagate",
    "reduce_model",
    "resample_control",
    "saturation_eval",
    "save_config",
    "sine_offset_ramp",
    "solve_bdg",
    "strang_step",
    "transverse_profile",
]
