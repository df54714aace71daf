"""Ball-droplet models for the liquid drop problem with a background potential.

Single-ball energies, Riesz interaction integrals, the discrete droplet
interaction energy, multistart optimizers and small-Z asymptotics.
"""
__version__ = "0.1.0"

from .errors import (
    BracketError,
    DegenerateConfigurationError,
    DivergentIntegralError,
    DropletLabError,
    InvalidConfigurationError,
    InvalidInputError,
    MethodUnsupportedError,
    OptimizationFailedError,
    StencilError,
)
from .model import (
    BallDroplet,
    ModelParams,
    RieszConstants,
    ball_radius,
    e0_ball,
    inflection_mass,
    m_tilde,
    multiplier_ball,
    perimeter_ball,
    riesz_constants,
    riesz_self_energy_ball,
    riesz_unit_ball_self_energy,
    unit_ball_volume,
)
from .integrals import (
    QuadratureResult,
    confinement_closed_form,
    confinement_integral,
    far_field_confinement,
    far_field_riesz,
    riesz_cross_energy,
)
from .interaction import EnergyParts, f_energy, f_gradient, f_scaling_split, two_body_optimum
from .optimizer import (
    ConfigResult,
    OptimizerOptions,
    PartitionResult,
    minimize_config,
    minimize_masses,
    optimal_droplet_count,
)
from .asymptotics import (
    EnergyBreakdown,
    ExpansionReport,
    GeneralizedConfig,
    exact_energy_balls,
    expansion_residual_sweep,
    ez_to_e0_sweep,
    predicted_energy,
    separation_scale,
    split_threshold,
    subadditivity_check,
)

__all__ = [
    "EnergyParts",
    "f_energy",
    "f_gradient",
    "f_scaling_split",
    "two_body_optimum",
    "BracketError",
    "DegenerateConfigurationError",
    "DivergentIntegralError",
    "DropletLabError",
    "InvalidConfigurationError",
    "InvalidInputError",
    "MethodUnsupportedError",
    "OptimizationFailedError",
    "StencilError",
    "BallDroplet",
    "ModelParams",
    "RieszConstants",
    "ball_radius",
    "e0_ball",
    "inflection_mass",
    "m_tilde",
    "multiplier_ball",
    "perimeter_ball",
    "riesz_constants",
    "riesz_self_energy_ball",
    "riesz_unit_ball_self_energy",
    "unit_ball_volume",
    "QuadratureResult",
    "confinement_closed_form",
    "confinement_integral",
    "far_field_confinement",
    "far_field_riesz",
    "riesz_cross_energy",
    "ConfigResult",
    "OptimizerOptions",
    "PartitionResult",
    "minimize_config",
    "minimize_masses",
    "optimal_droplet_count",
    "EnergyBreakdown",
    "ExpansionReport",
    "GeneralizedConfig",
    "exact_energy_balls",
    "expansion_residual_sweep",
    "ez_to_e0_sweep",
    "predicted_energy",
    "separation_scale",
    "split_threshold",
    "subadditivity_check",
]
