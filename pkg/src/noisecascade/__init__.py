"""Non-reciprocal thermal-noise transport in cascaded two-oscillator systems."""

from .cascaded import (
    CascadedParams,
    ChannelSpec,
    LinearSystem,
    OccupationReport,
    build_system,
    closed_form_occupations,
    delta_n,
    disconnected_baseline,
    occupation_from_temperature,
    occupations,
    steady_state,
    temperature_from_occupation,
)
from .counting import (
    bias_matrices,
    biased_covariance,
    flow_cumulant,
    flow_first_moment,
    large_deviation,
    simplified_flows,
)
from .linalg import (
    embed_drift,
    real_embedding_matrix,
    solve_lyapunov,
    solve_riccati_biased,
    stability_margin,
)
from .optomech import (
    DriveSpec,
    OmParams,
    design_nonreciprocal,
    linearize,
    map_to_cascaded,
    mech_susceptibility,
    preset_microwave,
)
from .sweeps import SweepConfig, emit, parse_config, run_sweep

__all__ = [
    "CascadedParams",
    "ChannelSpec",
    "LinearSystem",
    "OccupationReport",
    "build_system",
    "closed_form_occupations",
    "delta_n",
    "disconnected_baseline",
    "occupation_from_temperature",
    "occupations",
    "steady_state",
    "temperature_from_occupation",
    "embed_drift",
    "real_embedding_matrix",
    "solve_lyapunov",
    "solve_riccati_biased",
    "stability_margin",
    "bias_matrices",
    "biased_covariance",
    "flow_cumulant",
    "flow_first_moment",
    "large_deviation",
    "simplified_flows",
    "DriveSpec",
    "OmParams",
    "design_nonreciprocal",
    "linearize",
    "map_to_cascaded",
    "mech_susceptibility",
    "preset_microwave",
    "SweepConfig",
    "emit",
    "parse_config",
    "run_sweep",
]
