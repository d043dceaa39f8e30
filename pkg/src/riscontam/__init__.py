"""Link-level simulator of inter-operator pilot contamination in RIS uplinks."""

from .bayes_estimation import (
    error_covariance,
    error_covariance_parts,
    high_snr_contamination,
    mmse_channel_estimate,
    pilot_covariances,
)
from .capacity import (
    capacity_lower_bound_mc,
    capacity_sample,
    conditional_moments_gaussian,
    conditional_moments_lmmse,
)
from .channels import (
    ChannelPriors,
    ChannelSet,
    channel_priors,
    complex_normal,
    received_pilots,
    sample_correlated_rayleigh,
    sample_deterministic_fixture,
    sigma_r,
)
from .data_link import (
    ScalarLink,
    data_mse,
    data_mse_floor,
    high_pilot_snr_link,
    mmse_symbol_estimate,
    symbol_mse_mc,
)
from .det_estimation import (
    bias_floor,
    contamination_bias,
    joint_ml_estimate,
    mml_estimate,
    mse_trace,
    nmse,
)
from .experiments import ResultRow, SweepSpec, parse_grid, run_experiment, write_rows
from .geometry import (
    RisGeometry,
    SpatialCovariance,
    element_positions,
    isotropic_covariance,
    parse_geometry,
)
from .params import (
    CONFIG_MODES,
    IDENTICAL,
    ORTHOGONAL,
    PERFECT_CSI,
    SystemParams,
    db_to_amplitude,
    dbm_to_linear,
    linear_to_dbm,
    load_params,
)
from .sequences import (
    ConfigSequence,
    RisPhaseConfig,
    cascaded_gain,
    make_identical_pair,
    make_orthogonal_pair,
    phase_align,
)
from .streams import derive_rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "CONFIG_MODES",
    "ChannelPriors",
    "ChannelSet",
    "ConfigSequence",
    "IDENTICAL",
    "ORTHOGONAL",
    "PERFECT_CSI",
    "ResultRow",
    "RisGeometry",
    "RisPhaseConfig",
    "ScalarLink",
    "SpatialCovariance",
    "SweepSpec",
    "SystemParams",
    "bias_floor",
    "capacity_lower_bound_mc",
    "capacity_sample",
    "cascaded_gain",
    "channel_priors",
    "complex_normal",
    "conditional_moments_gaussian",
    "conditional_moments_lmmse",
    "contamination_bias",
    "data_mse",
    "data_mse_floor",
    "db_to_amplitude",
    "dbm_to_linear",
    "derive_rng",
    "derive_seed",
    "element_positions",
    "error_covariance",
    "error_covariance_parts",
    "high_pilot_snr_link",
    "high_snr_contamination",
    "isotropic_covariance",
    "joint_ml_estimate",
    "linear_to_dbm",
    "load_params",
    "make_identical_pair",
    "make_orthogonal_pair",
    "mml_estimate",
    "mmse_channel_estimate",
    "mmse_symbol_estimate",
    "mse_trace",
    "nmse",
    "parse_geometry",
    "parse_grid",
    "phase_align",
    "received_pilots",
    "run_experiment",
    "sample_correlated_rayleigh",
    "sample_deterministic_fixture",
    "sigma_r",
    "symbol_mse_mc",
    "write_rows",
]
