//! Application of `Op(σ)`: dense quadrature as the reference, multiplier, function,
//! component and elementary fast paths, and operator-norm probes.

pub mod dense;
pub mod plan;
pub mod probes;

pub use dense::{op_apply_dense, op_apply_dense_adjoint, DenseOperator};
pub use plan::{
    apply_function_symbol, apply_multiplier_symbol, op_apply_component, op_apply_elementary,
    ApplyMode, ApplyPlan,
};
pub use probes::{
    default_width, empirical_operator_norm, power_iteration, probe_family, random_band_limited, wave_packet,
    NormEstimate, Probe, ProbeKind, ProbeRow, DEFAULT_RANDOM_PROBES,
};
