//! Estimate experiments: probe ratios against the right-hand sides of the
//! action, commutator and composition estimates, decay-order fits and
//! resolution sweeps.

pub mod config;
pub mod experiments;
pub mod packets;
pub mod report;
pub mod slope;

pub use config::{ExperimentConfig, SlopeConfig, TheoremTag, Variant};
pub use experiments::{
    effective_slope, resolution_sweep, run_experiment, EstimateReport, Indices, ProbeRecord,
    SweepReport, Term, UNorm, REPORT_SCHEMA_VERSION,
};
pub use packets::{wave_packets, PacketDiagnostics, WavePacketFamily};
pub use report::{read_report, validate_report, write_report, write_sweep};
pub use slope::{linear_fit, order_probe, Residual, SlopeFit, SlopePoint};
