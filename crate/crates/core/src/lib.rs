//! Numerical pseudodifferential calculus for symbols of limited smoothness on a
//! periodic grid.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: grids, discrete Fourier transforms, Littlewood–Paley filters, norms
//! - [`symbols`]: symbol trait, catalogue, ξ-derivatives and seminorms
//! - [`decompose`]: four-way paradifferential split and elementary symbols
//! - [`operators`]: dense and fast application of `Op(σ)`, operator-norm probes
//! - [`calculus`]: `♯ₙ` expansions, Poisson brackets, commutator residuals
//! - [`lab`]: estimate experiments, slope fits, resolution sweeps
//! - [`cli`]: the batch front end used by the `paracalc` binary

pub mod calculus;
pub mod cli;
pub mod decompose;
pub mod error;
pub mod jet;
pub mod lab;
pub mod operators;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use spectral::{Field, FilterBank, Grid, GridSpec};
pub use symbols::{MultiIndex, Regularity, SharedSymbol, Symbol};

pub type C64 = num_complex::Complex64;

/// Worker pool sized from `PARACALC_THREADS` when set.
///
/// Every reduction in the crate uses fixed chunking, so results do not depend on
/// the thread count.
pub fn init_thread_pool() {
    if let Some(n) = std::env::var("PARACALC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // a pool may already exist (tests, embedding); that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
