//! Periodic grids, the Fourier transform contract, Littlewood–Paley filters and norms.
//!
//! Normalisation: with `u_j` the samples on `n^d` points of the torus of period `L`,
//!
//! - spectrum `û(ξ) = (L/n)^d Σ_j u_j e^{-i x_j·ξ}`
//! - inverse `u(x) = L^{-d} Σ_ξ û(ξ) e^{i x·ξ}`
//! - `|u|_2² = (L/n)^d Σ_j |u_j|² = L^{-d} Σ_ξ |û(ξ)|²`
//! - `|u|_{H^s}² = L^{-d} Σ_ξ ⟨ξ⟩^{2s} |û(ξ)|²`
//!
//! so a single mode `e^{i ξ₀·x}` has `H^s` norm `⟨ξ₀⟩^s L^{d/2}`.

pub mod field;
pub mod filters;
pub mod grid;
pub mod norms;

pub use field::Field;
pub use filters::{
    build_bump_psi, cutoff_kernel_l1_report, phi, phi_p, psi, CutoffChi, FilterBank,
    KernelL1Report,
};
pub use grid::{japanese, norm, Grid, GridSpec, NYQUIST_GUARD};
pub use norms::{
    apply_multiplier, dyadic_sobolev_sum, linf_norm, lp_block, sobolev_norm, w_inf_norm,
    zygmund_norm,
};

/// Spatial quadrature weight `(L/n)^d` of one sample.
pub fn quadrature_weight(grid: &Grid) -> f64 {
    grid.cell_volume()
}

/// Weight `L^{-d}` of one frequency in spectral sums.
pub fn spectral_weight(grid: &Grid) -> f64 {
    1.0 / grid.volume()
}
