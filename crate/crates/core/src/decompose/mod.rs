//! The four-way paradifferential split of a symbol and its expansion into
//! elementary symbols.

pub mod elementary;
pub mod split;

pub use elementary::{
    elementary_decompose, lambda_k, lambda_kernel_l1, lambda_profile, reconstruct_from_elementary,
    reconstruction_error, residual_sup, ElementarySymbols, Reconstruction,
};
pub use split::{
    bernstein_check, four_way_split, spectral_support_check, BernsteinReport, Component,
    FourWaySplit, Pieces, SplitComponent, SupportReport,
};
