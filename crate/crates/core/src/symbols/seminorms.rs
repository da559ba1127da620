//! The seminorms `N^m_{k,s}`, `M^m_{k,l}`, `n_{k,s}`, `m_k` and the half-sum norms
//! built from them. Suprema over `|ξ| >= 1/4` run over lattice points below the
//! Nyquist guard; suprema over `|ξ| <= 1` over all lattice points in the unit ball.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::field::spectral_derivative_factor;
use crate::spectral::grid::{japanese, norm};
use crate::spectral::{Grid, GridSpec};
use crate::symbols::deriv::{partials, DerivMethod};
use crate::symbols::Symbol;
use crate::C64;

/// One of the four seminorm families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    /// `N^m_{k,s}`
    N { k: usize, s: f64 },
    /// `M^m_{k,l}`
    M { k: usize, l: usize },
    /// `n_{k,s}`
    #[serde(rename = "n")]
    LowN { k: usize, s: f64 },
    /// `m_k`
    #[serde(rename = "m")]
    LowM { k: usize },
}

impl Family {
    pub fn descriptor(&self) -> String {
        match self {
            Family::N { k, s } => format!("N[k={k},s={s}]"),
            Family::M { k, l } => format!("M[k={k},l={l}]"),
            Family::LowN { k, s } => format!("n[k={k},s={s}]"),
            Family::LowM { k } => format!("m[k={k}]"),
        }
    }
}

/// Frequencies entering the high-frequency suprema: `1/4 <= |ξ| <= guard`.
pub fn high_frequencies(grid: &Grid) -> Vec<[f64; 2]> {
    let guard = grid.xi_guard();
    grid.freqs()
        .iter()
        .copied()
        .filter(|xi| {
            let r = norm(xi);
            (0.25..=guard).contains(&r)
        })
        .collect()
}

/// Frequencies entering the low-frequency suprema: `|ξ| <= 1`.
pub fn low_frequencies(grid: &Grid) -> Vec<[f64; 2]> {
    grid.freqs()
        .iter()
        .copied()
        .filter(|xi| norm(xi) <= 1.0)
        .collect()
}

fn constant_value(col: &[C64]) -> Option<C64> {
    let first = *col.first()?;
    col.iter().all(|v| *v == first).then_some(first)
}

/// `|f|_{H^s}` of a column of samples.
pub fn column_sobolev(grid: &Grid, col: &[C64], s: f64) -> f64 {
    if let Some(c) = constant_value(col) {
        return c.norm() * grid.volume().sqrt();
    }
    let mut spec = col.to_vec();
    grid.dft(&mut spec);
    let w = grid.cell_volume();
    let sum: f64 = spec
        .iter()
        .zip(grid.freqs())
        .map(|(v, xi)| japanese(xi).powf(2.0 * s) * (v * w).norm_sqr())
        .sum();
    (sum / grid.volume()).sqrt()
}

/// `|f|_{W^{l,∞}}` of a column of samples.
pub fn column_w_inf(grid: &Grid, col: &[C64], l: usize) -> f64 {
    let sup = |c: &[C64]| c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if l == 0 || constant_value(col).is_some() {
        return sup(col);
    }
    let mut spec = col.to_vec();
    grid.dft(&mut spec);
    let nyq = -(grid.n_pts() as f64) / 2.0 * grid.dxi();
    let mut best = sup(col);
    for alpha in crate::spectral::norms::multi_indices(grid.dim(), l).into_iter().skip(1) {
        let mut d: Vec<C64> = spec
            .iter()
            .zip(grid.freqs())
            .map(|(v, xi)| v * spectral_derivative_factor(xi, alpha, nyq))
            .collect();
        grid.idft_normalized(&mut d);
        best = best.max(sup(&d));
    }
    best
}

fn check_regularity(sym: &dyn Symbol, k: usize) -> Result<()> {
    if !sym.regularity().admits(k) {
        return Err(Error::ClassViolation(format!(
            "{} is {}-regular at the origin, low-frequency seminorm needs {k}",
            sym.label(),
            sym.regularity()
        )));
    }
    Ok(())
}

/// Evaluates one seminorm of `sym`.
pub fn seminorm(sym: &dyn Symbol, family: Family, method: DerivMethod) -> Result<f64> {
    let grid = sym.grid().clone();
    let m = sym.order();
    let (xis, k, high) = match family {
        Family::N { k, .. } | Family::M { k, .. } => (high_frequencies(&grid), k, true),
        Family::LowN { k, .. } | Family::LowM { k } => {
            check_regularity(sym, k)?;
            (low_frequencies(&grid), k, false)
        }
    };
    let values: Vec<Result<f64>> = xis
        .par_iter()
        .map(|xi| {
            let parts = partials(sym, xi, k, method)?;
            let mut best: f64 = 0.0;
            for (beta, col) in &parts {
                let size = match family {
                    Family::N { s, .. } | Family::LowN { s, .. } => column_sobolev(&grid, col, s),
                    Family::M { l, .. } => column_w_inf(&grid, col, l),
                    Family::LowM { .. } => column_w_inf(&grid, col, 0),
                };
                let weight = if high {
                    japanese(xi).powf(beta.len() as f64 - m)
                } else {
                    1.0
                };
                best = best.max(weight * size);
            }
            Ok(best)
        })
        .collect();
    let mut best: f64 = 0.0;
    for v in values {
        let v = v?;
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "{} of {} is not finite",
                family.descriptor(),
                sym.label()
            )));
        }
        best = best.max(v);
    }
    Ok(best)
}

/// `N^m_{k,s}(σ)`.
#[allow(non_snake_case)]
pub fn seminorm_N(sym: &dyn Symbol, k: usize, s: f64) -> Result<f64> {
    seminorm(sym, Family::N { k, s }, DerivMethod::Auto)
}

/// `M^m_{k,l}(σ)`.
#[allow(non_snake_case)]
pub fn seminorm_M(sym: &dyn Symbol, k: usize, l: usize) -> Result<f64> {
    seminorm(sym, Family::M { k, l }, DerivMethod::Auto)
}

/// `n_{k,s}(σ)`; needs σ to be k-regular at the origin.
pub fn seminorm_n(sym: &dyn Symbol, k: usize, s: f64) -> Result<f64> {
    seminorm(sym, Family::LowN { k, s }, DerivMethod::Auto)
}

/// `m_k(σ)`; needs σ to be k-regular at the origin.
pub fn seminorm_m(sym: &dyn Symbol, k: usize) -> Result<f64> {
    seminorm(sym, Family::LowM { k }, DerivMethod::Auto)
}

/// The half-sum norms of symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum NormVariant {
    /// `‖σ‖_{H^s} = (n_{0,s} + N_{2[d/2]+2,s}) / 2`
    Hs { s: f64 },
    /// `‖σ‖_{H^s_reg} = (n_{2[d/2]+2,s} + N_{2[d/2]+2,s}) / 2`
    HsReg { s: f64 },
    /// `‖σ‖_∞ = (m_d + M_d) / 2`
    Inf,
    /// `‖σ‖_{H^s_n} = (n_{n,s} + N_{n+2+[d/2]+d,s}) / 2`
    HsN { n: usize, s: f64 },
    /// `‖σ‖_{W^{k,∞}_n} = (m_n + M_{n+2+[d/2]+d,k}) / 2`
    WkInfN { n: usize, k: usize },
}

/// `2[d/2] + 2`.
pub fn sobolev_index(dim: usize) -> usize {
    2 * (dim / 2) + 2
}

/// `n + 2 + [d/2] + d`.
pub fn regular_index(dim: usize, n: usize) -> usize {
    n + 2 + dim / 2 + dim
}

pub fn composite_norm(sym: &dyn Symbol, variant: NormVariant) -> Result<f64> {
    let d = sym.grid().dim();
    let k2 = sobolev_index(d);
    let (low, high) = match variant {
        NormVariant::Hs { s } => (Family::LowN { k: 0, s }, Family::N { k: k2, s }),
        NormVariant::HsReg { s } => (Family::LowN { k: k2, s }, Family::N { k: k2, s }),
        NormVariant::Inf => (Family::LowM { k: d }, Family::M { k: d, l: 0 }),
        NormVariant::HsN { n, s } => (
            Family::LowN { k: n, s },
            Family::N { k: regular_index(d, n), s },
        ),
        NormVariant::WkInfN { n, k } => (
            Family::LowM { k: n },
            Family::M { k: regular_index(d, n), l: k },
        ),
    };
    let a = seminorm(sym, low, DerivMethod::Auto)?;
    let b = seminorm(sym, high, DerivMethod::Auto)?;
    Ok(0.5 * (a + b))
}

/// Values of several seminorms of one symbol together with the sampling metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormReport {
    pub symbol: String,
    pub order: f64,
    pub grid: GridSpec,
    pub method: DerivMethod,
    pub high_frequency_points: usize,
    pub low_frequency_points: usize,
    pub values: BTreeMap<String, f64>,
}

pub fn seminorm_report(sym: &dyn Symbol, families: &[Family], method: DerivMethod) -> Result<SeminormReport> {
    let mut values = BTreeMap::new();
    for f in families {
        values.insert(f.descriptor(), seminorm(sym, *f, method)?);
    }
    let grid = sym.grid();
    Ok(SeminormReport {
        symbol: sym.label(),
        order: sym.order(),
        grid: grid.spec(),
        method,
        high_frequency_points: high_frequencies(grid).len(),
        low_frequency_points: low_frequencies(grid).len(),
        values,
    })
}
