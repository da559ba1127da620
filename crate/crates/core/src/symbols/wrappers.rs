use std::sync::Arc;

use crate::error::{input, Result};
use crate::spectral::field::spectral_derivative_factor;
use crate::spectral::Grid;
use crate::symbols::{Partials, Regularity, SharedSymbol, Symbol};
use crate::C64;

/// `Σ_i c_i σ_i`.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    grid: Arc<Grid>,
    terms: Vec<(C64, SharedSymbol)>,
    label: String,
}

impl LinearCombination {
    pub fn new(terms: Vec<(C64, SharedSymbol)>) -> Result<LinearCombination> {
        let grid = terms
            .first()
            .map(|(_, s)| s.grid().clone())
            .ok_or_else(|| input("empty linear combination"))?;
        if terms.iter().any(|(_, s)| **s.grid() != *grid) {
            return Err(input("symbols live on different grids"));
        }
        let label = terms
            .iter()
            .map(|(c, s)| format!("({c})·{}", s.label()))
            .collect::<Vec<_>>()
            .join(" + ");
        Ok(LinearCombination { grid, terms, label })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> LinearCombination {
        self.label = label.into();
        self
    }
}

impl Symbol for LinearCombination {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    fn order(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, s)| s.order())
            .fold(f64::NEG_INFINITY, f64::max)
    }
    fn regularity(&self) -> Regularity {
        self.terms
            .iter()
            .fold(Regularity::Infinite, |r, (_, s)| r.min(s.regularity()))
    }
    fn is_multiplier(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.is_multiplier())
    }
    fn is_function(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.is_function())
    }
    fn analytic_order(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, s)| s.analytic_order())
            .min()
            .unwrap_or(0)
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (c, s) in &self.terms {
            for (o, v) in out.iter_mut().zip(s.column(xi)) {
                *o += c * v;
            }
        }
        out
    }
    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        let mut out: Option<Partials> = None;
        for (c, s) in &self.terms {
            let p = s.analytic_partials(xi, order)?;
            match out.as_mut() {
                None => {
                    out = Some(
                        p.into_iter()
                            .map(|(b, col)| (b, col.into_iter().map(|v| c * v).collect()))
                            .collect(),
                    )
                }
                Some(acc) => {
                    for (b, col) in p {
                        let target = acc.get_mut(&b).expect("same multi-indices");
                        for (o, v) in target.iter_mut().zip(col) {
                            *o += c * v;
                        }
                    }
                }
            }
        }
        Ok(out.expect("nonempty"))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `∂_x^α σ`, computed column by column with spectral differentiation.
#[derive(Debug, Clone)]
pub struct XDerivative {
    base: SharedSymbol,
    alpha: [usize; 2],
}

impl XDerivative {
    pub fn new(base: SharedSymbol, alpha: [usize; 2]) -> XDerivative {
        XDerivative { base, alpha }
    }

    fn differentiate(&self, mut col: Vec<C64>) -> Vec<C64> {
        if self.alpha == [0, 0] {
            return col;
        }
        let grid = self.base.grid();
        grid.dft(&mut col);
        let nyq = -(grid.n_pts() as f64) / 2.0 * grid.dxi();
        for (v, xi) in col.iter_mut().zip(grid.freqs()) {
            *v *= spectral_derivative_factor(xi, self.alpha, nyq);
        }
        grid.idft_normalized(&mut col);
        col
    }
}

impl Symbol for XDerivative {
    fn grid(&self) -> &Arc<Grid> {
        self.base.grid()
    }
    fn order(&self) -> f64 {
        self.base.order()
    }
    fn regularity(&self) -> Regularity {
        self.base.regularity()
    }
    fn is_multiplier(&self) -> bool {
        self.base.is_multiplier()
    }
    fn is_function(&self) -> bool {
        self.base.is_function()
    }
    fn analytic_order(&self) -> usize {
        self.base.analytic_order()
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        self.differentiate(self.base.column(xi))
    }
    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        Ok(self
            .base
            .analytic_partials(xi, order)?
            .into_iter()
            .map(|(b, col)| (b, self.differentiate(col)))
            .collect())
    }
    fn label(&self) -> String {
        format!("∂_x^{:?} {}", self.alpha, self.base.label())
    }
}
