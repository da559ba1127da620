use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::grid::norm;
use crate::spectral::Grid;
use crate::symbols::{MultiIndex, Partials, Regularity, SharedSymbol, Symbol};
use crate::C64;

/// How ξ-derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivMethod {
    /// Analytic when the symbol provides the order, finite differences otherwise.
    #[default]
    Auto,
    Analytic,
    FiniteDifference,
}

/// Step used by the finite-difference fallback.
pub fn fd_step(grid: &Grid) -> f64 {
    grid.dxi().min(1.0 / 32.0)
}

/// Finite-difference weights for the `deriv`-th derivative at 0 on `nodes`.
pub fn fornberg_weights(nodes: &[f64], deriv: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; deriv + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|r| r[deriv]).collect()
}

/// Fourth-order central stencil `(offsets, weights)` for the `r`-th derivative in
/// units of the step.
fn central_stencil(r: usize) -> (Vec<i64>, Vec<f64>) {
    if r == 0 {
        return (vec![0], vec![1.0]);
    }
    let m = (r as i64 + 1) / 2 + 1;
    let offsets: Vec<i64> = (-m..=m).collect();
    let nodes: Vec<f64> = offsets.iter().map(|o| *o as f64).collect();
    (offsets, fornberg_weights(&nodes, r))
}

fn fd_partials(sym: &dyn Symbol, xi: &[f64; 2], order: usize) -> Partials {
    let grid = sym.grid();
    let h = fd_step(grid);
    let dim = grid.dim();
    let mut cache: HashMap<(i64, i64), Vec<C64>> = HashMap::new();
    let mut out = Partials::new();
    for beta in MultiIndex::all(dim, order) {
        let (o1, w1) = central_stencil(beta.0[0]);
        let (o2, w2) = central_stencil(beta.0[1]);
        let scale = h.powi(-(beta.len() as i32));
        let mut col = vec![C64::new(0.0, 0.0); grid.len()];
        for (a, wa) in o1.iter().zip(&w1) {
            for (b, wb) in o2.iter().zip(&w2) {
                let w = wa * wb * scale;
                if w == 0.0 {
                    continue;
                }
                let values = cache.entry((*a, *b)).or_insert_with(|| {
                    sym.column(&[xi[0] + *a as f64 * h, xi[1] + *b as f64 * h])
                });
                for (c, v) in col.iter_mut().zip(values.iter()) {
                    *c += v * w;
                }
            }
        }
        out.insert(beta, col);
    }
    out
}

/// `∂_ξ^β σ(·, ξ)` for all `|β| <= order`.
pub fn partials(sym: &dyn Symbol, xi: &[f64; 2], order: usize, method: DerivMethod) -> Result<Partials> {
    let analytic = order <= sym.analytic_order();
    match method {
        DerivMethod::Analytic if !analytic => Err(Error::Capability(format!(
            "{} provides ξ-derivatives up to order {}, {order} requested",
            sym.label(),
            sym.analytic_order()
        ))),
        DerivMethod::Analytic | DerivMethod::Auto if analytic => sym.analytic_partials(xi, order),
        _ => Ok(fd_partials(sym, xi, order)),
    }
}

/// The symbol `∂_ξ^β σ` of order `m − |β|`.
#[derive(Debug, Clone)]
pub struct XiDerivative {
    base: SharedSymbol,
    beta: MultiIndex,
    method: DerivMethod,
}

impl XiDerivative {
    /// True where values come from finite differences near the origin of a symbol
    /// that is not regular enough there.
    pub fn unreliable_at(&self, xi: &[f64; 2]) -> bool {
        let fd = self.method == DerivMethod::FiniteDifference
            || self.beta.len() > self.base.analytic_order();
        fd && norm(xi) < 0.25 && !self.base.regularity().admits(self.beta.len())
    }

    pub fn beta(&self) -> MultiIndex {
        self.beta
    }
}

pub fn xi_derivative(sym: SharedSymbol, beta: MultiIndex, method: DerivMethod) -> Result<XiDerivative> {
    if sym.grid().dim() == 1 && beta.0[1] > 0 {
        return Err(Error::Input("β has a second component in one dimension".into()));
    }
    if method == DerivMethod::Analytic && beta.len() > sym.analytic_order() {
        return Err(Error::Capability(format!(
            "{} has no analytic derivative of order {}",
            sym.label(),
            beta.len()
        )));
    }
    Ok(XiDerivative {
        base: sym,
        beta,
        method,
    })
}

impl Symbol for XiDerivative {
    fn grid(&self) -> &Arc<Grid> {
        self.base.grid()
    }
    fn order(&self) -> f64 {
        self.base.order() - self.beta.len() as f64
    }
    fn regularity(&self) -> Regularity {
        match self.base.regularity() {
            Regularity::Infinite => Regularity::Infinite,
            Regularity::Finite(k) => Regularity::Finite(k.saturating_sub(self.beta.len())),
        }
    }
    fn is_multiplier(&self) -> bool {
        self.base.is_multiplier()
    }
    fn is_function(&self) -> bool {
        self.base.is_function()
    }
    fn analytic_order(&self) -> usize {
        let base = self.base.analytic_order();
        if base == usize::MAX {
            usize::MAX
        } else {
            base.saturating_sub(self.beta.len())
        }
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        partials(self.base.as_ref(), xi, self.beta.len(), self.method)
            .map(|mut p| p.remove(&self.beta).expect("β enumerated"))
            .unwrap_or_else(|_| vec![C64::new(f64::NAN, 0.0); self.grid().len()])
    }
    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        let dim = self.grid().dim();
        let base = self
            .base
            .analytic_partials(xi, order + self.beta.len())?;
        Ok(MultiIndex::all(dim, order)
            .into_iter()
            .map(|g| {
                let shifted = MultiIndex([g.0[0] + self.beta.0[0], g.0[1] + self.beta.0[1]]);
                (g, base[&shifted].clone())
            })
            .collect())
    }
    fn label(&self) -> String {
        format!("∂_ξ^{} {}", self.beta, self.base.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_weights() {
        let (o, w) = central_stencil(1);
        assert_eq!(o, vec![-2, -1, 0, 1, 2]);
        let expected = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let (_, w2) = central_stencil(2);
        let expected2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(expected2) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
