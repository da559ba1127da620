//! The expansions `σ¹ ♯ₙ σ²` and `{σ¹, σ²}ₙ`, commutators and the residual
//! operators left after subtracting them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::ApplyPlan;
use crate::spectral::field::spectral_derivative_factor;
use crate::spectral::{Field, Grid};
use crate::symbols::deriv::{partials, DerivMethod};
use crate::symbols::{MultiIndex, Regularity, SharedSymbol, Symbol};
use crate::C64;

/// Largest expansion order supported.
pub const MAX_EXPANSION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionKind {
    Sharp,
    Poisson,
}

/// `σ¹ ♯ₙ σ²` or `{σ¹, σ²}ₙ`, evaluated column by column.
#[derive(Debug, Clone)]
pub struct ExpansionSymbol {
    sigma1: SharedSymbol,
    sigma2: SharedSymbol,
    n: usize,
    kind: ExpansionKind,
    method: DerivMethod,
}

fn check(sigma1: &SharedSymbol, sigma2: &SharedSymbol, n: usize, method: DerivMethod) -> Result<()> {
    if n > MAX_EXPANSION {
        return Err(Error::Capability(format!(
            "expansion order {n} exceeds the supported maximum {MAX_EXPANSION}"
        )));
    }
    if **sigma1.grid() != **sigma2.grid() {
        return Err(crate::error::input("symbols live on different grids"));
    }
    if method == DerivMethod::Analytic {
        for s in [sigma1, sigma2] {
            if s.analytic_order() < n {
                return Err(Error::Capability(format!(
                    "{} has analytic ξ-derivatives up to order {}, {n} requested",
                    s.label(),
                    s.analytic_order()
                )));
            }
        }
    }
    Ok(())
}

pub fn sharp_n(sigma1: SharedSymbol, sigma2: SharedSymbol, n: usize) -> Result<ExpansionSymbol> {
    sharp_n_with(sigma1, sigma2, n, DerivMethod::Auto)
}

pub fn sharp_n_with(
    sigma1: SharedSymbol,
    sigma2: SharedSymbol,
    n: usize,
    method: DerivMethod,
) -> Result<ExpansionSymbol> {
    check(&sigma1, &sigma2, n, method)?;
    Ok(ExpansionSymbol {
        sigma1,
        sigma2,
        n,
        kind: ExpansionKind::Sharp,
        method,
    })
}

pub fn poisson_n(sigma1: SharedSymbol, sigma2: SharedSymbol, n: usize) -> Result<ExpansionSymbol> {
    poisson_n_with(sigma1, sigma2, n, DerivMethod::Auto)
}

pub fn poisson_n_with(
    sigma1: SharedSymbol,
    sigma2: SharedSymbol,
    n: usize,
    method: DerivMethod,
) -> Result<ExpansionSymbol> {
    check(&sigma1, &sigma2, n, method)?;
    Ok(ExpansionSymbol {
        sigma1,
        sigma2,
        n,
        kind: ExpansionKind::Poisson,
        method,
    })
}

fn constant(col: &[C64]) -> bool {
    col.iter().all(|v| *v == col[0])
}

/// `Σ_{|α|<=n} (−i)^{|α|}/α! ∂_ξ^α a · ∂_x^α b` at one ξ; `|α| >= 1` only when
/// `skip_product` is set, since the product terms cancel in a bracket.
fn sharp_column(
    a: &dyn Symbol,
    b: &dyn Symbol,
    n: usize,
    xi: &[f64; 2],
    method: DerivMethod,
    skip_product: bool,
) -> Result<Vec<C64>> {
    let grid = a.grid();
    let dim = grid.dim();
    let da = partials(a, xi, n, method)?;
    let bcol = b.column(xi);
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    let b_const = constant(&bcol);
    let mut bspec: Option<Vec<C64>> = None;
    let nyq = -(grid.n_pts() as f64) / 2.0 * grid.dxi();
    for alpha in MultiIndex::all(dim, n) {
        if alpha.is_zero() {
            if !skip_product {
                for ((o, p), q) in out.iter_mut().zip(a.column(xi)).zip(&bcol) {
                    *o = p * q;
                }
            }
            continue;
        }
        if b_const {
            continue;
        }
        let dxb = match b.x_partial(xi, alpha.0) {
            Some(col) => col,
            None => {
                let spec = bspec.get_or_insert_with(|| {
                    let mut s = bcol.clone();
                    grid.dft(&mut s);
                    s
                });
                let mut d: Vec<C64> = spec
                    .iter()
                    .zip(grid.freqs())
                    .map(|(v, eta)| v * spectral_derivative_factor(eta, alpha.0, nyq))
                    .collect();
                grid.idft_normalized(&mut d);
                d
            }
        };
        let coef = C64::new(0.0, -1.0).powu(alpha.len() as u32) / alpha.factorial();
        let dxa = &da[&alpha];
        for ((o, p), q) in out.iter_mut().zip(dxa).zip(&dxb) {
            *o += coef * p * q;
        }
    }
    Ok(out)
}

impl ExpansionSymbol {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn try_column(&self, xi: &[f64; 2]) -> Result<Vec<C64>> {
        let bracket = self.kind == ExpansionKind::Poisson;
        let a = sharp_column(self.sigma1.as_ref(), self.sigma2.as_ref(), self.n, xi, self.method, bracket)?;
        match self.kind {
            ExpansionKind::Sharp => Ok(a),
            ExpansionKind::Poisson => {
                let b = sharp_column(self.sigma2.as_ref(), self.sigma1.as_ref(), self.n, xi, self.method, true)?;
                Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
            }
        }
    }
}

impl Symbol for ExpansionSymbol {
    fn grid(&self) -> &Arc<Grid> {
        self.sigma1.grid()
    }
    fn order(&self) -> f64 {
        let m = self.sigma1.order() + self.sigma2.order();
        match self.kind {
            ExpansionKind::Poisson if self.n >= 1 => m - 1.0,
            _ => m,
        }
    }
    fn regularity(&self) -> Regularity {
        self.sigma1.regularity().min(self.sigma2.regularity())
    }
    fn is_multiplier(&self) -> bool {
        self.sigma1.is_multiplier() && self.sigma2.is_multiplier()
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        self.try_column(xi)
            .unwrap_or_else(|_| vec![C64::new(f64::NAN, 0.0); self.grid().len()])
    }
    fn label(&self) -> String {
        match self.kind {
            ExpansionKind::Sharp => format!("({})#{}({})", self.sigma1.label(), self.n, self.sigma2.label()),
            ExpansionKind::Poisson => {
                format!("{{{}, {}}}_{}", self.sigma1.label(), self.sigma2.label(), self.n)
            }
        }
    }
}

/// `[Op(σ¹), Op(σ²)] − Op({σ¹, σ²}ₙ)` with the operators prepared once.
#[derive(Debug, Clone)]
pub struct RemainderOperator {
    op1: ApplyPlan,
    op2: ApplyPlan,
    correction: Option<ApplyPlan>,
}

impl RemainderOperator {
    pub fn new(sigma1: SharedSymbol, sigma2: SharedSymbol, n: usize) -> Result<RemainderOperator> {
        let bracket = poisson_n(sigma1.clone(), sigma2.clone(), n)?;
        let correction = if n == 0 {
            None
        } else {
            Some(ApplyPlan::dense(Arc::new(bracket))?)
        };
        Ok(RemainderOperator {
            op1: ApplyPlan::auto(sigma1)?,
            op2: ApplyPlan::auto(sigma2)?,
            correction,
        })
    }

    pub fn commutator(&self, u: &Field) -> Result<Field> {
        let a = self.op1.apply(&self.op2.apply(u)?)?;
        let b = self.op2.apply(&self.op1.apply(u)?)?;
        a.sub(&b)
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        Ok(self.apply_with_terms(u)?.0)
    }

    /// The remainder together with `Op(σ¹)Op(σ²)u`, `Op(σ²)Op(σ¹)u` and, for
    /// `n > 0`, `Op({σ¹, σ²}ₙ)u`.
    pub fn apply_with_terms(&self, u: &Field) -> Result<(Field, Vec<Field>)> {
        let a = self.op1.apply(&self.op2.apply(u)?)?;
        let b = self.op2.apply(&self.op1.apply(u)?)?;
        let c = a.sub(&b)?;
        match &self.correction {
            None => Ok((c, vec![a, b])),
            Some(p) => {
                let k = p.apply(u)?;
                Ok((c.sub(&k)?, vec![a, b, k]))
            }
        }
    }
}

/// `Op(σ¹)Op(σ²) − Op(σ¹ ♯ₙ σ²)` with the operators prepared once.
#[derive(Debug, Clone)]
pub struct CompositionOperator {
    op1: ApplyPlan,
    op2: ApplyPlan,
    sharp: ApplyPlan,
}

impl CompositionOperator {
    pub fn new(sigma1: SharedSymbol, sigma2: SharedSymbol, n: usize) -> Result<CompositionOperator> {
        let sharp = sharp_n(sigma1.clone(), sigma2.clone(), n)?;
        let sharp: SharedSymbol = Arc::new(sharp);
        Ok(CompositionOperator {
            op1: ApplyPlan::auto(sigma1)?,
            op2: ApplyPlan::auto(sigma2)?,
            sharp: ApplyPlan::auto(sharp)?,
        })
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        Ok(self.apply_with_terms(u)?.0)
    }

    /// The residual together with `Op(σ¹)Op(σ²)u` and `Op(σ¹ ♯ₙ σ²)u`.
    pub fn apply_with_terms(&self, u: &Field) -> Result<(Field, Vec<Field>)> {
        let a = self.op1.apply(&self.op2.apply(u)?)?;
        let b = self.sharp.apply(u)?;
        Ok((a.sub(&b)?, vec![a, b]))
    }
}

/// `Op(σ¹)Op(σ²)u − Op(σ²)Op(σ¹)u`.
pub fn commutator_apply(sigma1: &SharedSymbol, sigma2: &SharedSymbol, u: &Field) -> Result<Field> {
    RemainderOperator::new(sigma1.clone(), sigma2.clone(), 0)?.commutator(u)
}

/// Commutator minus `Op({σ¹, σ²}ₙ)u`.
pub fn remainder_apply(sigma1: &SharedSymbol, sigma2: &SharedSymbol, n: usize, u: &Field) -> Result<Field> {
    RemainderOperator::new(sigma1.clone(), sigma2.clone(), n)?.apply(u)
}

/// `Op(σ¹)Op(σ²)u − Op(σ¹ ♯ₙ σ²)u`.
pub fn composition_residual_apply(
    sigma1: &SharedSymbol,
    sigma2: &SharedSymbol,
    n: usize,
    u: &Field,
) -> Result<Field> {
    CompositionOperator::new(sigma1.clone(), sigma2.clone(), n)?.apply(u)
}
