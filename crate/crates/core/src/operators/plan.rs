use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::decompose::{Component, ElementarySymbols, FourWaySplit};
use crate::error::{input, Result};
use crate::operators::dense::{lattice_column, DenseOperator};
use crate::spectral::grid::japanese;
use crate::spectral::Field;
use crate::symbols::SharedSymbol;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApplyMode {
    Dense,
    Multiplier,
    Function,
    Elementary,
    Component(Component),
}

impl fmt::Display for ApplyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApplyMode::Dense => f.write_str("dense"),
            ApplyMode::Multiplier => f.write_str("multiplier"),
            ApplyMode::Function => f.write_str("function"),
            ApplyMode::Elementary => f.write_str("elementary"),
            ApplyMode::Component(c) => write!(f, "component({c})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Symbol(SharedSymbol),
    Dense(DenseOperator),
    Elementary(Arc<ElementarySymbols>),
}

/// A chosen application path together with its resources and cost.
#[derive(Debug, Clone)]
pub struct ApplyPlan {
    mode: ApplyMode,
    payload: Payload,
    cost: f64,
}

fn fft_cost(n: f64) -> f64 {
    5.0 * n * n.log2().max(1.0)
}

impl ApplyPlan {
    /// Multiplier or function fast path when the symbol allows it, dense otherwise.
    pub fn auto(sym: SharedSymbol) -> Result<ApplyPlan> {
        let n = sym.grid().len() as f64;
        if sym.is_multiplier() {
            Ok(ApplyPlan {
                mode: ApplyMode::Multiplier,
                payload: Payload::Symbol(sym),
                cost: 2.0 * fft_cost(n) + 6.0 * n,
            })
        } else if sym.is_function() {
            Ok(ApplyPlan {
                mode: ApplyMode::Function,
                payload: Payload::Symbol(sym),
                cost: 6.0 * n,
            })
        } else {
            ApplyPlan::dense(sym)
        }
    }

    pub fn dense(sym: SharedSymbol) -> Result<ApplyPlan> {
        let op = DenseOperator::new(sym)?;
        Ok(ApplyPlan {
            mode: ApplyMode::Dense,
            cost: op.cost(),
            payload: Payload::Dense(op),
        })
    }

    pub fn elementary(es: Arc<ElementarySymbols>) -> ApplyPlan {
        ApplyPlan {
            mode: ApplyMode::Elementary,
            cost: es.apply_cost(),
            payload: Payload::Elementary(es),
        }
    }

    pub fn component(split: &FourWaySplit, which: Component) -> Result<ApplyPlan> {
        let op = DenseOperator::new(split.component(which))?;
        Ok(ApplyPlan {
            mode: ApplyMode::Component(which),
            cost: op.cost(),
            payload: Payload::Dense(op),
        })
    }

    pub fn mode(&self) -> ApplyMode {
        self.mode
    }

    /// Estimated floating-point operations per application.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        match (&self.payload, self.mode) {
            (Payload::Symbol(s), ApplyMode::Multiplier) => apply_multiplier_symbol(s, u),
            (Payload::Symbol(s), _) => apply_function_symbol(s, u),
            (Payload::Dense(op), _) => op.apply(u),
            (Payload::Elementary(es), _) => op_apply_elementary(es, u),
        }
    }
}

/// `σ(D)u` for an x-independent symbol.
pub fn apply_multiplier_symbol(sym: &SharedSymbol, u: &Field) -> Result<Field> {
    if **u.grid() != **sym.grid() {
        return Err(input("field and symbol live on different grids"));
    }
    let n = u.grid().len();
    let values: Vec<C64> = (0..n)
        .map(|k| lattice_column(sym.as_ref(), k).map(|c| c[0]))
        .collect::<Result<_>>()?;
    Ok(u.map_spectrum(|i, _| values[i]))
}

/// `σ·u` for a ξ-independent symbol.
pub fn apply_function_symbol(sym: &SharedSymbol, u: &Field) -> Result<Field> {
    if **u.grid() != **sym.grid() {
        return Err(input("field and symbol live on different grids"));
    }
    let a = lattice_column(sym.as_ref(), 0)?;
    let samples = u.samples().iter().zip(&a).map(|(v, w)| v * w).collect();
    Field::new(u.grid().clone(), samples)
}

/// `Σ_k w_k Σ_q c_{k,q}(x) (λ_k(2^{−q}D)⟨D⟩^m u)(x)`.
pub fn op_apply_elementary(es: &ElementarySymbols, u: &Field) -> Result<Field> {
    if **u.grid() != **es.grid() {
        return Err(input("field and elementary symbols live on different grids"));
    }
    let grid = es.grid();
    let dim = grid.dim();
    let m = es.order();
    let spec = u.spectrum();
    let base: Vec<C64> = spec
        .iter()
        .zip(grid.freqs())
        .map(|(v, xi)| v * japanese(xi).powf(m))
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    for qi in 0..es.blocks() {
        let q = qi as i32 - 1;
        let s = 2f64.powi(-q);
        for (ki, k) in es.ks().iter().enumerate() {
            let mut buf: Vec<C64> = base
                .iter()
                .zip(grid.freqs())
                .map(|(v, xi)| v * crate::decompose::lambda_k(*k, &[xi[0] * s, xi[1] * s]))
                .collect();
            if buf.iter().all(|v| *v == C64::new(0.0, 0.0)) {
                continue;
            }
            grid.idft(&mut buf);
            let w = crate::decompose::elementary::weight(dim, *k) / grid.volume();
            let c = es.coefficient(q, ki);
            for ((o, b), cv) in out.iter_mut().zip(&buf).zip(c) {
                *o += cv * b * w;
            }
        }
    }
    Field::new(grid.clone(), out)
}

/// Dense application of one split component.
pub fn op_apply_component(split: &FourWaySplit, which: Component, u: &Field) -> Result<Field> {
    ApplyPlan::component(split, which)?.apply(u)
}
