use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{input, Result};
use crate::spectral::{Field, Grid};
use crate::symbols::{SharedSymbol, Symbol};
use crate::C64;

/// Symbol matrices up to this many entries are kept in memory.
pub const MATERIALIZE_LIMIT: usize = 1 << 22;
/// Frequencies per reduction chunk; fixed so sums do not depend on the thread count.
const CHUNK: usize = 32;

/// `σ(·, ξ)` at a lattice frequency, with a non-finite zero mode replaced by the
/// column at `(Δξ, 0)`.
pub fn lattice_column(sym: &dyn Symbol, idx: usize) -> Result<Vec<C64>> {
    let grid = sym.grid();
    let xi = grid.freqs()[idx];
    let col = sym.column(&xi);
    if col.iter().all(|v| v.is_finite()) {
        return Ok(col);
    }
    if xi == [0.0, 0.0] {
        let col = sym.column(&[grid.dxi(), 0.0]);
        if col.iter().all(|v| v.is_finite()) {
            return Ok(col);
        }
    }
    Err(input(format!(
        "{} is not finite at ξ = ({}, {})",
        sym.label(),
        xi[0],
        xi[1]
    )))
}

/// `e^{2πi r/n}` for `r = 0..n`.
fn twiddles(n: usize) -> Vec<C64> {
    (0..n)
        .map(|r| C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64))
        .collect()
}

/// Integer lattice coordinates of index `i`.
fn coords(grid: &Grid, i: usize) -> [usize; 2] {
    let n = grid.n_pts();
    if grid.dim() == 1 {
        [i, 0]
    } else {
        [i / n, i % n]
    }
}

/// `Op(σ)` evaluated by direct quadrature,
/// `Op(σ)u(x_j) = n^{-d} Σ_ξ σ(x_j, ξ) DFT(u)(ξ) e^{i x_j·ξ}`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    sym: SharedSymbol,
    grid: Arc<Grid>,
    columns: Option<Arc<Vec<Vec<C64>>>>,
    tw: Arc<Vec<C64>>,
}

impl DenseOperator {
    /// Materializes the symbol matrix when it has at most [`MATERIALIZE_LIMIT`] entries.
    pub fn new(sym: SharedSymbol) -> Result<DenseOperator> {
        let grid = sym.grid().clone();
        let n = grid.len();
        let columns = if n.saturating_mul(n) <= MATERIALIZE_LIMIT {
            let cols: Vec<Result<Vec<C64>>> = (0..n)
                .into_par_iter()
                .map(|k| lattice_column(sym.as_ref(), k))
                .collect();
            Some(Arc::new(cols.into_iter().collect::<Result<Vec<_>>>()?))
        } else {
            None
        };
        let tw = Arc::new(twiddles(grid.n_pts()));
        Ok(DenseOperator {
            sym,
            grid,
            columns,
            tw,
        })
    }

    pub fn symbol(&self) -> &SharedSymbol {
        &self.sym
    }

    pub fn is_materialized(&self) -> bool {
        self.columns.is_some()
    }

    fn column(&self, k: usize) -> Result<std::borrow::Cow<'_, [C64]>> {
        match &self.columns {
            Some(c) => Ok(std::borrow::Cow::Borrowed(&c[k])),
            None => Ok(std::borrow::Cow::Owned(lattice_column(self.sym.as_ref(), k)?)),
        }
    }

    fn phase(&self, j: [usize; 2], k: [usize; 2]) -> C64 {
        let n = self.grid.n_pts();
        self.tw[(j[0] * k[0] + j[1] * k[1]) % n]
    }

    pub fn apply(&self, u: &Field) -> Result<Field> {
        if **u.grid() != *self.grid {
            return Err(input("field and symbol live on different grids"));
        }
        let len = self.grid.len();
        let mut spec = u.samples().to_vec();
        self.grid.dft(&mut spec);
        let ks: Vec<usize> = (0..len).filter(|k| spec[*k] != C64::new(0.0, 0.0)).collect();
        let partial: Vec<Result<Vec<C64>>> = ks
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![C64::new(0.0, 0.0); len];
                for &k in chunk {
                    let col = self.column(k)?;
                    let kk = coords(&self.grid, k);
                    let coef = spec[k];
                    for (j, a) in acc.iter_mut().enumerate() {
                        *a += col[j] * coef * self.phase(coords(&self.grid, j), kk);
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); len];
        for p in partial {
            for (o, v) in out.iter_mut().zip(p?) {
                *o += v;
            }
        }
        let scale = 1.0 / len as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        Field::new(self.grid.clone(), out)
    }

    /// The L² adjoint `Op(σ)*`.
    pub fn apply_adjoint(&self, v: &Field) -> Result<Field> {
        if **v.grid() != *self.grid {
            return Err(input("field and symbol live on different grids"));
        }
        let len = self.grid.len();
        let samples = v.samples();
        let coeffs: Vec<Result<C64>> = (0..len)
            .into_par_iter()
            .map(|k| {
                let col = self.column(k)?;
                let kk = coords(&self.grid, k);
                let mut acc = C64::new(0.0, 0.0);
                for (j, s) in samples.iter().enumerate() {
                    acc += col[j].conj() * self.phase(coords(&self.grid, j), kk).conj() * s;
                }
                Ok(acc)
            })
            .collect();
        let mut c = coeffs.into_iter().collect::<Result<Vec<C64>>>()?;
        self.grid.idft_normalized(&mut c);
        Field::new(self.grid.clone(), c)
    }

    /// Floating-point operations of one application.
    pub fn cost(&self) -> f64 {
        let n = self.grid.len() as f64;
        8.0 * n * n
    }
}

/// `Op(σ)u` by dense quadrature.
pub fn op_apply_dense(sym: &SharedSymbol, u: &Field) -> Result<Field> {
    DenseOperator::new(sym.clone())?.apply(u)
}

/// `Op(σ)*v` by dense quadrature.
pub fn op_apply_dense_adjoint(sym: &SharedSymbol, v: &Field) -> Result<Field> {
    DenseOperator::new(sym.clone())?.apply_adjoint(v)
}
