//! Symbols `σ(x, ξ)` sampled in x on a grid and evaluated at arbitrary ξ.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::factorial;
use crate::spectral::Grid;
use crate::C64;

pub mod catalogue;
pub mod deriv;
pub mod profile;
pub mod seminorms;
pub mod wrappers;

pub use catalogue::{
    build_composite, build_symbol, dn_symbol, split_composite, AmplitudeOuter, Composite, DnOuter, Outer, Separable,
};
pub use deriv::{partials, xi_derivative, DerivMethod, XiDerivative};
pub use profile::Profile;
pub use seminorms::{
    composite_norm, seminorm_M, seminorm_N, seminorm_m, seminorm_n, NormVariant, SeminormReport,
};
pub use wrappers::{LinearCombination, XDerivative};

pub type SharedSymbol = Arc<dyn Symbol>;

/// Multi-index `β = (β₁, β₂)`; the second entry is zero in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub [usize; 2]);

impl MultiIndex {
    pub fn len(&self) -> usize {
        self.0[0] + self.0[1]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0]
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// `β! = β₁! β₂!`.
    pub fn factorial(&self) -> f64 {
        factorial(self.0[0]) * factorial(self.0[1])
    }

    /// All β with `|β| <= order` in dimension `dim`, by increasing total degree.
    pub fn all(dim: usize, order: usize) -> Vec<MultiIndex> {
        crate::spectral::norms::multi_indices(dim, order)
            .into_iter()
            .map(MultiIndex)
            .collect()
    }

    pub fn exact(dim: usize, order: usize) -> Vec<MultiIndex> {
        crate::spectral::norms::multi_indices_exact(dim, order)
            .into_iter()
            .map(MultiIndex)
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0[0], self.0[1])
    }
}

/// Degree of regularity at the origin: ξ-derivatives up to this order stay
/// bounded on `|ξ| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularity {
    Finite(usize),
    Infinite,
}

impl Regularity {
    pub fn admits(&self, k: usize) -> bool {
        match self {
            Regularity::Finite(r) => k <= *r,
            Regularity::Infinite => true,
        }
    }

    pub fn min(self, other: Regularity) -> Regularity {
        match (self, other) {
            (Regularity::Infinite, r) | (r, Regularity::Infinite) => r,
            (Regularity::Finite(a), Regularity::Finite(b)) => Regularity::Finite(a.min(b)),
        }
    }
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularity::Finite(k) => write!(f, "{k}"),
            Regularity::Infinite => write!(f, "inf"),
        }
    }
}

/// `∂_ξ^β σ(·, ξ)` for every `|β| <= order`, each as a column over the x-lattice.
pub type Partials = BTreeMap<MultiIndex, Vec<C64>>;

/// A symbol of order `m`, sampled in x on its grid.
///
/// `column(ξ)` returns `σ(x_j, ξ)` for every grid point `x_j`; ξ need not lie on the
/// frequency lattice. Implementations must be pure.
pub trait Symbol: Send + Sync + fmt::Debug {
    fn grid(&self) -> &Arc<Grid>;

    fn order(&self) -> f64;

    fn regularity(&self) -> Regularity {
        Regularity::Infinite
    }

    /// σ does not depend on x.
    fn is_multiplier(&self) -> bool {
        false
    }

    /// σ does not depend on ξ.
    fn is_function(&self) -> bool {
        false
    }

    /// Highest ξ-derivative order provided by [`Symbol::analytic_partials`].
    fn analytic_order(&self) -> usize {
        0
    }

    fn column(&self, xi: &[f64; 2]) -> Vec<C64>;

    /// Exact ξ-derivatives up to `order <= analytic_order()`.
    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        if order == 0 {
            let mut out = Partials::new();
            out.insert(MultiIndex([0, 0]), self.column(xi));
            return Ok(out);
        }
        Err(Error::Capability(format!(
            "{} has no analytic ξ-derivatives of order {order}",
            self.label()
        )))
    }

    /// Exact `∂_x^α σ(·, ξ)` for `|α| = 1` when the symbol knows it; callers
    /// fall back to spectral differentiation of the column otherwise.
    fn x_partial(&self, _xi: &[f64; 2], _alpha: [usize; 2]) -> Option<Vec<C64>> {
        None
    }

    fn label(&self) -> String;
}

/// Column of zeros on `grid`.
pub(crate) fn zero_column(grid: &Grid) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); grid.len()]
}

/// The symbol `0` of order `order`.
#[derive(Debug, Clone)]
pub struct ZeroSymbol {
    grid: Arc<Grid>,
    order: f64,
}

impl ZeroSymbol {
    pub fn new(grid: Arc<Grid>, order: f64) -> ZeroSymbol {
        ZeroSymbol { grid, order }
    }
}

impl Symbol for ZeroSymbol {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    fn order(&self) -> f64 {
        self.order
    }
    fn is_multiplier(&self) -> bool {
        true
    }
    fn is_function(&self) -> bool {
        true
    }
    fn analytic_order(&self) -> usize {
        usize::MAX
    }
    fn column(&self, _xi: &[f64; 2]) -> Vec<C64> {
        zero_column(&self.grid)
    }
    fn analytic_partials(&self, _xi: &[f64; 2], order: usize) -> Result<Partials> {
        Ok(MultiIndex::all(self.grid.dim(), order)
            .into_iter()
            .map(|b| (b, zero_column(&self.grid)))
            .collect())
    }
    fn label(&self) -> String {
        "zero".into()
    }
}
