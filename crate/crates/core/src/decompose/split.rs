use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Error, Result};
use crate::spectral::field::spectral_derivative_factor;
use crate::spectral::filters::{active_shells, phi_p, psi, psi_scaled, CutoffChi};
use crate::spectral::grid::{japanese, norm};
use crate::spectral::Grid;
use crate::symbols::deriv::{fd_step, partials, DerivMethod};
use crate::symbols::seminorms::{high_frequencies, seminorm, Family};
use crate::symbols::{MultiIndex, Regularity, SharedSymbol, Symbol};
use crate::C64;

/// Smallest admissible cut-off parameter.
pub const MIN_CUT: u32 = 4;

/// One of the pieces of the four-way split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "lf")]
    Lf,
    I,
    II,
    R,
    R1,
    R2,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Lf,
        Component::I,
        Component::II,
        Component::R,
        Component::R1,
        Component::R2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Lf => "lf",
            Component::I => "I",
            Component::II => "II",
            Component::R => "R",
            Component::R1 => "R1",
            Component::R2 => "R2",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Component> {
        Component::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| input(format!("unknown component {s:?}, expected lf, I, II, R, R1 or R2")))
    }
}

/// All component columns at one ξ.
#[derive(Debug, Clone)]
pub struct Pieces {
    pub lf: Vec<C64>,
    pub i: Vec<C64>,
    pub ii: Vec<C64>,
    pub r1: Vec<C64>,
    pub r2: Vec<C64>,
}

impl Pieces {
    /// `σ_R`, defined as `σ_{R,1} + σ_{R,2}`.
    pub fn r(&self) -> Vec<C64> {
        self.r1.iter().zip(&self.r2).map(|(a, b)| a + b).collect()
    }

    pub fn get(&self, which: Component) -> Vec<C64> {
        match which {
            Component::Lf => self.lf.clone(),
            Component::I => self.i.clone(),
            Component::II => self.ii.clone(),
            Component::R => self.r(),
            Component::R1 => self.r1.clone(),
            Component::R2 => self.r2.clone(),
        }
    }

    /// `σ_lf + σ_I + σ_II + σ_R`.
    pub fn sum(&self) -> Vec<C64> {
        let r = self.r();
        (0..self.lf.len())
            .map(|j| self.lf[j] + self.i[j] + self.ii[j] + r[j])
            .collect()
    }
}

#[derive(Debug)]
struct SplitCore {
    base: SharedSymbol,
    chi: CutoffChi,
}

impl SplitCore {
    /// `(1−ψ(ξ)) Σ_p φ_p(η) ψ(2^{N−p} ξ)`, the x-frequency mask of σ_II.
    fn mask_ii(&self, eta: &[f64; 2], xi: &[f64; 2], hi: f64) -> f64 {
        let n = self.chi.n_cut() as i32;
        let s: f64 = active_shells(norm(eta))
            .map(|p| {
                let w = phi_p(p, eta);
                if w == 0.0 {
                    0.0
                } else {
                    w * psi_scaled(p - n, xi)
                }
            })
            .sum();
        hi * s
    }

    fn pieces(&self, xi: &[f64; 2]) -> Pieces {
        let grid = self.base.grid();
        let col = self.base.column(xi);
        let psi_xi = psi(xi);
        let hi = 1.0 - psi_xi;
        let lf: Vec<C64> = col.iter().map(|v| v * psi_xi).collect();
        let len = col.len();
        let zero = vec![C64::new(0.0, 0.0); len];
        if hi == 0.0 {
            return Pieces {
                lf,
                i: zero.clone(),
                ii: zero.clone(),
                r1: zero.clone(),
                r2: zero,
            };
        }
        let origin = [0.0, 0.0];
        if let Some(c) = constant(&col) {
            // the x-spectrum is the zero mode alone
            let mi = hi * self.chi.eval(&origin, xi);
            let mii = self.mask_ii(&origin, xi, hi);
            let rest = (hi - mi - mii) * psi(&origin);
            return Pieces {
                lf,
                i: vec![c * mi; len],
                ii: vec![c * mii; len],
                r1: zero,
                r2: vec![c * rest; len],
            };
        }
        let mut spec = col;
        grid.dft(&mut spec);
        let mut i_hat = Vec::with_capacity(len);
        let mut ii_hat = Vec::with_capacity(len);
        let mut r1_hat = Vec::with_capacity(len);
        let mut r2_hat = Vec::with_capacity(len);
        for (v, eta) in spec.iter().zip(grid.freqs()) {
            let mi = hi * self.chi.eval(eta, xi);
            let mii = self.mask_ii(eta, xi, hi);
            let rest = v * (hi - mi - mii);
            let low = psi(eta);
            i_hat.push(v * mi);
            ii_hat.push(v * mii);
            r1_hat.push(rest * (1.0 - low));
            r2_hat.push(rest * low);
        }
        for buf in [&mut i_hat, &mut ii_hat, &mut r1_hat, &mut r2_hat] {
            grid.idft_normalized(buf);
        }
        Pieces {
            lf,
            i: i_hat,
            ii: ii_hat,
            r1: r1_hat,
            r2: r2_hat,
        }
    }
}

fn constant(col: &[C64]) -> Option<C64> {
    let first = *col.first()?;
    col.iter().all(|v| *v == first).then_some(first)
}

/// `σ = σ_lf + σ_I + σ_II + σ_R` with `σ_R = σ_{R,1} + σ_{R,2}`.
///
/// σ_I keeps the x-frequencies `η` with `|η| ≲ 2^{−N}|ξ|` through the cut-off χ,
/// σ_II the x-frequencies far above `|ξ|`, and σ_R everything else in
/// `(1−ψ(ξ))σ`. `σ_{R,2} = ψ(D_x)σ_R` and `σ_{R,1} = (1−ψ(D_x))σ_R`.
#[derive(Debug, Clone)]
pub struct FourWaySplit {
    core: Arc<SplitCore>,
}

/// Largest cut-off parameter the grid resolves: `log₂ n − 1`.
pub fn max_cut(grid: &Grid) -> u32 {
    grid.n_pts().trailing_zeros().saturating_sub(1)
}

pub fn four_way_split(sym: SharedSymbol, n_cut: u32) -> Result<FourWaySplit> {
    if n_cut < MIN_CUT {
        return Err(config(format!("cut-off parameter N = {n_cut} is below {MIN_CUT}")));
    }
    let top = max_cut(sym.grid());
    if n_cut > top {
        return Err(config(format!(
            "cut-off parameter N = {n_cut} exceeds {top}, the dyadic range of {} points",
            sym.grid().n_pts()
        )));
    }
    Ok(FourWaySplit {
        core: Arc::new(SplitCore {
            base: sym,
            chi: CutoffChi::new(n_cut)?,
        }),
    })
}

impl FourWaySplit {
    pub fn n_cut(&self) -> u32 {
        self.core.chi.n_cut()
    }

    pub fn chi(&self) -> &CutoffChi {
        &self.core.chi
    }

    pub fn base(&self) -> &SharedSymbol {
        &self.core.base
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.core.base.grid()
    }

    pub fn pieces(&self, xi: &[f64; 2]) -> Pieces {
        self.core.pieces(xi)
    }

    pub fn component(&self, which: Component) -> SharedSymbol {
        Arc::new(SplitComponent {
            core: self.core.clone(),
            which,
        })
    }

    /// Relative sup error of `σ_lf + σ_I + σ_II + σ_R − σ` over the lattice.
    pub fn reconstruction_error(&self) -> f64 {
        let grid = self.grid();
        let rows: Vec<(f64, f64)> = grid
            .freqs()
            .par_iter()
            .map(|xi| {
                let p = self.pieces(xi);
                let base = self.core.base.column(xi);
                let err = p
                    .sum()
                    .iter()
                    .zip(&base)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                let size = base.iter().map(|v| v.norm()).fold(0.0, f64::max);
                (err, size)
            })
            .collect();
        let err = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let size = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        if size == 0.0 {
            err
        } else {
            err / size
        }
    }
}

/// One component of a [`FourWaySplit`] viewed as a symbol.
#[derive(Debug, Clone)]
pub struct SplitComponent {
    core: Arc<SplitCore>,
    which: Component,
}

impl SplitComponent {
    pub fn which(&self) -> Component {
        self.which
    }
}

impl Symbol for SplitComponent {
    fn grid(&self) -> &Arc<Grid> {
        self.core.base.grid()
    }
    fn order(&self) -> f64 {
        self.core.base.order()
    }
    fn regularity(&self) -> Regularity {
        match self.which {
            Component::Lf => self.core.base.regularity(),
            _ => Regularity::Infinite,
        }
    }
    fn is_multiplier(&self) -> bool {
        self.core.base.is_multiplier()
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        self.core.pieces(xi).get(self.which)
    }
    fn label(&self) -> String {
        format!("{}_{}[N={}]", self.core.base.label(), self.which, self.core.chi.n_cut())
    }
}

/// Worst fraction of x-spectrum energy of σ_I(·, ξ) outside the cone
/// `|η| <= 2^{1−N}|ξ|`, over lattice ξ with `|ξ| >= 1/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportReport {
    pub n_cut: u32,
    pub cone_factor: f64,
    pub checked: usize,
    pub max_outside_fraction: f64,
    pub worst_xi: [f64; 2],
    pub tolerance: f64,
    pub pass: bool,
}

pub const SUPPORT_TOLERANCE: f64 = 1e-10;
/// Bernstein ratios below this are treated as zero.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;
/// Safety margin on the finite-difference roundoff estimate removed from each ratio.
const NOISE_FACTOR: f64 = 64.0;

pub fn spectral_support_check(split: &FourWaySplit) -> SupportReport {
    let grid = split.grid();
    let cone = split.chi().delta2();
    let xis: Vec<[f64; 2]> = grid
        .freqs()
        .iter()
        .copied()
        .filter(|xi| norm(xi) >= 0.5)
        .collect();
    let rows: Vec<(f64, [f64; 2])> = xis
        .par_iter()
        .map(|xi| {
            let mut spec = split.pieces(xi).i;
            grid.dft(&mut spec);
            let radius = cone * norm(xi);
            let mut total = 0.0;
            let mut outside = 0.0;
            for (v, eta) in spec.iter().zip(grid.freqs()) {
                let e = v.norm_sqr();
                total += e;
                if norm(eta) > radius {
                    outside += e;
                }
            }
            let frac = if total > 0.0 { outside / total } else { 0.0 };
            (frac, *xi)
        })
        .collect();
    let (max_outside_fraction, worst_xi) = rows
        .iter()
        .fold((0.0, [0.0, 0.0]), |acc, r| if r.0 > acc.0 { *r } else { acc });
    SupportReport {
        n_cut: split.n_cut(),
        cone_factor: cone,
        checked: xis.len(),
        max_outside_fraction,
        worst_xi,
        tolerance: SUPPORT_TOLERANCE,
        pass: max_outside_fraction <= SUPPORT_TOLERANCE,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinRow {
    pub alpha: [usize; 2],
    pub beta: [usize; 2],
    /// `(j, value)`: largest weighted ratio over ξ with `2^j <= |ξ| < 2^{j+1}`.
    pub shells: Vec<(i32, f64)>,
    pub max: f64,
    pub bounded: bool,
}

/// `sup ⟨ξ⟩^{|β|−m−|α|} |∂_x^α ∂_ξ^β σ_I(·,ξ)|_∞ / M^m_{|β|}(σ)` by dyadic shell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub n_cut: u32,
    pub rows: Vec<BernsteinRow>,
}

/// In two dimensions the ξ samples are the lattice points on the axes and diagonals.
fn bernstein_samples(grid: &Grid) -> Vec<[f64; 2]> {
    let all = high_frequencies(grid);
    if grid.dim() == 1 {
        return all;
    }
    all.into_iter()
        .filter(|xi| xi[0] == 0.0 || xi[1] == 0.0 || xi[0].abs() == xi[1].abs())
        .collect()
}

pub fn bernstein_check(split: &FourWaySplit, max_order: usize) -> Result<BernsteinReport> {
    let grid = split.grid().clone();
    let dim = grid.dim();
    let m = split.base().order();
    let sigma_i = split.component(Component::I);
    let betas = MultiIndex::all(dim, max_order);
    let alphas = MultiIndex::all(dim, max_order);
    let mut norms = Vec::with_capacity(max_order + 1);
    for k in 0..=max_order {
        norms.push(seminorm(split.base().as_ref(), Family::M { k, l: 0 }, DerivMethod::Auto)?);
    }
    let nyq = -(grid.n_pts() as f64) / 2.0 * grid.dxi();
    let xis = bernstein_samples(&grid);
    let h = fd_step(&grid);
    // per ξ: value for every (α, β) pair
    let per_xi: Vec<Result<Vec<f64>>> = xis
        .par_iter()
        .map(|xi| {
            let parts = partials(sigma_i.as_ref(), xi, max_order, DerivMethod::FiniteDifference)?;
            let level = parts[&MultiIndex([0, 0])].iter().map(|v| v.norm()).fold(0.0, f64::max);
            let eta_max = (split.chi().delta2() * norm(xi)).max(1.0);
            let mut out = Vec::with_capacity(alphas.len() * betas.len());
            for alpha in &alphas {
                for beta in &betas {
                    let mut col = parts[beta].clone();
                    if !alpha.is_zero() && constant(&col).is_some() {
                        col.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    } else if !alpha.is_zero() {
                        grid.dft(&mut col);
                        for (v, eta) in col.iter_mut().zip(grid.freqs()) {
                            *v *= spectral_derivative_factor(eta, alpha.0, nyq);
                        }
                        grid.idft_normalized(&mut col);
                    }
                    let sup = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let weight = japanese(xi).powf(beta.len() as f64 - m - alpha.len() as f64);
                    let denom = norms[beta.len()];
                    // cancellation in the stencil: ε|σ| times 16 per ξ-derivative
                    let noise = NOISE_FACTOR
                        * f64::EPSILON
                        * level
                        * (16.0 / h).powi(beta.len() as i32)
                        * eta_max.powi(alpha.len() as i32);
                    let value = (sup - noise).max(0.0);
                    out.push(if denom > 0.0 { weight * value / denom } else { 0.0 });
                }
            }
            Ok(out)
        })
        .collect();
    let per_xi: Vec<Vec<f64>> = per_xi.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut idx = 0;
    for alpha in &alphas {
        for beta in &betas {
            let mut shells: std::collections::BTreeMap<i32, f64> = Default::default();
            for (xi, vals) in xis.iter().zip(&per_xi) {
                let j = norm(xi).log2().floor() as i32;
                let e = shells.entry(j).or_insert(0.0);
                *e = e.max(vals[idx]);
            }
            let shells: Vec<(i32, f64)> = shells.into_iter().collect();
            let max = shells.iter().map(|s| s.1).fold(0.0, f64::max);
            let inner = shells[..shells.len().saturating_sub(1)]
                .iter()
                .map(|s| s.1)
                .fold(0.0, f64::max);
            let bounded = shells.len() < 2 || max <= 2.0 * inner || max <= ROUNDOFF_FLOOR;
            rows.push(BernsteinRow {
                alpha: alpha.0,
                beta: beta.0,
                shells,
                max,
                bounded,
            });
            idx += 1;
        }
    }
    Ok(BernsteinReport {
        n_cut: split.n_cut(),
        rows,
    })
}
