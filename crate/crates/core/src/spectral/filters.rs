//! Littlewood–Paley filters: the bump ψ, the ring φ, the dyadic family φ_p and the
//! admissible cut-off χ built from them.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{config, input, Result};
use crate::jet::Jet;
use crate::spectral::grid::{norm, Grid};
use crate::C64;

/// `e^{-1/t}` for `t > 0`, zero otherwise.
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 1 on `t <= 1/2`, 0 on `t >= 1`, `h(t) = f(2-2t) / (f(2-2t) + f(2t-1))`.
pub fn bump_profile(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = flat(2.0 - 2.0 * t);
    let b = flat(2.0 * t - 1.0);
    a / (a + b)
}

/// The radial profile of ψ, `ψ(ξ) = h(|ξ|)`.
pub fn build_bump_psi() -> fn(f64) -> f64 {
    bump_profile
}

/// Smooth step from 0 (at `t <= lo`) to 1 (at `t >= hi`) using the same glue.
pub fn smooth_step(t: f64, lo: f64, hi: f64) -> f64 {
    1.0 - bump_profile(0.5 + 0.5 * (t - lo) / (hi - lo))
}

/// ψ(ξ): radial bump equal to 1 on `|ξ| <= 1/2` and 0 on `|ξ| >= 1`.
pub fn psi(xi: &[f64; 2]) -> f64 {
    bump_profile(norm(xi))
}

/// φ(ξ) = ψ(ξ/2) − ψ(ξ).
pub fn phi(xi: &[f64; 2]) -> f64 {
    psi(&[xi[0] / 2.0, xi[1] / 2.0]) - psi(xi)
}

/// `φ_p`: ψ for `p = -1`, `φ(2^{-p} ·)` for `p >= 0`, zero below.
pub fn phi_p(p: i32, xi: &[f64; 2]) -> f64 {
    match p {
        p if p < -1 => 0.0,
        -1 => psi(xi),
        p => {
            let s = 0.5f64.powi(p);
            phi(&[xi[0] * s, xi[1] * s])
        }
    }
}

/// ψ(2^{-j} ξ) for any integer `j`.
pub fn psi_scaled(j: i32, xi: &[f64; 2]) -> f64 {
    let s = 2f64.powi(-j);
    psi(&[xi[0] * s, xi[1] * s])
}

fn flat_jet(t: &Jet) -> Jet {
    if t.value() <= 0.0 {
        Jet::zero_like(t)
    } else {
        t.recip().scale(-1.0).exp()
    }
}

fn bump_profile_jet(r: &Jet) -> Jet {
    let t = r.value();
    if t <= 0.5 {
        return Jet::constant_like(r, 1.0);
    }
    if t >= 1.0 {
        return Jet::zero_like(r);
    }
    let a = flat_jet(&r.scale(-2.0).add_const(2.0));
    let b = flat_jet(&r.scale(2.0).add_const(-1.0));
    a.div(&a.add(&b))
}

fn radius_jet(nvars: usize, order: usize, xi: &[f64; 2], scale: f64) -> Jet {
    let [x, y] = Jet::coordinates(nvars, order, xi);
    let (x, y) = (x.scale(scale), y.scale(scale));
    x.mul(&x).add(&y.mul(&y)).sqrt()
}

/// Jet of ψ(s·ξ) around `xi`.
pub fn psi_jet(nvars: usize, order: usize, xi: &[f64; 2], scale: f64) -> Jet {
    let r = norm(xi) * scale.abs();
    if r <= 0.5 {
        return Jet::constant(nvars, order, 1.0);
    }
    if r >= 1.0 {
        return Jet::zero(nvars, order);
    }
    bump_profile_jet(&radius_jet(nvars, order, xi, scale))
}

/// Jet of φ_p around `xi`.
pub fn phi_p_jet(nvars: usize, order: usize, p: i32, xi: &[f64; 2]) -> Jet {
    match p {
        p if p < -1 => Jet::zero(nvars, order),
        -1 => psi_jet(nvars, order, xi, 1.0),
        p => {
            let s = 0.5f64.powi(p);
            psi_jet(nvars, order, xi, s / 2.0).sub(&psi_jet(nvars, order, xi, s))
        }
    }
}

/// Dyadic shells whose φ_p may be nonzero at radius `r`.
pub fn active_shells(r: f64) -> std::ops::RangeInclusive<i32> {
    if r < 1.0 {
        return -1..=0;
    }
    let top = r.log2().floor() as i32;
    (top - 1).max(-1)..=(top + 1)
}

/// Littlewood–Paley filters sampled on a grid's frequency lattice.
#[derive(Debug, Clone)]
pub struct FilterBank {
    grid: Arc<Grid>,
    p_max: i32,
    // filters[0] = ψ, filters[p + 1] = φ_p
    filters: Vec<Vec<f64>>,
}

impl FilterBank {
    /// Builds ψ and φ_0..φ_{P_max} with `P_max = ⌈log₂ max|ξ|⌉` over the lattice.
    pub fn new(grid: Arc<Grid>) -> Result<FilterBank> {
        if grid.xi_max() < 1.0 {
            return Err(config(format!(
                "grid too coarse: n_pts/L = {} < 1/π, the |ξ| = 1 shell is not resolved",
                grid.n_pts() as f64 / grid.period()
            )));
        }
        let p_max = grid.xi_radius_max().log2().ceil() as i32;
        let mut filters = Vec::with_capacity(p_max as usize + 2);
        for p in -1..=p_max {
            filters.push(grid.freqs().iter().map(|xi| phi_p(p, xi)).collect());
        }
        Ok(FilterBank { grid, p_max, filters })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn p_max(&self) -> i32 {
        self.p_max
    }

    /// φ_p on the lattice, `p = -1` being ψ.
    pub fn filter(&self, p: i32) -> Result<&[f64]> {
        if p < -1 || p > self.p_max {
            return Err(input(format!(
                "dyadic index {p} outside [-1, {}]",
                self.p_max
            )));
        }
        Ok(&self.filters[(p + 1) as usize])
    }

    pub fn psi(&self) -> &[f64] {
        &self.filters[0]
    }

    /// Max over the lattice of `|ψ + Σ_p φ_p − 1|`.
    pub fn partition_deviation(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let total: f64 = self.filters.iter().map(|f| f[i]).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The admissible cut-off `χ(η, ξ) = Σ_{p>=-1} ψ(2^{N-p} η) φ_p(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffChi {
    n_cut: u32,
}

impl CutoffChi {
    pub fn new(n_cut: u32) -> Result<CutoffChi> {
        if n_cut < 2 {
            return Err(input(format!("cut-off parameter N must be >= 2, got {n_cut}")));
        }
        Ok(CutoffChi { n_cut })
    }

    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    /// Inner cone radius: χ = 1 for `|η| <= δ₁|ξ|`.
    pub fn delta1(&self) -> f64 {
        2f64.powi(-(self.n_cut as i32) - 2)
    }

    /// Outer cone radius: χ = 0 for `|η| >= δ₂|ξ|`.
    pub fn delta2(&self) -> f64 {
        2f64.powi(1 - self.n_cut as i32)
    }

    pub fn eval(&self, eta: &[f64; 2], xi: &[f64; 2]) -> f64 {
        let n = self.n_cut as i32;
        active_shells(norm(xi))
            .map(|p| {
                let w = phi_p(p, xi);
                if w == 0.0 {
                    0.0
                } else {
                    w * psi_scaled(p - n, eta)
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelL1Row {
    pub beta: [usize; 2],
    pub xi: [f64; 2],
    pub weighted_l1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelL1Report {
    pub n_cut: u32,
    pub rows: Vec<KernelL1Row>,
    /// Per β: max / min of the weighted norms over the ξ samples.
    pub spread: Vec<([usize; 2], f64)>,
    pub bounded: bool,
}

/// Tabulates `⟨ξ⟩^{|β|} |∂_ξ^β χ̌(·, ξ)|_{L¹}` where the inverse transform is taken in η
/// on the grid. Samples with `|ξ| < 1/2` are dropped.
pub fn cutoff_kernel_l1_report(
    chi: &CutoffChi,
    grid: &Grid,
    betas: &[[usize; 2]],
    xi_samples: &[[f64; 2]],
) -> Result<KernelL1Report> {
    let h = grid.dxi().min(1.0 / 32.0);
    let mut rows = Vec::new();
    for beta in betas {
        if beta[0] + beta[1] > 2 {
            return Err(input("kernel report supports |β| <= 2"));
        }
    }
    let samples: Vec<[f64; 2]> = xi_samples
        .iter()
        .copied()
        .filter(|xi| norm(xi) >= 0.5)
        .collect();
    for beta in betas {
        for xi in &samples {
            let mut spec: Vec<C64> = grid
                .freqs()
                .iter()
                .map(|eta| {
                    let f = |z: [f64; 2]| chi.eval(eta, &z);
                    C64::new(central_partial(f, *xi, *beta, h), 0.0)
                })
                .collect();
            // χ̌(y) = L^{-d} Σ_η χ(η) e^{i y·η}
            grid.idft(&mut spec);
            let l1: f64 = spec.iter().map(|v| v.norm()).sum::<f64>() * grid.cell_volume()
                / grid.volume();
            let weight = (1.0 + norm(xi).powi(2)).sqrt().powi((beta[0] + beta[1]) as i32);
            rows.push(KernelL1Row {
                beta: *beta,
                xi: *xi,
                weighted_l1: weight * l1,
            });
        }
    }
    let spread: Vec<([usize; 2], f64)> = betas
        .iter()
        .map(|beta| {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.beta == *beta)
                .map(|r| r.weighted_l1)
                .collect();
            let max = vals.iter().cloned().fold(0.0, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            (*beta, if min > 0.0 { max / min } else { f64::INFINITY })
        })
        .collect();
    let bounded = rows.iter().all(|r| r.weighted_l1.is_finite());
    Ok(KernelL1Report {
        n_cut: chi.n_cut,
        rows,
        spread,
        bounded,
    })
}

/// Fourth-order central difference of `f` at `x` for |β| <= 2.
fn central_partial<F: Fn([f64; 2]) -> f64>(f: F, x: [f64; 2], beta: [usize; 2], h: f64) -> f64 {
    let shift = |dx: f64, dy: f64| f([x[0] + dx, x[1] + dy]);
    let d1 = |axis: usize, g: &dyn Fn(f64) -> f64| -> f64 {
        let _ = axis;
        (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h)
    };
    match (beta[0], beta[1]) {
        (0, 0) => f(x),
        (1, 0) => d1(0, &|t| shift(t, 0.0)),
        (0, 1) => d1(1, &|t| shift(0.0, t)),
        (2, 0) => {
            (-shift(2.0 * h, 0.0) + 16.0 * shift(h, 0.0) - 30.0 * f(x) + 16.0 * shift(-h, 0.0)
                - shift(-2.0 * h, 0.0))
                / (12.0 * h * h)
        }
        (0, 2) => {
            (-shift(0.0, 2.0 * h) + 16.0 * shift(0.0, h) - 30.0 * f(x) + 16.0 * shift(0.0, -h)
                - shift(0.0, -2.0 * h))
                / (12.0 * h * h)
        }
        _ => {
            let dy = |dx: f64| d1(1, &|t| shift(dx, t));
            d1(0, &dy)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;

    #[test]
    fn bump_plateaus() {
        assert_eq!(psi(&[0.4, 0.0]), 1.0);
        assert_eq!(psi(&[1.2, 0.0]), 0.0);
        // h(0.75) = f(0.5) / (f(0.5) + f(0.5)) = 1/2 by symmetry of the glue
        assert!((psi(&[0.75, 0.0]) - 0.5).abs() < 1e-15);
        let v = psi(&[0.6, 0.0]);
        let expected = (-1.0f64 / 0.8).exp() / ((-1.0f64 / 0.8).exp() + (-1.0f64 / 0.2).exp());
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn bump_is_monotone() {
        let mut last = 1.0;
        for i in 0..=200 {
            let v = bump_profile(0.5 + i as f64 / 400.0);
            assert!(v <= last + 1e-15);
            last = v;
        }
    }

    #[test]
    fn ring_at_unit_radius() {
        assert_eq!(phi_p(0, &[1.0, 0.0]), 1.0);
        assert_eq!(phi_p(3, &[3.0 * 16.0, 0.0]), 0.0);
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        for spec in [GridSpec::with_default_period(1, 1024), GridSpec::with_default_period(2, 64)] {
            let bank = FilterBank::new(Grid::new(spec).unwrap()).unwrap();
            assert!(bank.partition_deviation() <= 1e-12);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = Grid::new(GridSpec::new(1, 8, 100.0)).unwrap();
        assert!(FilterBank::new(grid).is_err());
    }

    #[test]
    fn cutoff_cone() {
        let chi = CutoffChi::new(4).unwrap();
        assert_eq!(chi.delta1(), 2f64.powi(-6));
        assert_eq!(chi.delta2(), 2f64.powi(-3));
        for r in [0.5, 0.7, 1.0, 3.3, 10.0, 100.0] {
            let xi = [r, 0.0];
            assert_eq!(chi.eval(&[0.0, 0.0], &xi), 1.0);
            assert!((chi.eval(&[chi.delta1() * r, 0.0], &xi) - 1.0).abs() < 1e-15);
            assert_eq!(chi.eval(&[chi.delta2() * r, 0.0], &xi), 0.0);
            assert_eq!(chi.eval(&[0.0, 2.0 * chi.delta2() * r], &xi), 0.0);
        }
        assert!(CutoffChi::new(1).is_err());
    }

    #[test]
    fn jets_match_values() {
        for xi in [[0.3, 0.0], [0.7, 0.2], [1.7, -0.4], [5.0, 3.0]] {
            let j = phi_p_jet(2, 2, 1, &xi);
            assert!((j.value() - phi_p(1, &xi)).abs() < 1e-14);
            let h = 1e-5;
            let fd = (phi_p(1, &[xi[0] + h, xi[1]]) - phi_p(1, &[xi[0] - h, xi[1]])) / (2.0 * h);
            let an = j.partial(crate::symbols::MultiIndex([1, 0]));
            assert!((fd - an).abs() < 1e-6, "{fd} vs {an}");
        }
    }
}
