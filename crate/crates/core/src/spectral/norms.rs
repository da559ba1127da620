use crate::error::{input, Result};
use crate::spectral::field::Field;
use crate::spectral::filters::FilterBank;
use crate::spectral::grid::japanese;
use crate::C64;

/// `m(D)u`: multiplies the spectrum pointwise by `profile(ξ)`.
pub fn apply_multiplier<T, F>(u: &Field, profile: F) -> Result<Field>
where
    T: Into<C64>,
    F: Fn(&[f64; 2]) -> T,
{
    let values: Vec<C64> = u.grid().freqs().iter().map(|xi| profile(xi).into()).collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(input("multiplier profile is not finite on the lattice"));
    }
    Ok(u.map_spectrum(|i, _| values[i]))
}

/// `φ_p(D)u`.
pub fn lp_block(bank: &FilterBank, u: &Field, p: i32) -> Result<Field> {
    let filter = bank.filter(p)?;
    Ok(u.map_spectrum(|i, _| C64::new(filter[i], 0.0)))
}

/// `(L^{-d} Σ_ξ ⟨ξ⟩^{2s} |û(ξ)|²)^{1/2}`.
pub fn sobolev_norm(u: &Field, s: f64) -> f64 {
    let grid = u.grid();
    let sum: f64 = u
        .spectrum()
        .iter()
        .zip(grid.freqs())
        .map(|(v, xi)| japanese(xi).powf(2.0 * s) * v.norm_sqr())
        .sum();
    (sum / grid.volume()).sqrt()
}

/// `Σ_p 2^{2ps} |φ_p(D)u|_2²`, the dyadic side of the Sobolev characterisation.
pub fn dyadic_sobolev_sum(bank: &FilterBank, u: &Field, s: f64) -> f64 {
    let grid = u.grid();
    let spec = u.spectrum();
    (-1..=bank.p_max())
        .map(|p| {
            let f = bank.filter(p).expect("p in range");
            let energy: f64 = spec
                .iter()
                .zip(f)
                .map(|(v, w)| (v * w).norm_sqr())
                .sum::<f64>()
                / grid.volume();
            2f64.powf(2.0 * p as f64 * s) * energy
        })
        .sum()
}

/// `sup_p 2^{pr} |φ_p(D)u|_∞`.
pub fn zygmund_norm(bank: &FilterBank, u: &Field, r: f64) -> f64 {
    (-1..=bank.p_max())
        .map(|p| {
            let block = lp_block(bank, u, p).expect("p in range");
            2f64.powf(p as f64 * r) * block.max_abs()
        })
        .fold(0.0, f64::max)
}

pub fn linf_norm(u: &Field) -> f64 {
    u.max_abs()
}

/// `max_{|α| <= l} |∂^α u|_∞` by spectral differentiation.
pub fn w_inf_norm(u: &Field, l: usize) -> f64 {
    multi_indices(u.grid().dim(), l)
        .into_iter()
        .map(|alpha| u.partial(alpha).max_abs())
        .fold(0.0, f64::max)
}

/// Multi-indices `α ∈ ℕ^d` with `|α| <= order`, by increasing total degree.
pub fn multi_indices(dim: usize, order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=order {
        out.extend(multi_indices_exact(dim, total));
    }
    out
}

/// Multi-indices with `|α| = order`.
pub fn multi_indices_exact(dim: usize, order: usize) -> Vec<[usize; 2]> {
    if dim == 1 {
        vec![[order, 0]]
    } else {
        (0..=order).rev().map(|i| [i, order - i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::{Grid, GridSpec};

    #[test]
    fn single_mode_norm() {
        let grid = Grid::new(GridSpec::with_default_period(1, 256)).unwrap();
        let idx = 32; // ξ = 32 Δξ = 2
        let u = Field::mode(grid.clone(), idx);
        let xi = grid.freqs()[idx];
        let expected = japanese(&xi).powf(1.5) * grid.period().sqrt();
        assert!((sobolev_norm(&u, 1.5) - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn multiplier_rejects_nan() {
        let grid = Grid::new(GridSpec::with_default_period(1, 16)).unwrap();
        let u = Field::mode(grid, 1);
        assert!(apply_multiplier(&u, |_| f64::NAN).is_err());
    }

    #[test]
    fn index_enumeration() {
        assert_eq!(multi_indices(1, 2), vec![[0, 0], [1, 0], [2, 0]]);
        assert_eq!(multi_indices(2, 1), vec![[0, 0], [1, 0], [0, 1]]);
        assert_eq!(multi_indices_exact(2, 2).len(), 3);
    }
}
