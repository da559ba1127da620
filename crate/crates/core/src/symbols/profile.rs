use serde::{Deserialize, Serialize};

use crate::jet::Jet;
use crate::spectral::filters::{psi, psi_jet};
use crate::spectral::grid::{japanese, norm};
use crate::symbols::Regularity;

/// Radial or coordinate Fourier-multiplier profiles with exact jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `⟨ξ⟩^m`.
    Japanese { m: f64 },
    /// `|ξ| (1 − ψ(ξ))`.
    AbsCut,
    /// `|ξ|`, not differentiable at the origin.
    Abs,
    /// `ξ_axis`.
    Coordinate { axis: usize },
    Constant { value: f64 },
    /// The bump ψ itself.
    Psi,
}

impl Profile {
    pub fn order(&self) -> f64 {
        match self {
            Profile::Japanese { m } => *m,
            Profile::AbsCut | Profile::Abs | Profile::Coordinate { .. } => 1.0,
            Profile::Constant { .. } | Profile::Psi => 0.0,
        }
    }

    pub fn regularity(&self) -> Regularity {
        match self {
            Profile::Abs => Regularity::Finite(0),
            _ => Regularity::Infinite,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant { .. })
    }

    pub fn value(&self, xi: &[f64; 2]) -> f64 {
        match self {
            Profile::Japanese { m } => japanese(xi).powf(*m),
            Profile::AbsCut => norm(xi) * (1.0 - psi(xi)),
            Profile::Abs => norm(xi),
            Profile::Coordinate { axis } => xi[*axis],
            Profile::Constant { value } => *value,
            Profile::Psi => psi(xi),
        }
    }

    /// Taylor jet of the profile at `xi` in `nvars` variables.
    pub fn jet(&self, nvars: usize, order: usize, xi: &[f64; 2]) -> Jet {
        let [x, y] = Jet::coordinates(nvars, order, xi);
        let r2 = || {
            let mut r2 = x.mul(&x);
            if nvars == 2 {
                r2 = r2.add(&y.mul(&y));
            }
            r2
        };
        match self {
            Profile::Japanese { m } => r2().add_const(1.0).powf(m / 2.0),
            Profile::AbsCut => {
                let cut = Jet::constant(nvars, order, 1.0).sub(&psi_jet(nvars, order, xi, 1.0));
                if cut.is_zero() {
                    cut
                } else {
                    r2().sqrt().mul(&cut)
                }
            }
            Profile::Abs => r2().sqrt(),
            Profile::Coordinate { axis } => {
                if *axis == 0 {
                    x
                } else if nvars == 2 {
                    y
                } else {
                    Jet::zero(nvars, order)
                }
            }
            Profile::Constant { value } => Jet::constant(nvars, order, *value),
            Profile::Psi => psi_jet(nvars, order, xi, 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::MultiIndex;

    #[test]
    fn japanese_second_derivative_of_square() {
        let p = Profile::Japanese { m: 2.0 };
        let j = p.jet(1, 3, &[0.8, 0.0]);
        assert!((j.partial(MultiIndex([2, 0])) - 2.0).abs() < 1e-13);
        assert!(j.partial(MultiIndex([3, 0])).abs() < 1e-13);
    }

    #[test]
    fn abs_cut_vanishes_near_origin() {
        let p = Profile::AbsCut;
        assert_eq!(p.value(&[0.3, 0.0]), 0.0);
        assert_eq!(p.value(&[2.0, 0.0]), 2.0);
        assert!(p.jet(2, 2, &[0.2, 0.1]).is_zero());
    }
}
