use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{input, Result};
use crate::spectral::grid::Grid;
use crate::C64;

/// Complex samples on a grid, with the spectrum computed on first use.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    samples: Vec<C64>,
    spectrum: OnceLock<Vec<C64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid.spec())
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl Field {
    pub fn new(grid: Arc<Grid>, samples: Vec<C64>) -> Result<Field> {
        if samples.len() != grid.len() {
            return Err(input(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(input("non-finite sample"));
        }
        Ok(Field::raw(grid, samples))
    }

    pub(crate) fn raw(grid: Arc<Grid>, samples: Vec<C64>) -> Field {
        Field {
            grid,
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Field {
        let n = grid.len();
        Field::raw(grid, vec![C64::new(0.0, 0.0); n])
    }

    pub fn constant(grid: Arc<Grid>, value: C64) -> Field {
        let n = grid.len();
        Field::raw(grid, vec![value; n])
    }

    pub fn from_fn<F: Fn(&[f64; 2]) -> C64>(grid: Arc<Grid>, f: F) -> Field {
        let samples = grid.points().iter().map(f).collect();
        Field::raw(grid, samples)
    }

    pub fn from_real_fn<F: Fn(&[f64; 2]) -> f64>(grid: Arc<Grid>, f: F) -> Field {
        Field::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Builds the field whose spectrum (in the crate normalisation) is `spectrum`.
    pub fn from_spectrum(grid: Arc<Grid>, spectrum: Vec<C64>) -> Result<Field> {
        if spectrum.len() != grid.len() {
            return Err(input("spectrum does not match the grid"));
        }
        let mut samples = spectrum.clone();
        grid.idft(&mut samples);
        let scale = 1.0 / grid.volume();
        samples.iter_mut().for_each(|v| *v *= scale);
        let field = Field::raw(grid, samples);
        let _ = field.spectrum.set(spectrum);
        Ok(field)
    }

    /// `e^{i ξ·x}` at the lattice frequency of index `idx`.
    pub fn mode(grid: Arc<Grid>, idx: usize) -> Field {
        let xi = grid.freqs()[idx];
        Field::from_fn(grid, |x| C64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// `û(ξ) = (L/n)^d Σ_j u_j e^{-i x_j·ξ}`.
    pub fn spectrum(&self) -> &[C64] {
        self.spectrum.get_or_init(|| {
            let mut s = self.samples.clone();
            self.grid.dft(&mut s);
            let w = self.grid.cell_volume();
            s.iter_mut().for_each(|v| *v *= w);
            s
        })
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// `L^{-d} Σ |û|²`, the spectral side of Plancherel.
    pub fn spectral_l2_norm(&self) -> f64 {
        let sum: f64 = self.spectrum().iter().map(|v| v.norm_sqr()).sum();
        (sum / self.grid.volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(input("fields live on different grids"));
        }
        Ok(())
    }

    fn zip_with<F: Fn(C64, C64) -> C64>(&self, other: &Field, f: F) -> Result<Field> {
        self.ensure_same_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Field::raw(self.grid.clone(), samples))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Field {
        let samples = self.samples.iter().map(|v| v * c).collect();
        Field::raw(self.grid.clone(), samples)
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> Field {
        let samples = self.samples.iter().map(|v| f(*v)).collect();
        Field::raw(self.grid.clone(), samples)
    }

    /// Multiplies the spectrum by `f(index, ξ)`.
    pub fn map_spectrum<F: Fn(usize, &[f64; 2]) -> C64>(&self, f: F) -> Field {
        let spec: Vec<C64> = self
            .spectrum()
            .iter()
            .zip(self.grid.freqs())
            .enumerate()
            .map(|(i, (v, xi))| v * f(i, xi))
            .collect();
        Field::from_spectrum(self.grid.clone(), spec).expect("spectrum length matches")
    }

    /// Spectral derivative `∂_x^α`, with the Nyquist mode dropped on axes of odd order.
    pub fn partial(&self, alpha: [usize; 2]) -> Field {
        if alpha == [0, 0] {
            return self.clone();
        }
        let nyq = -(self.grid.n_pts() as f64) / 2.0 * self.grid.dxi();
        self.map_spectrum(|_, xi| spectral_derivative_factor(xi, alpha, nyq))
    }
}

/// `(iξ)^α`, zero on an axis of odd order sitting at the Nyquist frequency.
pub(crate) fn spectral_derivative_factor(xi: &[f64; 2], alpha: [usize; 2], nyq: f64) -> C64 {
    let mut out = C64::new(1.0, 0.0);
    for axis in 0..2 {
        let a = alpha[axis];
        if a == 0 {
            continue;
        }
        if a % 2 == 1 && (xi[axis] - nyq).abs() < 1e-12 * nyq.abs().max(1.0) {
            return C64::new(0.0, 0.0);
        }
        out *= C64::new(0.0, xi[axis]).powu(a as u32);
    }
    out
}
