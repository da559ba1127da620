use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::C64;

/// Fraction of the Nyquist frequency above which lattice points are excluded
/// from every supremum over frequencies.
pub const NYQUIST_GUARD: f64 = 7.0 / 8.0;

/// Geometric description of a periodic grid: `dim` axes of `n_pts` points over
/// a period `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n_pts: usize,
    pub period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n_pts: usize, period: f64) -> Self {
        GridSpec { dim, n_pts, period }
    }

    /// Default period per dimension: `32π` in 1-D and `8π` in 2-D.
    pub fn with_default_period(dim: usize, n_pts: usize) -> Self {
        let period = if dim == 1 { 32.0 } else { 8.0 } * std::f64::consts::PI;
        GridSpec { dim, n_pts, period }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(config(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if self.n_pts < 4 || !self.n_pts.is_power_of_two() {
            return Err(config(format!(
                "n_pts must be a power of two >= 4, got {}",
                self.n_pts
            )));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(config(format!("period must be positive, got {}", self.period)));
        }
        Ok(())
    }

    /// Parses `d=1,n=1024,L=32pi`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut n_pts = None;
        let mut period = None;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| config(format!("grid entry `{part}` is not key=value")))?;
            match key.trim() {
                "d" => dim = Some(parse_usize(value)?),
                "n" => n_pts = Some(parse_usize(value)?),
                "L" => period = Some(parse_length(value)?),
                other => return Err(config(format!("unknown grid key `{other}`"))),
            }
        }
        let dim = dim.unwrap_or(1);
        let n_pts = n_pts.ok_or_else(|| config("grid needs n=<points>"))?;
        let spec = match period {
            Some(period) => GridSpec::new(dim, n_pts, period),
            None => GridSpec::with_default_period(dim, n_pts),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_usize(value: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| config(format!("`{value}` is not a non-negative integer")))
}

/// Accepts plain numbers as well as multiples of pi (`32pi`, `8*pi`, `pi`).
pub fn parse_length(value: &str) -> Result<f64> {
    let v = value.trim().to_ascii_lowercase();
    let parsed = if let Some(prefix) = v.strip_suffix("pi") {
        let prefix = prefix.trim_end_matches('*').trim();
        let factor = if prefix.is_empty() {
            Ok(1.0)
        } else {
            prefix.parse::<f64>()
        };
        factor.map(|f| f * std::f64::consts::PI)
    } else {
        v.parse::<f64>()
    };
    parsed.map_err(|_| config(format!("`{value}` is not a length")))
}

/// Periodic spatial lattice together with its dual frequency lattice and FFT plans.
///
/// Sample index `i0 * n + i1` addresses `x = (i0, i1) * L / n` (2-D; in 1-D only `i0`).
/// Frequencies follow the usual aliasing convention `k in [-n/2, n/2)`, so that the
/// Nyquist mode is stored as `-n/2`.
pub struct Grid {
    spec: GridSpec,
    points: Vec<[f64; 2]>,
    freqs: Vec<[f64; 2]>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let n = spec.n_pts;
        let h = spec.period / n as f64;
        let dxi = 2.0 * std::f64::consts::PI / spec.period;
        let wave = |i: usize| -> f64 {
            let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            k * dxi
        };
        let total = n.pow(spec.dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut freqs = Vec::with_capacity(total);
        if spec.dim == 1 {
            for i in 0..n {
                points.push([i as f64 * h, 0.0]);
                freqs.push([wave(i), 0.0]);
            }
        } else {
            for i0 in 0..n {
                for i1 in 0..n {
                    points.push([i0 as f64 * h, i1 as f64 * h]);
                    freqs.push([wave(i0), wave(i1)]);
                }
            }
        }
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid {
            spec,
            points,
            freqs,
            fft_fwd,
            fft_inv,
        }))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n_pts(&self) -> usize {
        self.spec.n_pts
    }

    pub fn period(&self) -> f64 {
        self.spec.period
    }

    /// Number of lattice points, `n_pts^dim`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spec.period / self.spec.n_pts as f64
    }

    /// Frequency step `2π / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.spec.period
    }

    /// Nyquist frequency per axis, `π n / L`.
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI * self.spec.n_pts as f64 / self.spec.period
    }

    /// Largest `|ξ|` on the lattice (the corner in 2-D).
    pub fn xi_radius_max(&self) -> f64 {
        self.xi_max() * (self.spec.dim as f64).sqrt()
    }

    /// Upper frequency bound used by every supremum over ξ.
    pub fn xi_guard(&self) -> f64 {
        NYQUIST_GUARD * self.xi_max()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn freqs(&self) -> &[[f64; 2]] {
        &self.freqs
    }

    pub fn freq_norm(&self, idx: usize) -> f64 {
        norm(&self.freqs[idx])
    }

    /// Quadrature weight of one spatial sample, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.spec.dim as i32)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.spec.period.powi(self.spec.dim as i32)
    }

    /// Index of the lattice frequency closest to `xi`.
    pub fn nearest_freq_index(&self, xi: [f64; 2]) -> usize {
        let n = self.spec.n_pts as i64;
        let wrap = |v: f64| -> usize {
            let k = (v / self.dxi()).round() as i64;
            k.rem_euclid(n) as usize
        };
        if self.spec.dim == 1 {
            wrap(xi[0])
        } else {
            wrap(xi[0]) * self.spec.n_pts + wrap(xi[1])
        }
    }

    /// In-place unnormalised forward DFT (`Σ_j u_j e^{-i x_j·ξ}`).
    pub fn dft(&self, data: &mut [C64]) {
        self.transform(data, &self.fft_fwd);
    }

    /// In-place unnormalised inverse DFT (`Σ_k û_k e^{+i x·ξ_k}`).
    pub fn idft(&self, data: &mut [C64]) {
        self.transform(data, &self.fft_inv);
    }

    /// Inverse DFT including the `1/n^d` factor, so that `idft_normalized(dft(u)) = u`.
    pub fn idft_normalized(&self, data: &mut [C64]) {
        self.idft(data);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match the grid");
        let n = self.spec.n_pts;
        plan.process(data);
        if self.spec.dim == 2 {
            let mut t = transpose(data, n);
            plan.process(&mut t);
            let back = transpose(&t, n);
            data.copy_from_slice(&back);
        }
    }
}

fn transpose(data: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}

pub fn norm(v: &[f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn japanese(xi: &[f64; 2]) -> f64 {
    (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}
