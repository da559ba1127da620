use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};
use crate::spectral::filters::{phi_p, psi, smooth_step, FilterBank};
use crate::spectral::grid::{japanese, norm};
use crate::spectral::{Grid, GridSpec};
use crate::symbols::{Regularity, SharedSymbol, Symbol};
use crate::C64;

pub const ARCHIVE_MAGIC: &[u8; 4] = b"PCES";
pub const ARCHIVE_VERSION: u32 = 1;
pub const MAX_TRUNCATION: usize = 64;
const LAMBDA_SAMPLES: usize = 241;
const LAMBDA_SAMPLE_RADIUS: f64 = 1.5;

/// Radial profile of λ: zero outside `[1/5, 6/5]`, one on `[1/4, 1]`.
pub fn lambda_profile(t: f64) -> f64 {
    smooth_step(t, 0.2, 0.25) * (1.0 - smooth_step(t, 1.0, 1.2))
}

pub fn lambda(xi: &[f64; 2]) -> f64 {
    lambda_profile(norm(xi))
}

/// `λ_k(ξ) = e^{iξ·k/2} λ(ξ/2)`.
pub fn lambda_k(k: [i64; 2], xi: &[f64; 2]) -> C64 {
    let l = lambda(&[xi[0] / 2.0, xi[1] / 2.0]);
    if l == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let phase = 0.5 * (xi[0] * k[0] as f64 + xi[1] * k[1] as f64);
    C64::from_polar(l, phase)
}

/// `(1+|k|²)^{−(1+[d/2])}`.
pub fn weight(dim: usize, k: [i64; 2]) -> f64 {
    let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
    (1.0 + k2).powi(-(1 + (dim / 2) as i32))
}

/// Points per axis of the ξ-box used for the Fourier coefficients.
pub fn box_size(dim: usize, k_max: usize) -> usize {
    let w = 2 * k_max + 1;
    if dim == 1 {
        (16 * w).next_power_of_two().max(256)
    } else {
        (4 * w).next_power_of_two().max(64)
    }
}

fn k_indices(dim: usize, k_max: usize) -> Vec<[i64; 2]> {
    let k = k_max as i64;
    if dim == 1 {
        (-k..=k).map(|a| [a, 0]).collect()
    } else {
        (-k..=k).flat_map(|a| (-k..=k).map(move |b| [a, b])).collect()
    }
}

/// Truncated expansion `(1−ψ(ξ))σ ≈ Σ_{|k|_∞<=K} w_k Σ_q c_{k,q}(x) λ_k(2^{−q}ξ) ⟨ξ⟩^m`.
#[derive(Debug, Clone)]
pub struct ElementarySymbols {
    grid: Arc<Grid>,
    order: f64,
    k_max: usize,
    box_size: usize,
    ks: Vec<[i64; 2]>,
    /// `coeffs[q + 1][k][x]`.
    coeffs: Vec<Vec<Vec<C64>>>,
    label: String,
}

pub fn elementary_decompose(sym: &dyn Symbol, k_max: usize) -> Result<ElementarySymbols> {
    if k_max == 0 {
        return Err(config("truncation radius K must be at least 1"));
    }
    if k_max > MAX_TRUNCATION {
        return Err(config(format!(
            "truncation radius K = {k_max} exceeds the ξ-box resolution limit {MAX_TRUNCATION}"
        )));
    }
    let grid = sym.grid().clone();
    let dim = grid.dim();
    let bank = FilterBank::new(grid.clone())?;
    let m = sym.order();
    let msize = box_size(dim, k_max);
    let axis: Vec<f64> = (0..msize)
        .map(|b| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * b as f64 / msize as f64)
        .collect();
    let boxpts: Vec<[f64; 2]> = if dim == 1 {
        axis.iter().map(|a| [*a, 0.0]).collect()
    } else {
        axis.iter().flat_map(|a| axis.iter().map(move |b| [*a, *b])).collect()
    };
    let boxpts: Vec<[f64; 2]> = boxpts.into_iter().filter(|p| norm(p) <= 1.0).collect();
    let norm_factor = (msize as f64).powi(dim as i32).recip();
    let ks = k_indices(dim, k_max);
    let qs: Vec<i32> = (-1..=bank.p_max()).collect();
    let coeffs: Vec<Vec<Vec<C64>>> = qs
        .par_iter()
        .map(|&q| {
            let scale = 2f64.powi(q + 1);
            let mut acc = vec![vec![C64::new(0.0, 0.0); grid.len()]; ks.len()];
            for b in &boxpts {
                let eta = [b[0] * scale, b[1] * scale];
                let factor = (1.0 - psi(&eta)) * phi_p(q, &eta);
                if factor == 0.0 {
                    continue;
                }
                let f = factor * japanese(&eta).powf(-m) * norm_factor;
                let col = sym.column(&eta);
                for (k, row) in ks.iter().zip(acc.iter_mut()) {
                    let phase = C64::from_polar(f, -(b[0] * k[0] as f64 + b[1] * k[1] as f64));
                    for (r, v) in row.iter_mut().zip(&col) {
                        *r += v * phase;
                    }
                }
            }
            for (k, row) in ks.iter().zip(acc.iter_mut()) {
                let w = weight(dim, *k).recip();
                row.iter_mut().for_each(|v| *v *= w);
            }
            acc
        })
        .collect();
    for block in &coeffs {
        if block.iter().flatten().any(|v| !v.is_finite()) {
            return Err(input(format!("{} has non-finite values on the ξ-box", sym.label())));
        }
    }
    Ok(ElementarySymbols {
        grid,
        order: m,
        k_max,
        box_size: msize,
        ks,
        coeffs,
        label: sym.label(),
    })
}

impl ElementarySymbols {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn box_size(&self) -> usize {
        self.box_size
    }

    pub fn ks(&self) -> &[[i64; 2]] {
        &self.ks
    }

    /// Number of dyadic blocks, `q = −1..Q−2`.
    pub fn blocks(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_{k,q}` as samples on the grid; `q >= −1`, `k` indexes [`Self::ks`].
    pub fn coefficient(&self, q: i32, k: usize) -> &[C64] {
        &self.coeffs[(q + 1) as usize][k]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max_{k,q} |c_{k,q}|_{H^s}`.
    pub fn max_coefficient_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| crate::symbols::seminorms::column_sobolev(&self.grid, c, s))
            .fold(0.0, f64::max)
    }

    /// The truncated double sum times `⟨ξ⟩^m` at one ξ.
    pub fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        let dim = self.grid.dim();
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        let jm = japanese(xi).powf(self.order);
        for (qi, block) in self.coeffs.iter().enumerate() {
            let q = qi as i32 - 1;
            let s = 2f64.powi(-q);
            let arg = [xi[0] * s, xi[1] * s];
            if lambda(&[arg[0] / 2.0, arg[1] / 2.0]) == 0.0 {
                continue;
            }
            for (k, c) in self.ks.iter().zip(block) {
                let f = lambda_k(*k, &arg) * weight(dim, *k) * jm;
                for (o, v) in out.iter_mut().zip(c) {
                    *o += v * f;
                }
            }
        }
        out
    }

    /// `(2K+1)^d · Q` multipliers, each an FFT pair plus a pointwise product.
    pub fn apply_cost(&self) -> f64 {
        let n = self.grid.len() as f64;
        (self.ks.len() * self.coeffs.len()) as f64 * (10.0 * n * n.log2().max(1.0) + 8.0 * n)
    }

    pub fn header(&self) -> ArchiveHeader {
        let spec = self.grid.spec();
        ArchiveHeader {
            version: ARCHIVE_VERSION,
            dim: spec.dim as u32,
            n_pts: spec.n_pts as u32,
            period: spec.period,
            order: self.order,
            k_max: self.k_max as u32,
            blocks: self.coeffs.len() as u32,
            box_size: self.box_size as u32,
        }
    }

    /// Little-endian archive: magic `PCES`, header, `c[q][k][x]` as (re, im) pairs
    /// with k row-major over `[−K, K]^d`, then λ samples on `[0, 3/2]`.
    pub fn write_archive<W: Write>(&self, mut w: W) -> Result<()> {
        let h = self.header();
        w.write_all(ARCHIVE_MAGIC)?;
        w.write_u32::<LittleEndian>(h.version)?;
        w.write_u32::<LittleEndian>(h.dim)?;
        w.write_u32::<LittleEndian>(h.n_pts)?;
        w.write_f64::<LittleEndian>(h.period)?;
        w.write_f64::<LittleEndian>(h.order)?;
        w.write_u32::<LittleEndian>(h.k_max)?;
        w.write_u32::<LittleEndian>(h.blocks)?;
        w.write_u32::<LittleEndian>(h.box_size)?;
        for v in self.coeffs.iter().flatten().flatten() {
            w.write_f64::<LittleEndian>(v.re)?;
            w.write_f64::<LittleEndian>(v.im)?;
        }
        w.write_u32::<LittleEndian>(LAMBDA_SAMPLES as u32)?;
        for i in 0..LAMBDA_SAMPLES {
            let t = LAMBDA_SAMPLE_RADIUS * i as f64 / (LAMBDA_SAMPLES - 1) as f64;
            w.write_f64::<LittleEndian>(lambda_profile(t))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_archive(&mut buf)?;
        crate::cli::atomic_write(path, &buf)
    }

    pub fn read_archive<R: Read>(mut r: R) -> Result<ElementarySymbols> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != ARCHIVE_MAGIC {
            return Err(input("not an elementary-symbol archive"));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != ARCHIVE_VERSION {
            return Err(input(format!("unsupported archive version {version}")));
        }
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let n_pts = r.read_u32::<LittleEndian>()? as usize;
        let period = r.read_f64::<LittleEndian>()?;
        let order = r.read_f64::<LittleEndian>()?;
        let k_max = r.read_u32::<LittleEndian>()? as usize;
        let blocks = r.read_u32::<LittleEndian>()? as usize;
        let box_size = r.read_u32::<LittleEndian>()? as usize;
        let grid = Grid::new(GridSpec::new(dim, n_pts, period))?;
        if k_max == 0 || k_max > MAX_TRUNCATION {
            return Err(input(format!("archive truncation radius {k_max} out of range")));
        }
        let ks = k_indices(dim, k_max);
        let mut coeffs = Vec::with_capacity(blocks);
        for _ in 0..blocks {
            let mut block = Vec::with_capacity(ks.len());
            for _ in 0..ks.len() {
                let mut c = Vec::with_capacity(grid.len());
                for _ in 0..grid.len() {
                    let re = r.read_f64::<LittleEndian>()?;
                    let im = r.read_f64::<LittleEndian>()?;
                    c.push(C64::new(re, im));
                }
                block.push(c);
            }
            coeffs.push(block);
        }
        Ok(ElementarySymbols {
            grid,
            order,
            k_max,
            box_size,
            ks,
            coeffs,
            label: "archive".into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchiveHeader {
    pub version: u32,
    pub dim: u32,
    pub n_pts: u32,
    pub period: f64,
    pub order: f64,
    pub k_max: u32,
    pub blocks: u32,
    pub box_size: u32,
}

/// The reconstructed symbol of an [`ElementarySymbols`] expansion.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    es: Arc<ElementarySymbols>,
}

pub fn reconstruct_from_elementary(es: Arc<ElementarySymbols>) -> Reconstruction {
    Reconstruction { es }
}

impl Symbol for Reconstruction {
    fn grid(&self) -> &Arc<Grid> {
        &self.es.grid
    }
    fn order(&self) -> f64 {
        self.es.order
    }
    fn regularity(&self) -> Regularity {
        Regularity::Infinite
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        self.es.column(xi)
    }
    fn label(&self) -> String {
        format!("elementary[K={}]({})", self.es.k_max, self.es.label)
    }
}

/// `sup_x |ρ(x, ξ)|` per lattice ξ, with `ρ = reconstruction − (1−ψ(ξ))σ`.
pub fn residual_sup(es: &ElementarySymbols, sym: &dyn Symbol) -> Vec<f64> {
    es.grid
        .freqs()
        .par_iter()
        .map(|xi| {
            let target = sym.column(xi);
            let hi = 1.0 - psi(xi);
            es.column(xi)
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b * hi).norm())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Relative sup error of the reconstruction against `(1−ψ(ξ))σ` over the lattice.
pub fn reconstruction_error(es: &ElementarySymbols, sym: &dyn Symbol) -> f64 {
    let err = residual_sup(es, sym).into_iter().fold(0.0, f64::max);
    let size = es
        .grid
        .freqs()
        .par_iter()
        .map(|xi| {
            let hi = 1.0 - psi(xi);
            sym.column(xi).iter().map(|v| (v * hi).norm()).fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    if size == 0.0 {
        err
    } else {
        err / size
    }
}

/// Largest `|λ_k(ξ)|` over lattice points of a fine grid outside `2/5 <= |ξ| <= 12/5`.
pub fn lambda_leakage(dim: usize, k: [i64; 2]) -> f64 {
    let steps = 2000;
    let h = 3.0 / steps as f64;
    let mut worst: f64 = 0.0;
    for i in 0..=steps {
        let r = i as f64 * h;
        if (0.4..=2.4).contains(&r) {
            continue;
        }
        let dirs: &[[f64; 2]] = if dim == 1 {
            &[[1.0, 0.0], [-1.0, 0.0]]
        } else {
            &[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [-0.8, 0.6]]
        };
        for d in dirs {
            worst = worst.max(lambda_k(k, &[r * d[0], r * d[1]]).norm());
        }
    }
    worst
}

/// `|λ̌_k|_{L¹}` computed on a fine periodic grid.
pub fn lambda_kernel_l1(dim: usize, k: [i64; 2]) -> Result<f64> {
    let spec = if dim == 1 {
        GridSpec::new(1, 4096, 512.0)
    } else {
        GridSpec::new(2, 256, 64.0)
    };
    let grid = Grid::new(spec)?;
    let mut data: Vec<C64> = grid.freqs().iter().map(|xi| lambda_k(k, xi)).collect();
    grid.idft(&mut data);
    let scale = grid.volume().recip();
    Ok(data.iter().map(|v| v.norm() * scale).sum::<f64>() * grid.cell_volume())
}

/// Convenience: decompose and measure the relative reconstruction error.
pub fn elementary_error(sym: &SharedSymbol, k_max: usize) -> Result<f64> {
    let es = elementary_decompose(sym.as_ref(), k_max)?;
    Ok(reconstruction_error(&es, sym.as_ref()))
}
