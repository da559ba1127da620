use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};
use crate::operators::dense::DenseOperator;
use crate::spectral::grid::{japanese, norm};
use crate::spectral::{sobolev_norm, Field, FilterBank, Grid};
use crate::C64;

/// Default number of random probes.
pub const DEFAULT_RANDOM_PROBES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Random,
    Packet,
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub index: usize,
    pub kind: ProbeKind,
    /// Dyadic carrier exponent for packets.
    pub j: Option<i32>,
    pub field: Field,
}

/// Random field with spectrum `⟨ξ⟩^{−decay}·(complex normal)` up to the Nyquist guard.
pub fn random_band_limited(grid: &Arc<Grid>, decay: f64, seed: u64, stream: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let guard = grid.xi_guard();
    let spec: Vec<C64> = grid
        .freqs()
        .iter()
        .map(|xi| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if norm(xi) <= guard {
                C64::new(re, im) * japanese(xi).powf(-decay)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Field::from_spectrum(grid.clone(), spec).expect("spectrum length matches")
}

/// `e^{i ξ_j·x} g(x)`: Gaussian envelope of width `w` centred in the box, carrier
/// `2^j e` snapped to the lattice.
pub fn wave_packet(grid: &Arc<Grid>, j: i32, e: [f64; 2], w: f64) -> Result<Field> {
    let carrier_len = 2f64.powi(j);
    if carrier_len > grid.xi_guard() {
        return Err(config(format!(
            "packet carrier 2^{j} exceeds the Nyquist guard {:.3}",
            grid.xi_guard()
        )));
    }
    let en = norm(&e);
    if en == 0.0 || !en.is_finite() {
        return Err(input("packet direction must be a nonzero vector"));
    }
    let target = [carrier_len * e[0] / en, carrier_len * e[1] / en];
    let k = grid.freqs()[grid.nearest_freq_index(target)];
    let c = grid.period() / 2.0;
    let dim = grid.dim();
    Ok(Field::from_fn(grid.clone(), |x| {
        let mut r2 = (x[0] - c).powi(2);
        if dim == 2 {
            r2 += (x[1] - c).powi(2);
        }
        let g = (-r2 / (2.0 * w * w)).exp();
        C64::from_polar(g, k[0] * x[0] + k[1] * x[1])
    }))
}

/// Default envelope width `L/20`.
pub fn default_width(grid: &Grid) -> f64 {
    grid.period() / 20.0
}

/// Seeded random probes followed by wave packets at `j = 2..P_max−2` along `e₁`.
pub fn probe_family(grid: &Arc<Grid>, s_in: f64, count: usize, seed: u64) -> Result<Vec<Probe>> {
    let decay = s_in + grid.dim() as f64 / 2.0 + 1.0;
    let mut out: Vec<Probe> = (0..count)
        .map(|i| Probe {
            index: i,
            kind: ProbeKind::Random,
            j: None,
            field: random_band_limited(grid, decay, seed, i as u64),
        })
        .collect();
    let bank = FilterBank::new(grid.clone())?;
    let w = default_width(grid);
    for j in 2..=(bank.p_max() - 2) {
        if 2f64.powi(j) > grid.xi_guard() {
            break;
        }
        out.push(Probe {
            index: out.len(),
            kind: ProbeKind::Packet,
            j: Some(j),
            field: wave_packet(grid, j, [1.0, 0.0], w)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRow {
    pub index: usize,
    pub kind: ProbeKind,
    pub j: Option<i32>,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub rows: Vec<ProbeRow>,
    pub skipped: Vec<usize>,
}

/// `max_u |A u|_{H^{s_out}} / |u|_{H^{s_in}}` over the probe family.
pub fn empirical_operator_norm<F>(
    grid: &Arc<Grid>,
    apply: F,
    s_in: f64,
    s_out: f64,
    probes: usize,
    seed: u64,
) -> Result<NormEstimate>
where
    F: Fn(&Field) -> Result<Field> + Sync,
{
    if probes == 0 {
        return Err(config("at least one probe is required"));
    }
    let family = probe_family(grid, s_in, probes, seed)?;
    let rows: Vec<Result<Option<ProbeRow>>> = family
        .par_iter()
        .map(|p| {
            let den = sobolev_norm(&p.field, s_in);
            if den == 0.0 {
                return Ok(None);
            }
            let num = sobolev_norm(&apply(&p.field)?, s_out);
            Ok(Some(ProbeRow {
                index: p.index,
                kind: p.kind,
                j: p.j,
                numerator: num,
                denominator: den,
                ratio: num / den,
            }))
        })
        .collect();
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (p, r) in family.iter().zip(rows) {
        match r? {
            Some(row) => kept.push(row),
            None => {
                log::warn!("probe {} has zero norm and is skipped", p.index);
                skipped.push(p.index);
            }
        }
    }
    let value = kept.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(NormEstimate {
        value,
        rows: kept,
        skipped,
    })
}

/// Power iteration on `B*B` with `B = ⟨D⟩^{s_out} Op(σ) ⟨D⟩^{−s_in}`.
pub fn power_iteration(op: &DenseOperator, s_in: f64, s_out: f64, iterations: usize, seed: u64) -> Result<f64> {
    let grid = op.symbol().grid().clone();
    let weight = |u: &Field, s: f64| u.map_spectrum(|_, xi| C64::new(japanese(xi).powf(s), 0.0));
    let mut v = random_band_limited(&grid, 0.0, seed, u64::MAX);
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = v.l2_norm();
        if nv == 0.0 {
            return Ok(0.0);
        }
        v = v.scale(C64::new(1.0 / nv, 0.0));
        let bv = weight(&op.apply(&weight(&v, -s_in))?, s_out);
        estimate = bv.l2_norm();
        v = weight(&op.apply_adjoint(&weight(&bv, s_out))?, -s_in);
    }
    Ok(estimate)
}
