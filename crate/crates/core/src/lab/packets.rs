use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::operators::wave_packet;
use crate::spectral::{Field, FilterBank, Grid};

/// Required share of packet energy inside the shells `|p − j| <= 2`.
pub const CONCENTRATION_TARGET: f64 = 0.9999;
/// Allowed envelope mass carried by the neighbouring periodic images.
pub const WRAP_TARGET: f64 = 1e-10;

/// Modulated Gaussians `u_j = e^{i 2^j e·x} g(x)` for a range of `j`.
#[derive(Debug, Clone)]
pub struct WavePacketFamily {
    grid: Arc<Grid>,
    js: Vec<i32>,
    direction: [f64; 2],
    width: f64,
    fields: Vec<Field>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketDiagnostics {
    pub j: i32,
    pub l2: f64,
    pub concentration: f64,
}

pub fn wave_packets(
    grid: &Arc<Grid>,
    js: RangeInclusive<i32>,
    e: [f64; 2],
    w: f64,
) -> Result<WavePacketFamily> {
    if js.is_empty() {
        return Err(config("empty packet range"));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(config(format!("packet width must be positive, got {w}")));
    }
    let js: Vec<i32> = js.collect();
    let fields = js
        .iter()
        .map(|j| wave_packet(grid, *j, e, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(WavePacketFamily {
        grid: grid.clone(),
        js,
        direction: e,
        width: w,
        fields,
    })
}

impl WavePacketFamily {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn js(&self) -> &[i32] {
        &self.js
    }

    pub fn direction(&self) -> [f64; 2] {
        self.direction
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &Field)> {
        self.js.iter().copied().zip(&self.fields)
    }

    /// Energy share of each packet inside the shells `|p − j| <= 2`.
    pub fn diagnostics(&self) -> Result<Vec<PacketDiagnostics>> {
        let bank = FilterBank::new(self.grid.clone())?;
        self.iter()
            .map(|(j, u)| {
                let lo = (j - 2).max(-1);
                let hi = (j + 2).min(bank.p_max());
                let mut window = vec![0.0; self.grid.len()];
                for p in lo..=hi {
                    for (w, f) in window.iter_mut().zip(bank.filter(p)?) {
                        *w += f;
                    }
                }
                let spec = u.spectrum();
                let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
                let inside: f64 = spec
                    .iter()
                    .zip(&window)
                    .map(|(v, w)| (v * w).norm_sqr())
                    .sum();
                Ok(PacketDiagnostics {
                    j,
                    l2: u.l2_norm(),
                    concentration: if total > 0.0 { inside / total } else { 0.0 },
                })
            })
            .collect()
    }

    /// Mass of the envelope's two nearest periodic images relative to the envelope
    /// itself, per axis.
    pub fn wrap_mass(&self) -> f64 {
        let l = self.grid.period();
        let c = l / 2.0;
        let n = self.grid.n_pts();
        let w = self.width;
        let g = |x: f64| (-(x - c).powi(2) / (2.0 * w * w)).exp();
        let mut own = 0.0;
        let mut images = 0.0;
        for i in 0..n {
            let x = i as f64 * l / n as f64;
            own += g(x).powi(2);
            images += g(x - l).powi(2) + g(x + l).powi(2);
        }
        images / own
    }

    /// Both family invariants at their documented targets.
    pub fn satisfies_invariants(&self) -> Result<bool> {
        let conc = self
            .diagnostics()?
            .iter()
            .all(|d| d.concentration >= CONCENTRATION_TARGET);
        Ok(conc && self.wrap_mass() < WRAP_TARGET)
    }
}
