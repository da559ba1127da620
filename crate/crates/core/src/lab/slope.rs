use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::lab::packets::WavePacketFamily;
use crate::spectral::Field;

/// Residuals below this share of their reference magnitude count as zero.
pub const DEGENERATE_RELATIVE: f64 = 1e-11;
/// Families at least this long lose their two lowest and two highest packets.
pub const TRIM_THRESHOLD: usize = 8;

/// Output of a residual map on one probe, together with the magnitude of the
/// terms that cancelled to produce it.
#[derive(Debug, Clone)]
pub struct Residual {
    pub field: Field,
    pub reference: f64,
}

impl Residual {
    pub fn plain(field: Field) -> Residual {
        let reference = field.l2_norm();
        Residual { field, reference }
    }

    pub fn is_negligible(&self, value: f64) -> bool {
        value <= DEGENERATE_RELATIVE * self.reference
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub j: i32,
    pub log2_norm: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub points: Vec<SlopePoint>,
    pub slope: f64,
    pub stderr: f64,
    pub expected: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub degenerate: bool,
    pub pass: bool,
}

/// Least-squares slope and its standard error.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Slope of `log₂|R u_j|_2` against `j`.
pub fn order_probe<F>(residual: F, packets: &WavePacketFamily, expected: f64, tolerance: f64) -> Result<SlopeFit>
where
    F: Fn(&Field) -> Result<Residual> + Sync,
{
    let js = packets.js();
    let (lo, hi) = if js.len() >= TRIM_THRESHOLD {
        (2, js.len() - 2)
    } else {
        (0, js.len())
    };
    if hi - lo < 4 {
        return Err(config(format!(
            "slope fit needs at least 4 packets in the window, got {}",
            hi - lo
        )));
    }
    let values: Vec<Result<(f64, bool)>> = packets
        .fields()
        .par_iter()
        .map(|u| {
            let r = residual(u)?;
            let v = r.field.l2_norm();
            if !v.is_finite() {
                return Err(Error::Numerical("residual norm is not finite".into()));
            }
            Ok((v, r.is_negligible(v)))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let degenerate = values.iter().all(|(_, z)| *z);
    let points: Vec<SlopePoint> = js
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (j, (v, _)))| SlopePoint {
            j: *j,
            log2_norm: v.log2(),
            used: (lo..hi).contains(&i),
        })
        .collect();
    if degenerate {
        return Ok(SlopeFit {
            points,
            slope: 0.0,
            stderr: 0.0,
            expected,
            deviation: 0.0,
            tolerance,
            degenerate: true,
            pass: true,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.j as f64, p.log2_norm))
        .unzip();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Numerical(
            "a packet residual vanished inside the fit window".into(),
        ));
    }
    let (slope, stderr) = linear_fit(&xs, &ys);
    let deviation = slope - expected;
    Ok(SlopeFit {
        points,
        slope,
        stderr,
        expected,
        deviation,
        tolerance,
        degenerate: false,
        pass: deviation.abs() <= tolerance,
    })
}
