use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::operators::DEFAULT_RANDOM_PROBES;
use crate::spectral::GridSpec;

/// Estimate families the lab can measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremTag {
    /// `|u|_{H^s} / |u|_{H^s}`, the calibration run.
    #[serde(rename = "identity")]
    Identity,
    /// Action of a full operator, low or high regime.
    #[serde(rename = "th-II1")]
    ThII1,
    /// Tame action estimate for positive order.
    #[serde(rename = "th-II2")]
    ThII2,
    /// Action of a composite symbol `Σ(v(x), ξ)`.
    #[serde(rename = "cor-II1")]
    CorII1,
    /// Commutator with a multiplier, general `σ²`.
    #[serde(rename = "th-III1")]
    ThIII1,
    /// Commutator with a multiplier, tame in `|u|_∞`.
    #[serde(rename = "th-III2")]
    ThIII2,
    /// Commutator of a multiplier with a function.
    #[serde(rename = "th-III3")]
    ThIII3,
    /// Commutator with a multiplier, Calderón–Coifman–Meyer form.
    #[serde(rename = "th-III1bis")]
    ThIII1bis,
    /// Composition and commutators of two full operators.
    #[serde(rename = "th-IV1")]
    ThIV1,
    /// Commutator of two full operators, Calderón–Coifman–Meyer form.
    #[serde(rename = "th-IV1bis")]
    ThIV1bis,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 10] = [
        TheoremTag::Identity,
        TheoremTag::ThII1,
        TheoremTag::ThII2,
        TheoremTag::CorII1,
        TheoremTag::ThIII1,
        TheoremTag::ThIII2,
        TheoremTag::ThIII3,
        TheoremTag::ThIII1bis,
        TheoremTag::ThIV1,
        TheoremTag::ThIV1bis,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremTag::Identity => "identity",
            TheoremTag::ThII1 => "th-II1",
            TheoremTag::ThII2 => "th-II2",
            TheoremTag::CorII1 => "cor-II1",
            TheoremTag::ThIII1 => "th-III1",
            TheoremTag::ThIII2 => "th-III2",
            TheoremTag::ThIII3 => "th-III3",
            TheoremTag::ThIII1bis => "th-III1bis",
            TheoremTag::ThIV1 => "th-IV1",
            TheoremTag::ThIV1bis => "th-IV1bis",
        }
    }

    /// Variants accepted by this tag; the first one is the default.
    pub fn variants(&self) -> &'static [Variant] {
        use Variant::*;
        match self {
            TheoremTag::Identity | TheoremTag::ThII2 | TheoremTag::ThIV1bis => &[],
            TheoremTag::ThII1 => &[Low, High],
            TheoremTag::CorII1 => &[I, Ii],
            TheoremTag::ThIII1 | TheoremTag::ThIII2 | TheoremTag::ThIII3 | TheoremTag::ThIII1bis => {
                &[I, Ii]
            }
            TheoremTag::ThIV1 => &[I, IBis, ITer, Ii, Iii],
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<TheoremTag> {
        TheoremTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let known: Vec<&str> = TheoremTag::ALL.iter().map(|t| t.as_str()).collect();
                config(format!("unknown theorem tag `{s}`; known: {}", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "low")]
    Low,
    #[serde(rename = "high")]
    High,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "i.bis")]
    IBis,
    #[serde(rename = "i.ter")]
    ITer,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Low => "low",
            Variant::High => "high",
            Variant::I => "i",
            Variant::IBis => "i.bis",
            Variant::ITer => "i.ter",
            Variant::Ii => "ii",
            Variant::Iii => "iii",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Variant> {
        let all = [
            Variant::Low,
            Variant::High,
            Variant::I,
            Variant::IBis,
            Variant::ITer,
            Variant::Ii,
            Variant::Iii,
        ];
        all.into_iter()
            .find(|v| v.as_str() == s.trim())
            .ok_or_else(|| config(format!("unknown variant `{s}`")))
    }
}

/// Dyadic window and tolerance of a decay-order fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeConfig {
    pub j_min: i32,
    pub j_max: i32,
    /// Defaults to the order of the measured residual.
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

pub fn default_tolerance() -> f64 {
    0.3
}

fn default_probes() -> usize {
    DEFAULT_RANDOM_PROBES
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_sigma() -> String {
    "one".into()
}

/// One experiment. Unset indices take the documented defaults when the run is
/// resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub theorem: TheoremTag,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_sigma")]
    pub sigma1: String,
    #[serde(default)]
    pub sigma2: Option<String>,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub s0: Option<f64>,
    /// Zygmund index replacing `C⁰_*` at the `s = 0` endpoint.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub slope: Option<SlopeConfig>,
}

impl ExperimentConfig {
    pub fn new(id: impl Into<String>, theorem: TheoremTag) -> ExperimentConfig {
        ExperimentConfig {
            id: id.into(),
            theorem,
            variant: None,
            grid: None,
            sigma1: default_sigma(),
            sigma2: None,
            n: 0,
            s: 0.0,
            t0: None,
            s0: None,
            epsilon: default_epsilon(),
            probes: default_probes(),
            seed: 0,
            slope: None,
        }
    }

    /// Grid used when none is configured. The decay-order runs of the
    /// multiplier–function commutator need carriers up to `2^7`.
    pub fn default_grid(theorem: TheoremTag) -> GridSpec {
        match theorem {
            TheoremTag::ThIII3 => GridSpec::new(1, 2048, 8.0 * std::f64::consts::PI),
            _ => GridSpec::with_default_period(1, 1024),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| ExperimentConfig::default_grid(self.theorem))
    }

    pub fn default_t0(dim: usize) -> f64 {
        if dim == 1 {
            1.0
        } else {
            1.5
        }
    }

    pub fn t0_value(&self) -> f64 {
        self.t0
            .unwrap_or_else(|| ExperimentConfig::default_t0(self.grid_spec().dim))
    }

    pub fn s0_value(&self) -> f64 {
        self.s0.unwrap_or_else(|| self.t0_value().max(self.s))
    }

    pub fn variant_value(&self) -> Result<Option<Variant>> {
        let allowed = self.theorem.variants();
        match self.variant {
            None if allowed.is_empty() => Ok(None),
            None if self.theorem == TheoremTag::ThII1 => Ok(Some(if self.s < self.t0_value() {
                Variant::Low
            } else {
                Variant::High
            })),
            None => Ok(Some(allowed[0])),
            Some(v) if allowed.contains(&v) => Ok(Some(v)),
            Some(v) => Err(config(format!(
                "{} has no variant `{v}`{}",
                self.theorem,
                if allowed.is_empty() {
                    String::new()
                } else {
                    format!(
                        "; accepted: {}",
                        allowed.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
                    )
                }
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec().validate()?;
        if self.id.trim().is_empty() {
            return Err(config("experiment id must not be empty"));
        }
        if self.probes == 0 {
            return Err(config("at least one probe is required"));
        }
        for (name, v) in [("s", Some(self.s)), ("t0", self.t0), ("s0", self.s0)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(config(format!("{name} must be finite")));
                }
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(config("epsilon must be positive"));
        }
        if let Some(sl) = &self.slope {
            if sl.j_max < sl.j_min {
                return Err(config("slope window is empty"));
            }
            if !(sl.tolerance.is_finite() && sl.tolerance > 0.0) {
                return Err(config("slope tolerance must be positive"));
            }
        }
        self.variant_value()?;
        Ok(())
    }
}
