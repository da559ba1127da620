use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{CompositionOperator, RemainderOperator};
use crate::error::{config, Error, Result};
use crate::lab::config::{ExperimentConfig, SlopeConfig, TheoremTag, Variant};
use crate::lab::packets::wave_packets;
use crate::lab::slope::{order_probe, Residual, SlopeFit, DEGENERATE_RELATIVE};
use crate::operators::{default_width, probe_family, ApplyPlan, ProbeKind};
use crate::spectral::{linf_norm, sobolev_norm, w_inf_norm, zygmund_norm, Field, FilterBank, Grid};
use crate::symbols::catalogue::{build_composite, build_symbol, outer_bound};
use crate::symbols::seminorms::{composite_norm, regular_index, seminorm, sobolev_index, Family, NormVariant};
use crate::symbols::{DerivMethod, MultiIndex, SharedSymbol, Symbol, XDerivative};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The norm of `u` multiplying one right-hand-side term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", content = "index", rename_all = "kebab-case")]
pub enum UNorm {
    Sobolev(f64),
    Sup,
    Zygmund(f64),
}

impl UNorm {
    fn eval(&self, bank: &FilterBank, u: &Field) -> f64 {
        match self {
            UNorm::Sobolev(r) => sobolev_norm(u, *r),
            UNorm::Sup => linf_norm(u),
            UNorm::Zygmund(r) => zygmund_norm(bank, u, *r),
        }
    }
}

/// `coefficient · |u|_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub u_norm: UNorm,
}

/// Indices after defaults and symbol metadata are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub s: f64,
    pub t0: f64,
    pub s0: f64,
    pub n: usize,
    pub m1: f64,
    pub m2: Option<f64>,
    /// Sobolev index of the probe normalisation.
    pub s_in: f64,
    /// Order of the measured operator, the expected packet slope.
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: usize,
    pub kind: ProbeKind,
    pub j: Option<i32>,
    pub numerator: f64,
    pub reference: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `|Op(σ)u|_{H^s} / |u|_{H^{s+m}}` for the action estimates.
    pub naive: Option<f64>,
    pub terms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub id: String,
    pub theorem: TheoremTag,
    pub variant: Option<Variant>,
    pub config: ExperimentConfig,
    pub indices: Indices,
    pub coefficients: BTreeMap<String, f64>,
    pub terms: Vec<Term>,
    pub probes: Vec<ProbeRecord>,
    pub ratios: Vec<f64>,
    pub c_emp: f64,
    pub naive_c: Option<f64>,
    pub degenerate: bool,
    pub slope: Option<SlopeFit>,
    pub pass: bool,
}

enum Numerator {
    Identity,
    Action(ApplyPlan),
    Remainder(RemainderOperator),
    Composition(CompositionOperator),
    Commutator(RemainderOperator),
}

impl Numerator {
    /// The measured field and the terms that cancel to produce it.
    fn eval(&self, u: &Field) -> Result<(Field, Vec<Field>)> {
        match self {
            Numerator::Identity => Ok((u.clone(), vec![u.clone()])),
            Numerator::Action(p) => {
                let v = p.apply(u)?;
                Ok((v.clone(), vec![v]))
            }
            Numerator::Remainder(r) | Numerator::Commutator(r) => r.apply_with_terms(u),
            Numerator::Composition(c) => c.apply_with_terms(u),
        }
    }
}

struct Prepared {
    grid: Arc<Grid>,
    variant: Option<Variant>,
    numerator: Numerator,
    terms: Vec<Term>,
    coefficients: BTreeMap<String, f64>,
    indices: Indices,
    naive_index: Option<f64>,
}

fn require(cond: bool, hypothesis: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Hypothesis(hypothesis.to_string()))
    }
}

/// Seminorm failures caused by missing regularity are hypothesis failures here.
fn gate<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::ClassViolation(m) => Error::Hypothesis(m),
        other => other,
    })
}

fn hs(sym: &dyn Symbol, s: f64) -> Result<f64> {
    gate(composite_norm(sym, NormVariant::Hs { s }))
}

fn hs_reg(sym: &dyn Symbol, s: f64) -> Result<f64> {
    gate(composite_norm(sym, NormVariant::HsReg { s }))
}

fn hs_n(sym: &dyn Symbol, n: usize, s: f64) -> Result<f64> {
    gate(composite_norm(sym, NormVariant::HsN { n, s }))
}

fn w_n(sym: &dyn Symbol, n: usize, k: usize) -> Result<f64> {
    gate(composite_norm(sym, NormVariant::WkInfN { n, k }))
}

fn semi(sym: &dyn Symbol, family: Family) -> Result<f64> {
    gate(seminorm(sym, family, DerivMethod::Auto))
}

/// `max_{|α| = k} f(∂_x^α σ)`.
fn grad_max<F>(sym: &SharedSymbol, k: usize, f: F) -> Result<f64>
where
    F: Fn(&dyn Symbol) -> Result<f64>,
{
    let mut best: f64 = 0.0;
    for alpha in MultiIndex::exact(sym.grid().dim(), k) {
        let d = XDerivative::new(sym.clone(), alpha.0);
        best = best.max(f(&d)?);
    }
    Ok(best)
}

fn function_field(sym: &SharedSymbol) -> Result<Field> {
    Field::new(sym.grid().clone(), sym.column(&[0.0, 0.0]))
}

/// `max_{|α| = k} g(∂^α a)`.
fn field_grad_max<F: Fn(&Field) -> f64>(a: &Field, k: usize, g: F) -> f64 {
    MultiIndex::exact(a.grid().dim(), k)
        .into_iter()
        .map(|alpha| g(&a.partial(alpha.0)))
        .fold(0.0, f64::max)
}

struct Builder {
    terms: Vec<Term>,
    coefficients: BTreeMap<String, f64>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            terms: Vec::new(),
            coefficients: BTreeMap::new(),
        }
    }

    fn coef(&mut self, name: &str, value: f64) -> f64 {
        self.coefficients.insert(name.to_string(), value);
        value
    }

    fn term(&mut self, name: &str, coefficient: f64, u_norm: UNorm) {
        self.terms.push(Term {
            name: name.to_string(),
            coefficient,
            u_norm,
        });
    }
}

fn sigma2(cfg: &ExperimentConfig, grid: &Arc<Grid>) -> Result<SharedSymbol> {
    let id = cfg
        .sigma2
        .as_deref()
        .ok_or_else(|| config(format!("{} needs sigma2", cfg.theorem)))?;
    build_symbol(grid, id)
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid_spec())?;
    let dim = grid.dim();
    let d = dim as f64;
    let s = cfg.s;
    let t0 = cfg.t0_value();
    let s0 = cfg.s0_value();
    let n = cfg.n;
    let variant = cfg.variant_value()?;
    if cfg.theorem != TheoremTag::Identity {
        require(t0 > d / 2.0, "t0 > d/2")?;
        require(t0 <= s0, "t0 <= s0")?;
    }
    let d2 = sobolev_index(dim);
    let kn = regular_index(dim, n);
    let eps_index = |s: f64| if s == 0.0 { cfg.epsilon } else { 0.0 };
    let mut b = Builder::new();

    let (numerator, indices, naive_index) = match cfg.theorem {
        TheoremTag::Identity => {
            b.term("u", 1.0, UNorm::Sobolev(s));
            let idx = Indices { s, t0, s0, n, m1: 0.0, m2: None, s_in: s, order: 0.0 };
            (Numerator::Identity, idx, None)
        }
        TheoremTag::ThII1 | TheoremTag::ThII2 => {
            let sym = build_symbol(&grid, &cfg.sigma1)?;
            let m = sym.order();
            if cfg.theorem == TheoremTag::ThII1 {
                if variant == Some(Variant::Low) {
                    require(-t0 < s && s < t0, "-t0 < s < t0")?;
                    let c = b.coef("n0_t0", semi(sym.as_ref(), Family::LowN { k: 0, s: t0 })?)
                        + b.coef("N_t0", semi(sym.as_ref(), Family::N { k: d2, s: t0 })?);
                    b.term("sigma_t0*u[s+m]", c, UNorm::Sobolev(s + m));
                } else {
                    require(t0 <= s && s <= s0, "t0 <= s <= s0")?;
                    let c = b.coef("n0_s", semi(sym.as_ref(), Family::LowN { k: 0, s })?)
                        + b.coef("N_s", semi(sym.as_ref(), Family::N { k: d2, s })?);
                    b.term("sigma_s*u[m+t0]", c, UNorm::Sobolev(m + t0));
                    let md = b.coef("M_d", semi(sym.as_ref(), Family::M { k: dim, l: 0 })?);
                    b.term("M_d*u[s+m]", md, UNorm::Sobolev(s + m));
                }
            } else {
                require(m > 0.0, "m > 0")?;
                require(sym.regularity().admits(d2), "sigma is (2[d/2]+2)-regular at the origin")?;
                require(0.0 <= s && s <= s0, "0 <= s <= s0")?;
                let c = b.coef("n_reg_s", semi(sym.as_ref(), Family::LowN { k: d2, s })?)
                    + b.coef("N_s+m", semi(sym.as_ref(), Family::N { k: d2, s: s + m })?);
                b.term("sigma*u[C_*]", c, UNorm::Zygmund(eps_index(s)));
                let md = b.coef("M_d", semi(sym.as_ref(), Family::M { k: dim, l: 0 })?);
                b.term("M_d*u[s+m]", md, UNorm::Sobolev(s + m));
            }
            let idx = Indices { s, t0, s0, n, m1: m, m2: None, s_in: s + m, order: m };
            (Numerator::Action(ApplyPlan::auto(sym)?), idx, Some(s + m))
        }
        TheoremTag::CorII1 => {
            let cs = build_composite(&grid, &cfg.sigma1)?;
            let outer = cs.outer().clone();
            let m = outer.order();
            let vsup = b.coef("v_sup", cs.inner_sup());
            let c_sigma = b.coef("C_sigma", outer_bound(outer.as_ref(), &grid, vsup));
            let vnorm = |r: f64| {
                cs.inner()
                    .iter()
                    .map(|v| sobolev_norm(v, r).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            if variant == Some(Variant::I) {
                if -t0 < s && s < t0 {
                    let v = b.coef("v_t0", vnorm(t0));
                    b.term("C*(v_t0+1)*u[s+m]", c_sigma * (v + 1.0), UNorm::Sobolev(s + m));
                } else {
                    require(t0 <= s && s <= s0, "-t0 < s <= s0")?;
                    let v = b.coef("v_s", vnorm(s));
                    b.term("C*v_s*u[m+t0]", c_sigma * v, UNorm::Sobolev(m + t0));
                    b.term("C*u[s+m]", c_sigma, UNorm::Sobolev(s + m));
                }
            } else {
                require(m > 0.0, "m > 0")?;
                require(
                    outer.regularity().admits(d2),
                    "outer function is (2[d/2]+2)-regular at the origin",
                )?;
                require(0.0 <= s && s <= s0, "0 <= s <= s0")?;
                let v = b.coef("v_s+m", vnorm(s + m));
                b.term("C*v_s+m*u[C_*]", c_sigma * v, UNorm::Zygmund(eps_index(s)));
                b.term("C*u[s+m]", c_sigma, UNorm::Sobolev(s + m));
            }
            let sym: SharedSymbol = Arc::new(cs);
            let idx = Indices { s, t0, s0, n, m1: m, m2: None, s_in: s + m, order: m };
            (Numerator::Action(ApplyPlan::auto(sym)?), idx, Some(s + m))
        }
        TheoremTag::ThIII1 | TheoremTag::ThIII2 | TheoremTag::ThIII3 | TheoremTag::ThIII1bis => {
            let s1 = build_symbol(&grid, &cfg.sigma1)?;
            let s2 = sigma2(cfg, &grid)?;
            let (m1, m2) = (s1.order(), s2.order());
            let mn = m1.min(n as f64);
            let ii = variant == Some(Variant::Ii);
            require(s1.is_multiplier(), "sigma1 is a Fourier multiplier")?;
            require(s1.regularity().admits(n), "sigma1 is n-regular at the origin")?;
            if ii {
                require(
                    s1.regularity().admits(kn),
                    "sigma1 is (n+2+[d/2]+d)-regular at the origin",
                )?;
            }
            let low_order = s + m1 + m2 - n as f64 - 1.0;
            match cfg.theorem {
                TheoremTag::ThIII1 => {
                    require(
                        (-t0).max(-t0 - m1) < s && s <= s0 + 1.0,
                        "max(-t0, -t0-m1) < s <= s0+1",
                    )?;
                    if ii {
                        require(s2.regularity().admits(dim), "sigma2 is d-regular at the origin")?;
                    }
                }
                TheoremTag::ThIII2 => {
                    require(m2 > 0.0, "m2 > 0")?;
                    require(s2.regularity().admits(d2), "sigma2 is (2[d/2]+2)-regular at the origin")?;
                    require(0.0 < s + m1 && 0.0 < s, "0 < s and 0 < s+m1")?;
                    require(s + m2 <= s0 + 1.0, "s+m2 <= s0+1")?;
                }
                TheoremTag::ThIII3 => {
                    require(s2.is_function(), "sigma2 is a function of x")?;
                    require(m1 > n as f64, "m1 > n")?;
                    require(0.0 <= s && s <= s0 + 1.0, "0 <= s <= s0+1")?;
                }
                _ => {
                    require(-t0 < s && s <= t0 + 1.0, "-t0 < s <= t0+1")?;
                    require(
                        -t0 < s + m1 && s + m1 <= t0 + n as f64 + 1.0,
                        "-t0 < s+m1 <= t0+n+1",
                    )?;
                    if ii {
                        require(s2.regularity().admits(dim), "sigma2 is d-regular at the origin")?;
                    }
                }
            }
            let big_m = semi(s1.as_ref(), Family::M { k: kn, l: 0 })?;
            let c = if ii {
                b.coef("C'", big_m + semi(s1.as_ref(), Family::LowM { k: kn })?)
            } else {
                b.coef("C", big_m + semi(s1.as_ref(), Family::LowM { k: n })?)
            };
            let high = m1 + m2 + t0 - mn;
            match (cfg.theorem, ii) {
                (TheoremTag::ThIII1, false) => {
                    let a = b.coef("M_d(grad)", grad_max(&s2, n + 1, |x| semi(x, Family::M { k: dim, l: 0 }))?);
                    b.term("C*M_d(grad)*u[low]", c * a, UNorm::Sobolev(low_order));
                    let h = b.coef("sigma2_H", hs(s2.as_ref(), s + mn)?);
                    b.term("C*sigma2_H*u[high]", c * h, UNorm::Sobolev(high));
                }
                (TheoremTag::ThIII1, true) => {
                    let a = b.coef("grad_inf", grad_max(&s2, n + 1, |x| gate(composite_norm(x, NormVariant::Inf)))?);
                    b.term("C'*grad_inf*u[low]", c * a, UNorm::Sobolev(low_order));
                    let h = b.coef("grad_H", grad_max(&s2, n + 1, |x| hs(x, s + mn - n as f64 - 1.0))?);
                    b.term("C'*grad_H*u[high]", c * h, UNorm::Sobolev(high));
                }
                (TheoremTag::ThIII2, false) => {
                    let a = b.coef("M_d(grad)", grad_max(&s2, n + 1, |x| semi(x, Family::M { k: dim, l: 0 }))?);
                    b.term("C*M_d(grad)*u[low]", c * a, UNorm::Sobolev(low_order));
                    let h = b.coef("sigma2_Hreg", hs_reg(s2.as_ref(), s + mn + m2)?);
                    b.term("C*sigma2_Hreg*u[inf]", c * h, UNorm::Sup);
                }
                (TheoremTag::ThIII2, true) => {
                    let a = b.coef("grad_inf", grad_max(&s2, n + 1, |x| gate(composite_norm(x, NormVariant::Inf)))?);
                    b.term("C'*grad_inf*u[low]", c * a, UNorm::Sobolev(low_order));
                    let h = b.coef(
                        "grad_Hreg",
                        grad_max(&s2, n + 1, |x| hs_reg(x, s + mn + m2 - n as f64 - 1.0))?,
                    );
                    b.term("C'*grad_Hreg*u[inf]", c * h, UNorm::Sup);
                }
                (TheoremTag::ThIII3, false) => {
                    let a = function_field(&s2)?;
                    let w = b.coef("a_W", w_inf_norm(&a, n + 1));
                    b.term("C*a_W*u[low]", c * w, UNorm::Sobolev(s + m1 - n as f64 - 1.0));
                    let h = b.coef("a_H", sobolev_norm(&a, s + m1));
                    b.term("C*a_H*u[inf]", c * h, UNorm::Sup);
                }
                (TheoremTag::ThIII3, true) => {
                    let a = function_field(&s2)?;
                    let r = s + m1 - n as f64 - 1.0;
                    let w = b.coef("grad_a_inf", field_grad_max(&a, n + 1, linf_norm));
                    b.term("C'*grad_a_inf*u[low]", c * w, UNorm::Sobolev(r));
                    let h = b.coef("grad_a_H", field_grad_max(&a, n + 1, |f| sobolev_norm(f, r)));
                    b.term("C'*grad_a_H*u[inf]", c * h, UNorm::Sup);
                }
                (_, false) => {
                    let h = b.coef("sigma2_H", hs(s2.as_ref(), t0 + n as f64 + 1.0)?);
                    b.term("C*sigma2_H*u[low]", c * h, UNorm::Sobolev(low_order));
                }
                (_, true) => {
                    let h = b.coef("grad_H", grad_max(&s2, n + 1, |x| hs(x, t0))?);
                    b.term("C'*grad_H*u[low]", c * h, UNorm::Sobolev(low_order));
                }
            }
            let order = m1 + m2 - n as f64 - 1.0;
            let idx = Indices { s, t0, s0, n, m1, m2: Some(m2), s_in: s + order, order };
            (Numerator::Remainder(RemainderOperator::new(s1, s2, n)?), idx, None)
        }
        TheoremTag::ThIV1bis => {
            let s1 = build_symbol(&grid, &cfg.sigma1)?;
            let s2 = sigma2(cfg, &grid)?;
            let (m1, m2) = (s1.order(), s2.order());
            let nf = n as f64;
            require(s1.regularity().admits(n), "sigma1 is n-regular at the origin")?;
            require(s2.regularity().admits(n), "sigma2 is n-regular at the origin")?;
            require(-t0 < s && s <= t0 + 1.0, "-t0 < s <= t0+1")?;
            for (mj, name) in [(m1, "-t0 < s+m1 <= t0+n+1"), (m2, "-t0 < s+m2 <= t0+n+1")] {
                require(-t0 < s + mj && s + mj <= t0 + nf + 1.0, name)?;
            }
            let a = b.coef("sigma1_Hn", hs_n(s1.as_ref(), n, t0 + nf + 1.0)?);
            let h = b.coef("sigma2_H", hs(s2.as_ref(), t0 + nf + 1.0)?);
            let order = m1 + m2 - nf - 1.0;
            b.term("sigma1_Hn*sigma2_H*u[low]", a * h, UNorm::Sobolev(s + order));
            let idx = Indices { s, t0, s0, n, m1, m2: Some(m2), s_in: s + order, order };
            (Numerator::Remainder(RemainderOperator::new(s1, s2, n)?), idx, None)
        }
        TheoremTag::ThIV1 => {
            let s1 = build_symbol(&grid, &cfg.sigma1)?;
            let s2 = sigma2(cfg, &grid)?;
            let (m1, m2) = (s1.order(), s2.order());
            let nf = n as f64;
            let v = variant.expect("th-IV1 has variants");
            if v == Variant::Iii {
                require(m1 > 0.0, "m1 > 0")?;
                require(s1.regularity().admits(d2), "sigma1 is (2[d/2]+2)-regular at the origin")?;
                require(s2.is_function(), "sigma2 is a function of x")?;
                require(0.0 <= s && s <= t0 + 1.0, "0 <= s <= t0+1")?;
                let a = function_field(&s2)?;
                let c = b.coef("sigma1_Hreg", hs_reg(s1.as_ref(), t0 + 1.0)?);
                let h = b.coef("a_H", sobolev_norm(&a, s + m1));
                let w = b.coef("a_W1", w_inf_norm(&a, 1));
                b.term("sigma1_Hreg*a_H*u[inf]", c * h, UNorm::Sup);
                b.term("sigma1_Hreg*a_W1*u[low]", c * w, UNorm::Sobolev(s + m1 - 1.0));
                let order = m1 - 1.0;
                let idx = Indices { s, t0, s0, n: 0, m1, m2: Some(m2), s_in: s + order, order };
                let op = RemainderOperator::new(s1, s2, 0)?;
                (Numerator::Commutator(op), idx, None)
            } else {
                require(s1.regularity().admits(n), "sigma1 is n-regular at the origin")?;
                require(s2.regularity().admits(n), "sigma2 is n-regular at the origin")?;
                match v {
                    Variant::ITer => require(
                        (t0 + 1.0).max(-t0 - m1) <= s && s <= s0 + 1.0,
                        "max(t0+1, -t0-m1) <= s <= s0+1",
                    )?,
                    Variant::Ii => require(
                        (-t0).max(-t0 - m1).max(-t0 - m2) < s && s <= t0 + 1.0,
                        "max(-t0, -t0-m1, -t0-m2) < s <= t0+1",
                    )?,
                    _ => require(
                        (-t0).max(-t0 - m1) < s && s <= t0 + 1.0,
                        "max(-t0, -t0-m1) < s <= t0+1",
                    )?,
                }
                let order = m1 + m2 - nf - 1.0;
                let low = UNorm::Sobolev(s + order);
                let sp = s.max(0.0);
                // I(a, b) with the roles of the two symbols given
                let pair = |b: &mut Builder, a: &SharedSymbol, c: &SharedSymbol, ma: f64, mc: f64, tag: &str| -> Result<()> {
                    let mn = ma.min(nf);
                    let wa = b.coef(&format!("{tag}:a_Wn"), w_n(a.as_ref(), n, n + 1)?);
                    let wc = b.coef(&format!("{tag}:b_Wn"), w_n(c.as_ref(), n, n + 1)?);
                    b.term(&format!("{tag}:a_Wn*b_Wn*u[low]"), wa * wc, UNorm::Sobolev(s + ma + mc - nf - 1.0));
                    let a1 = b.coef(&format!("{tag}:a_Hn_t0+1"), hs_n(a.as_ref(), n, t0 + 1.0)?);
                    let c1 = b.coef(&format!("{tag}:b_H_s+"), hs(c.as_ref(), sp + mn)?);
                    let a2 = b.coef(&format!("{tag}:a_Hn_s+"), hs_n(a.as_ref(), n, sp + mn)?);
                    let c2 = b.coef(&format!("{tag}:b_H_t0"), hs(c.as_ref(), t0)?);
                    b.term(
                        &format!("{tag}:(a_Hn*b_H+a_Hn*b_H)*u[high]"),
                        a1 * c1 + a2 * c2,
                        UNorm::Sobolev(ma + mc + t0 - mn),
                    );
                    Ok(())
                };
                let mn = m1.min(nf);
                let high = UNorm::Sobolev(m1 + m2 + t0 - mn);
                let numerator = match v {
                    Variant::I => {
                        pair(&mut b, &s1, &s2, m1, m2, "12")?;
                        Numerator::Composition(CompositionOperator::new(s1, s2, n)?)
                    }
                    Variant::IBis => {
                        let a = b.coef("sigma1_Hn", hs_n(s1.as_ref(), n, t0 + mn + 1.0)?);
                        let h = b.coef("sigma2_H", hs(s2.as_ref(), s + mn)?);
                        let w = b.coef("sigma2_Wn", w_n(s2.as_ref(), n, n + 1)?);
                        b.term("sigma1_Hn*sigma2_H*u[high]", a * h, high);
                        b.term("sigma1_Hn*sigma2_Wn*u[low]", a * w, low);
                        Numerator::Composition(CompositionOperator::new(s1, s2, n)?)
                    }
                    Variant::ITer => {
                        pair(&mut b, &s1, &s2, m1, m2, "12")?;
                        let a = b.coef("sigma1_H_s", hs(s1.as_ref(), s)?);
                        let h = b.coef("sigma2_H", hs(s2.as_ref(), mn + t0 + 1.0)?);
                        b.term("sigma1_H*sigma2_H*u[high]", a * h, high);
                        Numerator::Composition(CompositionOperator::new(s1, s2, n)?)
                    }
                    _ => {
                        pair(&mut b, &s1, &s2, m1, m2, "12")?;
                        pair(&mut b, &s2, &s1, m2, m1, "21")?;
                        Numerator::Remainder(RemainderOperator::new(s1, s2, n)?)
                    }
                };
                let idx = Indices { s, t0, s0, n, m1, m2: Some(m2), s_in: s + order, order };
                (numerator, idx, None)
            }
        }
    };
    Ok(Prepared {
        grid,
        variant,
        numerator,
        terms: b.terms,
        coefficients: b.coefficients,
        indices,
        naive_index,
    })
}

/// The slope window used when none is configured: `j = 3..7` for the
/// multiplier–function commutator on its default grid.
pub fn effective_slope(cfg: &ExperimentConfig) -> Option<SlopeConfig> {
    if cfg.slope.is_some() {
        return cfg.slope;
    }
    if cfg.theorem == TheoremTag::ThIII3 && cfg.grid.is_none() {
        return Some(SlopeConfig {
            j_min: 3,
            j_max: 7,
            expected: None,
            tolerance: crate::lab::config::default_tolerance(),
        });
    }
    None
}

/// Runs one experiment: gates, right-hand side, probe ratios and the optional
/// decay-order fit.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let prep = prepare(cfg)?;
    let grid = prep.grid.clone();
    let bank = FilterBank::new(grid.clone())?;
    let s = prep.indices.s;
    let family = probe_family(&grid, prep.indices.s_in, cfg.probes, cfg.seed)?;

    struct Raw {
        numerator: f64,
        reference: f64,
        rhs: f64,
        naive: Option<f64>,
        terms: BTreeMap<String, f64>,
    }
    let raw: Vec<Result<Raw>> = family
        .par_iter()
        .map(|p| {
            let (v, parts) = prep.numerator.eval(&p.field)?;
            let numerator = sobolev_norm(&v, s);
            let reference: f64 = parts.iter().map(|f| sobolev_norm(f, s)).sum();
            let mut terms = BTreeMap::new();
            let mut rhs = 0.0;
            for t in &prep.terms {
                let value = t.coefficient * t.u_norm.eval(&bank, &p.field);
                rhs += value;
                terms.insert(t.name.clone(), value);
            }
            let naive = prep
                .naive_index
                .map(|r| numerator / sobolev_norm(&p.field, r));
            Ok(Raw { numerator, reference, rhs, naive, terms })
        })
        .collect();
    let raw = raw.into_iter().collect::<Result<Vec<_>>>()?;

    let negligible = |r: &Raw| r.numerator <= DEGENERATE_RELATIVE * r.reference;
    let degenerate = raw.iter().all(negligible);
    let mut probes = Vec::with_capacity(raw.len());
    for (p, r) in family.iter().zip(raw) {
        let ratio = if degenerate || (r.rhs == 0.0 && negligible(&r)) {
            0.0
        } else if r.rhs == 0.0 {
            return Err(Error::Numerical(format!(
                "right-hand side vanishes on probe {} while the numerator is {:e}",
                p.index, r.numerator
            )));
        } else {
            r.numerator / r.rhs
        };
        if !ratio.is_finite() || !r.numerator.is_finite() {
            return Err(Error::Numerical(format!("probe {} gives a non-finite ratio", p.index)));
        }
        probes.push(ProbeRecord {
            index: p.index,
            kind: p.kind,
            j: p.j,
            numerator: r.numerator,
            reference: r.reference,
            rhs: r.rhs,
            ratio,
            naive: r.naive,
            terms: r.terms,
        });
    }
    let ratios: Vec<f64> = probes.iter().map(|p| p.ratio).collect();
    let c_emp = ratios.iter().copied().fold(0.0, f64::max);
    let naive_c = prep
        .naive_index
        .map(|_| probes.iter().filter_map(|p| p.naive).fold(0.0, f64::max));

    let slope_cfg = effective_slope(cfg);
    let slope = match slope_cfg {
        None => None,
        Some(sc) => {
            let packets = wave_packets(&grid, sc.j_min..=sc.j_max, [1.0, 0.0], default_width(&grid))?;
            let expected = sc.expected.unwrap_or(prep.indices.order);
            let fit = order_probe(
                |u| {
                    let (field, parts) = prep.numerator.eval(u)?;
                    let reference = parts.iter().map(|f| f.l2_norm()).sum();
                    Ok(Residual { field, reference })
                },
                &packets,
                expected,
                sc.tolerance,
            )?;
            Some(fit)
        }
    };
    let pass = c_emp.is_finite() && slope.as_ref().is_none_or(|f| f.pass);

    let mut resolved = cfg.clone();
    resolved.grid = Some(grid.spec());
    resolved.t0 = Some(prep.indices.t0);
    resolved.s0 = Some(prep.indices.s0);
    resolved.variant = prep.variant;
    resolved.slope = slope_cfg;
    Ok(EstimateReport {
        schema_version: REPORT_SCHEMA_VERSION,
        id: cfg.id.clone(),
        theorem: cfg.theorem,
        variant: prep.variant,
        config: resolved,
        indices: prep.indices,
        coefficients: prep.coefficients,
        terms: prep.terms,
        probes,
        ratios,
        c_emp,
        naive_c,
        degenerate,
        slope,
        pass,
    })
}

/// Reruns `cfg` at each resolution, keeping the period.
pub fn resolution_sweep(cfg: &ExperimentConfig, n_pts_list: &[usize]) -> Result<SweepReport> {
    if n_pts_list.is_empty() {
        return Err(config("resolution sweep needs at least one n_pts"));
    }
    let base = cfg.grid_spec();
    let mut reports = Vec::with_capacity(n_pts_list.len());
    for &n_pts in n_pts_list {
        let mut c = cfg.clone();
        c.grid = Some(crate::spectral::GridSpec { n_pts, ..base });
        c.id = format!("{}-n{n_pts}", cfg.id);
        reports.push(run_experiment(&c)?);
    }
    Ok(SweepReport::new(cfg.id.clone(), reports))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub id: String,
    pub n_pts: Vec<usize>,
    pub c_emp: Vec<f64>,
    /// `max / min` of `C_emp` over the non-degenerate runs; 1 when all are degenerate.
    pub stability: f64,
    pub pass: bool,
    pub reports: Vec<EstimateReport>,
}

impl SweepReport {
    pub fn new(id: String, reports: Vec<EstimateReport>) -> SweepReport {
        let c: Vec<f64> = reports.iter().map(|r| r.c_emp).collect();
        let live: Vec<f64> = reports
            .iter()
            .filter(|r| !r.degenerate)
            .map(|r| r.c_emp)
            .collect();
        let stability = if live.is_empty() {
            1.0
        } else {
            let max = live.iter().copied().fold(f64::MIN, f64::max);
            let min = live.iter().copied().fold(f64::MAX, f64::min);
            max / min
        };
        SweepReport {
            schema_version: REPORT_SCHEMA_VERSION,
            id,
            n_pts: reports
                .iter()
                .map(|r| r.config.grid.map_or(0, |g| g.n_pts))
                .collect(),
            c_emp: c,
            stability,
            pass: reports.iter().all(|r| r.pass) && stability.is_finite(),
            reports,
        }
    }
}
