use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{config, input, Result};
use crate::jet::Jet;
use crate::spectral::grid::{japanese, norm};
use crate::spectral::{Field, Grid};
use crate::symbols::wrappers::LinearCombination;
use crate::symbols::{MultiIndex, Partials, Profile, Regularity, SharedSymbol, Symbol};
use crate::C64;

/// `Σ_r a_r(x) m_r(ξ)` with multiplier profiles `m_r`.
///
/// Covers multipliers (constant coefficients), functions (constant profiles) and
/// products such as `a(x) ⟨ξ⟩^m` or `a(x) i ξ₁`.
#[derive(Debug, Clone)]
pub struct Separable {
    grid: Arc<Grid>,
    terms: Vec<(Field, Profile)>,
    label: String,
}

impl Separable {
    pub fn new(terms: Vec<(Field, Profile)>, label: impl Into<String>) -> Result<Separable> {
        let grid = terms
            .first()
            .map(|(f, _)| f.grid().clone())
            .ok_or_else(|| input("separable symbol needs at least one term"))?;
        for (f, _) in &terms {
            if **f.grid() != *grid {
                return Err(input("separable terms live on different grids"));
            }
        }
        Ok(Separable {
            grid,
            terms,
            label: label.into(),
        })
    }

    /// The Fourier multiplier `m(D)`.
    pub fn multiplier(grid: Arc<Grid>, profile: Profile) -> Separable {
        let one = Field::constant(grid.clone(), C64::new(1.0, 0.0));
        Separable {
            grid,
            terms: vec![(one, profile)],
            label: format!("{profile:?}"),
        }
    }

    /// The multiplication operator by `a(x)`.
    pub fn function(a: Field) -> Separable {
        Separable {
            grid: a.grid().clone(),
            terms: vec![(a, Profile::Constant { value: 1.0 })],
            label: "function".into(),
        }
    }

    /// `a(x) m(ξ)`.
    pub fn product(a: Field, profile: Profile) -> Separable {
        Separable {
            grid: a.grid().clone(),
            terms: vec![(a, profile)],
            label: format!("a(x)·{profile:?}"),
        }
    }

    pub fn terms(&self) -> &[(Field, Profile)] {
        &self.terms
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Separable {
        self.label = label.into();
        self
    }
}

fn is_constant_field(f: &Field) -> bool {
    let s = f.samples();
    s.iter().all(|v| *v == s[0])
}

impl Symbol for Separable {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn order(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, p)| p.order())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn regularity(&self) -> Regularity {
        self.terms
            .iter()
            .fold(Regularity::Infinite, |r, (_, p)| r.min(p.regularity()))
    }

    fn is_multiplier(&self) -> bool {
        self.terms.iter().all(|(f, _)| is_constant_field(f))
    }

    fn is_function(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_constant())
    }

    fn analytic_order(&self) -> usize {
        usize::MAX
    }

    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (a, p) in &self.terms {
            let v = p.value(xi);
            if v == 0.0 {
                continue;
            }
            for (o, s) in out.iter_mut().zip(a.samples()) {
                *o += s * v;
            }
        }
        out
    }

    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        let dim = self.grid.dim();
        let jets: Vec<Jet> = self.terms.iter().map(|(_, p)| p.jet(dim, order, xi)).collect();
        let mut out = Partials::new();
        for beta in MultiIndex::all(dim, order) {
            let mut col = vec![C64::new(0.0, 0.0); self.grid.len()];
            for ((a, _), jet) in self.terms.iter().zip(&jets) {
                let d = jet.partial(beta);
                if d == 0.0 {
                    continue;
                }
                for (o, s) in col.iter_mut().zip(a.samples()) {
                    *o += s * d;
                }
            }
            out.insert(beta, col);
        }
        Ok(out)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Outer function `Σ(v, ξ)` of a composite symbol, `v ∈ ℝ^p`.
pub trait Outer: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;
    fn order(&self) -> f64;
    fn regularity(&self) -> Regularity;
    fn value(&self, v: &[f64], xi: &[f64; 2]) -> f64;
    /// Taylor jet in ξ at fixed `v`.
    fn jet(&self, v: &[f64], xi: &[f64; 2], nvars: usize, order: usize) -> Jet;
    /// `∂Σ/∂v_k` at `(v, ξ)`, if available in closed form.
    fn value_gradient(&self, _v: &[f64], _xi: &[f64; 2]) -> Option<Vec<f64>> {
        None
    }
    fn label(&self) -> String;
}

/// `Σ(v, ξ) = sqrt((1 + |v|²)|ξ|² − (v·ξ)²)` with `v = ∇a`.
#[derive(Debug, Clone, Copy)]
pub struct DnOuter {
    pub dim: usize,
}

impl Outer for DnOuter {
    fn arity(&self) -> usize {
        self.dim
    }
    fn order(&self) -> f64 {
        1.0
    }
    fn regularity(&self) -> Regularity {
        Regularity::Finite(0)
    }
    fn value(&self, v: &[f64], xi: &[f64; 2]) -> f64 {
        let g2: f64 = v.iter().map(|g| g * g).sum();
        let gx: f64 = v.iter().zip(xi).map(|(g, x)| g * x).sum();
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        ((1.0 + g2) * r2 - gx * gx).max(0.0).sqrt()
    }
    fn jet(&self, v: &[f64], xi: &[f64; 2], nvars: usize, order: usize) -> Jet {
        let [x, y] = Jet::coordinates(nvars, order, xi);
        let g2: f64 = v.iter().map(|g| g * g).sum();
        let mut r2 = x.mul(&x);
        let mut gx = x.scale(v[0]);
        if nvars == 2 {
            r2 = r2.add(&y.mul(&y));
            gx = gx.add(&y.scale(v.get(1).copied().unwrap_or(0.0)));
        }
        r2.scale(1.0 + g2).sub(&gx.mul(&gx)).sqrt()
    }
    fn value_gradient(&self, v: &[f64], xi: &[f64; 2]) -> Option<Vec<f64>> {
        let sigma = self.value(v, xi);
        if sigma == 0.0 {
            return None;
        }
        let gx: f64 = v.iter().zip(xi).map(|(g, x)| g * x).sum();
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        Some(v.iter().zip(xi).map(|(g, x)| (g * r2 - gx * x) / sigma).collect())
    }
    fn label(&self) -> String {
        "dn".into()
    }
}

/// `Σ(v, ξ) = v · m(ξ)` for a scalar `v`.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeOuter {
    pub profile: Profile,
}

impl Outer for AmplitudeOuter {
    fn arity(&self) -> usize {
        1
    }
    fn order(&self) -> f64 {
        self.profile.order()
    }
    fn regularity(&self) -> Regularity {
        self.profile.regularity()
    }
    fn value(&self, v: &[f64], xi: &[f64; 2]) -> f64 {
        v[0] * self.profile.value(xi)
    }
    fn jet(&self, v: &[f64], xi: &[f64; 2], nvars: usize, order: usize) -> Jet {
        self.profile.jet(nvars, order, xi).scale(v[0])
    }
    fn value_gradient(&self, _v: &[f64], xi: &[f64; 2]) -> Option<Vec<f64>> {
        Some(vec![self.profile.value(xi)])
    }
    fn label(&self) -> String {
        format!("v·{:?}", self.profile)
    }
}

/// `σ(x, ξ) = Σ(v(x), ξ)` for real inner fields `v = (v_1, …, v_p)`.
#[derive(Debug, Clone)]
pub struct Composite {
    grid: Arc<Grid>,
    inner: Vec<Field>,
    // inner samples transposed: values[j] = v(x_j)
    values: Vec<Vec<f64>>,
    // grads[axis][j][k] = ∂_axis v_k(x_j)
    grads: Vec<Vec<Vec<f64>>>,
    outer: Arc<dyn Outer>,
    label: String,
}

impl Composite {
    pub fn new(inner: Vec<Field>, outer: Arc<dyn Outer>) -> Result<Composite> {
        let grid = inner
            .first()
            .map(|f| f.grid().clone())
            .ok_or_else(|| input("composite symbol needs inner fields"))?;
        if inner.len() != outer.arity() {
            return Err(input(format!(
                "outer function takes {} inner fields, got {}",
                outer.arity(),
                inner.len()
            )));
        }
        for f in &inner {
            if **f.grid() != *grid {
                return Err(input("inner fields live on different grids"));
            }
        }
        let values = (0..grid.len())
            .map(|j| inner.iter().map(|f| f.samples()[j].re).collect())
            .collect();
        let grads = (0..grid.dim())
            .map(|axis| {
                let mut alpha = [0, 0];
                alpha[axis] = 1;
                let d: Vec<Field> = inner.iter().map(|f| f.partial(alpha)).collect();
                (0..grid.len())
                    .map(|j| d.iter().map(|f| f.samples()[j].re).collect())
                    .collect()
            })
            .collect();
        let label = outer.label();
        Ok(Composite {
            grid,
            inner,
            values,
            grads,
            outer,
            label,
        })
    }

    pub fn inner(&self) -> &[Field] {
        &self.inner
    }

    pub fn outer(&self) -> &Arc<dyn Outer> {
        &self.outer
    }

    /// `|v|_∞` over all inner components.
    pub fn inner_sup(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// The same outer function evaluated at `v ≡ 0`.
    pub fn at_zero(&self) -> Composite {
        let zeros = self
            .inner
            .iter()
            .map(|_| Field::zeros(self.grid.clone()))
            .collect();
        let mut out = Composite::new(zeros, self.outer.clone()).expect("same arity");
        out.label = format!("{}(0,ξ)", self.label);
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Composite {
        self.label = label.into();
        self
    }
}

impl Symbol for Composite {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    fn order(&self) -> f64 {
        self.outer.order()
    }
    fn regularity(&self) -> Regularity {
        self.outer.regularity()
    }
    fn is_multiplier(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }
    fn analytic_order(&self) -> usize {
        usize::MAX
    }
    fn column(&self, xi: &[f64; 2]) -> Vec<C64> {
        self.values
            .iter()
            .map(|v| C64::new(self.outer.value(v, xi), 0.0))
            .collect()
    }
    fn analytic_partials(&self, xi: &[f64; 2], order: usize) -> Result<Partials> {
        let dim = self.grid.dim();
        let betas = MultiIndex::all(dim, order);
        let mut cols: Vec<Vec<C64>> = vec![Vec::with_capacity(self.grid.len()); betas.len()];
        let constant = self.is_multiplier();
        let mut cached: Option<Jet> = None;
        for v in &self.values {
            let jet = match (&cached, constant) {
                (Some(j), true) => j.clone(),
                _ => {
                    let j = self.outer.jet(v, xi, dim, order);
                    cached = Some(j.clone());
                    j
                }
            };
            for (col, beta) in cols.iter_mut().zip(&betas) {
                col.push(C64::new(jet.partial(*beta), 0.0));
            }
        }
        Ok(betas.into_iter().zip(cols).collect())
    }
    fn x_partial(&self, xi: &[f64; 2], alpha: [usize; 2]) -> Option<Vec<C64>> {
        let axis = match alpha {
            [1, 0] => 0,
            [0, 1] if self.grid.dim() == 2 => 1,
            _ => return None,
        };
        self.values
            .iter()
            .zip(&self.grads[axis])
            .map(|(v, dv)| {
                let g = self.outer.value_gradient(v, xi)?;
                Some(C64::new(g.iter().zip(dv).map(|(a, b)| a * b).sum(), 0.0))
            })
            .collect()
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// The water-wave symbol `sqrt((1 + |∇a|²)|ξ|² − (∇a·ξ)²)`.
pub fn dn_symbol(a: &Field) -> Composite {
    let dim = a.grid().dim();
    let grads = (0..dim)
        .map(|axis| {
            let mut alpha = [0, 0];
            alpha[axis] = 1;
            a.partial(alpha).map(|v| C64::new(v.re, 0.0))
        })
        .collect();
    Composite::new(grads, Arc::new(DnOuter { dim }))
        .expect("gradient has d components")
        .with_label("dn")
}

/// `σ = τ + Σ(0, ·)`: returns `(τ, Σ(0, D))`.
pub fn split_composite(cs: &Composite) -> Result<(SharedSymbol, SharedSymbol)> {
    let grid = cs.grid.clone();
    let zero = vec![0.0; cs.outer.arity()];
    for xi in grid.freqs() {
        if norm(xi) > 0.0 && !cs.outer.value(&zero, xi).is_finite() {
            return Err(input(format!("Σ(0, ξ) is not finite at ξ = {xi:?}")));
        }
    }
    let multiplier: SharedSymbol = Arc::new(cs.at_zero());
    let full: SharedSymbol = Arc::new(cs.clone());
    let tau = LinearCombination::new(vec![
        (C64::new(1.0, 0.0), full),
        (C64::new(-1.0, 0.0), multiplier.clone()),
    ])?
    .with_label(format!("{} − Σ(0,ξ)", cs.label));
    Ok((Arc::new(tau), multiplier))
}

/// `C_Σ(r) = sup_{|w| <= r} sup_ξ ⟨ξ⟩^{−m} |Σ(w, ξ)|`, sampled on a w-grid and the
/// guarded frequency lattice.
pub fn outer_bound(outer: &dyn Outer, grid: &Grid, r: f64) -> f64 {
    let samples = 21usize;
    let p = outer.arity();
    let ws: Vec<Vec<f64>> = if p == 1 {
        (0..samples)
            .map(|i| vec![-r + 2.0 * r * i as f64 / (samples - 1) as f64])
            .collect()
    } else {
        let mut out = Vec::new();
        for i in 0..samples {
            for j in 0..samples {
                let a = -r + 2.0 * r * i as f64 / (samples - 1) as f64;
                let b = -r + 2.0 * r * j as f64 / (samples - 1) as f64;
                if a * a + b * b <= r * r * (1.0 + 1e-12) {
                    let mut w = vec![a, b];
                    w.truncate(p);
                    out.push(w);
                }
            }
        }
        out
    };
    let m = outer.order();
    let guard = grid.xi_guard();
    let mut best: f64 = 0.0;
    for xi in grid.freqs().iter().filter(|xi| norm(xi) <= guard) {
        let weight = japanese(xi).powf(-m);
        for w in &ws {
            best = best.max(weight * outer.value(w, xi).abs());
        }
    }
    best
}

/// Real field with random Fourier coefficients decaying like `⟨ξ⟩^{−(s₀ + d/2 + 1/2)}`,
/// scaled to `max |a| = amplitude`.
pub fn rough_field(grid: Arc<Grid>, s0: f64, amplitude: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim() as f64;
    let guard = grid.xi_guard();
    let spec: Vec<C64> = grid
        .freqs()
        .iter()
        .map(|xi| {
            let g1: f64 = StandardNormal.sample(&mut rng);
            let g2: f64 = StandardNormal.sample(&mut rng);
            if norm(xi) > guard {
                C64::new(0.0, 0.0)
            } else {
                C64::new(g1, g2) * japanese(xi).powf(-(s0 + d / 2.0 + 0.5))
            }
        })
        .collect();
    let f = Field::from_spectrum(grid, spec).expect("spectrum matches grid");
    let real = f.map(|v| C64::new(v.re, 0.0));
    let peak = real.max_abs();
    if peak == 0.0 {
        real
    } else {
        real.scale(C64::new(amplitude / peak, 0.0))
    }
}

/// `offset + amp · sin(freq · x₁)`.
pub fn sine_field(grid: Arc<Grid>, amp: f64, freq: f64, offset: f64) -> Field {
    Field::from_real_fn(grid, |x| offset + amp * (freq * x[0]).sin())
}

/// A parsed catalogue identifier `name[:key=value,...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogueId {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub tags: Vec<String>,
}

impl CatalogueId {
    pub fn parse(text: &str) -> Result<CatalogueId> {
        let text = text.trim();
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n.trim(), r),
            None => (text, ""),
        };
        if name.is_empty() {
            return Err(config("empty symbol identifier"));
        }
        let mut params = BTreeMap::new();
        let mut tags = Vec::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    let value = crate::spectral::grid::parse_length(v)
                        .map_err(|_| config(format!("parameter `{k}` has bad value `{v}`")))?;
                    params.insert(k.trim().to_string(), value);
                }
                None => tags.push(part.to_string()),
            }
        }
        Ok(CatalogueId {
            name: name.to_string(),
            params,
            tags,
        })
    }

    fn take(&self, allowed: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
        if self.name != "func" {
            if let Some(tag) = self.tags.first() {
                return Err(config(format!("symbol `{}` takes no tag `{tag}`", self.name)));
            }
        }
        for key in self.params.keys() {
            if !allowed.iter().any(|(k, _)| k == key) {
                return Err(config(format!(
                    "symbol `{}` has no parameter `{key}`",
                    self.name
                )));
            }
        }
        Ok(allowed
            .iter()
            .map(|(k, default)| {
                (k.to_string(), self.params.get(*k).copied().unwrap_or(*default))
            })
            .collect())
    }
}

/// Names accepted by [`build_symbol`].
pub const CATALOGUE: &[&str] = &[
    "japanese", "absxi-cut", "absxi", "one", "zero", "const", "a-japanese", "v-japanese", "dn",
    "func", "rough",
];

/// Builds one of the composite catalogue symbols (`v-japanese`, `dn`), keeping
/// access to the inner fields and the outer function.
pub fn build_composite(grid: &Arc<Grid>, id: &str) -> Result<Composite> {
    let cid = CatalogueId::parse(id)?;
    let g = grid.clone();
    match cid.name.as_str() {
        "v-japanese" => {
            let p = cid.take(&[("m", 1.0), ("amp", 1.0), ("freq", 1.0), ("offset", 0.0)])?;
            let v = sine_field(g, p["amp"], p["freq"], p["offset"]);
            let outer = AmplitudeOuter {
                profile: Profile::Japanese { m: p["m"] },
            };
            Ok(Composite::new(vec![v], Arc::new(outer))?.with_label(id))
        }
        "dn" => {
            let p = cid.take(&[("amp", 0.1), ("freq", 1.0)])?;
            let a = sine_field(g, p["amp"], p["freq"], 0.0);
            Ok(dn_symbol(&a).with_label(id))
        }
        other => Err(config(format!(
            "`{other}` is not a composite symbol; expected v-japanese or dn"
        ))),
    }
}

/// Builds a catalogue symbol on `grid` from an identifier such as `dn:amp=0.1`,
/// `japanese:m=2.5`, `func:a` or `rough:s0=2,seed=3`.
pub fn build_symbol(grid: &Arc<Grid>, id: &str) -> Result<SharedSymbol> {
    let cid = CatalogueId::parse(id)?;
    let g = grid.clone();
    let sym: SharedSymbol = match cid.name.as_str() {
        "japanese" => {
            let p = cid.take(&[("m", 1.0)])?;
            Arc::new(Separable::multiplier(g, Profile::Japanese { m: p["m"] }).with_label(id))
        }
        "absxi-cut" => {
            cid.take(&[])?;
            Arc::new(Separable::multiplier(g, Profile::AbsCut).with_label(id))
        }
        "absxi" => {
            cid.take(&[])?;
            Arc::new(Separable::multiplier(g, Profile::Abs).with_label(id))
        }
        "one" => {
            cid.take(&[])?;
            Arc::new(Separable::multiplier(g, Profile::Constant { value: 1.0 }).with_label(id))
        }
        "const" => {
            let p = cid.take(&[("value", 1.0)])?;
            let profile = Profile::Constant { value: p["value"] };
            Arc::new(Separable::multiplier(g, profile).with_label(id))
        }
        "zero" => {
            let p = cid.take(&[("m", 0.0)])?;
            Arc::new(crate::symbols::ZeroSymbol::new(g, p["m"]))
        }
        "a-japanese" => {
            let p = cid.take(&[("m", 1.0), ("amp", 0.5), ("freq", 1.0), ("offset", 1.0)])?;
            let a = sine_field(g, p["amp"], p["freq"], p["offset"]);
            Arc::new(Separable::product(a, Profile::Japanese { m: p["m"] }).with_label(id))
        }
        "v-japanese" | "dn" => Arc::new(build_composite(grid, id)?),
        "func" => {
            if cid.tags.iter().any(|t| t == "rough") {
                let p = cid.take(&[("s0", 2.0), ("amp", 1.0), ("seed", 7.0)])?;
                let a = rough_field(g, p["s0"], p["amp"], p["seed"] as u64);
                return Ok(Arc::new(Separable::function(a).with_label(id)));
            }
            if let Some(tag) = cid.tags.iter().find(|t| t.as_str() != "a") {
                return Err(config(format!("unknown function preset `{tag}`")));
            }
            let p = cid.take(&[("amp", 1.0), ("freq", 1.0), ("offset", 0.0)])?;
            let a = sine_field(g, p["amp"], p["freq"], p["offset"]);
            Arc::new(Separable::function(a).with_label(id))
        }
        "rough" => {
            let p = cid.take(&[("s0", 2.0), ("amp", 1.0), ("seed", 7.0)])?;
            let a = rough_field(g, p["s0"], p["amp"], p["seed"] as u64);
            Arc::new(Separable::function(a).with_label(id))
        }
        other => {
            return Err(config(format!(
                "unknown symbol `{other}`; known: {}",
                CATALOGUE.join(", ")
            )))
        }
    };
    Ok(sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn dn_reduces_to_abs_for_flat_surface() {
        let grid = Grid::new(GridSpec::with_default_period(2, 16)).unwrap();
        let a = Field::zeros(grid.clone());
        let dn = dn_symbol(&a);
        assert!(dn.is_multiplier());
        let col = dn.column(&[3.0, 4.0]);
        assert!(col.iter().all(|v| (v.re - 5.0).abs() < 1e-14));
    }

    #[test]
    fn parses_ids() {
        let id = CatalogueId::parse("rough:s0=2.5,seed=3").unwrap();
        assert_eq!(id.name, "rough");
        assert_eq!(id.params["s0"], 2.5);
        let f = CatalogueId::parse("func:a").unwrap();
        assert_eq!(f.tags, vec!["a".to_string()]);
        let grid = Grid::new(GridSpec::with_default_period(1, 64)).unwrap();
        assert!(build_symbol(&grid, "nope").is_err());
        assert!(build_symbol(&grid, "dn:bogus=1").is_err());
        assert!(build_symbol(&grid, "japanese:m=2").unwrap().is_multiplier());
        assert!(build_symbol(&grid, "func:a").unwrap().is_function());
    }

    #[test]
    fn outer_bound_of_amplitude() {
        let grid = Grid::new(GridSpec::with_default_period(1, 64)).unwrap();
        let outer = AmplitudeOuter {
            profile: Profile::Japanese { m: 1.0 },
        };
        assert!((outer_bound(&outer, &grid, 2.0) - 2.0).abs() < 1e-14);
    }
}
