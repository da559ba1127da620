use std::sync::Arc;

use paracalc::calculus::{
    commutator_apply, composition_residual_apply, poisson_n, poisson_n_with, remainder_apply,
    sharp_n, sharp_n_with, CompositionOperator, ExpansionKind, RemainderOperator, MAX_EXPANSION,
};
use paracalc::decompose::{four_way_split, Component};
use paracalc::operators::random_band_limited;
use paracalc::symbols::{build_symbol, DerivMethod, LinearCombination};
use paracalc::{Error, Grid, GridSpec, SharedSymbol, Symbol, C64};
use proptest::prelude::*;

fn grid(dim: usize, n: usize) -> Arc<Grid> {
    Grid::new(GridSpec::with_default_period(dim, n)).unwrap()
}

fn sym(g: &Arc<Grid>, id: &str) -> SharedSymbol {
    build_symbol(g, id).unwrap()
}

#[test]
fn sharp_zero_is_the_product() {
    let g = grid(1, 64);
    let (a, b) = (sym(&g, "a-japanese"), sym(&g, "dn"));
    let s = sharp_n(a.clone(), b.clone(), 0).unwrap();
    assert_eq!(s.kind(), ExpansionKind::Sharp);
    assert_eq!(s.order(), 2.0);
    for xi in [[0.5, 0.0], [-3.25, 0.0], [7.0, 0.0]] {
        let (ca, cb, cs) = (a.column(&xi), b.column(&xi), s.column(&xi));
        for j in 0..g.len() {
            assert_eq!(cs[j], ca[j] * cb[j]);
        }
    }
}

#[test]
fn sharp_one_by_hand() {
    // ⟨ξ⟩² ♯₁ a = ⟨ξ⟩² a − 2iξ a'
    let g = grid(1, 128);
    let p = sym(&g, "japanese:m=2");
    let a = sym(&g, "func:a,amp=0.5,freq=2");
    let s = sharp_n(p, a.clone(), 1).unwrap();
    let xi = [1.75, 0.0];
    let col = s.column(&xi);
    let avals = a.column(&xi);
    for (j, x) in g.points().iter().enumerate() {
        let da = 0.5 * 2.0 * (2.0 * x[0]).cos();
        let exact = avals[j] * (1.0 + xi[0] * xi[0]) - C64::new(0.0, 2.0 * xi[0] * da);
        assert!((col[j] - exact).norm() < 1e-12, "{j}");
    }
}

#[test]
fn bracket_of_order_zero_vanishes() {
    let g = grid(2, 16);
    let b = poisson_n(sym(&g, "a-japanese"), sym(&g, "dn"), 0).unwrap();
    for xi in g.freqs().iter().step_by(17) {
        assert!(b.column(xi).iter().all(|v| *v == C64::new(0.0, 0.0)));
    }
}

#[test]
fn bracket_is_antisymmetric() {
    let g = grid(2, 16);
    let (a, b) = (sym(&g, "a-japanese:m=0.5"), sym(&g, "v-japanese"));
    let ab = poisson_n(a.clone(), b.clone(), 2).unwrap();
    let ba = poisson_n(b, a, 2).unwrap();
    assert_eq!(ab.order(), 0.5 + 1.0 - 1.0);
    for xi in g.freqs().iter().step_by(5) {
        for (x, y) in ab.column(xi).iter().zip(ba.column(xi)) {
            assert_eq!(*x, -y);
        }
    }
}

#[test]
fn bracket_of_multipliers_vanishes() {
    let g = grid(1, 64);
    let b = poisson_n(sym(&g, "japanese:m=1"), sym(&g, "absxi-cut"), 3).unwrap();
    assert!(b.is_multiplier());
    for xi in g.freqs() {
        assert!(b.column(xi).iter().all(|v| v.norm() == 0.0));
    }
}

#[test]
fn commutator_of_multipliers_is_zero() {
    let g = grid(2, 16);
    let u = random_band_limited(&g, 1.0, 9, 0);
    let c = commutator_apply(&sym(&g, "japanese:m=1.5"), &sym(&g, "absxi"), &u).unwrap();
    assert!(c.max_abs() < 1e-12 * u.max_abs().max(1.0));
}

#[test]
fn commutator_with_itself_is_zero() {
    let g = grid(1, 64);
    let s = sym(&g, "a-japanese");
    let u = random_band_limited(&g, 1.0, 2, 0);
    let op = RemainderOperator::new(s.clone(), s, 1).unwrap();
    assert!(op.commutator(&u).unwrap().max_abs() == 0.0);
    // the bracket of σ with itself is zero too
    assert!(op.apply(&u).unwrap().max_abs() == 0.0);
}

#[test]
fn polynomial_symbols_expand_exactly() {
    // ∂_ξ³(1 + ξ²) = 0, so ♯₂ and {·,·}₂ are exact for ⟨ξ⟩² against a function;
    // the grid leaves room for the frequency shift by sin x above the guard
    let g = grid(1, 512);
    let p = sym(&g, "japanese:m=2");
    let a = sym(&g, "func:a,amp=0.3");
    let u = random_band_limited(&g, 4.0, 1, 0);
    let r = composition_residual_apply(&p, &a, 2, &u).unwrap();
    let (_, terms) = CompositionOperator::new(p.clone(), a.clone(), 2).unwrap().apply_with_terms(&u).unwrap();
    assert!(r.max_abs() < 1e-10 * terms[0].max_abs(), "{}", r.max_abs());
    let q = remainder_apply(&p, &a, 2, &u).unwrap();
    let (_, terms) = RemainderOperator::new(p, a, 2).unwrap().apply_with_terms(&u).unwrap();
    assert_eq!(terms.len(), 3);
    assert!(q.max_abs() < 1e-10 * terms[0].max_abs(), "{}", q.max_abs());
}

#[test]
fn residual_shrinks_with_order() {
    let g = grid(1, 256);
    let (a, b) = (sym(&g, "japanese:m=1.5"), sym(&g, "a-japanese:m=0"));
    let u = random_band_limited(&g, 3.0, 5, 0);
    let r: Vec<f64> = (0..3)
        .map(|n| composition_residual_apply(&a, &b, n, &u).unwrap().l2_norm())
        .collect();
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
}

#[test]
fn expansion_limits() {
    let g = grid(1, 64);
    let (a, b) = (sym(&g, "japanese"), sym(&g, "dn"));
    assert!(matches!(sharp_n(a.clone(), b.clone(), MAX_EXPANSION + 1), Err(Error::Capability(_))));
    // split components carry no analytic jet
    let c = four_way_split(b, 4).unwrap().component(Component::I);
    assert!(matches!(
        poisson_n_with(a.clone(), c.clone(), 1, DerivMethod::Analytic),
        Err(Error::Capability(_))
    ));
    assert!(sharp_n_with(a.clone(), c, 1, DerivMethod::FiniteDifference).is_ok());
    let other = sym(&grid(1, 32), "japanese");
    assert!(sharp_n(a, other, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sharp_is_bilinear_under_dyadic_scaling(e1 in -6i32..6, e2 in -6i32..6, x in -20.0f64..20.0) {
        let g = grid(1, 64);
        let (a, b) = (sym(&g, "a-japanese"), sym(&g, "v-japanese"));
        let (c1, c2) = (2f64.powi(e1), 2f64.powi(e2));
        let sa: SharedSymbol = Arc::new(LinearCombination::new(vec![(C64::new(c1, 0.0), a.clone())]).unwrap());
        let sb: SharedSymbol = Arc::new(LinearCombination::new(vec![(C64::new(c2, 0.0), b.clone())]).unwrap());
        let base = sharp_n(a, b, 2).unwrap().column(&[x, 0.0]);
        let scaled = sharp_n(sa, sb, 2).unwrap().column(&[x, 0.0]);
        for (u, v) in base.iter().zip(&scaled) {
            prop_assert!((v - u * (c1 * c2)).norm() <= 1e-13 * (c1 * c2) * (1.0 + u.norm()));
        }
    }

    #[test]
    fn sharp_is_additive(x in -20.0f64..20.0) {
        let g = grid(1, 64);
        let (a, b, c) = (sym(&g, "a-japanese"), sym(&g, "japanese:m=0.5"), sym(&g, "func:a"));
        let one = C64::new(1.0, 0.0);
        let ab: SharedSymbol = Arc::new(LinearCombination::new(vec![(one, a.clone()), (one, b.clone())]).unwrap());
        let xi = [x, 0.0];
        let lhs = sharp_n(ab, c.clone(), 2).unwrap().column(&xi);
        let r1 = sharp_n(a, c.clone(), 2).unwrap().column(&xi);
        let r2 = sharp_n(b, c, 2).unwrap().column(&xi);
        for j in 0..lhs.len() {
            let rhs = r1[j] + r2[j];
            prop_assert!((lhs[j] - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }
}
