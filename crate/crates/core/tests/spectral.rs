use std::f64::consts::PI;
use std::sync::Arc;

use paracalc::spectral::{
    apply_multiplier, dyadic_sobolev_sum, japanese, linf_norm, lp_block, phi_p, psi, sobolev_norm,
    w_inf_norm, zygmund_norm, CutoffChi, FilterBank,
};
use paracalc::{Error, Field, Grid, GridSpec, C64};
use proptest::prelude::*;

fn grid(dim: usize, n: usize) -> Arc<Grid> {
    Grid::new(GridSpec::with_default_period(dim, n)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn grid_spec_parsing() {
    let g = GridSpec::parse("d=1,n=1024,L=32pi").unwrap();
    assert_eq!(g, GridSpec::new(1, 1024, 32.0 * PI));
    let g = GridSpec::parse("d=2, n=64").unwrap();
    assert_eq!(g.dim, 2);
    assert!(close(g.period, 8.0 * PI, 1e-15));
    for bad in ["d=1,n=1000", "d=3,n=64", "d=1,n=64,L=-1", "d=1,n=2", "n=64,bogus=1", "d1"] {
        let e = GridSpec::parse(bad).and_then(|s| s.validate().map(|_| s));
        assert!(matches!(e, Err(Error::Config(_))), "{bad} accepted");
    }
}

#[test]
fn lattice_geometry() {
    let g = grid(1, 1024);
    assert_eq!(g.len(), 1024);
    assert!(close(g.dxi(), 2.0 * PI / g.period(), 1e-15));
    assert!(close(g.xi_max(), 512.0 * g.dxi(), 1e-15));
    assert!(close(g.xi_guard(), 7.0 / 8.0 * g.xi_max(), 1e-15));
    let g2 = grid(2, 16);
    assert_eq!(g2.len(), 256);
    assert_eq!(g2.points().len(), 256);
}

#[test]
fn spectrum_normalization_of_a_mode() {
    // u = e^{i x ξ₀}: û(ξ₀) = (L/n)·n = L, zero elsewhere
    let g = grid(1, 256);
    let k = 5usize;
    let xi0 = g.freqs()[k][0];
    let u = Field::from_fn(g.clone(), |x| C64::from_polar(1.0, x[0] * xi0));
    let s = u.spectrum();
    assert!((s[k] - C64::new(g.period(), 0.0)).norm() < 1e-10);
    let rest: f64 = s.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| v.norm()).sum();
    assert!(rest < 1e-9);
    // |u|_{H^s}² = L^{-1}⟨ξ₀⟩^{2s} L² = L⟨ξ₀⟩^{2s}
    let s1 = sobolev_norm(&u, 1.5);
    assert!(close(s1, (g.period() * japanese(&[xi0, 0.0]).powf(3.0)).sqrt(), 1e-12));
}

#[test]
fn plancherel() {
    for (d, n) in [(1, 512), (2, 32)] {
        let g = grid(d, n);
        let u = Field::from_real_fn(g.clone(), |x| (x[0]).sin() + 0.3 * (2.0 * x[1]).cos() + 0.1);
        assert!(close(u.l2_norm(), u.spectral_l2_norm(), 1e-12));
        assert!(close(sobolev_norm(&u, 0.0), u.l2_norm(), 1e-12));
    }
}

#[test]
fn spectral_round_trip() {
    let g = grid(2, 32);
    let u = Field::from_real_fn(g.clone(), |x| (x[0] - x[1]).cos() * 0.5 + x[1].sin());
    let v = Field::from_spectrum(g.clone(), u.spectrum().to_vec()).unwrap();
    assert!(v.sub(&u).unwrap().max_abs() < 1e-13);
}

#[test]
fn derivative_of_trig_polynomial() {
    let g = grid(2, 32);
    let u = Field::from_real_fn(g.clone(), |x| (x[0]).sin() * (2.0 * x[1]).cos());
    let du = u.partial([1, 1]);
    let exact = Field::from_real_fn(g.clone(), |x| -2.0 * (x[0]).cos() * (2.0 * x[1]).sin());
    assert!(du.sub(&exact).unwrap().max_abs() < 1e-12);
}

#[test]
fn non_finite_samples_rejected() {
    let g = grid(1, 16);
    let mut s = vec![C64::new(0.0, 0.0); 16];
    s[2] = C64::new(f64::INFINITY, 0.0);
    assert!(matches!(Field::new(g.clone(), s), Err(Error::Input(_))));
    assert!(Field::new(g, vec![C64::new(0.0, 0.0); 3]).is_err());
}

#[test]
fn mismatched_grids_rejected() {
    let a = Field::zeros(grid(1, 16));
    let b = Field::zeros(grid(1, 32));
    assert!(a.add(&b).is_err());
}

#[test]
fn partition_of_unity() {
    for (d, n) in [(1, 1024), (1, 64), (2, 64)] {
        let bank = FilterBank::new(grid(d, n)).unwrap();
        assert!(bank.partition_deviation() <= 1e-12);
    }
    // pointwise, off the lattice too
    for i in 0..2000 {
        let r = i as f64 * 0.037;
        let total: f64 = psi(&[r, 0.0]) + (0..20).map(|p| phi_p(p, &[r, 0.0])).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14, "r={r}");
    }
}

#[test]
fn filter_supports() {
    assert_eq!(psi(&[0.5, 0.0]), 1.0);
    assert_eq!(psi(&[1.0, 0.0]), 0.0);
    assert_eq!(phi_p(3, &[3.9, 0.0]), 0.0);
    assert_eq!(phi_p(3, &[16.0, 0.0]), 0.0);
    assert!(phi_p(3, &[8.0, 0.0]) > 0.0);
    assert_eq!(phi_p(-2, &[0.0, 0.0]), 0.0);
}

#[test]
fn blocks_sum_to_field() {
    let g = grid(1, 512);
    let bank = FilterBank::new(g.clone()).unwrap();
    let u = Field::from_real_fn(g.clone(), |x| (x[0] * 0.25).sin() + (x[0] * 3.0).cos() + 1.0);
    let mut sum = Field::zeros(g.clone());
    for p in -1..=bank.p_max() {
        sum = sum.add(&lp_block(&bank, &u, p).unwrap()).unwrap();
    }
    assert!(sum.sub(&u).unwrap().max_abs() < 1e-12);
}

#[test]
fn dyadic_sum_is_equivalent_to_sobolev_norm() {
    let g = grid(1, 1024);
    let bank = FilterBank::new(g.clone()).unwrap();
    let u = Field::from_real_fn(g.clone(), |x| (-(x[0] - 50.0).powi(2) / 4.0).exp());
    for s in [0.0, 1.0, 2.5] {
        let a = sobolev_norm(&u, s);
        let b = dyadic_sobolev_sum(&bank, &u, s);
        let r = a / b;
        assert!((0.2..5.0).contains(&r), "s={s}: {a} vs {b}");
    }
}

#[test]
fn sup_and_lipschitz_norms() {
    let g = grid(1, 256);
    let u = Field::from_real_fn(g.clone(), |x| 2.0 * x[0].sin());
    assert!(close(linf_norm(&u), 2.0, 1e-3));
    assert!(close(w_inf_norm(&u, 1), 2.0, 1e-3));
    let bank = FilterBank::new(g).unwrap();
    assert!(zygmund_norm(&bank, &u, 0.5) > 0.0);
}

#[test]
fn cutoff_parameter_validation() {
    assert!(CutoffChi::new(1).is_err());
    let chi = CutoffChi::new(4).unwrap();
    assert!(chi.delta1() < chi.delta2());
    // χ vanishes outside the cone |η| <= δ₂|ξ|
    let xi = [10.0, 0.0];
    assert_eq!(chi.eval(&[chi.delta2() * 10.0 + 1e-9, 0.0], &xi), 0.0);
    assert_eq!(chi.eval(&[0.0, 0.0], &xi), 1.0);
}

#[test]
fn multiplier_application_matches_mode_scaling() {
    let g = grid(1, 128);
    let u = Field::mode(g.clone(), 7);
    let xi = g.freqs()[7];
    let v = apply_multiplier(&u, |x: &[f64; 2]| japanese(x).powi(2)).unwrap();
    let expected = u.scale(C64::new(japanese(&xi).powi(2), 0.0));
    assert!(v.sub(&expected).unwrap().max_abs() < 1e-12);
}

fn arb_field() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sobolev_norm_is_homogeneous(samples in arb_field(), e in -6i32..6, s in -1.0f64..3.0) {
        let g = grid(1, 64);
        let u = Field::new(g, samples.iter().map(|v| C64::new(*v, 0.0)).collect()).unwrap();
        let c = 2f64.powi(e);
        let scaled = sobolev_norm(&u.scale(C64::new(c, 0.0)), s);
        prop_assert_eq!(scaled, c * sobolev_norm(&u, s));
    }

    #[test]
    fn sobolev_norm_increases_with_index(samples in arb_field(), s in -1.0f64..2.0, ds in 0.0f64..2.0) {
        let g = grid(1, 64);
        let u = Field::new(g, samples.iter().map(|v| C64::new(*v, 0.0)).collect()).unwrap();
        prop_assert!(sobolev_norm(&u, s) <= sobolev_norm(&u, s + ds) * (1.0 + 1e-12));
    }

    #[test]
    fn triangle_inequality(a in arb_field(), b in arb_field(), s in 0.0f64..2.0) {
        let g = grid(1, 64);
        let u = Field::new(g.clone(), a.iter().map(|v| C64::new(*v, 0.0)).collect()).unwrap();
        let v = Field::new(g, b.iter().map(|v| C64::new(*v, 0.0)).collect()).unwrap();
        let lhs = sobolev_norm(&u.add(&v).unwrap(), s);
        prop_assert!(lhs <= (sobolev_norm(&u, s) + sobolev_norm(&v, s)) * (1.0 + 1e-12));
    }

    #[test]
    fn partition_holds_pointwise(x in -1000.0f64..1000.0, y in -1000.0f64..1000.0) {
        let xi = [x, y];
        let total = psi(&xi) + (0..16).map(|p| phi_p(p, &xi)).sum::<f64>();
        prop_assert!((total - 1.0).abs() < 1e-14);
    }
}
