use std::sync::Arc;

use paracalc::decompose::elementary::{lambda, lambda_leakage, MAX_TRUNCATION};
use paracalc::decompose::{
    bernstein_check, elementary_decompose, four_way_split, lambda_k, lambda_kernel_l1,
    reconstruct_from_elementary, reconstruction_error, spectral_support_check, Component,
    ElementarySymbols,
};
use paracalc::symbols::build_symbol;
use paracalc::{Error, Grid, GridSpec, Symbol, C64};

fn grid(dim: usize, n: usize) -> Arc<Grid> {
    Grid::new(GridSpec::with_default_period(dim, n)).unwrap()
}

#[test]
fn split_pieces_sum_to_symbol() {
    for (d, n, id) in [(1, 256, "a-japanese"), (1, 256, "dn"), (2, 32, "a-japanese:m=0.5"), (2, 32, "dn")] {
        let g = grid(d, n);
        let s = build_symbol(&g, id).unwrap();
        let split = four_way_split(s, 4).unwrap();
        let e = split.reconstruction_error();
        assert!(e <= 1e-12, "{id} d={d}: {e}");
    }
}

#[test]
fn split_rejects_bad_cutoff() {
    let g = grid(1, 64);
    let s = build_symbol(&g, "japanese").unwrap();
    assert!(matches!(four_way_split(s.clone(), 3), Err(Error::Config(_))));
    // 64 points resolve N <= 5
    assert!(four_way_split(s.clone(), 5).is_ok());
    assert!(matches!(four_way_split(s, 6), Err(Error::Config(_))));
}

#[test]
fn component_parsing() {
    assert_eq!("ii".parse::<Component>().unwrap(), Component::II);
    assert_eq!("lf".parse::<Component>().unwrap(), Component::Lf);
    assert!("III".parse::<Component>().is_err());
}

#[test]
fn remainder_is_sum_of_its_parts() {
    let g = grid(1, 128);
    let split = four_way_split(build_symbol(&g, "a-japanese").unwrap(), 4).unwrap();
    for xi in [[0.25, 0.0], [3.0, 0.0], [-17.5, 0.0]] {
        let p = split.pieces(&xi);
        for ((r, a), b) in p.r().iter().zip(&p.r1).zip(&p.r2) {
            assert_eq!(*r, a + b);
        }
    }
}

#[test]
fn multiplier_has_only_paraproduct_and_low_part() {
    // σ independent of x: σ_II and σ_R vanish
    let g = grid(1, 128);
    let split = four_way_split(build_symbol(&g, "japanese:m=2").unwrap(), 4).unwrap();
    for xi in g.freqs().iter().step_by(7) {
        let p = split.pieces(xi);
        let tail: f64 = p.ii.iter().chain(&p.r1).chain(&p.r2).map(|v| v.norm()).fold(0.0, f64::max);
        assert!(tail < 1e-12 * paracalc::spectral::japanese(xi).powi(2));
    }
}

#[test]
fn paraproduct_spectral_support() {
    for (d, n) in [(1, 256), (2, 32)] {
        let g = grid(d, n);
        let split = four_way_split(build_symbol(&g, "a-japanese").unwrap(), 4).unwrap();
        let rep = spectral_support_check(&split);
        assert!(rep.pass, "d={d}: {}", rep.max_outside_fraction);
        assert!(rep.checked > 0);
    }
}

#[test]
fn bernstein_ratios_stay_bounded() {
    let g = grid(1, 256);
    let split = four_way_split(build_symbol(&g, "a-japanese").unwrap(), 4).unwrap();
    let rep = bernstein_check(&split, 2).unwrap();
    assert_eq!(rep.rows.len(), 9);
    for row in &rep.rows {
        assert!(row.bounded, "α={:?} β={:?}: {:?}", row.alpha, row.beta, row.shells);
    }
}

#[test]
fn lambda_is_supported_in_annulus() {
    for d in [1, 2] {
        for k in [[0, 0], [3, 0], [-2, 5]] {
            let k = if d == 1 { [k[0], 0] } else { k };
            assert_eq!(lambda_leakage(d, k), 0.0);
        }
    }
    assert_eq!(lambda(&[0.0, 0.0]), 0.0);
    assert!(lambda(&[1.0, 0.0]) > 0.0);
    // |λ_k| = |λ(·/2)|
    let xi = [1.3, -0.4];
    assert!((lambda_k([4, -1], &xi).norm() - lambda(&[0.65, -0.2])).abs() < 1e-15);
}

#[test]
fn lambda_kernel_norm_is_translation_invariant() {
    for d in [1, 2] {
        let base = lambda_kernel_l1(d, [0, 0]).unwrap();
        assert!(base.is_finite() && base > 0.0);
        for k in [[1, 0], [5, 0], [0, 3], [-7, 2]] {
            let k = if d == 1 { [k[0], 0] } else { k };
            let v = lambda_kernel_l1(d, k).unwrap();
            assert!((v - base).abs() <= 0.05 * base, "d={d} k={k:?}: {v} vs {base}");
        }
    }
}

#[test]
fn truncation_radius_limits() {
    let g = grid(1, 64);
    let s = build_symbol(&g, "japanese").unwrap();
    assert!(matches!(elementary_decompose(s.as_ref(), 0), Err(Error::Config(_))));
    assert!(matches!(
        elementary_decompose(s.as_ref(), MAX_TRUNCATION + 1),
        Err(Error::Config(_))
    ));
}

#[test]
fn zero_symbol_expands_to_zero() {
    let g = grid(1, 64);
    let s = build_symbol(&g, "zero").unwrap();
    let es = elementary_decompose(s.as_ref(), 2).unwrap();
    let rec = reconstruct_from_elementary(Arc::new(es));
    for xi in g.freqs() {
        assert!(rec.column(xi).iter().all(|v| *v == C64::new(0.0, 0.0)));
    }
}

#[test]
fn error_decreases_with_truncation() {
    let g = grid(1, 128);
    let s = build_symbol(&g, "a-japanese").unwrap();
    let errs: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&k| reconstruction_error(&elementary_decompose(s.as_ref(), k).unwrap(), s.as_ref()))
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
}

#[test]
fn archive_round_trip() {
    let g = grid(2, 16);
    let s = build_symbol(&g, "a-japanese").unwrap();
    let es = elementary_decompose(s.as_ref(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("es.bin");
    es.save(&path).unwrap();
    let back = ElementarySymbols::read_archive(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.header(), es.header());
    assert_eq!(back.ks(), es.ks());
    for q in -1..(es.blocks() as i32 - 1) {
        for k in 0..es.ks().len() {
            assert_eq!(back.coefficient(q, k), es.coefficient(q, k));
        }
    }
    let xi = [3.0, -1.25];
    assert_eq!(back.column(&xi), es.column(&xi));
}

#[test]
fn archive_rejects_garbage() {
    assert!(ElementarySymbols::read_archive(&b"NOPE\0\0\0\0"[..]).is_err());
    let g = grid(1, 64);
    let es = elementary_decompose(build_symbol(&g, "japanese").unwrap().as_ref(), 1).unwrap();
    let mut buf = Vec::new();
    es.write_archive(&mut buf).unwrap();
    buf.truncate(buf.len() / 2);
    assert!(ElementarySymbols::read_archive(&buf[..]).is_err());
}
