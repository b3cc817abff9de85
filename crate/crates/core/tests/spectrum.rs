use num_complex::Complex64;
use proptest::prelude::*;
use wentzell::disc::{assemble, hautus_probe, pencil_residual, resolvent_norm};
use wentzell::roots::{char_fn, count_roots, newton_root, root_table, CERT_HALF_WIDTH, CERT_IM};
use wentzell::special::BesselEvaluator;
use wentzell::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn certified_roots_have_isolating_boxes() {
    let ev = BesselEvaluator::default();
    for n in [0u32, 2, 5] {
        let t = root_table(&ev, n, 20, 1e-12).unwrap();
        assert_eq!(t.len(), 20);
        for r in &t {
            assert!(r.certified, "n = {n}, k = {}", r.k);
            let lo = c(r.lambda.re - CERT_HALF_WIDTH, CERT_IM.0);
            let hi = c(r.lambda.re + CERT_HALF_WIDTH, CERT_IM.1);
            let b = count_roots(&ev, n, lo, hi).unwrap();
            assert_eq!(b.winding, 1);
            assert!(r.residual <= 1e-12 * (1.0 + r.lambda.norm_sqr()));
            assert!(char_fn(&ev, n, r.lambda).unwrap().norm() <= 1e-12 * (1.0 + r.lambda.norm_sqr()));
        }
        for w in t.windows(2) {
            assert!(w[1].lambda.re > w[0].lambda.re);
        }
    }
}

#[test]
fn box_count_matches_table() {
    let ev = BesselEvaluator::default();
    let t = root_table(&ev, 0, 15, 1e-12).unwrap();
    let lo = c(0.5 * (t[2].lambda.re + t[3].lambda.re), -0.25);
    let hi = c(0.5 * (t[11].lambda.re + t[12].lambda.re), 0.25);
    let b = count_roots(&ev, 0, lo, hi).unwrap();
    assert_eq!(b.winding, 9);
}

#[test]
fn newton_rejects_spurious_seed() {
    let ev = BesselEvaluator::default();
    assert!(matches!(newton_root(&ev, 0, c(0.1, 0.0), 1e-12), Err(Error::InvalidArgument(_))));
}

#[test]
fn discrete_residual_decreases_with_refinement() {
    let ev = BesselEvaluator::default();
    let r = root_table(&ev, 1, 4, 1e-12).unwrap()[3];
    let res: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&n| {
            let p = assemble(1, n).unwrap();
            let v = p.grid.sample(|x| ev.j(1, r.lambda * x).unwrap());
            pencil_residual(&p, r.z, &v).unwrap()
        })
        .collect();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    assert!(res[2] < 1e-4);
}

#[test]
fn resolvent_is_finite_off_spectrum() {
    for lambda in [3.3, 17.0, 41.5, 120.25] {
        let s = resolvent_norm(3, lambda, 1000).unwrap();
        assert!(!s.singular);
        assert!(s.norm.is_finite() && s.norm > 0.0, "{lambda}: {}", s.norm);
        assert!(s.argmax_n <= 3);
    }
}

#[test]
fn resolvent_peaks_near_omega() {
    let ev = BesselEvaluator::default();
    let r = root_table(&ev, 0, 12, 1e-12).unwrap()[11];
    let at = resolvent_norm(0, r.omega(), 2000).unwrap().norm;
    let off = resolvent_norm(0, r.omega() + 1.5, 2000).unwrap().norm;
    assert!(at > 10.0 * off, "{at} vs {off}");
    // peak height is about 1 / (2 omega |sigma|)
    let predicted = 1.0 / (2.0 * r.omega() * r.sigma().abs());
    assert!((at / predicted - 1.0).abs() < 0.1, "{at} vs {predicted}");
}

#[test]
fn hautus_probe_is_reproducible_and_bounded() {
    let lambdas = [5.0, 20.0, 80.0];
    let a = hautus_probe(&lambdas, 1000, 20, 3).unwrap();
    let b = hautus_probe(&lambdas, 1000, 20, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.bounded());
    assert!(a.rows.iter().all(|r| r.max_ratio > 0.0 && r.samples == 20));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn reflection_symmetry(re in 0.6f64..80.0, im in -2.0f64..2.0, n in 0u32..=10) {
        let ev = BesselEvaluator::default();
        let l = c(re, im);
        let a = char_fn(&ev, n, -l.conj()).unwrap();
        let b = char_fn(&ev, n, l).unwrap().conj() * if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
    }
}
