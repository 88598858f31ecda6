use std::f64::consts::{LN_2, PI};

use num_complex::Complex;
use num_traits::Signed;
use orthorec::mellin::{evaluate_batch, sample_points, MellinFunction, DEFAULT_POLE_RADIUS};
use orthorec::{Error, Evaluator64, EvaluatorMp};
use proptest::prelude::*;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Direct alternating sum with the last two partial sums averaged.
fn d_brute(z: Complex<f64>, terms: usize) -> Complex<f64> {
    let mut s = Complex::new(0.0, 0.0);
    let mut prev = s;
    for j in 0..terms {
        prev = s;
        let t = 1.0 / (z - j as f64);
        s += if j % 2 == 0 { t } else { -t };
    }
    (s + prev) * 0.5
}

#[test]
fn closed_forms() {
    let ev = Evaluator64::f64();
    let g = ev.g_star(&Complex::new(0.5, 0.0)).unwrap();
    assert!((g.re - (2.0 + PI / 2.0)).abs() < 1e-13 && g.im.abs() < 1e-15);
    // g*(-3) = 6 ln 2 - 3
    let g = ev.g_star(&Complex::new(-3.0, 0.0)).unwrap();
    assert!((g.re - (6.0 * LN_2 - 3.0)).abs() < 1e-13);
    let p = ev.digamma(&Complex::new(1.0, 0.0)).unwrap();
    assert!((p.re + EULER_GAMMA).abs() < 1e-14);
    let p = ev.digamma(&Complex::new(0.5, 0.0)).unwrap();
    assert!((p.re + EULER_GAMMA + 2.0 * LN_2).abs() < 1e-14);
    assert_eq!(ev.g_star(&Complex::new(0.0, 0.0)).unwrap(), Complex::new(2.0, 0.0));
}

#[test]
fn high_precision_closed_form() {
    let ev = EvaluatorMp::with_bits(256);
    let g = ev.g_star(&ev.point(Complex::new(0.5, 0.0))).unwrap();
    let pi = orthorec::MpFloat::pi(256);
    let two = orthorec::MpFloat::from_i64(2, 256);
    let want = two.clone() + pi / two;
    let diff = (g.re - want).abs().to_f64();
    assert!(diff < 1e-70, "{diff:e}");
}

#[test]
fn series_matches_brute_force() {
    let ev = Evaluator64::f64();
    for z in sample_points(7, 40, 0.05) {
        let d = ev.d_infty_series(&z).unwrap();
        let b = d_brute(z, 200_000);
        assert!((d - b).norm() < 1e-8 * (1.0 + b.norm()), "{z}: {d} vs {b}");
        let d2 = ev.d_infty(&z).unwrap();
        assert!((d - d2).norm() < 1e-11 * (1.0 + d.norm()), "{z}");
    }
}

#[test]
fn derivative_matches_difference_quotient() {
    let ev = Evaluator64::f64();
    for z in [Complex::new(1.3, 1.0), Complex::new(-2.5, 7.0), Complex::new(2.7, -20.0)] {
        let h = 1e-5;
        let fd = (ev.d_infty(&(z + h)).unwrap() - ev.d_infty(&(z - h)).unwrap()) / (2.0 * h);
        let d = ev.d_infty_prime(&z).unwrap();
        assert!((fd - d).norm() < 1e-7 * (1.0 + d.norm()), "{z}");
    }
}

#[test]
fn poles_are_errors() {
    let ev = Evaluator64::f64();
    assert!(matches!(ev.d_infty(&Complex::new(3.0, 0.0)), Err(Error::Pole { .. })));
    assert!(matches!(ev.g_star(&Complex::new(1.0, 0.0)), Err(Error::Pole { .. })));
    assert!(matches!(ev.d_infty_series(&Complex::new(2.0, 1e-5)), Err(Error::PoleProximity { .. })));
}

#[test]
fn batch_is_deterministic() {
    let ev = Evaluator64::f64();
    let pts = sample_points(3, 25, DEFAULT_POLE_RADIUS);
    let a = evaluate_batch(&ev, MellinFunction::GStar, &pts).unwrap();
    let b = evaluate_batch(&ev, MellinFunction::GStar, &sample_points(3, 25, DEFAULT_POLE_RADIUS)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.est_error < 1e-10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_symmetry(x in -3.0f64..3.0, y in 0.1f64..50.0) {
        let ev = Evaluator64::f64();
        let a = ev.g_star(&Complex::new(x, y)).unwrap();
        let b = ev.g_star(&Complex::new(x, -y)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn shift_relation(x in -3.0f64..3.0, y in 0.5f64..30.0) {
        // D(z) + D(z-1) = 1/z
        let ev = Evaluator64::f64();
        let z = Complex::new(x, y);
        let lhs = ev.d_infty(&z).unwrap() + ev.d_infty(&(z - 1.0)).unwrap();
        prop_assert!((lhs - 1.0 / z).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn precisions_agree(x in -3.0f64..3.0, y in 0.5f64..40.0) {
        let z = Complex::new(x, y);
        let a = Evaluator64::f64().g_star(&z).unwrap();
        let ev = EvaluatorMp::with_bits(128);
        let b = ev.g_star(&ev.point(z)).unwrap();
        let b = Complex::new(b.re.to_f64(), b.im.to_f64());
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}
