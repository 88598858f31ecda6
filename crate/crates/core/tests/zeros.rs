use num_complex::Complex;
use orthorec::zeros::{locate_rho1, newton_refine, scan_strip, wall_inequality_check, winding_number, Rectangle, Wall, WindingConfig};
use orthorec::{Evaluator64, EvaluatorMp};
use proptest::prelude::*;

#[test]
fn rho1_agrees_across_precisions() {
    let a = locate_rho1(&Evaluator64::f64(), &WindingConfig::default()).unwrap();
    let b = newton_refine(&EvaluatorMp::with_bits(128), a.location(), 50).unwrap();
    assert!(b.converged);
    assert!((a.location() - b.location()).norm() < 1e-12);
    assert!(b.re_decimal.starts_with("1.3465164914758"), "{}", b.re_decimal);
}

#[test]
fn conjugate_zero_and_lower_box() {
    let ev = Evaluator64::f64();
    let rect = Rectangle::new(1.01, 1.49, 0.01, 100.0).unwrap();
    let up = winding_number(&ev, &rect, &WindingConfig::default()).unwrap();
    let down = winding_number(&ev, &rect.conj(), &WindingConfig::default()).unwrap();
    assert_eq!((up.winding, down.winding), (1, 1));
    assert!(up.min_boundary_modulus > 0.0);
}

#[test]
fn walls_hold_on_a_grid() {
    let ev = Evaluator64::f64();
    let ys: Vec<f64> = (1..=400).map(|k| k as f64 * 0.25).collect();
    for w in [Wall::Left, Wall::Right, Wall::ThreeHalves] {
        let r = wall_inequality_check(&ev, w, &ys).unwrap();
        assert_eq!(r.violations, 0, "{w:?}");
    }
}

#[test]
fn strip_scan_is_reproducible() {
    let ev = Evaluator64::f64();
    let a = scan_strip(&ev, 1.5, 3.5, 60.0, &WindingConfig::default()).unwrap();
    let b = scan_strip(&ev, 1.5, 3.5, 60.0, &WindingConfig::default()).unwrap();
    assert_eq!(a, b);
    let counted: i64 = a.tiles.iter().map(|t| t.winding).sum();
    assert_eq!(counted, a.zeros.len() as i64);
    for z in &a.zeros {
        assert!(z.converged && z.re > 2.3465 && z.residual_modulus <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn winding_is_additive(cut in 0.3f64..0.7, t in 2.0f64..30.0) {
        let ev = Evaluator64::f64();
        let cfg = WindingConfig::default();
        let full = Rectangle::new(1.01, 1.49, 0.5, t + 1.0).unwrap();
        let y = 0.5 + cut * t;
        let lo = Rectangle::new(1.01, 1.49, 0.5, y).unwrap();
        let hi = Rectangle::new(1.01, 1.49, y, t + 1.0).unwrap();
        let w = |r: &Rectangle| winding_number(&ev, r, &cfg).unwrap().winding;
        prop_assert_eq!(w(&full), w(&lo) + w(&hi));
    }

    #[test]
    fn newton_converges_from_nearby(dx in -0.05f64..0.05, dy in -0.05f64..0.05) {
        let ev = Evaluator64::f64();
        let z = newton_refine(&ev, Complex::new(1.3465 + dx, 1.0552 + dy), 100).unwrap();
        prop_assert!((z.location() - Complex::new(1.346516491475860, 1.055160064278170)).norm() < 1e-12);
    }
}
