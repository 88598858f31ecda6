use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use orthorec::transforms::{apply_transfer, bootstrap_check, transfer_mode_check, verify_ag_identity, verify_discrete_volterra, ShiftedSequence};
use orthorec::volterra::{solve_resolvent, LogGrid};
use orthorec::{compute_exact, compute_float, Error, PrecisionConfig};
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// A_g(x) = sum_{n <= x} a_n 2x/(x+n), summed naively.
fn ag_naive(c: &[BigRational], x: &BigRational) -> BigRational {
    let mut s = BigRational::zero();
    let mut n = 1i64;
    while q(n, 1) <= *x {
        s += &c[(n - 1) as usize] * (x * q(2, 1)) / (x + q(n, 1));
        n += 1;
    }
    s
}

#[test]
fn ag_at_rationals_matches_definition() {
    let t = compute_exact(60).unwrap();
    let seq = ShiftedSequence::from_table(&t);
    for (p, d) in [(1i64, 1u64), (7, 2), (40, 3), (55, 1), (121, 4)] {
        let got = seq.eval_ag_ratio(p, d).unwrap();
        assert_eq!(got, ag_naive(t.values(), &q(p, d as i64)), "x = {p}/{d}");
    }
    assert_eq!(seq.eval_ag_int(1).unwrap(), q(1, 1));
    assert!(matches!(seq.eval_ag_ratio(1, 2), Err(Error::Domain(_))));
    assert!(matches!(seq.eval_ag_ratio(200, 1), Err(Error::Coverage(_))));
}

#[test]
fn step_function_shape() {
    let t = compute_exact(10).unwrap();
    let seq = ShiftedSequence::from_table(&t);
    assert!(seq.eval_a(0.5).unwrap().is_zero());
    assert_eq!(seq.eval_a(1.0).unwrap(), q(1, 1));
    assert_eq!(seq.eval_a(3.999).unwrap(), *t.partial_sum(2));
    assert_eq!(seq.eval_a(4.0).unwrap(), *t.partial_sum(3));
}

#[test]
fn transfer_converges_under_refinement() {
    let t = compute_float(600, PrecisionConfig::default()).unwrap();
    let seq = ShiftedSequence::from_table(&t);
    let xs = [1.0, 50.0, 100.0, 500.0];
    let coarse = apply_transfer(&seq, &solve_resolvent::<f64>(&LogGrid::new(8.0, 1.0 / 512.0).unwrap(), 1e-10).unwrap(), &xs).unwrap();
    let fine = apply_transfer(&seq, &solve_resolvent::<f64>(&LogGrid::new(8.0, 1.0 / 2048.0).unwrap(), 1e-10).unwrap(), &xs).unwrap();
    assert_eq!(fine[0].recovered, 1.0);
    for (c, f) in coarse.iter().zip(&fine).skip(1) {
        assert!(f.relative_error < c.relative_error, "x = {}", f.x);
        assert!(f.relative_error < 1e-4);
        assert!((c.recovered - f.recovered).abs() <= c.error_estimate + 1e-12, "x = {}", f.x);
    }
}

#[test]
fn mode_check_approaches_target() {
    let rg = solve_resolvent::<f64>(&LogGrid::new(10.0, 1.0 / 512.0).unwrap(), 1e-10).unwrap();
    let near = transfer_mode_check(0.5, &rg, 1e2).unwrap();
    let far = transfer_mode_check(0.5, &rg, 1e4).unwrap();
    assert!(far.relative_error < near.relative_error);
    assert!(far.forward_relative_error < near.forward_relative_error);
    assert!((far.target - (2.0 + std::f64::consts::FRAC_PI_2)).abs() < 1e-12);
    assert!(matches!(transfer_mode_check(1.5, &rg, 1e4), Err(Error::Domain(_))));
    assert!(matches!(transfer_mode_check(0.5, &rg, 1e6), Err(Error::Coverage(_))));
}

#[test]
fn float_identities_hold_to_precision() {
    let t = compute_float(201, PrecisionConfig::new(192, orthorec::SummationMode::Compensated).unwrap()).unwrap();
    let seq = ShiftedSequence::from_table(&t);
    for n in [2usize, 17, 100, 200] {
        for r in [verify_discrete_volterra(n, &seq).unwrap(), verify_ag_identity(n, &seq).unwrap(), bootstrap_check(n, &seq).unwrap()] {
            assert!(r.relative_defect < 1e-40, "{} at {n}: {}", r.identity, r.relative_defect);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn perturbing_one_coefficient_breaks_ag_identity(k in 3usize..60) {
        let t = compute_exact(80).unwrap();
        let mut v = t.values().to_vec();
        v[k] += q(1, 1_000_000);
        let bad = orthorec::CoefficientTable::from_values(v, None);
        let seq = ShiftedSequence::from_table(&bad);
        // a_{k+1} is perturbed, which the identity at N = k sees
        let r = verify_ag_identity(k, &seq).unwrap();
        prop_assert!(!r.exact_zero);
    }
}
