//! Alternating tails `sum_{m>=0} (-1)^m / (m + a)^p` for `p = 1, 2`.
//!
//! The primary method is the Cohen-Villegas-Zagier transform: for moment
//! sequences `f(m) = int_0^1 x^m dmu(x)` it has error at most
//! `2 |mu| / (3 + sqrt 8)^n` after `n` terms. Here `|mu| = 1 / (Re a)^p`.
//! The fallback pairs consecutive terms and closes the paired sum with
//! Euler-Maclaurin.

use std::ops::{Add, Div, Mul};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::{c_inv, c_ln};
use crate::error::{Error, Result};
use crate::mellin::digamma::bernoulli_numbers;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesMethod {
    #[default]
    Cvz,
    EulerMaclaurin,
}

const CVZ_RATE: f64 = 5.828427124746190; // 3 + sqrt 8

/// Terms needed for `2 * mass * rate^-n <= tol`.
pub fn cvz_terms(mass: f64, tol: f64) -> usize {
    let n = ((2.0 * mass / tol).ln() / CVZ_RATE.ln()).ceil();
    n.max(1.0) as usize
}

/// `sum_{k>=0} (-1)^k a_k` from the first `n` terms.
pub fn cvz_sum<T, V, F>(n: usize, prec: T::Precision, mut term: F) -> V
where
    T: Real,
    V: Clone + Add<Output = V> + Mul<T, Output = V> + Div<T, Output = V>,
    F: FnMut(usize) -> V,
{
    let one = T::from_i64_in(1, prec);
    let mut d = T::from_i64_in(3, prec) + T::from_i64_in(8, prec).sqrt();
    let base = d.clone();
    for _ in 1..n {
        d = d * &base;
    }
    d = (d.clone() + one.clone() / d) / T::from_i64_in(2, prec);
    let mut b = -one;
    let mut c = -d.clone();
    let mut s: Option<V> = None;
    let nn = n as i64;
    for k in 0..n {
        c = b.clone() - c;
        let t = term(k) * c.clone();
        s = Some(match s {
            Some(acc) => acc + t,
            None => t,
        });
        let k = k as i64;
        // b <- b (k+n)(k-n) / ((k+1/2)(k+1))
        b = b * T::from_i64_in(2 * (k + nn) * (k - nn), prec) / T::from_i64_in((2 * k + 1) * (k + 1), prec);
    }
    s.expect("at least one term") / d
}

/// `sum_{m>=0} (-1)^m / (m + a)^p` by CVZ, `Re a >= 1`.
pub fn alt_tail_cvz<T: Real>(a: &Complex<T>, p: u32, tol: f64, max_terms: usize) -> Result<(Complex<T>, f64)> {
    let prec = a.re.precision();
    let re_a = a.re.to_f64();
    let mass = re_a.powi(-(p as i32));
    let n = cvz_terms(mass, tol);
    if n > max_terms {
        return Err(Error::NonConvergence { what: "alternating tail".into(), iterations: max_terms });
    }
    let v = cvz_sum::<T, Complex<T>, _>(n, prec, |m| {
        let x = Complex::new(a.re.clone() + T::from_i64_in(m as i64, prec), a.im.clone());
        let inv = c_inv(&x);
        if p == 1 {
            inv
        } else {
            inv.clone() * inv
        }
    });
    let bound = 2.0 * mass * CVZ_RATE.powi(-(n as i32));
    Ok((v, bound))
}

/// Same tail by pairing terms and an Euler-Maclaurin remainder.
pub fn alt_tail_em<T: Real>(a: &Complex<T>, p: u32, tol: f64, max_terms: usize) -> Result<(Complex<T>, f64)> {
    let prec = a.re.precision();
    let cx = |k: i64, off: i64| Complex::new(a.re.clone() + T::from_i64_in(2 * k + off, prec), a.im.clone());
    let pow_inv = |z: &Complex<T>, e: u32| {
        let inv = c_inv(z);
        let mut r = inv.clone();
        for _ in 1..e {
            r = r * inv.clone();
        }
        r
    };
    // The remainder after K pairs with M corrections behaves like
    // (2K)^-(p+2M+1); K = 32, M = 8 reaches double precision comfortably.
    let bits = T::mantissa_bits(prec) as f64;
    let want = tol.min(2f64.powf(-bits)).max(1e-300);
    let mcorr = 8usize;
    let mut kk = 32i64;
    while (2.0 * kk as f64).powf(-((p as usize + 2 * mcorr + 1) as f64)) > want {
        kk *= 2;
        if kk as usize > max_terms {
            return Err(Error::NonConvergence { what: "paired tail".into(), iterations: max_terms });
        }
    }
    let mut s = Complex::new(T::from_i64_in(0, prec), T::from_i64_in(0, prec));
    for k in 0..kk {
        s = s + pow_inv(&cx(k, 0), p) - pow_inv(&cx(k, 1), p);
    }
    // Integral of the paired term over [K, inf).
    let (lo, hi) = (cx(kk, 0), cx(kk, 1));
    let half = T::from_ratio_in(1, 2, prec);
    let integral = if p == 1 {
        c_ln(&(hi.clone() * c_inv(&lo)))
    } else {
        c_inv(&lo) - c_inv(&hi)
    };
    let integral = Complex::new(integral.re * &half, integral.im * &half);
    let fk = pow_inv(&lo, p) - pow_inv(&hi, p);
    s = s + integral + Complex::new(fk.re * &half, fk.im * &half);
    // - sum_i B_{2i}/(2i)! f^{(2i-1)}(K), with
    // f^{(m)}(k) = (-2)^m p(p+1)...(p+m-1) [(2k+a)^{-p-m} - (2k+a+1)^{-p-m}].
    let bern = bernoulli_numbers(2 * mcorr);
    for i in 1..=mcorr {
        let m = 2 * i - 1;
        let mut coef = num_rational::BigRational::from_integer((-2i64).pow(m as u32).into());
        for j in 0..m {
            coef *= num_bigint::BigInt::from(p as usize + j);
        }
        let mut fact = num_bigint::BigInt::from(1);
        for j in 1..=(2 * i) {
            fact *= j;
        }
        let c = T::from_rational_in(&(&bern[2 * i] / fact * coef), prec);
        let e = p + m as u32;
        let d = pow_inv(&lo, e) - pow_inv(&hi, e);
        s = s - Complex::new(d.re * &c, d.im * &c);
    }
    Ok((s, want))
}

/// Real-valued CVZ for `sum_{m>=0} (-1)^m f(m)` where `f` is a moment
/// sequence of total variation `mass`.
pub fn alt_real_cvz<T: Real, F: FnMut(usize) -> T>(mass: f64, tol: f64, max_terms: usize, prec: T::Precision, f: F) -> Result<(T, f64)> {
    let n = cvz_terms(mass, tol);
    if n > max_terms {
        return Err(Error::NonConvergence { what: "alternating wall series".into(), iterations: max_terms });
    }
    let v = cvz_sum::<T, T, _>(n, prec, f);
    Ok((v, 2.0 * mass * CVZ_RATE.powi(-(n as i32))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn cvz_reproduces_ln2_and_pi() {
        let ln2: f64 = cvz_sum::<f64, f64, _>(25, (), |k| 1.0 / (k as f64 + 1.0));
        assert!((ln2 - LN_2).abs() < 1e-15);
        let pi4: f64 = cvz_sum::<f64, f64, _>(25, (), |k| 1.0 / (2.0 * k as f64 + 1.0));
        assert!((pi4 - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn tails_agree_between_methods() {
        for (re, im) in [(1.0, 0.0), (1.5, 3.0), (2.25, -40.0), (1.0, 100.0)] {
            let a = Complex::new(re, im);
            for p in [1, 2] {
                let (x, _) = alt_tail_cvz(&a, p, 1e-14, 1000).unwrap();
                let (y, _) = alt_tail_em(&a, p, 1e-14, 1 << 20).unwrap();
                assert!((x - y).norm() < 1e-13, "{a} p={p}: {x} vs {y}");
            }
        }
        // sum (-1)^m / (m+1) = ln 2
        let (x, _) = alt_tail_em(&Complex::new(1.0, 0.0), 1, 1e-14, 1 << 20).unwrap();
        assert!((x.re - LN_2).abs() < 1e-14);
    }

    #[test]
    fn term_budget_is_enforced() {
        assert!(alt_tail_cvz(&Complex::new(1.0, 0.0), 1, 1e-300, 10).is_err());
    }
}
