//! Complex digamma by upward recurrence and the Stirling-type series
//!
//! ```text
//! psi(w) = ln w - 1/(2w) - sum_{k=1}^{K} B_{2k} / (2k w^{2k})
//! ```

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::complex::{c_inv, c_ln, is_real_integer};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `B_0, B_1, ..., B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        if m > 1 && m % 2 == 1 {
            b.push(BigRational::zero());
            continue;
        }
        // sum_{k=0}^{m} C(m+1, k) B_k = 0
        let mut binom = BigInt::one();
        let mut s = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                s += bk * &binom;
            }
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-s / BigInt::from(m + 1));
    }
    b
}

/// Shift threshold and coefficients `B_{2k} / (2k)` for a working precision.
#[derive(Clone, Debug)]
pub struct DigammaPlan<T> {
    pub threshold: i64,
    pub coeffs: Vec<T>,
}

impl<T: Real> DigammaPlan<T> {
    pub fn new(prec: T::Precision) -> Self {
        let bits = T::mantissa_bits(prec);
        if bits <= 64 {
            // Terms through w^-14 at Re w >= 10 leave an error near 1e-17.
            let b = bernoulli_numbers(14);
            let coeffs = (1..=7).map(|k| T::from_rational_in(&(&b[2 * k] / BigInt::from(2 * k)), prec)).collect();
            return DigammaPlan { threshold: 10, coeffs };
        }
        // The smallest series term is about exp(-2 pi w), so the threshold
        // grows linearly with the bit count.
        let threshold = (10.0f64).max((bits as f64 * 0.12).ceil() + 2.0) as i64;
        let target = -((bits + 8) as f64) * std::f64::consts::LN_2;
        let lnw = (threshold as f64).ln();
        let mut kmax = 1;
        let b = bernoulli_numbers(2 * (4 * threshold as usize + 8));
        for k in 1..b.len() / 2 {
            let bk = b[2 * k].to_f64().unwrap_or(f64::INFINITY).abs();
            let lnterm = bk.ln() - ((2 * k) as f64).ln() - (2 * k) as f64 * lnw;
            kmax = k;
            if lnterm < target {
                break;
            }
        }
        let coeffs = (1..=kmax).map(|k| T::from_rational_in(&(&b[2 * k] / BigInt::from(2 * k)), prec)).collect();
        DigammaPlan { threshold, coeffs }
    }

    pub fn digamma(&self, w: &Complex<T>) -> Result<Complex<T>> {
        if let Some(n) = is_real_integer(w) {
            if n <= 0 {
                return Err(Error::Pole { location: format!("w = {n}") });
            }
        }
        let prec = w.re.precision();
        let one = T::from_i64_in(1, prec);
        let mut w = w.clone();
        let mut shift = Complex::new(T::from_i64_in(0, prec), T::from_i64_in(0, prec));
        let thr = T::from_i64_in(self.threshold, prec);
        // Cap the loop so absurd inputs fail instead of spinning.
        let mut steps = 0usize;
        while w.re < thr {
            shift = shift + c_inv(&w);
            w.re += &one;
            steps += 1;
            if steps > 1_000_000 {
                return Err(Error::Domain("digamma argument too far left".into()));
            }
        }
        let inv = c_inv(&w);
        let inv2 = inv.clone() * inv.clone();
        // Horner in 1/w^2.
        let mut poly = Complex::new(T::from_i64_in(0, prec), T::from_i64_in(0, prec));
        for c in self.coeffs.iter().rev() {
            poly = poly * inv2.clone() + Complex::new(c.clone(), T::from_i64_in(0, prec));
        }
        let half = T::from_ratio_in(1, 2, prec);
        let series = c_ln(&w) - Complex::new(inv.re.clone() * &half, inv.im.clone() * &half) - poly * inv2;
        Ok(series - shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{MpFloat, Scalar};

    const EULER_GAMMA: f64 = 0.5772156649015329;

    #[test]
    fn bernoulli_prefix() {
        let b = bernoulli_numbers(12);
        let q = |p: i64, d: i64| BigRational::new(p.into(), d.into());
        assert_eq!(b[1], q(-1, 2));
        assert_eq!(b[2], q(1, 6));
        assert_eq!(b[4], q(-1, 30));
        assert_eq!(b[12], q(-691, 2730));
        assert!(b[7].is_zero());
    }

    /// psi(w) = -gamma + sum_{k>=0} (1/(k+1) - 1/(k+w)), summed with a
    /// Euler-Maclaurin tail; independent of the Stirling series.
    fn psi_oracle(w: Complex<f64>) -> Complex<f64> {
        let n = 2000;
        let mut s = Complex::new(-EULER_GAMMA, 0.0);
        for k in 0..n {
            s += Complex::new(1.0 / (k as f64 + 1.0), 0.0) - 1.0 / (w + k as f64);
        }
        // tail sum_{k>=n} (1/(k+1) - 1/(k+w)) ~ ln((n+w-1/2)/(n+1/2))
        s + ((w + (n as f64 - 0.5)) / (n as f64 + 0.5)).ln()
    }

    #[test]
    fn classical_values() {
        let plan = DigammaPlan::<f64>::new(());
        let psi = |re: f64| plan.digamma(&Complex::new(re, 0.0)).unwrap().re;
        assert!((psi(1.0) + EULER_GAMMA).abs() < 1e-15);
        let want = 2.0 - EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((psi(1.5) - want).abs() < 1e-15);
        assert!((psi(1.5) - 0.0364899740).abs() < 1e-10);
        assert!((psi(2.0) - psi(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_series_oracle_off_axis() {
        let plan = DigammaPlan::<f64>::new(());
        for (re, im) in [(0.5, 1.0), (-2.3, 4.0), (3.0, -20.0), (-0.75, 0.1)] {
            let w = Complex::new(re, im);
            let d = (plan.digamma(&w).unwrap() - psi_oracle(w)).norm();
            assert!(d < 1e-9, "{w}: {d}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        let plan = DigammaPlan::<f64>::new(());
        for re in [0.0, -1.0, -7.0] {
            assert!(matches!(plan.digamma(&Complex::new(re, 0.0)), Err(Error::Pole { .. })));
        }
        assert!(plan.digamma(&Complex::new(-1.0, 1e-9)).is_ok());
    }

    #[test]
    fn wide_precision_plan() {
        let plan = DigammaPlan::<MpFloat>::new(256);
        assert!(plan.threshold >= 30);
        let w = Complex::new(MpFloat::from_i64(1, 256), MpFloat::from_i64(0, 256));
        let psi1 = plan.digamma(&w).unwrap().re;
        let s = psi1.to_table_string();
        assert!(s.starts_with("-5.7721566490153286060651209008240243104215933593992359880576723"), "{s}");
    }
}
