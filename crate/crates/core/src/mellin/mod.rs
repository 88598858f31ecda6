//! The Mellin symbol of `g(t) = 2/(1+t)` and the alternating series `D`.
//!
//! ```text
//! g*(z)  = z (psi(-z/2) - psi((1-z)/2)),      g*(0) = 2
//! D(z)   = sum_{j>=0} (-1)^j / (z - j)  =  (psi(-z/2) - psi((1-z)/2)) / 2
//! g*(z)  = 2 z D(z)
//! ```
//!
//! `D` is evaluated two ways: through digamma (the default route) and by
//! summing the series with an accelerated tail.

mod batch;
pub mod digamma;
pub mod series;

pub use batch::{evaluate_batch, read_points_csv, sample_points, write_batch_csv, BatchRow, MellinFunction};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::{c_abs, c_from_f64, c_inv, c_is_finite, c_scale, c_to_f64, is_real_integer};
use crate::error::{Error, Result};
use crate::mp::MpFloat;
use crate::scalar::Real;
use digamma::DigammaPlan;
use series::{alt_real_cvz, alt_tail_cvz, alt_tail_em, SeriesMethod};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTolerance {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for EvaluationTolerance {
    fn default() -> Self {
        EvaluationTolerance { abs_tol: 1e-12, max_terms: 100_000 }
    }
}

impl EvaluationTolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {abs_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::InvalidConfig("max_terms must be positive".into()));
        }
        Ok(EvaluationTolerance { abs_tol, max_terms })
    }
}

pub const DEFAULT_POLE_RADIUS: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct MellinEvaluator<T: Real> {
    prec: T::Precision,
    tol: EvaluationTolerance,
    pole_radius: f64,
    method: SeriesMethod,
    plan: DigammaPlan<T>,
}

pub type Evaluator64 = MellinEvaluator<f64>;
pub type EvaluatorMp = MellinEvaluator<MpFloat>;

impl Evaluator64 {
    pub fn f64() -> Self {
        MellinEvaluator::new(())
    }
}

impl EvaluatorMp {
    pub fn with_bits(bits: usize) -> Self {
        MellinEvaluator::new(bits)
    }
}

impl Default for EvaluatorMp {
    fn default() -> Self {
        EvaluatorMp::with_bits(128)
    }
}

impl<T: Real> MellinEvaluator<T> {
    pub fn new(prec: T::Precision) -> Self {
        MellinEvaluator {
            prec,
            tol: EvaluationTolerance::default(),
            pole_radius: DEFAULT_POLE_RADIUS,
            method: SeriesMethod::Cvz,
            plan: DigammaPlan::new(prec),
        }
    }

    pub fn with_tolerance(mut self, tol: EvaluationTolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_pole_radius(mut self, r: f64) -> Self {
        self.pole_radius = r;
        self
    }

    pub fn with_method(mut self, m: SeriesMethod) -> Self {
        self.method = m;
        self
    }

    pub fn precision(&self) -> T::Precision {
        self.prec
    }

    pub fn tolerance(&self) -> EvaluationTolerance {
        self.tol
    }

    pub fn pole_radius(&self) -> f64 {
        self.pole_radius
    }

    pub fn method(&self) -> SeriesMethod {
        self.method
    }

    pub fn point(&self, z: Complex<f64>) -> Complex<T> {
        c_from_f64(z, self.prec)
    }

    fn real(&self, x: f64) -> T {
        T::from_f64_in(x, self.prec)
    }

    fn int(&self, x: i64) -> T {
        T::from_i64_in(x, self.prec)
    }

    fn czero(&self) -> Complex<T> {
        Complex::new(self.int(0), self.int(0))
    }

    fn finite(&self, z: Complex<T>, what: &str) -> Result<Complex<T>> {
        if c_is_finite(&z) {
            Ok(z)
        } else {
            Err(Error::Domain(format!("{what} produced a non-finite value")))
        }
    }

    pub fn digamma(&self, w: &Complex<T>) -> Result<Complex<T>> {
        self.plan.digamma(w)
    }

    /// `psi(-z/2) - psi((1-z)/2)`.
    fn psi_difference(&self, z: &Complex<T>) -> Result<Complex<T>> {
        let half = T::from_ratio_in(1, 2, self.prec);
        let a = Complex::new(-(z.re.clone() * &half), -(z.im.clone() * &half));
        let b = Complex::new((self.int(1) - &z.re) * &half, -(z.im.clone() * &half));
        let pa = self.digamma(&a).map_err(|_| pole_error(z))?;
        let pb = self.digamma(&b).map_err(|_| pole_error(z))?;
        Ok(pa - pb)
    }

    pub fn g_star(&self, z: &Complex<T>) -> Result<Complex<T>> {
        if let Some(n) = is_real_integer(z) {
            if n == 0 {
                return Ok(Complex::new(self.int(2), self.int(0)));
            }
            if n > 0 {
                return Err(pole_error(z));
            }
        }
        let d = self.psi_difference(z)?;
        self.finite(z.clone() * d, "g*")
    }

    /// `D` through digamma.
    pub fn d_infty(&self, z: &Complex<T>) -> Result<Complex<T>> {
        if let Some(n) = is_real_integer(z) {
            if n >= 0 {
                return Err(pole_error(z));
            }
        }
        let half = T::from_ratio_in(1, 2, self.prec);
        let d = self.psi_difference(z)?;
        self.finite(c_scale(&d, &half), "D")
    }

    fn check_pole_distance(&self, z: &Complex<T>) -> Result<()> {
        if let Some(n) = is_real_integer(z) {
            if n >= 0 {
                return Err(pole_error(z));
            }
        }
        let zf = c_to_f64(z);
        let j = zf.re.round().max(0.0);
        let dist = Complex::new(zf.re - j, zf.im).norm();
        if dist < self.pole_radius {
            return Err(Error::PoleProximity { location: fmt_c(zf), pole: j as i64, radius: self.pole_radius });
        }
        Ok(())
    }

    /// Split point `J`: the head `j < J` is summed directly and the tail
    /// `a = J - z` has `Re a >= 1`.
    fn split(&self, z: &Complex<T>) -> i64 {
        (z.re.to_f64().ceil() as i64 + 1).max(0)
    }

    fn tail(&self, a: &Complex<T>, p: u32, tol: f64) -> Result<(Complex<T>, f64)> {
        match self.method {
            SeriesMethod::Cvz => alt_tail_cvz(a, p, tol, self.tol.max_terms),
            SeriesMethod::EulerMaclaurin => alt_tail_em(a, p, tol, self.tol.max_terms),
        }
    }

    /// `D` by direct summation of the head plus an accelerated tail.
    pub fn d_infty_series(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.d_infty_series_with_error(z).map(|(v, _)| v)
    }

    pub fn d_infty_series_with_error(&self, z: &Complex<T>) -> Result<(Complex<T>, f64)> {
        self.check_pole_distance(z)?;
        let jj = self.split(z);
        let mut head = self.czero();
        for j in 0..jj {
            let t = c_inv(&Complex::new(z.re.clone() - self.int(j), z.im.clone()));
            head = if j % 2 == 0 { head + t } else { head - t };
        }
        // sum_{j>=J} (-1)^j/(z-j) = -(-1)^J sum_m (-1)^m/(m+a)
        let a = Complex::new(self.int(jj) - &z.re, -z.im.clone());
        let (t, err) = self.tail(&a, 1, self.tol.abs_tol / 2.0)?;
        let v = if jj % 2 == 0 { head - t } else { head + t };
        Ok((self.finite(v, "D series")?, err))
    }

    /// `D'(z) = -sum_j (-1)^j / (z-j)^2`.
    pub fn d_infty_prime(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.check_pole_distance(z)?;
        let jj = self.split(z);
        let mut head = self.czero();
        for j in 0..jj {
            let w = c_inv(&Complex::new(z.re.clone() - self.int(j), z.im.clone()));
            let t = w.clone() * w;
            head = if j % 2 == 0 { head - t } else { head + t };
        }
        // -sum_{j>=J} (-1)^j/(z-j)^2 = -(-1)^J sum_m (-1)^m/(m+a)^2
        let a = Complex::new(self.int(jj) - &z.re, -z.im.clone());
        let (t, _) = self.tail(&a, 2, self.tol.abs_tol / 2.0)?;
        let v = if jj % 2 == 0 { head - t } else { head + t };
        self.finite(v, "D'")
    }

    /// Real and imaginary parts of `D(x + iy)` from the separated series
    ///
    /// ```text
    /// Re D =      sum (-1)^j (x-j) / ((x-j)^2 + y^2)
    /// Im D = -y * sum (-1)^j       / ((x-j)^2 + y^2)
    /// ```
    pub fn wall_values(&self, x: f64, y: f64) -> Result<(T, T)> {
        let z = Complex::new(self.real(x), self.real(y));
        self.check_pole_distance(&z)?;
        let (xr, yr) = (z.re.clone(), z.im.clone());
        let y2 = yr.clone() * &yr;
        let jj = self.split(&z);
        let mut re = self.int(0);
        let mut im = self.int(0);
        for j in 0..jj {
            let dx = xr.clone() - self.int(j);
            let den = dx.clone() * &dx + &y2;
            let (tr, ti) = (dx / &den, self.int(1) / den);
            if j % 2 == 0 {
                re += tr;
                im += ti;
            } else {
                re -= tr;
                im -= ti;
            }
        }
        // Tail with b = J - x >= 1: x - j = -(m + b).
        let b = self.int(jj) - &xr;
        let bf = b.to_f64();
        let tol = self.tol.abs_tol / 4.0;
        let (tr, _) = alt_real_cvz(1.0 / bf, tol, self.tol.max_terms, self.prec, |m| {
            let u = b.clone() + self.int(m as i64);
            let den = u.clone() * &u + &y2;
            u / den
        })?;
        let (ti, _) = alt_real_cvz(1.0 / (bf * bf), tol, self.tol.max_terms, self.prec, |m| {
            let u = b.clone() + self.int(m as i64);
            self.int(1) / (u.clone() * &u + &y2)
        })?;
        // (-1)^j = (-1)^J (-1)^m, and x - j = -(m+b).
        if jj % 2 == 0 {
            re -= tr;
            im += ti;
        } else {
            re += tr;
            im -= ti;
        }
        Ok((re, -(yr * im)))
    }

    /// `|s|^2 |g*(-s) - 1 - 1/(2s)|`.
    pub fn asymptotic_deviation(&self, s: &Complex<T>) -> Result<f64> {
        let ms = Complex::new(-s.re.clone(), -s.im.clone());
        let g = self.g_star(&ms)?;
        let half = T::from_ratio_in(1, 2, self.prec);
        let dev = g - Complex::new(self.int(1), self.int(0)) - c_scale(&c_inv(s), &half);
        let r = c_abs(s);
        Ok((r.clone() * r * c_abs(&dev)).to_f64())
    }
}

fn fmt_c(z: Complex<f64>) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn pole_error<T: Real>(z: &Complex<T>) -> Error {
    Error::Pole { location: fmt_c(c_to_f64(z)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Plain partial sums of D with the average of two consecutive partial
    /// sums, refined by repeated averaging (Euler's trick). Slow, simple,
    /// and independent of both production routes.
    fn d_oracle(z: Complex<f64>) -> Complex<f64> {
        let n = 4000;
        let mut partial = Vec::with_capacity(n);
        let mut s = c(0.0, 0.0);
        for j in 0..n {
            let t = 1.0 / (z - j as f64);
            s += if j % 2 == 0 { t } else { -t };
            partial.push(s);
        }
        let mut row: Vec<Complex<f64>> = partial[n - 40..].to_vec();
        while row.len() > 1 {
            row = row.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        }
        row[0]
    }

    #[test]
    fn g_star_values() {
        let ev = Evaluator64::f64();
        assert_eq!(ev.g_star(&c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        let g = ev.g_star(&c(-2.0, 0.0)).unwrap();
        assert!((g.re - (4.0 - 4.0 * LN_2)).abs() < 1e-14);
        assert!((g.re - 1.2274112777).abs() < 1e-10);
        let g = ev.g_star(&c(0.5, 0.0)).unwrap();
        assert!((g.re - (2.0 + PI / 2.0)).abs() < 1e-14);
        for n in 1..6 {
            assert!(matches!(ev.g_star(&c(n as f64, 0.0)), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn series_value_at_one_half() {
        let ev = Evaluator64::f64();
        let d = ev.d_infty_series(&c(0.5, 0.0)).unwrap();
        assert!((d.re - (2.0 + PI / 2.0)).abs() < 1e-12);
        assert!((d - d_oracle(c(0.5, 0.0))).norm() < 1e-10);
    }

    #[test]
    fn imaginary_axis_value() {
        let ev = Evaluator64::f64();
        let d = ev.d_infty_series(&c(0.0, 1.0)).unwrap();
        // Im D(i) = -sum (-1)^j / (j^2 + 1)
        let mut s = 0.0;
        for j in 0..200_000 {
            let t = 1.0 / ((j as f64).powi(2) + 1.0);
            s += if j % 2 == 0 { t } else { -t };
        }
        assert!(d.im < 0.0);
        assert!((d.im + s).abs() < 1e-10);
    }

    #[test]
    fn routes_agree_with_oracle() {
        let ev = Evaluator64::f64();
        for z in [c(0.5, 1.0), c(-2.7, 3.0), c(3.3, -0.4), c(1.34, 1.05), c(2.5, 40.0)] {
            let a = ev.d_infty(&z).unwrap();
            let b = ev.d_infty_series(&z).unwrap();
            assert!((a - b).norm() < 1e-12, "{z}: {a} vs {b}");
            assert!((a - d_oracle(z)).norm() < 1e-8, "{z}");
            let g = ev.g_star(&z).unwrap();
            assert!((g - 2.0 * z * b).norm() < 1e-10);
        }
    }

    #[test]
    fn euler_maclaurin_route_matches_cvz() {
        let ev = Evaluator64::f64();
        let em = Evaluator64::f64().with_method(SeriesMethod::EulerMaclaurin);
        for z in [c(0.5, 1.0), c(-2.7, 3.0), c(3.3, -0.4)] {
            assert!((ev.d_infty_series(&z).unwrap() - em.d_infty_series(&z).unwrap()).norm() < 1e-12);
            assert!((ev.d_infty_prime(&z).unwrap() - em.d_infty_prime(&z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_checks() {
        let ev = Evaluator64::f64();
        let z = c(0.5, 1.0);
        let h = 1e-4;
        let fd = (ev.d_infty_series(&(z + h)).unwrap() - ev.d_infty_series(&(z - h)).unwrap()) / (2.0 * h);
        let d = ev.d_infty_prime(&z).unwrap();
        assert!((d - fd).norm() <= 10.0 * h * h);
        let dc = ev.d_infty_prime(&z.conj()).unwrap();
        assert!((dc - d.conj()).norm() < 1e-14);
        assert_eq!(ev.d_infty_prime(&c(0.5, 0.0)).unwrap().im, 0.0);
    }

    #[test]
    fn pole_handling() {
        let ev = Evaluator64::f64();
        assert!(matches!(ev.d_infty_series(&c(2.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(ev.d_infty_series(&c(2.0, 5e-4)), Err(Error::PoleProximity { pole: 2, .. })));
        assert!(ev.d_infty_series(&c(-1.0, 0.0)).is_ok());
        assert!(matches!(ev.d_infty(&c(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn wall_values_signs_and_agreement() {
        let ev = Evaluator64::f64();
        let (_, im) = ev.wall_values(0.0, 1.0).unwrap();
        assert!(im < 0.0);
        let (re, _) = ev.wall_values(1.0, 1.0).unwrap();
        assert!(re > 0.0);
        let (_, im) = ev.wall_values(1.5, 1.0).unwrap();
        assert!(im < 0.0);
        for (x, y) in [(0.0, 1.0), (1.0, 0.3), (1.5, 7.0), (-2.2, 0.5), (3.5, 60.0)] {
            let (re, im) = ev.wall_values(x, y).unwrap();
            let d = ev.d_infty(&c(x, y)).unwrap();
            assert!((re - d.re).abs() < 1e-11 && (im - d.im).abs() < 1e-11, "{x} {y}");
        }
    }

    #[test]
    fn asymptotic_deviation_is_bounded() {
        let ev = Evaluator64::f64();
        let d10 = ev.asymptotic_deviation(&c(1.0, 10.0)).unwrap();
        let d100 = ev.asymptotic_deviation(&c(1.0, 100.0)).unwrap();
        let d1000 = ev.asymptotic_deviation(&c(1.0, 1000.0)).unwrap();
        assert!(d10 < 1.0 && d100 < 1.0 && d1000 < 1.0);
        assert!(ev.asymptotic_deviation(&c(50.0, 0.0)).unwrap().is_finite());
    }

    #[test]
    fn multiprecision_routes() {
        let ev = EvaluatorMp::default().with_tolerance(EvaluationTolerance::new(1e-30, 10_000).unwrap());
        let z = ev.point(c(0.5, 0.0));
        let d = ev.d_infty_series(&z).unwrap();
        let want = MpFloat::from_i64(2, 128) + MpFloat::pi(128) / MpFloat::from_i64(2, 128);
        assert!((d.re - want).to_f64().abs() < 1e-30);
        let z = ev.point(c(1.3, 0.9));
        let a = ev.d_infty(&z).unwrap();
        let b = ev.d_infty_series(&z).unwrap();
        assert!(c_abs(&(a - b)).to_f64() < 1e-30);
    }
}
