use std::io::{Read, Write};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MellinEvaluator;
use crate::complex::{c_abs, c_from_f64, c_to_f64};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MellinFunction {
    Digamma,
    GStar,
    DInfty,
    DInftyPrime,
}

impl std::str::FromStr for MellinFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digamma" | "psi" => Ok(MellinFunction::Digamma),
            "g-star" | "gstar" => Ok(MellinFunction::GStar),
            "d-infty" | "dinfty" => Ok(MellinFunction::DInfty),
            "d-infty-prime" | "dinfty-prime" => Ok(MellinFunction::DInftyPrime),
            _ => Err(Error::Parse(format!("unknown function {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub re_in: f64,
    pub im_in: f64,
    pub re_out: f64,
    pub im_out: f64,
    pub est_error: f64,
}

/// Uniform points in `[-3, 3] x [-50, 50]` that keep `radius` away from the
/// non-negative integers.
pub fn sample_points(seed: u64, count: usize, radius: f64) -> Vec<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Complex<f64> = Complex::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-50.0..=50.0));
        let j = z.re.round().max(0.0);
        if Complex::new(z.re - j, z.im).norm() >= radius {
            out.push(z);
        }
    }
    out
}

/// Evaluates `f` at each point. The error column is the disagreement with an
/// independent route: series vs digamma for `D` and `g*`, recurrence shift for
/// digamma, and a central difference for `D'`.
pub fn evaluate_batch<T: Real>(ev: &MellinEvaluator<T>, f: MellinFunction, points: &[Complex<f64>]) -> Result<Vec<BatchRow>> {
    let prec = ev.precision();
    points
        .iter()
        .map(|&p| {
            let z = c_from_f64::<T>(p, prec);
            let (v, est) = match f {
                MellinFunction::Digamma => {
                    let v = ev.digamma(&z)?;
                    let mut z1 = z.clone();
                    z1.re += T::from_i64_in(1, prec);
                    let alt = ev.digamma(&z1)? - crate::complex::c_inv(&z);
                    (c_to_f64(&v), c_abs(&(v - alt)).to_f64())
                }
                MellinFunction::GStar => {
                    let v = ev.g_star(&z)?;
                    let est = match ev.d_infty_series(&z) {
                        Ok(d) => {
                            let two_z = Complex::new(z.re.clone() * T::from_i64_in(2, prec), z.im.clone() * T::from_i64_in(2, prec));
                            c_abs(&(v.clone() - two_z * d)).to_f64()
                        }
                        Err(_) => f64::NAN,
                    };
                    (c_to_f64(&v), est)
                }
                MellinFunction::DInfty => {
                    let v = ev.d_infty(&z)?;
                    let est = ev.d_infty_series(&z).map(|s| c_abs(&(v.clone() - s)).to_f64()).unwrap_or(f64::NAN);
                    (c_to_f64(&v), est)
                }
                MellinFunction::DInftyPrime => {
                    let v = ev.d_infty_prime(&z)?;
                    let h = 1e-4;
                    let zp = c_from_f64::<T>(p + h, prec);
                    let zm = c_from_f64::<T>(p - h, prec);
                    let fd = (c_to_f64(&ev.d_infty(&zp)?) - c_to_f64(&ev.d_infty(&zm)?)) / (2.0 * h);
                    (c_to_f64(&v), (c_to_f64(&v) - fd).norm())
                }
            };
            Ok(BatchRow { re_in: p.re, im_in: p.im, re_out: v.re, im_out: v.im, est_error: est })
        })
        .collect()
}

/// Reads `re,im` rows; a header line is optional.
pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<Complex<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(re), Some(im)) if re.is_finite() && im.is_finite() => out.push(Complex::new(re, im)),
            _ if i == 0 => continue,
            _ => return Err(Error::Parse(format!("line {}: expected two finite numbers", i + 1))),
        }
    }
    Ok(out)
}

pub fn write_batch_csv<W: Write>(rows: &[BatchRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["re_in", "im_in", "re_out", "im_out", "est_error"])?;
    for r in rows {
        out.write_record([r.re_in, r.im_in, r.re_out, r.im_out, r.est_error].map(|v| format!("{v:.17e}")))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mellin::Evaluator64;

    #[test]
    fn sampling_is_deterministic_and_avoids_poles() {
        let a = sample_points(7, 200, 1e-3);
        let b = sample_points(7, 200, 1e-3);
        assert_eq!(a, b);
        assert_ne!(a, sample_points(8, 200, 1e-3));
        assert!(a.iter().all(|z| z.re.abs() <= 3.0 && z.im.abs() <= 50.0));
    }

    #[test]
    fn csv_round_trip() {
        let pts = read_points_csv("re,im\n0.5,0\n1.3, 1.05\n".as_bytes()).unwrap();
        assert_eq!(pts, vec![Complex::new(0.5, 0.0), Complex::new(1.3, 1.05)]);
        assert!(read_points_csv("0.5,0\nfoo,1\n".as_bytes()).is_err());
        let ev = Evaluator64::f64();
        let rows = evaluate_batch(&ev, MellinFunction::GStar, &pts).unwrap();
        assert!((rows[0].re_out - (2.0 + std::f64::consts::FRAC_PI_2)).abs() < 1e-13);
        assert!(rows.iter().all(|r| r.est_error < 1e-10));
        let mut buf = Vec::new();
        write_batch_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("re_in,im_in,re_out,im_out,est_error\n"));
    }
}
