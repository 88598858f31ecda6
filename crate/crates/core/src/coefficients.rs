//! The coefficient recurrence
//!
//! ```text
//! c_0 = 1,   sum_{k=0}^{N} c_k / (N + k + 1) = 0   (N >= 1)
//! ```
//!
//! solved forward as `c_N = -(2N+1) * sum_{k<N} c_k / (N+k+1)`. The inner
//! sum is about `N^-3` while its terms are about `N^-1`, so floating tables
//! lose roughly `2 log2 N` bits to cancellation. Exact tables use
//! `BigRational`; floating tables default to 128 bits with compensated inner
//! sums.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::exact::{small_fraction_dot, CommonDenominator};
use crate::mp::{word_aligned, MpFloat};
use crate::scalar::Scalar;
use crate::summation::{Accumulator, SummationMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub mantissa_bits: u32,
    pub summation: SummationMode,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { mantissa_bits: 128, summation: SummationMode::Compensated }
    }
}

impl PrecisionConfig {
    pub fn new(mantissa_bits: u32, summation: SummationMode) -> Result<Self> {
        let c = PrecisionConfig { mantissa_bits, summation };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mantissa_bits < 53 {
            return Err(Error::InvalidConfig(format!(
                "mantissa_bits must be at least 53, got {}",
                self.mantissa_bits
            )));
        }
        Ok(())
    }

    /// Width actually used: 53 means native `f64`, anything wider is rounded
    /// up to whole 64-bit words.
    pub fn effective_bits(&self) -> u32 {
        if self.mantissa_bits == 53 {
            53
        } else {
            word_aligned(self.mantissa_bits as usize) as u32
        }
    }
}

/// Limits on the exact engine. Denominators grow roughly like lcm(1..2N).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBudget {
    pub max_n: usize,
    /// Abort once any denominator exceeds this many bits.
    pub max_denominator_bits: u64,
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget { max_n: 2000, max_denominator_bits: 1 << 16 }
    }
}

/// `c_0..c_N` together with the partial sums `C_N`.
#[derive(Clone, Debug)]
pub struct CoefficientTable<T> {
    values: Vec<T>,
    partial_sums: Vec<T>,
    config: Option<PrecisionConfig>,
}

impl<T: Scalar> CoefficientTable<T> {
    /// Builds a table from raw values; partial sums are accumulated in `T`.
    pub fn from_values(values: Vec<T>, config: Option<PrecisionConfig>) -> Self {
        let mode = config.map_or(SummationMode::Plain, |c| c.summation);
        let mut partial_sums = Vec::with_capacity(values.len());
        if let Some(first) = values.first() {
            let mut acc = Accumulator::new(mode, first.clone() - first.clone());
            for v in &values {
                acc.add(v.clone());
                partial_sums.push(acc.value());
            }
        }
        CoefficientTable { values, partial_sums, config }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn partial_sums(&self) -> &[T] {
        &self.partial_sums
    }

    pub fn config(&self) -> Option<PrecisionConfig> {
        self.config
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn c(&self, n: usize) -> &T {
        &self.values[n]
    }

    pub fn partial_sum(&self, n: usize) -> &T {
        &self.partial_sums[n]
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::to_f64).collect()
    }

    pub fn partial_sums_f64(&self) -> Vec<f64> {
        self.partial_sums.iter().map(Scalar::to_f64).collect()
    }

    /// `sum_{k=0}^{N} c_k / (N+k+1)`, evaluated in `T`.
    pub fn recurrence_residual(&self, n: usize) -> Result<T> {
        if n == 0 || n > self.n_max() {
            return Err(Error::Coverage(format!("residual index {n} outside 1..={}", self.n_max())));
        }
        let prec = self.values[0].precision();
        let mode = self.config.map_or(SummationMode::Plain, |c| c.summation);
        let mut acc = Accumulator::new(mode, T::from_i64_in(0, prec));
        for (k, c) in self.values[..=n].iter().enumerate() {
            acc.add(c.clone() / T::from_i64_in((n + k + 1) as i64, prec));
        }
        Ok(acc.value())
    }

    /// Writes `n,c_n,C_n` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "c_n", "C_n"])?;
        for (n, (c, s)) in self.values.iter().zip(&self.partial_sums).enumerate() {
            out.write_record([n.to_string(), c.to_table_string(), s.to_table_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn manifest(&self) -> TableManifest {
        TableManifest {
            kind: if T::EXACT { "exact" } else { "float" }.to_string(),
            n_max: self.n_max(),
            mantissa_bits: self.config.map(|c| c.mantissa_bits),
            effective_bits: self.config.map(|c| c.effective_bits()),
            summation: self.config.map(|c| c.summation),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableManifest {
    pub kind: String,
    pub n_max: usize,
    pub mantissa_bits: Option<u32>,
    pub effective_bits: Option<u32>,
    pub summation: Option<SummationMode>,
}

pub type ExactCoefficientTable = CoefficientTable<BigRational>;
pub type FloatCoefficientTable = CoefficientTable<MpFloat>;

/// Runs the recurrence in any scalar type. `prec` fixes the working width of
/// every constant; the inner sum uses `mode`.
pub fn compute_values<T: Scalar>(n_max: usize, prec: T::Precision, mode: SummationMode) -> Vec<T> {
    let inv: Vec<T> = (0..=2 * n_max + 1)
        .map(|m| if m == 0 { T::from_i64_in(0, prec) } else { T::from_ratio_in(1, m as i64, prec) })
        .collect();
    let mut c: Vec<T> = Vec::with_capacity(n_max + 1);
    c.push(T::from_i64_in(1, prec));
    for n in 1..=n_max {
        let mut acc = Accumulator::new(mode, T::from_i64_in(0, prec));
        for (k, ck) in c.iter().enumerate() {
            acc.add(ck.mul_ref(&inv[n + k + 1]));
        }
        let cn = T::from_i64_in(-(2 * n as i64 + 1), prec) * acc.value();
        c.push(cn);
    }
    c
}

pub fn compute_exact(n_max: usize) -> Result<ExactCoefficientTable> {
    compute_exact_with(n_max, ExactBudget::default())
}

pub fn compute_exact_with(n_max: usize, budget: ExactBudget) -> Result<ExactCoefficientTable> {
    if n_max > budget.max_n {
        return Err(Error::ResourceLimit(format!(
            "exact mode is capped at N = {} (requested {n_max}); use the float engine",
            budget.max_n
        )));
    }
    // Every c_k is kept as P_k / D over one running denominator so that each
    // step is an integer dot product followed by a single reduction.
    let mut c: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    let mut p: Vec<BigInt> = Vec::with_capacity(n_max + 1);
    let mut d = BigInt::one();
    c.push(BigRational::one());
    p.push(BigInt::one());
    for n in 1..=n_max {
        let s = small_fraction_dot(p.iter().enumerate().map(|(k, pk)| (pk, 1, (n + k + 1) as u64)), &d);
        let cn = s * BigInt::from(-(2 * n as i64 + 1));
        if cn.denom().bits() > budget.max_denominator_bits {
            return Err(Error::ResourceLimit(format!(
                "denominator of c_{n} has {} bits, over the budget of {}",
                cn.denom().bits(),
                budget.max_denominator_bits
            )));
        }
        let new_d = d.lcm(cn.denom());
        if new_d != d {
            let f = &new_d / &d;
            for pk in p.iter_mut() {
                *pk *= &f;
            }
            d = new_d;
        }
        p.push(cn.numer() * (&d / cn.denom()));
        c.push(cn);
    }
    Ok(CoefficientTable::from_values(c, None))
}

pub fn compute_float(n_max: usize, config: PrecisionConfig) -> Result<FloatCoefficientTable> {
    config.validate()?;
    let bits = config.effective_bits() as usize;
    let values: Vec<MpFloat> = if bits == 53 {
        compute_values::<f64>(n_max, (), config.summation)
            .into_iter()
            .map(|v| MpFloat::from_f64(v, 64))
            .collect()
    } else {
        compute_values::<MpFloat>(n_max, bits, config.summation)
    };
    Ok(CoefficientTable::from_values(values, Some(config)))
}

/// `max_{n <= prefix} |float_n - exact_n| / |exact_n|`, evaluated one word
/// wider than the float table.
pub fn cross_validate(exact: &ExactCoefficientTable, float: &FloatCoefficientTable, prefix: usize) -> Result<f64> {
    if prefix > exact.n_max() || prefix > float.n_max() {
        return Err(Error::Coverage(format!(
            "prefix {prefix} exceeds table lengths ({}, {})",
            exact.n_max(),
            float.n_max()
        )));
    }
    let bits = float.config.map_or(128, |c| c.effective_bits() as usize) + 64;
    let mut worst = 0.0f64;
    for n in 0..=prefix {
        let e = &exact.values[n];
        if e.is_zero() {
            return Err(Error::ZeroInPrefix(n));
        }
        let ef = MpFloat::from_rational_in(e, bits);
        let rel = ((float.values[n].with_bits(bits) - &ef) / &ef).abs().to_f64();
        worst = worst.max(rel);
    }
    Ok(worst)
}

fn table_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r)
}

/// Reads a table written by [`CoefficientTable::write_csv`] with `p/q` entries.
/// Lines starting with `#` are skipped.
pub fn read_exact_csv<R: Read>(r: R) -> Result<ExactCoefficientTable> {
    let mut rdr = table_reader(r);
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let n: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("row {i}: bad index")))?;
        if n != i {
            return Err(Error::Parse(format!("row {i}: expected index {i}, found {n}")));
        }
        let field = rec.get(1).ok_or_else(|| Error::Parse(format!("row {i}: missing c_n")))?;
        values.push(parse_rational(field).ok_or_else(|| Error::Parse(format!("row {i}: bad fraction {field:?}")))?);
    }
    if values.is_empty() {
        return Err(Error::Parse("empty coefficient table".into()));
    }
    Ok(CoefficientTable::from_values(values, None))
}

/// Reads any table written by [`CoefficientTable::write_csv`], exact or
/// decimal, rounding the entries to `f64`.
pub fn read_csv_f64<R: Read>(r: R) -> Result<CoefficientTable<f64>> {
    let mut rdr = table_reader(r);
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = rec.get(1).ok_or_else(|| Error::Parse(format!("row {i}: missing c_n")))?;
        let v = match field.parse::<f64>() {
            Ok(v) => v,
            Err(_) => parse_rational(field)
                .map(|q| crate::scalar::rational_to_f64(&q))
                .ok_or_else(|| Error::Parse(format!("row {i}: bad value {field:?}")))?,
        };
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse("empty coefficient table".into()));
    }
    Ok(CoefficientTable::from_values(values, None))
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

impl ExactCoefficientTable {
    pub fn common_denominator(&self) -> CommonDenominator {
        CommonDenominator::new(&self.values)
    }

    /// Exact residuals for `N = 1..=n_max`, entry `N - 1` holding residual `N`.
    pub fn exact_residuals(&self) -> Vec<BigRational> {
        let cd = self.common_denominator();
        (1..=self.n_max()).map(|n| cd.weighted(0..n + 1, |k| (1, (n + k + 1) as u64))).collect()
    }

    /// True when `c_0 = 1` and every recurrence residual vanishes exactly.
    pub fn satisfies_recurrence(&self) -> bool {
        self.values[0].is_one() && self.exact_residuals().iter().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    /// The recurrence solved by hand for N = 1, 2, 3.
    fn hand_oracle() -> Vec<BigRational> {
        let c0 = q(1, 1);
        // c0/2 + c1/3 = 0
        let c1 = -c0.clone() * q(3, 2);
        // c0/3 + c1/4 + c2/5 = 0
        let c2 = -(c0.clone() / q(3, 1) + c1.clone() / q(4, 1)) * q(5, 1);
        // c0/4 + c1/5 + c2/6 + c3/7 = 0
        let c3 = -(c0.clone() / q(4, 1) + c1.clone() / q(5, 1) + c2.clone() / q(6, 1)) * q(7, 1);
        vec![c0, c1, c2, c3]
    }

    #[test]
    fn exact_prefix_matches_hand_solution() {
        let t = compute_exact(3).unwrap();
        assert_eq!(t.values(), hand_oracle().as_slice());
        assert_eq!(t.values(), &[q(1, 1), q(-3, 2), q(5, 24), q(77, 720)]);
        assert_eq!(t.partial_sum(2), &q(-7, 24));
    }

    #[test]
    fn base_case() {
        let t = compute_exact(0).unwrap();
        assert_eq!(t.values(), &[q(1, 1)]);
        let f = compute_float(0, PrecisionConfig::default()).unwrap();
        assert_eq!(f.values_f64(), vec![1.0]);
        assert_eq!(f.partial_sums_f64(), vec![1.0]);
    }

    #[test]
    fn exact_residuals_vanish() {
        let t = compute_exact(60).unwrap();
        assert!(t.satisfies_recurrence());
        // The generic rational path agrees with the integer path.
        for n in [1, 7, 60] {
            assert!(t.recurrence_residual(n).unwrap().is_zero());
        }
        let mut bad = t.values().to_vec();
        bad[30] += BigRational::new(1.into(), BigInt::from(10).pow(40));
        assert!(!CoefficientTable::from_values(bad, None).satisfies_recurrence());
    }

    #[test]
    fn exact_budget_is_enforced() {
        assert!(matches!(compute_exact(2001), Err(Error::ResourceLimit(_))));
        let tight = ExactBudget { max_n: 100, max_denominator_bits: 40 };
        assert!(matches!(compute_exact_with(50, tight), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn float_prefix_has_30_digits() {
        let f = compute_float(3, PrecisionConfig::default()).unwrap();
        let e = compute_exact(3).unwrap();
        assert!(cross_validate(&e, &f, 3).unwrap() <= 2f64.powi(-100));
        assert_eq!(cross_validate(&e, &f, 0).unwrap(), 0.0);
        let c3 = f.c(3).to_table_string();
        assert!(c3.starts_with("1.069444444444444444444444444444"), "{c3}");
        assert!((f.partial_sum(2).to_f64() + 7.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn precision_floor() {
        assert!(PrecisionConfig::new(52, SummationMode::Plain).is_err());
        assert_eq!(PrecisionConfig::new(53, SummationMode::Plain).unwrap().effective_bits(), 53);
        assert_eq!(PrecisionConfig::new(100, SummationMode::Plain).unwrap().effective_bits(), 128);
    }

    #[test]
    fn double_precision_loses_to_cancellation() {
        let e = compute_exact(300).unwrap();
        let f53 = compute_float(300, PrecisionConfig::new(53, SummationMode::Compensated).unwrap()).unwrap();
        let f128 = compute_float(300, PrecisionConfig::default()).unwrap();
        let err53 = cross_validate(&e, &f53, 300).unwrap();
        let err128 = cross_validate(&e, &f128, 300).unwrap();
        assert!(err53 > 1e-12, "{err53}");
        assert!(err128 < 2f64.powi(-100), "{err128}");
    }

    #[test]
    fn small_signs() {
        let t = compute_exact(3).unwrap();
        let s: Vec<bool> = t.values().iter().map(|v| v.is_positive()).collect();
        assert_eq!(s, vec![true, false, true, true]);
    }

    #[test]
    fn csv_round_trip() {
        let t = compute_exact(20).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,c_n,C_n\n0,1/1,1/1\n1,-3/2,-1/2\n"));
        let back = read_exact_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), t.values());
    }

    #[test]
    fn plain_and_compensated_agree_at_high_precision() {
        let a = compute_values::<MpFloat>(80, 256, SummationMode::Plain);
        let b = compute_values::<MpFloat>(80, 256, SummationMode::Compensated);
        for (x, y) in a.iter().zip(&b) {
            assert!(((x - y) / y).abs().to_f64() < 1e-60);
        }
    }
}
