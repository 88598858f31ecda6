//! The step functions `A(x) = sum_{n<=x} a_n` and
//! `A_g(x) = sum_{n<=x} a_n 2x/(x+n)` built on `a_n = c_{n-1}`, the exact
//! discrete identities they satisfy, and the numerical transfer
//! `A = A_g - A_g * R` through the resolvent.

use std::ops::Range;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientTable;
use crate::exact::CommonDenominator;
use crate::mellin::Evaluator64;
use crate::mp::MpFloat;
use crate::scalar::{rational_to_f64, Scalar};
use crate::summation::{Accumulator, SummationMode};
use crate::error::{Error, Result};
use crate::volterra::{kappa, solve_resolvent, ResolventGrid};

/// `a_n = c_{n-1}` for `n >= 1`, so `A(N) = C_{N-1}`.
#[derive(Debug)]
pub struct ShiftedSequence<T> {
    c: Vec<T>,
    partial: Vec<T>,
    mode: SummationMode,
    common: OnceLock<CommonDenominator>,
}

impl<T: Scalar> ShiftedSequence<T> {
    pub fn from_table(table: &CoefficientTable<T>) -> Self {
        ShiftedSequence {
            c: table.values().to_vec(),
            partial: table.partial_sums().to_vec(),
            mode: table.config().map_or(SummationMode::Plain, |c| c.summation),
            common: OnceLock::new(),
        }
    }

    /// Largest `n` with a known `a_n`.
    pub fn n_max(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self, n: usize) -> Result<&T> {
        if n == 0 || n > self.n_max() {
            return Err(Error::Coverage(format!("a_{n} outside 1..={}", self.n_max())));
        }
        Ok(&self.c[n - 1])
    }

    fn zero(&self) -> T {
        T::from_i64_in(0, self.c[0].precision())
    }

    fn floor_checked(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("step functions need x >= 0, got {x}")));
        }
        let n = x.floor() as usize;
        if n > self.n_max() {
            return Err(Error::Coverage(format!("x = {x} beyond a_{}", self.n_max())));
        }
        Ok(n)
    }

    /// `A(x)`.
    pub fn eval_a(&self, x: f64) -> Result<T> {
        let n = self.floor_checked(x)?;
        Ok(if n == 0 { self.zero() } else { self.partial[n - 1].clone() })
    }

    /// `A_g(x)` with `x` in the scalar type, summed term by term.
    pub fn eval_ag(&self, x: &T) -> Result<T> {
        let xf = x.to_f64();
        if !(xf >= 1.0) {
            return Err(Error::Domain(format!("A_g needs x >= 1, got {xf}")));
        }
        let n = self.floor_checked(xf)?;
        let prec = x.precision();
        let two_x = x.clone() * T::from_i64_in(2, prec);
        let mut acc = Accumulator::new(self.mode, self.zero());
        for k in 1..=n {
            acc.add(self.c[k - 1].clone() * &two_x / (x.clone() + T::from_i64_in(k as i64, prec)));
        }
        Ok(acc.value())
    }
}

/// Sums `sum_k v_k num(k)/den(k)` over table entries `v_k`, either the
/// coefficients or their partial sums.
pub trait Weighted: Scalar {
    fn weighted(seq: &ShiftedSequence<Self>, partial: bool, range: Range<usize>, w: &dyn Fn(usize) -> (i128, u64)) -> Self;
}

fn weighted_float<T: Scalar>(seq: &ShiftedSequence<T>, partial: bool, range: Range<usize>, w: &dyn Fn(usize) -> (i128, u64)) -> T {
    let src = if partial { &seq.partial } else { &seq.c };
    let prec = src[0].precision();
    let mut acc = Accumulator::new(seq.mode, seq.zero());
    for k in range {
        let (num, den) = w(k);
        let num = T::from_bigint_in(&BigInt::from(num), prec);
        acc.add(src[k].clone() * num / T::from_bigint_in(&BigInt::from(den), prec));
    }
    acc.value()
}

macro_rules! weighted_by_summation {
    ($($t:ty),*) => {$(
        impl Weighted for $t {
            fn weighted(seq: &ShiftedSequence<Self>, partial: bool, range: Range<usize>, w: &dyn Fn(usize) -> (i128, u64)) -> Self {
                weighted_float(seq, partial, range, w)
            }
        }
    )*};
}
weighted_by_summation!(f32, f64, MpFloat);

impl Weighted for BigRational {
    fn weighted(seq: &ShiftedSequence<Self>, partial: bool, range: Range<usize>, w: &dyn Fn(usize) -> (i128, u64)) -> Self {
        let cd = seq.common.get_or_init(|| CommonDenominator::new(&seq.c));
        if partial {
            cd.weighted_partial(range, w)
        } else {
            cd.weighted(range, w)
        }
    }
}

impl<T: Weighted> ShiftedSequence<T> {
    /// `A_g(p/q)`; exact for an exact table.
    pub fn eval_ag_ratio(&self, p: i64, q: u64) -> Result<T> {
        if q == 0 || p < q as i64 {
            return Err(Error::Domain(format!("A_g needs x = {p}/{q} >= 1")));
        }
        let n = (p as u64 / q) as usize;
        if n > self.n_max() {
            return Err(Error::Coverage(format!("x = {p}/{q} beyond a_{}", self.n_max())));
        }
        // a_k with k = i + 1: 2x/(x+k) = 2p / (p + k q)
        Ok(T::weighted(self, false, 0..n, &|i| (2 * p as i128, (p as u64) + (i as u64 + 1) * q)))
    }

    pub fn eval_ag_int(&self, n: usize) -> Result<T> {
        self.eval_ag_ratio(n as i64, 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// Exact fraction for exact tables, otherwise a decimal.
    pub defect: String,
    /// `|defect|` relative to the largest term of the identity.
    pub relative_defect: f64,
    pub exact_zero: bool,
    pub bound_checks: Vec<BoundCheck>,
}

fn report<T: Scalar>(identity: &str, n: usize, defect: T, scale: &[&T], bounds: Vec<BoundCheck>) -> IdentityReport {
    let d = defect.to_f64().abs();
    let s = scale.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    IdentityReport {
        identity: identity.into(),
        n,
        defect: defect.to_table_string(),
        relative_defect: if s > 0.0 { d / s } else { d },
        exact_zero: defect.is_zero(),
        bound_checks: bounds,
    }
}

impl IdentityReport {
    /// Exact zero for exact tables; relative defect within `tol` otherwise.
    pub fn passed(&self, tol: f64) -> bool {
        (self.exact_zero || self.relative_defect <= tol) && self.bound_checks.iter().all(|b| b.ok)
    }
}

/// `A_g(N) - A(N) - 2N int_1^N A(t)/(N+t)^2 dt`, the integral taken in
/// closed form on each unit interval where `A` is constant.
pub fn verify_discrete_volterra<T: Weighted>(x: usize, seq: &ShiftedSequence<T>) -> Result<IdentityReport> {
    if x == 0 {
        return Err(Error::Domain("the Volterra identity needs x >= 1".into()));
    }
    let ag = seq.eval_ag_int(x)?;
    let a = seq.eval_a(x as f64)?;
    // A(m) = C_{m-1} on [m, m+1): 2N (1/(N+m) - 1/(N+m+1)) = 2N / ((N+m)(N+m+1))
    let n = x as u64;
    let integral = T::weighted(seq, true, 0..x - 1, &|i| {
        let m = i as u64 + 1;
        (2 * n as i128, (n + m) * (n + m + 1))
    });
    let defect = ag.clone() - &a - &integral;
    Ok(report("discrete-volterra", x, defect, &[&ag, &a, &integral], vec![]))
}

/// `A_g(N) + 2N/(2N+1) a_{N+1}`.
pub fn verify_ag_identity<T: Weighted>(n: usize, seq: &ShiftedSequence<T>) -> Result<IdentityReport> {
    if n < 2 {
        return Err(Error::Domain("the A_g(N) identity needs N >= 2".into()));
    }
    let next = seq.a(n + 1)?.clone();
    let ag = seq.eval_ag_int(n)?;
    let prec = next.precision();
    let rhs = next * T::from_i64_in(2 * n as i64, prec) / T::from_i64_in(2 * n as i64 + 1, prec);
    let defect = ag.clone() + &rhs;
    Ok(report("ag-integer", n, defect, &[&ag, &rhs], vec![]))
}

/// `f_N(k) = (N-k) / ((N+k-1)(N+k))`.
pub fn f_n(n: usize, k: usize) -> BigRational {
    let (n, k) = (n as i64, k as i64);
    BigRational::new(BigInt::from(n - k), BigInt::from((n + k - 1) * (n + k)))
}

/// `N^2 max_k |f_N(k+1) - f_N(k)|` over `1 <= k <= N-1`, computed exactly.
pub fn max_scaled_delta_f(n: usize) -> f64 {
    let nn = BigRational::from_integer(BigInt::from(n * n));
    (1..n)
        .map(|k| (f_n(n, k + 1) - f_n(n, k)).abs() * &nn)
        .max()
        .map_or(0.0, |v| rational_to_f64(&v))
}

/// `A_g(N) - sum_{k=1}^{N-1} A(k) (f_N(k+1) - f_N(k))`, plus the bound
/// `N^2 |f_N(k+1) - f_N(k)| <= 3`.
pub fn bootstrap_check<T: Weighted>(n: usize, seq: &ShiftedSequence<T>) -> Result<IdentityReport> {
    if n < 2 {
        return Err(Error::Domain("the bootstrap identity needs N >= 2".into()));
    }
    seq.a(n + 1)?;
    let ag = seq.eval_ag_int(n)?;
    // Delta f_N(k) = (k + 1 - 3N) / ((N+k-1)(N+k)(N+k+1)); A(k) = C_{k-1}
    let nn = n as i128;
    let sum = T::weighted(seq, true, 0..n - 1, &|i| {
        let k = i as i128 + 1;
        (k + 1 - 3 * nn, ((nn + k - 1) * (nn + k) * (nn + k + 1)) as u64)
    });
    let defect = ag.clone() - &sum;
    let m = max_scaled_delta_f(n);
    let bound = BoundCheck { name: "N^2 max|Delta f_N|".into(), value: m, bound: 3.0, ok: m <= 3.0 };
    Ok(report("bootstrap", n, defect, &[&ag, &sum], vec![bound]))
}

/// `|A_g(N + delta) - A_g(N)| <= 2/N^2 sum_{k<=N} k |a_k|` at
/// `delta = q/4`, `q = 1, 2, 3`.
pub fn continuity_check<T: Weighted>(n: usize, seq: &ShiftedSequence<T>) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::Domain("continuity check needs N >= 1".into()));
    }
    let ag = seq.eval_ag_int(n)?;
    let bound: f64 = (1..=n).map(|k| k as f64 * seq.c[k - 1].to_f64().abs()).sum::<f64>() * 2.0 / (n * n) as f64;
    let mut checks = Vec::new();
    for q in 1..=3u64 {
        let v = seq.eval_ag_ratio(4 * n as i64 + q as i64, 4)?;
        let d = (v - &ag).to_f64().abs();
        checks.push(BoundCheck { name: format!("delta={}", q as f64 / 4.0), value: d, bound, ok: d <= bound });
    }
    Ok(report("ag-continuity", n, seq.zero(), &[&ag], checks))
}

/// Every exact identity for `N` up to `n_max`, with the bootstrap bound.
pub fn verify_all<T: Weighted>(seq: &ShiftedSequence<T>, n_max: usize) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.push(verify_discrete_volterra(n, seq)?);
        if n >= 2 {
            out.push(verify_ag_identity(n, seq)?);
            out.push(bootstrap_check(n, seq)?);
            out.push(continuity_check(n, seq)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSample {
    pub x: f64,
    pub recovered: f64,
    pub a_exact: f64,
    pub relative_error: f64,
    /// Richardson estimate from the same transfer on a grid twice as coarse.
    pub error_estimate: f64,
}

fn ag_f64(c: &[f64], t: f64, m: usize) -> f64 {
    (1..=m).map(|n| c[n - 1] * 2.0 * t / (t + n as f64)).sum()
}

/// `A_g(x) - int_0^{ln x} A_g(x e^-u) r(u) du` with `r` interpolated
/// linearly and the composite trapezoid rule on the pieces between grid
/// nodes and jumps of `A_g(x e^-u)`.
fn transfer_value(c: &[f64], rg: &ResolventGrid<f64>, x: f64) -> Result<f64> {
    let top = x.ln();
    let n = x.floor() as usize;
    let ag_x = ag_f64(c, x, n);
    if top == 0.0 {
        return Ok(ag_x);
    }
    let h = rg.grid.step;
    let mut cuts: Vec<f64> = (1..=n).map(|k| (x / k as f64).ln()).filter(|u| *u > 0.0 && *u < top).collect();
    let nodes = (top / h).floor() as usize;
    cuts.extend((1..=nodes).map(|j| j as f64 * h).filter(|u| *u < top));
    cuts.push(0.0);
    cuts.push(top);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        // the active terms are fixed inside the piece
        let m = (x * (-(0.5 * (u0 + u1))).exp()).floor() as usize;
        let f = |u: f64| -> Result<f64> { Ok(ag_f64(c, x * (-u).exp(), m) * rg.r_at(u)?) };
        total += 0.5 * (u1 - u0) * (f(u0)? + f(u1)?);
    }
    Ok(ag_x - total)
}

pub fn apply_transfer<T: Scalar>(seq: &ShiftedSequence<T>, rg: &ResolventGrid<f64>, x_grid: &[f64]) -> Result<Vec<TransferSample>> {
    let coarse = match rg.grid.coarsened() {
        Some(g) => Some(solve_resolvent::<f64>(&g, f64::INFINITY)?),
        None => None,
    };
    let c: Vec<f64> = seq.c.iter().map(Scalar::to_f64).collect();
    x_grid
        .iter()
        .map(|&x| {
            if !(x >= 1.0) || x.ln() > rg.grid.u_max * (1.0 + 1e-12) {
                return Err(Error::Coverage(format!("x = {x} outside [1, e^{}]", rg.grid.u_max)));
            }
            seq.floor_checked(x)?;
            let v = transfer_value(&c, rg, x)?;
            let est = match &coarse {
                Some(cg) => (v - transfer_value(&c, cg, x)?).abs() / 3.0,
                None => f64::NAN,
            };
            let a = seq.eval_a(x)?.to_f64();
            Ok(TransferSample { x, recovered: v, a_exact: a, relative_error: (v - a).abs() / a.abs(), error_estimate: est })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCheck {
    pub beta: f64,
    pub x: f64,
    /// `1 / (x^beta A(x))` for `A` recovered from `A_g(x) = x^-beta` through
    /// the resolvent.
    pub ratio: f64,
    /// `x^beta F_g(x)` for `F(x) = x^-beta` pushed forward through the kernel.
    pub forward_ratio: f64,
    pub target: f64,
    pub relative_error: f64,
    pub forward_relative_error: f64,
}

/// Both routes converge to `g*(beta)` as `x` grows.
pub fn transfer_mode_check(beta: f64, rg: &ResolventGrid<f64>, x_eval: f64) -> Result<ModeCheck> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let top = x_eval.ln();
    if !(x_eval > 1.0) || top > rg.grid.u_max * (1.0 + 1e-12) {
        return Err(Error::Coverage(format!("x = {x_eval} outside (1, e^{}]", rg.grid.u_max)));
    }
    let h = rg.grid.step;
    let m = (top / h).floor() as usize;
    let r = rg.r_f64();
    let trap = |f: &dyn Fn(f64, usize) -> f64| -> f64 {
        let mut s = 0.5 * (f(0.0, 0) + f(m as f64 * h, m));
        for j in 1..m {
            s += f(j as f64 * h, j);
        }
        s *= h;
        // last partial cell up to ln x
        let u_m = m as f64 * h;
        if top > u_m + 1e-15 {
            let end = f(top, usize::MAX);
            s += 0.5 * (top - u_m) * (f(u_m, m) + end);
        }
        s
    };
    let r_at = |u: f64, j: usize| if j == usize::MAX { rg.r_at(u).unwrap_or(f64::NAN) } else { r[j] };
    let resolved = 1.0 - trap(&|u, j| (beta * u).exp() * r_at(u, j));
    let forward = 1.0 + trap(&|u, _| (beta * u).exp() * kappa(u));
    let target = Evaluator64::f64().g_star(&num_complex::Complex::new(beta, 0.0))?.re;
    let ratio = 1.0 / resolved;
    Ok(ModeCheck {
        beta,
        x: x_eval,
        ratio,
        forward_ratio: forward,
        target,
        relative_error: (ratio - target).abs() / target,
        forward_relative_error: (forward - target).abs() / target,
    })
}

/// Float identity defects are compared against `2^-(bits - 20)`.
pub fn float_tolerance(bits: u32) -> f64 {
    2f64.powi(-(bits as i32 - 20))
}
