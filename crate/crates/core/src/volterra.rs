//! Resolvent of the multiplicative Volterra equation with kernel
//! `k(y) = 2y/(1+y)^2`.
//!
//! In `u = ln y` the equation `R + R * k = k` becomes the additive
//! second-kind equation `r(u) + int_0^u r(u-v) kappa(v) dv = kappa(u)` with
//! `kappa(u) = k(e^u) = 1 / (2 cosh^2(u/2))`. It is solved by marching with
//! the product trapezoid rule.

use std::io::{BufRead, Write};

use num_complex::Complex;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{loglog_fit, FitReport};
use crate::error::{Error, Result};
use crate::mellin::Evaluator64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub u_max: f64,
    pub step: f64,
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid { u_max: 8.0, step: 1.0 / 1024.0 }
    }
}

impl LogGrid {
    pub fn new(u_max: f64, step: f64) -> Result<Self> {
        if !(u_max > 0.0 && step > 0.0 && u_max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid needs positive u_max and step, got {u_max}, {step}")));
        }
        let n = (u_max / step).round();
        if n < 2.0 || ((u_max / step) - n).abs() > 1e-9 * n {
            return Err(Error::InvalidConfig(format!("u_max / step = {} is not an integer >= 2", u_max / step)));
        }
        if n > 1e7 {
            return Err(Error::ResourceLimit(format!("{n} grid intervals")));
        }
        Ok(LogGrid { u_max, step })
    }

    /// Number of intervals; nodes are `0..=intervals()`.
    pub fn intervals(&self) -> usize {
        (self.u_max / self.step).round() as usize
    }

    pub fn u(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    pub fn y_max(&self) -> f64 {
        self.u_max.exp()
    }

    pub fn coarsened(&self) -> Option<LogGrid> {
        (self.intervals() % 2 == 0).then(|| LogGrid { u_max: self.u_max, step: 2.0 * self.step })
    }

    pub fn refined(&self) -> LogGrid {
        LogGrid { u_max: self.u_max, step: self.step / 2.0 }
    }
}

pub fn kernel_k<T: Float>(y: T) -> Result<T> {
    let one = T::one();
    if !(y >= one) {
        return Err(Error::Domain(format!("k(y) needs y >= 1, got {:?}", y.to_f64())));
    }
    let two = one + one;
    Ok(two * y / ((one + y) * (one + y)))
}

/// `k(e^u)`, written to stay accurate for large `u`.
pub fn kappa<T: Float>(u: T) -> T {
    let two = T::one() + T::one();
    let c = (u / two).cosh();
    T::one() / (two * c * c)
}

fn cast<T: Float>(v: f64) -> T {
    T::from(v).expect("f64 fits the float type")
}

/// Product-trapezoid convolution `int_0^{u_i} f(u_i - v) g(v) dv` at every node.
fn convolve<T: Float>(f: &[T], g: &[T], h: T) -> Vec<T> {
    let half = cast::<T>(0.5);
    (0..f.len())
        .map(|i| {
            if i == 0 {
                return T::zero();
            }
            let mut s = half * (f[i] * g[0] + f[0] * g[i]);
            for j in 1..i {
                s = s + f[i - j] * g[j];
            }
            s * h
        })
        .collect()
}

pub fn kappa_samples<T: Float>(grid: &LogGrid) -> Vec<T> {
    (0..=grid.intervals()).map(|j| kappa(cast::<T>(grid.u(j)))).collect()
}

/// Samples of the `n`-fold convolution power of `kappa`.
pub fn neumann_partial<T: Float>(grid: &LogGrid, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidConfig("convolution power must be at least 1".into()));
    }
    let kap = kappa_samples::<T>(grid);
    let h = cast::<T>(grid.step);
    let mut cur = kap.clone();
    for _ in 1..n {
        cur = convolve(&cur, &kap, h);
    }
    Ok(cur)
}

/// `2^n e^-u u^(n-1) / (n-1)!`, the bound on the `n`-th iterate.
pub fn iterated_bound(n: usize, u: f64) -> f64 {
    let mut v = 2f64.powi(n as i32) * (-u).exp();
    for k in 1..n {
        v *= u / k as f64;
    }
    v
}

/// Alternating Neumann sum `sum_{n=1}^{terms} (-1)^(n+1) kappa^{*n}`.
pub fn neumann_series<T: Float>(grid: &LogGrid, terms: usize) -> Result<Vec<T>> {
    if terms == 0 {
        return Err(Error::InvalidConfig("need at least one Neumann term".into()));
    }
    let kap = kappa_samples::<T>(grid);
    let h = cast::<T>(grid.step);
    let mut cur = kap.clone();
    let mut sum = kap.clone();
    for n in 2..=terms {
        cur = convolve(&cur, &kap, h);
        for (s, c) in sum.iter_mut().zip(&cur) {
            *s = if n % 2 == 0 { *s - *c } else { *s + *c };
        }
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventGrid<T> {
    pub grid: LogGrid,
    pub kappa: Vec<T>,
    pub r: Vec<T>,
    pub residual_sup: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventHeader {
    pub step: f64,
    pub u_max: f64,
    pub residual_sup: f64,
    pub tol: f64,
}

pub const DEFAULT_TOL: f64 = 1e-10;

fn march<T: Float>(grid: &LogGrid, kap: &[T]) -> Vec<T> {
    let h = cast::<T>(grid.step);
    let half = cast::<T>(0.5);
    let denom = T::one() + half * h * kap[0];
    let mut r = vec![T::zero(); kap.len()];
    r[0] = kap[0];
    for i in 1..kap.len() {
        let mut s = half * r[0] * kap[i];
        for j in 1..i {
            s = s + r[i - j] * kap[j];
        }
        r[i] = (kap[i] - h * s) / denom;
    }
    r
}

/// Largest defect `|r + r * kappa - kappa|` over the nodes, summed in the
/// opposite order to the march.
fn residual<T: Float>(grid: &LogGrid, kap: &[T], r: &[T]) -> f64 {
    let h = cast::<T>(grid.step);
    let half = cast::<T>(0.5);
    let mut worst = 0.0f64;
    for i in 0..r.len() {
        let conv = if i == 0 {
            T::zero()
        } else {
            let mut s = T::zero();
            for j in (1..i).rev() {
                s = s + r[j] * kap[i - j];
            }
            (s + half * (r[i] * kap[0] + r[0] * kap[i])) * h
        };
        let d = (r[i] + conv - kap[i]).abs().to_f64().unwrap_or(f64::INFINITY);
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    worst
}

pub fn solve_resolvent<T: Float>(grid: &LogGrid, tol: f64) -> Result<ResolventGrid<T>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let kap = kappa_samples::<T>(grid);
    let r = march(grid, &kap);
    let residual_sup = residual(grid, &kap, &r);
    if residual_sup > tol {
        return Err(Error::ToleranceNotMet { residual: residual_sup, tol });
    }
    Ok(ResolventGrid { grid: *grid, kappa: kap, r, residual_sup, tol })
}

impl<T: Float> ResolventGrid<T> {
    pub fn header(&self) -> ResolventHeader {
        ResolventHeader { step: self.grid.step, u_max: self.grid.u_max, residual_sup: self.residual_sup, tol: self.tol }
    }

    pub fn r_f64(&self) -> Vec<f64> {
        self.r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `r` at arbitrary `u` by linear interpolation between nodes.
    pub fn r_at(&self, u: f64) -> Result<f64> {
        let n = self.grid.intervals();
        if !(u >= 0.0) || u > self.grid.u_max * (1.0 + 1e-12) {
            return Err(Error::Coverage(format!("u = {u} outside [0, {}]", self.grid.u_max)));
        }
        let t = u / self.grid.step;
        let j = (t.floor() as usize).min(n - 1);
        let f = t - j as f64;
        let a = self.r[j].to_f64().unwrap_or(f64::NAN);
        let b = self.r[j + 1].to_f64().unwrap_or(f64::NAN);
        Ok(a + f * (b - a))
    }

    /// Nodes where `|R(y)| > 2y`.
    pub fn global_bound_violations(&self) -> Vec<usize> {
        (0..self.r.len())
            .filter(|&j| self.r[j].abs().to_f64().unwrap_or(f64::INFINITY) > 2.0 * self.grid.u(j).exp())
            .collect()
    }

    /// Largest difference from the alternating Neumann sum on `u <= u_cut`.
    pub fn neumann_cross_check(&self, terms: usize, u_cut: f64) -> Result<f64> {
        let m = ((u_cut.min(self.grid.u_max)) / self.grid.step).floor() as usize;
        let sub = LogGrid { u_max: m as f64 * self.grid.step, step: self.grid.step };
        let s = neumann_series::<T>(&sub, terms)?;
        Ok(s.iter().zip(&self.r).map(|(a, b)| (*a - *b).abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {}", serde_json::to_string(&self.header())?)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["u", "y", "kappa", "r"])?;
        for j in 0..self.r.len() {
            let u = self.grid.u(j);
            let k = self.kappa[j].to_f64().unwrap_or(f64::NAN);
            let r = self.r[j].to_f64().unwrap_or(f64::NAN);
            out.write_record([u, u.exp(), k, r].map(|v| format!("{v:.17e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

impl ResolventGrid<f64> {
    /// Reads what [`ResolventGrid::write_csv`] produced.
    pub fn read_csv<R: BufRead>(mut rd: R) -> Result<Self> {
        let mut first = String::new();
        rd.read_line(&mut first)?;
        let json = first.trim().strip_prefix('#').ok_or_else(|| Error::Parse("missing resolvent header".into()))?;
        let h: ResolventHeader = serde_json::from_str(json.trim())?;
        let grid = LogGrid::new(h.u_max, h.step)?;
        let mut rdr = csv::Reader::from_reader(rd);
        let (mut kap, mut r) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k).and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse(format!("bad resolvent row {rec:?}")))
            };
            kap.push(num(2)?);
            r.push(num(3)?);
        }
        if r.len() != grid.intervals() + 1 {
            return Err(Error::Parse(format!("expected {} rows, found {}", grid.intervals() + 1, r.len())));
        }
        Ok(ResolventGrid { grid, kappa: kap, r, residual_sup: h.residual_sup, tol: h.tol })
    }
}

/// Block width in `u` for the decay envelope.
pub const DECAY_BLOCK: f64 = 0.5;
pub const DECAY_WINDOW_MIN: f64 = 10.0;

/// Slope of `log max|r|` over blocks of width 0.5 in `u` against `log y`.
pub fn decay_fit<T: Float>(grid: &LogGrid, r: &[T], window: (f64, f64)) -> Result<FitReport> {
    let (a, b) = window;
    if !(a >= DECAY_WINDOW_MIN * (1.0 - 1e-12)) || !(b <= grid.y_max() * (1.0 + 1e-12)) || !(a < b) {
        return Err(Error::Coverage(format!(
            "decay window [{a}, {b}] must lie in [{DECAY_WINDOW_MIN}, {:.6}]",
            grid.y_max()
        )));
    }
    let (ua, ub) = (a.ln(), b.ln().min(grid.u_max));
    let n = grid.intervals();
    let node = |u: f64| ((u / grid.step).round() as usize).min(n);
    let mut points = Vec::new();
    let mut lo = ua;
    while lo < ub - 1e-12 {
        let hi = (lo + DECAY_BLOCK).min(ub);
        let (mut best, mut arg) = (0.0f64, node(lo));
        for j in node(lo)..=node(hi) {
            let m = r[j].abs().to_f64().unwrap_or(0.0);
            if m > best {
                best = m;
                arg = j;
            }
        }
        if best > 0.0 && best.is_finite() {
            points.push((grid.u(arg).exp(), best));
        }
        lo = hi;
    }
    loglog_fit(&points, window)
}

pub fn resolvent_decay_fit<T: Float>(rg: &ResolventGrid<T>, window: (f64, f64)) -> Result<FitReport> {
    decay_fit(&rg.grid, &rg.r, window)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MellinCheck {
    pub s_re: f64,
    pub s_im: f64,
    pub value_re: f64,
    pub value_im: f64,
    /// Part of the value coming from beyond the grid.
    pub tail_re: f64,
    pub tail_im: f64,
    pub tail_exponent: f64,
    /// Discretisation error estimate of the on-grid part.
    pub error_estimate: f64,
    pub tail_error: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub deviation: f64,
}

fn simpson(f: &[Complex<f64>], h: f64) -> Complex<f64> {
    let n = f.len() - 1;
    if n % 2 == 1 {
        // odd number of intervals: Simpson on all but the last, trapezoid there
        return simpson(&f[..n], h) + (f[n - 1] + f[n]) * (h / 2.0);
    }
    let mut s = f[0] + f[n];
    for (j, v) in f.iter().enumerate().take(n).skip(1) {
        s += v * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * (h / 3.0)
}

/// `int_1^inf R(y) y^-s dy/y` from the grid, compared with `1 - 1/g*(-s)`.
///
/// The on-grid part uses Simpson's rule on the Richardson combination of
/// this grid and one twice as coarse; its error estimate is the distance to
/// the plain trapezoid value. Beyond `u_max`, `r` is continued as
/// `r(u_max) e^{p (u - u_max)}` with `p` the fitted decay exponent.
pub fn resolvent_mellin<T: Float>(s: Complex<f64>, rg: &ResolventGrid<T>) -> Result<MellinCheck> {
    if !(s.re > 1.0) {
        return Err(Error::Domain(format!("Mellin quadrature needs Re s > 1, got {}", s.re)));
    }
    let g = &rg.grid;
    let fine = rg.r_f64();
    let weight = |j: usize, h: f64| (-s * (j as f64 * h)).exp();
    let trap: Complex<f64> = {
        let n = fine.len() - 1;
        let mut acc = (weight(0, g.step) * fine[0] + weight(n, g.step) * fine[n]) * 0.5;
        for (j, v) in fine.iter().enumerate().take(n).skip(1) {
            acc += weight(j, g.step) * v;
        }
        acc * g.step
    };
    let grid_part = match g.coarsened() {
        Some(cg) => {
            let coarse: Vec<f64> = march::<T>(&cg, &kappa_samples::<T>(&cg)).iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
            let rich: Vec<Complex<f64>> = coarse
                .iter()
                .enumerate()
                .map(|(j, c)| weight(j, cg.step) * ((4.0 * fine[2 * j] - c) / 3.0))
                .collect();
            simpson(&rich, cg.step)
        }
        None => {
            let f: Vec<Complex<f64>> = fine.iter().enumerate().map(|(j, v)| weight(j, g.step) * v).collect();
            simpson(&f, g.step)
        }
    };
    let error_estimate = (grid_part - trap).norm();

    let y_max = g.y_max();
    let p = if y_max >= DECAY_WINDOW_MIN * 7.4 {
        decay_fit(g, &rg.r, (DECAY_WINDOW_MIN, y_max)).map(|f| f.exponent).unwrap_or(1.0)
    } else {
        1.0
    };
    // |R(y)| <= 2y bounds the tail whatever the fit says.
    let p = p.min(1.0);
    let r_end = *fine.last().expect("grid has nodes");
    let tail = r_end * (-s * g.u_max).exp() / (s - p);
    let tail_error = tail.norm().max(f64::MIN_POSITIVE);

    let value = grid_part + tail;
    let ev = Evaluator64::f64();
    let gs = ev.g_star(&(-s))?;
    let target = Complex::new(1.0, 0.0) - gs.inv();
    Ok(MellinCheck {
        s_re: s.re,
        s_im: s.im,
        value_re: value.re,
        value_im: value.im,
        tail_re: tail.re,
        tail_im: tail.im,
        tail_exponent: p,
        error_estimate,
        tail_error,
        target_re: target.re,
        target_im: target.im,
        deviation: (value - target).norm(),
    })
}
