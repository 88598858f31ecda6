//! Zero counting for `D` by the argument principle, and Newton refinement.
//!
//! Boundaries are sampled adaptively: each edge starts on a uniform grid and
//! any step whose argument increment exceeds the cap is bisected. This is
//! numerical evidence, not an interval-arithmetic proof.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::{c_abs, c_to_f64};
use crate::error::{Error, Result};
use crate::mellin::MellinEvaluator;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl Rectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, tau_min: f64, tau_max: f64) -> Result<Self> {
        let ok = [sigma_min, sigma_max, tau_min, tau_max].iter().all(|v| v.is_finite());
        if !ok || sigma_min >= sigma_max || tau_min >= tau_max {
            return Err(Error::InvalidConfig(format!(
                "degenerate rectangle [{sigma_min}, {sigma_max}] x [{tau_min}, {tau_max}]"
            )));
        }
        Ok(Rectangle { sigma_min, sigma_max, tau_min, tau_max })
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.tau_max - self.tau_min
    }

    pub fn center(&self) -> Complex<f64> {
        Complex::new(0.5 * (self.sigma_min + self.sigma_max), 0.5 * (self.tau_min + self.tau_max))
    }

    pub fn conj(&self) -> Rectangle {
        Rectangle { tau_min: -self.tau_max, tau_max: -self.tau_min, ..*self }
    }

    /// Corners in counter-clockwise order starting bottom-left.
    fn corners(&self) -> [Complex<f64>; 4] {
        [
            Complex::new(self.sigma_min, self.tau_min),
            Complex::new(self.sigma_max, self.tau_min),
            Complex::new(self.sigma_max, self.tau_max),
            Complex::new(self.sigma_min, self.tau_max),
        ]
    }

    /// Euclidean distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: Complex<f64>) -> f64 {
        let dx = (self.sigma_min - p.re).max(p.re - self.sigma_max).max(0.0);
        let dy = (self.tau_min - p.im).max(p.im - self.tau_max).max(0.0);
        if dx > 0.0 || dy > 0.0 {
            return dx.hypot(dy);
        }
        (p.re - self.sigma_min)
            .min(self.sigma_max - p.re)
            .min(p.im - self.tau_min)
            .min(self.tau_max - p.im)
    }

    /// Halves along the longer side (measured after scaling the height by
    /// `aspect`), cutting at fraction `at`.
    fn split(&self, at: f64) -> (Rectangle, Rectangle) {
        if self.width() >= self.height() {
            let s = self.sigma_min + at * self.width();
            (Rectangle { sigma_max: s, ..*self }, Rectangle { sigma_min: s, ..*self })
        } else {
            let t = self.tau_min + at * self.height();
            (Rectangle { tau_max: t, ..*self }, Rectangle { tau_min: t, ..*self })
        }
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.sigma_min, self.sigma_max, self.tau_min, self.tau_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingConfig {
    /// Largest accepted argument change between neighbouring samples.
    pub max_arg_step: f64,
    pub max_depth: u32,
    pub initial_spacing: f64,
    pub modulus_floor: f64,
}

impl Default for WindingConfig {
    fn default() -> Self {
        WindingConfig { max_arg_step: PI / 2.0, max_depth: 40, initial_spacing: 0.05, modulus_floor: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingCertificate {
    pub rect: Rectangle,
    pub winding: i64,
    pub min_boundary_modulus: f64,
    pub samples_used: usize,
    /// Total argument change divided by 2 pi, before rounding.
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEstimate {
    pub re: f64,
    pub im: f64,
    pub re_decimal: String,
    pub im_decimal: String,
    pub residual_modulus: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ZeroEstimate {
    pub fn location(&self) -> Complex<f64> {
        Complex::new(self.re, self.im)
    }
}

struct Walker<'a, T: Real> {
    ev: &'a MellinEvaluator<T>,
    cfg: WindingConfig,
    samples: usize,
    min_modulus: f64,
}

impl<T: Real> Walker<'_, T> {
    fn value(&mut self, z: Complex<f64>) -> Result<Complex<f64>> {
        let v = c_to_f64(&self.ev.d_infty(&self.ev.point(z))?);
        self.samples += 1;
        let m = v.norm();
        self.min_modulus = self.min_modulus.min(m);
        if m < self.cfg.modulus_floor {
            return Err(Error::BoundaryZero { location: format!("{}{:+}i", z.re, z.im), modulus: m });
        }
        Ok(v)
    }

    /// Argument change from `a` to `b`, refined until every step is below
    /// the cap.
    fn segment(&mut self, a: Complex<f64>, fa: Complex<f64>, b: Complex<f64>, fb: Complex<f64>, depth: u32) -> Result<f64> {
        let d = (fb / fa).arg();
        if d.abs() <= self.cfg.max_arg_step {
            return Ok(d);
        }
        if depth >= self.cfg.max_depth {
            return Err(Error::NonConvergence { what: "boundary refinement".into(), iterations: depth as usize });
        }
        let m = (a + b) / 2.0;
        let fm = self.value(m)?;
        Ok(self.segment(a, fa, m, fm, depth + 1)? + self.segment(m, fm, b, fb, depth + 1)?)
    }

    fn edge(&mut self, a: Complex<f64>, b: Complex<f64>, spacing: f64) -> Result<f64> {
        let n = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
        let mut prev = a;
        let mut fprev = self.value(a)?;
        let mut total = 0.0;
        for i in 1..=n {
            let z = if i == n { b } else { a + (b - a) * (i as f64 / n as f64) };
            let fz = self.value(z)?;
            total += self.segment(prev, fprev, z, fz, 0)?;
            prev = z;
            fprev = fz;
        }
        Ok(total)
    }
}

fn check_poles<T: Real>(ev: &MellinEvaluator<T>, rect: &Rectangle) -> Result<()> {
    let r = ev.pole_radius();
    let lo = rect.sigma_min.floor().max(0.0) as i64 - 1;
    let hi = rect.sigma_max.ceil() as i64 + 1;
    for j in lo.max(0)..=hi {
        if rect.boundary_distance(Complex::new(j as f64, 0.0)) < r {
            return Err(Error::PoleProximity { location: rect.to_string(), pole: j, radius: r });
        }
    }
    Ok(())
}

/// Number of zeros minus poles of `D` inside `rect`.
pub fn winding_number<T: Real>(ev: &MellinEvaluator<T>, rect: &Rectangle, cfg: &WindingConfig) -> Result<WindingCertificate> {
    check_poles(ev, rect)?;
    let mut spacing = cfg.initial_spacing;
    let mut used = 0;
    for _ in 0..6 {
        let mut w = Walker { ev, cfg: *cfg, samples: 0, min_modulus: f64::INFINITY };
        let c = rect.corners();
        let mut total = 0.0;
        for k in 0..4 {
            total += w.edge(c[k], c[(k + 1) % 4], spacing)?;
        }
        used += w.samples;
        let raw = total / (2.0 * PI);
        let winding = raw.round();
        if (raw - winding).abs() < 0.01 {
            return Ok(WindingCertificate {
                rect: *rect,
                winding: winding as i64,
                min_boundary_modulus: w.min_modulus,
                samples_used: used,
                raw,
            });
        }
        spacing /= 2.0;
    }
    Err(Error::NonConvergence { what: format!("winding number on {rect}"), iterations: 6 })
}

/// Newton iteration `z <- z - D(z)/D'(z)`.
pub fn newton_refine<T: Real>(ev: &MellinEvaluator<T>, z0: Complex<f64>, max_iter: usize) -> Result<ZeroEstimate> {
    let tol = ev.tolerance().abs_tol;
    let mut z = ev.point(z0);
    for it in 1..=max_iter {
        let escaped = |e: Error| match e {
            Error::Pole { .. } | Error::PoleProximity { .. } => {
                Error::NonConvergence { what: format!("Newton from {z0} (ran into a pole)"), iterations: it }
            }
            other => other,
        };
        let f = ev.d_infty(&z).map_err(escaped)?;
        let fp = ev.d_infty_prime(&z).map_err(escaped)?;
        let dm = c_abs(&fp).to_f64();
        if dm < 1e-14 {
            return Err(Error::DerivativeUnderflow { location: fmt_c(c_to_f64(&z)), modulus: dm });
        }
        let step = f / fp;
        z = z - step.clone();
        let zf = c_to_f64(&z);
        if !zf.re.is_finite() || !zf.im.is_finite() || zf.norm() > 1e6 {
            return Err(Error::NonConvergence { what: format!("Newton from {z0} (escaped)"), iterations: it });
        }
        if c_abs(&step).to_f64() <= tol {
            let residual = c_abs(&ev.d_infty(&z).map_err(escaped)?).to_f64();
            if residual <= tol {
                return Ok(ZeroEstimate {
                    re: zf.re,
                    im: zf.im,
                    re_decimal: z.re.to_table_string(),
                    im_decimal: z.im.to_table_string(),
                    residual_modulus: residual,
                    iterations: it,
                    converged: true,
                });
            }
        }
    }
    Err(Error::NonConvergence { what: format!("Newton from {z0}"), iterations: max_iter })
}

pub const NEWTON_MAX_ITER: usize = 100;

/// Splits `rect` until every zero sits alone in a cell smaller than
/// `cell`; returns those cells. Split lines that pass through a zero are
/// nudged.
fn isolate<T: Real>(
    ev: &MellinEvaluator<T>,
    cert: WindingCertificate,
    cfg: &WindingConfig,
    cell: f64,
    out: &mut Vec<WindingCertificate>,
    tiles: &mut usize,
) -> Result<()> {
    if cert.winding <= 0 {
        return Ok(());
    }
    let r = cert.rect;
    if cert.winding == 1 && r.width().max(r.height()) < cell {
        out.push(cert);
        return Ok(());
    }
    if r.width().max(r.height()) < 1e-9 {
        // A multiple zero or a cluster; hand the cell to Newton as it is.
        out.push(cert);
        return Ok(());
    }
    let mut at = 0.5;
    loop {
        let (a, b) = r.split(at);
        let wa = winding_number(ev, &a, cfg);
        let wb = winding_number(ev, &b, cfg);
        match (wa, wb) {
            (Ok(ca), Ok(cb)) => {
                *tiles += 2;
                if ca.winding + cb.winding != cert.winding {
                    return Err(Error::NonConvergence {
                        what: format!("winding additivity on {r}: {} + {} != {}", ca.winding, cb.winding, cert.winding),
                        iterations: 1,
                    });
                }
                isolate(ev, ca, cfg, cell, out, tiles)?;
                return isolate(ev, cb, cfg, cell, out, tiles);
            }
            (Err(Error::BoundaryZero { .. }), _) | (_, Err(Error::BoundaryZero { .. })) if at < 0.6 => {
                at += 0.0173;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
}

const RHO1_BOX: Rectangle = Rectangle { sigma_min: 1.01, sigma_max: 1.49, tau_min: 0.01, tau_max: 100.0 };

/// The unique zero with `1 < Re z < 3/2` in the upper half-plane.
pub fn locate_rho1<T: Real>(ev: &MellinEvaluator<T>, cfg: &WindingConfig) -> Result<ZeroEstimate> {
    let cert = winding_number(ev, &RHO1_BOX, cfg)?;
    if cert.winding != 1 {
        return Err(Error::NonConvergence {
            what: format!("expected one zero in {RHO1_BOX}, winding is {}", cert.winding),
            iterations: 0,
        });
    }
    let mut cells = Vec::new();
    let mut tiles = 0;
    isolate(ev, cert, cfg, 0.05, &mut cells, &mut tiles)?;
    let cell = cells.first().ok_or_else(|| Error::NonConvergence { what: "isolating the zero".into(), iterations: 0 })?;
    newton_refine(ev, cell.rect.center(), NEWTON_MAX_ITER)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripScan {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub tau_max: f64,
    pub tiles: Vec<WindingCertificate>,
    pub zeros: Vec<ZeroEstimate>,
}

pub const DEFAULT_TAU_MIN: f64 = 0.01;

/// Tiles the upper half of the strip at half-integer vertical cuts and
/// doubling horizontal bands, then isolates and refines every counted zero.
pub fn scan_strip<T: Real>(ev: &MellinEvaluator<T>, sigma_min: f64, sigma_max: f64, tau_max: f64, cfg: &WindingConfig) -> Result<StripScan> {
    if !(tau_max > DEFAULT_TAU_MIN) {
        return Err(Error::InvalidConfig(format!("tau_max must exceed {DEFAULT_TAU_MIN}")));
    }
    Rectangle::new(sigma_min, sigma_max, DEFAULT_TAU_MIN, tau_max)?;
    let mut xs = vec![sigma_min];
    let mut h = (sigma_min - 0.5).floor() + 0.5;
    while h < sigma_max {
        if h > sigma_min + 1e-9 && h < sigma_max - 1e-9 {
            xs.push(h);
        }
        h += 1.0;
    }
    xs.push(sigma_max);
    let mut ys = vec![DEFAULT_TAU_MIN];
    let mut t = 1.0;
    while t < tau_max {
        ys.push(t);
        t *= 2.0;
    }
    ys.push(tau_max);

    let mut tiles = Vec::new();
    let mut cells = Vec::new();
    let mut n_tiles = 0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let rect = Rectangle::new(xw[0], xw[1], yw[0], yw[1])?;
            let cert = winding_number(ev, &rect, cfg)?;
            isolate(ev, cert.clone(), cfg, 0.05, &mut cells, &mut n_tiles)?;
            tiles.push(cert);
        }
    }
    let mut zeros: Vec<ZeroEstimate> = Vec::new();
    for c in cells {
        let z = newton_refine(ev, c.rect.center(), NEWTON_MAX_ITER)?;
        if !zeros.iter().any(|o| (o.location() - z.location()).norm() < 1e-8) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(StripScan { sigma_min, sigma_max, tau_max, tiles, zeros })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wall {
    /// `Re z = 0`: `Im D < 0`.
    Left,
    /// `Re z = 1`: `Re D > 0` for `y <= 2`, `Im D < 0` for `y >= 2`.
    Right,
    /// `Re z = 3/2`: `Im D < 0`.
    ThreeHalves,
}

impl Wall {
    pub fn x(&self) -> f64 {
        match self {
            Wall::Left => 0.0,
            Wall::Right => 1.0,
            Wall::ThreeHalves => 1.5,
        }
    }
}

impl FromStr for Wall {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        match t.trim_start_matches("re(z)=") {
            "0" | "left" => Ok(Wall::Left),
            "1" | "right" => Ok(Wall::Right),
            "3/2" | "1.5" | "three-halves" => Ok(Wall::ThreeHalves),
            _ => Err(Error::Parse(format!("unknown wall {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSample {
    pub y: f64,
    pub re: f64,
    pub im: f64,
    /// Which component was tested: "re>0" or "im<0".
    pub checks: Vec<String>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallReport {
    pub wall: Wall,
    pub samples: Vec<WallSample>,
    pub violations: usize,
}

pub fn wall_inequality_check<T: Real>(ev: &MellinEvaluator<T>, wall: Wall, y_grid: &[f64]) -> Result<WallReport> {
    let mut samples = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::InvalidConfig(format!("wall grid values must be positive, got {y}")));
        }
        let (re, im) = ev.wall_values(wall.x(), y)?;
        let (re, im) = (re.to_f64(), im.to_f64());
        let mut checks = Vec::new();
        let mut ok = true;
        let want_re = wall == Wall::Right && y <= 2.0;
        let want_im = wall != Wall::Right || y >= 2.0;
        if want_re {
            checks.push("re>0".to_string());
            ok &= re > 0.0;
        }
        if want_im {
            checks.push("im<0".to_string());
            ok &= im < 0.0;
        }
        samples.push(WallSample { y, re, im, checks, ok });
    }
    let violations = samples.iter().filter(|s| !s.ok).count();
    Ok(WallReport { wall, samples, violations })
}

fn fmt_c(z: Complex<f64>) -> String {
    format!("{}{:+}i", z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mellin::Evaluator64;

    #[test]
    fn rectangle_geometry() {
        let r = Rectangle::new(0.0, 2.0, 1.0, 3.0).unwrap();
        assert_eq!(r.boundary_distance(Complex::new(1.0, 2.0)), 1.0);
        assert_eq!(r.boundary_distance(Complex::new(1.0, 0.0)), 1.0);
        assert_eq!(r.boundary_distance(Complex::new(5.0, 7.0)), 5.0);
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn pole_on_boundary_is_rejected() {
        let ev = Evaluator64::f64();
        let r = Rectangle::new(0.5, 1.5, -0.5, 0.5).unwrap();
        // pole at 1 lies inside; boundary is clear, winding counts it as -1
        assert_eq!(winding_number(&ev, &r, &WindingConfig::default()).unwrap().winding, -1);
        let r = Rectangle::new(1.0005, 1.5, -0.5, 0.5).unwrap();
        assert!(matches!(winding_number(&ev, &r, &WindingConfig::default()), Err(Error::PoleProximity { pole: 1, .. })));
    }

    #[test]
    fn small_box_around_first_zero() {
        let ev = Evaluator64::f64();
        let r = Rectangle::new(1.3, 1.4, 1.0, 1.1).unwrap();
        let c = winding_number(&ev, &r, &WindingConfig::default()).unwrap();
        assert_eq!(c.winding, 1);
        assert!((c.raw - 1.0).abs() < 0.01);
        assert_eq!(winding_number(&ev, &r.conj(), &WindingConfig::default()).unwrap().winding, 1);
    }

    #[test]
    fn newton_from_nearby_start() {
        let ev = Evaluator64::f64();
        let z = newton_refine(&ev, Complex::new(1.3, 1.0), NEWTON_MAX_ITER).unwrap();
        assert!((z.location() - Complex::new(1.34652, 1.05516)).norm() < 1e-5);
        let zc = newton_refine(&ev, z.location().conj(), NEWTON_MAX_ITER).unwrap();
        assert!((zc.location() - z.location().conj()).norm() < 1e-12);
        assert!(newton_refine(&ev, Complex::new(0.5, 0.0), NEWTON_MAX_ITER).is_err());
    }

    #[test]
    fn wall_parsing() {
        assert_eq!("Re(z)=1".parse::<Wall>().unwrap(), Wall::Right);
        assert_eq!("re(z) = 3/2".parse::<Wall>().unwrap(), Wall::ThreeHalves);
        assert_eq!("0".parse::<Wall>().unwrap(), Wall::Left);
        assert!("2".parse::<Wall>().is_err());
    }

    #[test]
    fn walls_have_the_expected_signs() {
        let ev = Evaluator64::f64();
        let low: Vec<f64> = (1..=20).map(|k| k as f64 * 0.1).collect();
        let high: Vec<f64> = (2..=50).map(|k| k as f64).collect();
        let wide: Vec<f64> = (1..=500).map(|k| k as f64 * 0.1).collect();
        assert_eq!(wall_inequality_check(&ev, Wall::Right, &low).unwrap().violations, 0);
        assert_eq!(wall_inequality_check(&ev, Wall::Right, &high).unwrap().violations, 0);
        assert_eq!(wall_inequality_check(&ev, Wall::ThreeHalves, &wide).unwrap().violations, 0);
        assert_eq!(wall_inequality_check(&ev, Wall::Left, &wide).unwrap().violations, 0);
    }

    #[test]
    fn strip_counts() {
        let ev = Evaluator64::f64();
        let cfg = WindingConfig::default();
        let w = |a, b, c, d| winding_number(&ev, &Rectangle::new(a, b, c, d).unwrap(), &cfg).unwrap().winding;
        assert_eq!(w(0.01, 0.99, 0.01, 100.0), 0);
        assert_eq!(w(1.01, 1.49, 0.01, 100.0), 1);
        assert_eq!(w(-1.0, -0.01, 0.5, 10.0), 0);
        // additivity across a cut through the strip
        assert_eq!(w(1.01, 1.49, 0.01, 1.0) + w(1.01, 1.49, 1.0, 100.0), 1);
    }

    #[test]
    fn first_zero_by_isolation() {
        let ev = Evaluator64::f64();
        let z = locate_rho1(&ev, &WindingConfig::default()).unwrap();
        assert!((z.location() - Complex::new(1.346516491475, 1.055160064278)).norm() < 1e-10);
        assert!(z.converged && z.residual_modulus < 1e-12);
    }

    #[test]
    fn strip_scans() {
        let ev = Evaluator64::f64();
        let cfg = WindingConfig::default();
        let s = scan_strip(&ev, 1.0 + 1e-2, 1.5, 100.0, &cfg).unwrap();
        assert_eq!(s.zeros.len(), 1);
        assert!(scan_strip(&ev, 0.01, 0.99, 100.0, &cfg).unwrap().zeros.is_empty());
        let far = scan_strip(&ev, 1.51, 3.49, 50.0, &cfg).unwrap();
        assert!(!far.zeros.is_empty());
        assert!(far.zeros.iter().all(|z| z.re > 2.3465));
    }
}
