//! Decay exponents and oscillation parameters measured from sequences.
//!
//! Sequences are indexed by `n`: `seq[n]` is the value at `n`, and windows
//! are inclusive index ranges. Outputs that probe the conjectured
//! oscillatory form carry the label "consistency probe".

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const PROBE_LABEL: &str = "consistency probe";

/// Multiplicative width of the blocks whose maxima form the envelope.
pub const ENVELOPE_BLOCK: f64 = 1.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub exponent: f64,
    pub standard_error: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    pub residual_rms: f64,
    /// Abscissae and values of the envelope points used.
    pub points: Vec<(f64, f64)>,
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, standard error of slope, residual rms)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InsufficientExtrema { found: n.min(y.len()), needed: 2 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let se = if n > 2 { (ss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, intercept, se, (ss / nf).sqrt()))
}

/// Fits `log|v|` against `log x` over the given points.
pub fn loglog_fit(points: &[(f64, f64)], window: (f64, f64)) -> Result<FitReport> {
    if points.len() < 4 {
        return Err(Error::InsufficientExtrema { found: points.len(), needed: 4 });
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let (slope, intercept, se, rms) = linear_fit(&x, &y)?;
    Ok(FitReport {
        exponent: slope,
        standard_error: se,
        intercept,
        window,
        n_points: points.len(),
        residual_rms: rms,
        points: points.to_vec(),
    })
}

fn check_window(len: usize, window: (usize, usize), min_len: usize) -> Result<()> {
    let (lo, hi) = window;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidConfig(format!("window [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
    }
    if hi >= len {
        return Err(Error::Coverage(format!("window ends at {hi}, sequence has {len} entries")));
    }
    if hi - lo < min_len {
        return Err(Error::InvalidConfig(format!("window [{lo}, {hi}] is shorter than {min_len}")));
    }
    Ok(())
}

/// Slope of `log max|seq|` against `log n`, maxima taken over consecutive
/// blocks `[m, 1.3 m)` tiling the window. Zero maxima are skipped.
pub fn envelope_exponent<T: Scalar>(seq: &[T], window: (usize, usize)) -> Result<FitReport> {
    check_window(seq.len(), window, 50)?;
    let (lo, hi) = window;
    let mut points = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = (((a as f64) * ENVELOPE_BLOCK).ceil() as usize).max(a + 1).min(hi + 1);
        let (mut best, mut arg) = (0.0f64, a);
        for (n, v) in seq.iter().enumerate().take(b).skip(a) {
            let m = v.to_f64().abs();
            if m > best {
                best = m;
                arg = n;
            }
        }
        if best > 0.0 && best.is_finite() {
            points.push((arg as f64, best));
        }
        a = b;
    }
    loglog_fit(&points, (lo as f64, hi as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub label: String,
    pub amplitude: f64,
    pub exponent: f64,
    pub frequency: f64,
    pub phase: f64,
    /// First index of each new sign.
    pub sign_change_positions: Vec<usize>,
    /// Linearly interpolated zero crossings.
    pub crossings: Vec<f64>,
    pub mean_log_spacing: f64,
    pub window: (usize, usize),
    pub converged: bool,
    pub iterations: usize,
    pub residual_rms: f64,
}

impl OscillationReport {
    /// Starting point for [`oscillatory_fit`] with a decay exponent taken
    /// from an envelope fit of the same sequence.
    pub fn with_exponent(mut self, delta: f64) -> Self {
        self.exponent = delta;
        self
    }
}

/// Sign changes of `seq` inside the window. The frequency is initialised to
/// `pi / mean log-spacing`.
pub fn sign_changes<T: Scalar>(seq: &[T], window: (usize, usize)) -> Result<OscillationReport> {
    check_window(seq.len(), window, 1)?;
    let (lo, hi) = window;
    let vals: Vec<f64> = seq[lo..=hi].iter().map(Scalar::to_f64).collect();
    let mut positions = Vec::new();
    let mut crossings = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &v) in vals.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let n = lo + i;
        if let Some((m, u)) = last {
            if (u < 0.0) != (v < 0.0) {
                positions.push(n);
                // crossing between m and n, which are adjacent unless zeros intervene
                crossings.push(m as f64 + (n - m) as f64 * u / (u - v));
            }
        }
        last = Some((n, v));
    }
    if positions.len() < 3 {
        return Err(Error::InsufficientSignChanges { found: positions.len(), needed: 3 });
    }
    let spacings: Vec<f64> = crossings.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    Ok(OscillationReport {
        label: PROBE_LABEL.into(),
        amplitude: 0.0,
        exponent: 0.0,
        frequency: PI / mean,
        phase: 0.0,
        sign_change_positions: positions,
        crossings,
        mean_log_spacing: mean,
        window,
        converged: false,
        iterations: 0,
        residual_rms: f64::NAN,
    })
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
fn solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c] == 0.0 || !m[p][c].is_finite() {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..4 {
            let f = m[r][c] / m[c][c];
            for k in c..4 {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

pub const OSC_MAX_ITER: usize = 200;

/// Least squares for `seq[n] ~ A n^-delta sin(P ln n + phi)` by
/// Levenberg-Marquardt. When `init.amplitude` is zero, `A` and `phi` are
/// first solved linearly for the initial `delta` and `P`.
pub fn oscillatory_fit<T: Scalar>(seq: &[T], window: (usize, usize), init: &OscillationReport) -> Result<OscillationReport> {
    check_window(seq.len(), window, 4)?;
    let (lo, hi) = window;
    let data: Vec<(f64, f64)> = (lo..=hi).map(|n| ((n as f64).ln(), seq[n].to_f64())).collect();
    let scale = data.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain("sequence vanishes on the window".into()));
    }
    let (mut amp, mut phi) = (init.amplitude, init.phase);
    let (delta, freq) = (init.exponent, init.frequency);
    if amp == 0.0 {
        // y = e^{-delta L}(u sin(PL) + v cos(PL)), u = A cos phi, v = A sin phi
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, y) in &data {
            let e = (-delta * l).exp();
            let (s, c) = ((freq * l).sin() * e, (freq * l).cos() * e);
            s11 += s * s;
            s12 += s * c;
            s22 += c * c;
            b1 += s * y;
            b2 += c * y;
        }
        let det = s11 * s22 - s12 * s12;
        if det == 0.0 {
            return Err(Error::Domain("degenerate initialisation".into()));
        }
        let u = (b1 * s22 - b2 * s12) / det;
        let v = (s11 * b2 - s12 * b1) / det;
        amp = u.hypot(v);
        phi = v.atan2(u);
    }
    // Fit in L - l0 so that amplitude/exponent and phase/frequency decouple.
    let l0 = 0.5 * (data[0].0 + data[data.len() - 1].0);
    let data: Vec<(f64, f64)> = data.into_iter().map(|(l, y)| (l - l0, y)).collect();
    let mut p = [amp * (-delta * l0).exp(), delta, freq, phi + freq * l0];
    let cost = |p: &[f64; 4]| -> f64 {
        data.iter()
            .map(|&(l, y)| (y - p[0] * (-p[1] * l).exp() * (p[2] * l + p[3]).sin()).powi(2))
            .sum::<f64>()
    };
    let mut c0 = cost(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut it = 0;
    while it < OSC_MAX_ITER {
        it += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for &(l, y) in &data {
            let e = (-p[1] * l).exp();
            let (s, c) = ((p[2] * l + p[3]).sin(), (p[2] * l + p[3]).cos());
            let f = p[0] * e * s;
            let j = [e * s, -l * f, p[0] * e * c * l, p[0] * e * c];
            let r = y - f;
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve4(m, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let cand = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let c1 = cost(&cand);
            if c1.is_finite() && c1 <= c0 {
                let small = step.iter().zip(&cand).all(|(d, v)| d.abs() <= 1e-13 * v.abs().max(1.0));
                let stalled = c0 - c1 <= 1e-15 * c0;
                p = cand;
                c0 = c1;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small || (stalled && lambda <= 1e-12) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "oscillatory fit".into(), iterations: it });
    }
    // Canonical form: A > 0, phi in (-pi, pi].
    let (mut a, mut ph) = (p[0] * (p[1] * l0).exp(), p[3] - p[2] * l0);
    if a < 0.0 {
        a = -a;
        ph += PI;
    }
    ph = (ph + PI).rem_euclid(2.0 * PI) - PI;
    Ok(OscillationReport {
        label: PROBE_LABEL.into(),
        amplitude: a,
        exponent: p[1],
        frequency: p[2],
        phase: ph,
        sign_change_positions: init.sign_change_positions.clone(),
        crossings: init.crossings.clone(),
        mean_log_spacing: init.mean_log_spacing,
        window,
        converged,
        iterations: it,
        residual_rms: (c0 / data.len() as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub lo: usize,
    pub hi: usize,
    pub argmax: usize,
    pub max_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    pub power: f64,
    pub blocks: Vec<DyadicBlock>,
    /// Slope of `log max` against `log` block midpoint.
    pub trend: f64,
    /// True when the block maxima never exceed the first block maximum and
    /// the trend is not positive.
    pub bounded: bool,
}

/// `max n^power |seq[n]|` over the dyadic blocks `[lo 2^k, lo 2^(k+1))`
/// clipped to `hi`.
pub fn dyadic_scaled_max<T: Scalar>(seq: &[T], window: (usize, usize), power: f64) -> Result<DyadicReport> {
    check_window(seq.len(), window, 1)?;
    let (lo, hi) = window;
    let mut blocks = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = (2 * a).min(hi + 1);
        let (mut best, mut arg) = (0.0f64, a);
        for n in a..b {
            let v = (n as f64).powf(power) * seq[n].to_f64().abs();
            if v > best {
                best = v;
                arg = n;
            }
        }
        blocks.push(DyadicBlock { lo: a, hi: b - 1, argmax: arg, max_scaled: best });
        a = b;
    }
    let trend = if blocks.len() >= 2 {
        let x: Vec<f64> = blocks.iter().map(|b| (0.5 * (b.lo + b.hi) as f64).ln()).collect();
        let y: Vec<f64> = blocks.iter().map(|b| b.max_scaled.max(f64::MIN_POSITIVE).ln()).collect();
        linear_fit(&x, &y)?.0
    } else {
        0.0
    };
    let first = blocks[0].max_scaled;
    let bounded = blocks.iter().all(|b| b.max_scaled.is_finite() && b.max_scaled <= first * (1.0 + 1e-12)) && trend <= 0.0;
    Ok(DyadicReport { power, blocks, trend, bounded })
}

/// Plot-ready rows `(n, value, fitted, residual)` for a fitted oscillation.
pub fn fit_rows<T: Scalar>(seq: &[T], fit: &OscillationReport) -> Vec<(usize, f64, f64, f64)> {
    let (lo, hi) = fit.window;
    (lo..=hi.min(seq.len().saturating_sub(1)))
        .map(|n| {
            let l = (n as f64).ln();
            let y = seq[n].to_f64();
            let f = fit.amplitude * (-fit.exponent * l).exp() * (fit.frequency * l + fit.phase).sin();
            (n, y, f, y - f)
        })
        .collect()
}
