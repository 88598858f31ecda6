//! Helpers for `Complex<T>` over any [`Real`]. `num-complex` only provides
//! the transcendental functions for primitive floats.

use num_complex::Complex;

use crate::scalar::Real;

pub type ComplexValue<T> = Complex<T>;

pub fn c_new<T: Real>(re: f64, im: f64, prec: T::Precision) -> Complex<T> {
    Complex::new(T::from_f64_in(re, prec), T::from_f64_in(im, prec))
}

pub fn c_from_f64<T: Real>(z: Complex<f64>, prec: T::Precision) -> Complex<T> {
    c_new(z.re, z.im, prec)
}

pub fn c_to_f64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn c_abs<T: Real>(z: &Complex<T>) -> T {
    (z.re.clone() * &z.re + z.im.clone() * &z.im).sqrt()
}

pub fn c_inv<T: Real>(z: &Complex<T>) -> Complex<T> {
    let d = z.re.clone() * &z.re + z.im.clone() * &z.im;
    Complex::new(z.re.clone() / &d, -(z.im.clone() / &d))
}

/// Principal logarithm.
pub fn c_ln<T: Real>(z: &Complex<T>) -> Complex<T> {
    Complex::new(c_abs(z).ln(), z.im.atan2(&z.re))
}

pub fn c_is_finite<T: Real>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn c_scale<T: Real>(z: &Complex<T>, s: &T) -> Complex<T> {
    Complex::new(z.re.clone() * s, z.im.clone() * s)
}

/// Distance to the nearest integer in `lo..` on the real axis, with that integer.
pub fn nearest_integer_at_or_above<T: Real>(z: &Complex<T>, lo: i64) -> (i64, f64) {
    let x = z.re.to_f64();
    let j = x.round().max(lo as f64) as i64;
    let d = Complex::new(x - j as f64, z.im.to_f64()).norm();
    (j, d)
}

pub fn is_real_integer<T: Real>(z: &Complex<T>) -> Option<i64> {
    if z.im.is_zero() && z.re.floor() == z.re {
        Some(z.re.floor_i64())
    } else {
        None
    }
}
