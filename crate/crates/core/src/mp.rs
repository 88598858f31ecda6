//! Multi-precision binary floating point.
//!
//! `MpFloat` wraps [`astro_float::BigFloat`] and gives it the `num-traits`
//! surface the generic code needs. Binary operations round to the larger of
//! the two operand precisions, so constants built at 64 bits (`zero()`,
//! `one()`) never drag a computation down. Precision is counted in bits and
//! always a multiple of the 64-bit word.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::BigInt;
use num_traits::{Num, One, Signed, Zero};

use crate::scalar::{Real, Scalar};

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = Word::BITS as usize;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Round a requested bit count up to whole words.
pub fn word_aligned(bits: usize) -> usize {
    bits.max(1).div_ceil(WORD_BITS) * WORD_BITS
}

#[derive(Clone)]
pub struct MpFloat(BigFloat);

impl MpFloat {
    pub fn from_f64(v: f64, bits: usize) -> Self {
        MpFloat(BigFloat::from_f64(v, word_aligned(bits)))
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        MpFloat(BigFloat::from_i64(v, word_aligned(bits)))
    }

    pub fn from_bigint(v: &BigInt, bits: usize) -> Self {
        let p = word_aligned(bits);
        let (sign, digits) = v.to_u64_digits();
        if digits.is_empty() {
            return MpFloat(BigFloat::from_i64(0, p));
        }
        let words: Vec<Word> = digits.iter().flat_map(|d| split_digit(*d)).collect();
        let e = (words.len() * WORD_BITS) as i32;
        let s = if sign == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
        let mut x = BigFloat::from_words(&words, s, e);
        x.set_precision(p, RM).expect("precision within limits");
        MpFloat(x)
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    pub fn bits(&self) -> usize {
        self.0.precision().unwrap_or(WORD_BITS)
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        let mut x = self.0.clone();
        // Only fails for NaN/inf, which keep their flavour.
        let _ = x.set_precision(word_aligned(bits), RM);
        MpFloat(x)
    }

    fn p2(&self, other: &Self) -> usize {
        self.bits().max(other.bits())
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.0.is_zero() {
            return 0.0;
        }
        let (m, _, sign, e, _) = self.0.as_raw_parts().expect("finite value");
        // value = 0.m * 2^e with the most significant word last.
        let n = m.len();
        let hi = m[n - 1] as f64;
        let lo = if n > 1 { m[n - 2] as f64 } else { 0.0 };
        let frac = (hi + lo / 2f64.powi(WORD_BITS as i32)) / 2f64.powi(WORD_BITS as i32);
        let v = scale2(frac, e);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    pub fn pi(bits: usize) -> Self {
        MpFloat(with_consts(|cc| cc.pi(word_aligned(bits), RM)))
    }
}

#[cfg(target_pointer_width = "64")]
fn split_digit(d: u64) -> [Word; 1] {
    [d as Word]
}

#[cfg(not(target_pointer_width = "64"))]
fn split_digit(d: u64) -> [Word; 2] {
    [d as Word, (d >> 32) as Word]
}

fn scale2(x: f64, e: i32) -> f64 {
    // Two steps so that neither factor over- or underflows on its own.
    let a = e / 2;
    x * 2f64.powi(a) * 2f64.powi(e - a)
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpFloat({}, {} bits)", self.0, self.bits())
    }
}

impl PartialEq for MpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:ident) => {
        impl<'a> $tr<&'a MpFloat> for &'a MpFloat {
            type Output = MpFloat;
            fn $m(self, rhs: &'a MpFloat) -> MpFloat {
                MpFloat(self.0.$op(&rhs.0, self.p2(rhs), RM))
            }
        }
        impl<'a> $tr<&'a MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $m(self, rhs: &'a MpFloat) -> MpFloat {
                (&self).$m(rhs)
            }
        }
        impl $tr<MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $m(self, rhs: MpFloat) -> MpFloat {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $atr<&'a MpFloat> for MpFloat {
            fn $am(&mut self, rhs: &'a MpFloat) {
                let p = self.p2(rhs);
                self.0 = self.0.$op(&rhs.0, p, RM);
            }
        }
        impl $atr<MpFloat> for MpFloat {
            fn $am(&mut self, rhs: MpFloat) {
                self.$am(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add);
binop!(Sub, sub, SubAssign, sub_assign, sub);
binop!(Mul, mul, MulAssign, mul_assign, mul);
binop!(Div, div, DivAssign, div_assign, div);

impl<'a> Rem<&'a MpFloat> for &'a MpFloat {
    type Output = MpFloat;
    fn rem(self, rhs: &'a MpFloat) -> MpFloat {
        // Truncated remainder, matching the primitive types.
        let q = MpFloat((self / rhs).0.int());
        self - &(&q * rhs)
    }
}

impl<'a> Rem<&'a MpFloat> for MpFloat {
    type Output = MpFloat;
    fn rem(self, rhs: &'a MpFloat) -> MpFloat {
        (&self).rem(rhs)
    }
}

impl Rem<MpFloat> for MpFloat {
    type Output = MpFloat;
    fn rem(self, rhs: MpFloat) -> MpFloat {
        (&self).rem(&rhs)
    }
}

impl<'a> RemAssign<&'a MpFloat> for MpFloat {
    fn rem_assign(&mut self, rhs: &'a MpFloat) {
        *self = (&*self).rem(rhs);
    }
}

impl RemAssign<MpFloat> for MpFloat {
    fn rem_assign(&mut self, rhs: MpFloat) {
        *self = (&*self).rem(&rhs);
    }
}

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat(self.0.neg())
    }
}

impl Neg for &MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat(self.0.clone().neg())
    }
}

impl Zero for MpFloat {
    fn zero() -> Self {
        MpFloat::from_i64(0, WORD_BITS)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for MpFloat {
    fn one() -> Self {
        MpFloat::from_i64(1, WORD_BITS)
    }
}

impl Num for MpFloat {
    type FromStrRadixErr = String;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        let x: BigFloat = s.parse().map_err(|_| format!("cannot parse {s:?}"))?;
        if x.is_nan() {
            return Err(format!("cannot parse {s:?}"));
        }
        Ok(MpFloat(x))
    }
}

impl Signed for MpFloat {
    fn abs(&self) -> Self {
        MpFloat(self.0.abs())
    }

    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero().with_bits(self.bits())
        } else {
            self - other
        }
    }

    fn signum(&self) -> Self {
        let p = self.bits();
        if self.0.is_zero() {
            MpFloat::from_i64(0, p)
        } else if self.0.is_negative() {
            MpFloat::from_i64(-1, p)
        } else {
            MpFloat::from_i64(1, p)
        }
    }

    fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive()
    }

    fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }
}

impl Scalar for MpFloat {
    const EXACT: bool = false;
    type Precision = usize;

    fn precision(&self) -> usize {
        self.bits()
    }

    fn from_i64_in(v: i64, prec: usize) -> Self {
        MpFloat::from_i64(v, prec)
    }

    fn from_bigint_in(v: &BigInt, prec: usize) -> Self {
        // Convert with a guard word, then divide at the target width.
        MpFloat::from_bigint(v, prec + WORD_BITS).with_bits(prec)
    }

    fn from_rational_in(v: &num_rational::BigRational, prec: usize) -> Self {
        let wide = prec + WORD_BITS;
        let n = MpFloat::from_bigint(v.numer(), wide);
        let d = MpFloat::from_bigint(v.denom(), wide);
        (&n / &d).with_bits(prec)
    }

    fn to_f64(&self) -> f64 {
        MpFloat::to_f64(self)
    }

    fn floor_i64(&self) -> i64 {
        MpFloat(self.0.floor()).to_f64() as i64
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn abs_ge(&self, other: &Self) -> bool {
        self.0.abs_cmp(&other.0).is_some_and(|c| c >= 0)
    }

    fn to_table_string(&self) -> String {
        self.0.to_string()
    }
}

impl Real for MpFloat {
    fn from_f64_in(v: f64, prec: usize) -> Self {
        MpFloat::from_f64(v, prec)
    }

    fn pi_in(prec: usize) -> Self {
        MpFloat::pi(prec)
    }

    fn mantissa_bits(prec: usize) -> u32 {
        word_aligned(prec) as u32
    }

    fn sqrt(&self) -> Self {
        MpFloat(self.0.sqrt(self.bits(), RM))
    }

    fn ln(&self) -> Self {
        let p = self.bits();
        MpFloat(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    fn exp(&self) -> Self {
        let p = self.bits();
        MpFloat(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    fn sin(&self) -> Self {
        let p = self.bits();
        MpFloat(with_consts(|cc| self.0.sin(p, RM, cc)))
    }

    fn cos(&self) -> Self {
        let p = self.bits();
        MpFloat(with_consts(|cc| self.0.cos(p, RM, cc)))
    }

    fn atan2(&self, x: &Self) -> Self {
        let p = self.p2(x);
        let y = self;
        if x.0.is_zero() {
            if y.0.is_zero() {
                return MpFloat::from_i64(0, p);
            }
            let half = MpFloat::pi(p) / MpFloat::from_i64(2, p);
            return if y.0.is_negative() { -half } else { half };
        }
        let q = y / x;
        let base = MpFloat(with_consts(|cc| q.0.atan(p, RM, cc)));
        if x.0.is_positive() {
            base
        } else if y.0.is_negative() {
            base - MpFloat::pi(p)
        } else {
            base + MpFloat::pi(p)
        }
    }

    fn floor(&self) -> Self {
        MpFloat(self.0.floor())
    }

    fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_rounds_to_words() {
        assert_eq!(word_aligned(53), 64);
        assert_eq!(word_aligned(128), 128);
        assert_eq!(word_aligned(129), 192);
        assert_eq!(MpFloat::from_i64(3, 100).bits(), 128);
    }

    #[test]
    fn mixed_precision_uses_the_wider_operand() {
        let a = MpFloat::from_i64(1, 256);
        let b = MpFloat::one();
        let c = &b / &MpFloat::from_i64(3, 64);
        assert_eq!(c.bits(), 64);
        let d = &a / &MpFloat::from_i64(3, 64);
        assert_eq!(d.bits(), 256);
    }

    #[test]
    fn to_f64_round_trips() {
        for v in [1.0, -2.5, 1e-300, 6.02e23, 0.1, -7.0 / 3.0] {
            assert_eq!(MpFloat::from_f64(v, 128).to_f64(), v);
        }
        assert_eq!(MpFloat::zero().to_f64(), 0.0);
    }

    #[test]
    fn bigint_conversion() {
        let big: BigInt = "123456789012345678901234567890123456789".parse().unwrap();
        let x = MpFloat::from_bigint(&big, 192);
        assert!(x.to_string().starts_with("1.23456789012345678901234567890123456789"));
        let neg = MpFloat::from_bigint(&BigInt::from(-12345), 64);
        assert_eq!(neg.to_f64(), -12345.0);
    }

    #[test]
    fn atan2_quadrants() {
        let p = 128;
        let f = |y: f64, x: f64| MpFloat::from_f64(y, p).atan2(&MpFloat::from_f64(x, p)).to_f64();
        for (y, x) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, 0.0), (-2.0, 0.0)] {
            assert!((f(y, x) - f64::atan2(y, x)).abs() < 1e-15, "{y} {x}");
        }
    }

    #[test]
    fn remainder_truncates() {
        let r = MpFloat::from_f64(-7.5, 128) % MpFloat::from_i64(2, 128);
        assert_eq!(r.to_f64(), -1.5);
    }

    #[test]
    fn transcendental_values() {
        let p = 256;
        let two = MpFloat::from_i64(2, p);
        let ln2 = two.ln();
        let s = ln2.to_table_string();
        assert!(s.starts_with("6.93147180559945309417232121458176568075500134360255254120680009"), "{s}");
        assert!((MpFloat::pi(p).to_f64() - std::f64::consts::PI).abs() == 0.0);
    }
}
