//! Scalar abstractions.
//!
//! [`Scalar`] is what the coefficient recurrence and the discrete identities
//! need: field arithmetic plus a way to build constants at the working
//! precision. It is implemented for `f32`, `f64`, [`MpFloat`](crate::MpFloat)
//! and `BigRational`. [`Real`] adds the transcendental functions used by the
//! Mellin evaluator and is implemented for the floating types only.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{NumAssignRef, NumRef, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Signed + NumRef + NumAssignRef + Send + Sync + 'static {
    /// Arithmetic never rounds.
    const EXACT: bool;

    /// What is needed to build a constant that matches the working precision.
    /// Fixed-width types use `()`.
    type Precision: Copy + Debug + PartialEq + Send + Sync;

    fn precision(&self) -> Self::Precision;

    fn from_i64_in(v: i64, prec: Self::Precision) -> Self;

    fn from_bigint_in(v: &BigInt, prec: Self::Precision) -> Self;

    fn from_ratio_in(num: i64, den: i64, prec: Self::Precision) -> Self {
        Self::from_i64_in(num, prec) / Self::from_i64_in(den, prec)
    }

    fn from_rational_in(v: &BigRational, prec: Self::Precision) -> Self {
        Self::from_bigint_in(v.numer(), prec) / Self::from_bigint_in(v.denom(), prec)
    }

    fn to_f64(&self) -> f64;

    /// Largest integer not above `self`.
    fn floor_i64(&self) -> i64;

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    /// `|self| >= |other|` without building the absolute values.
    fn abs_ge(&self, other: &Self) -> bool {
        self.abs() >= other.abs()
    }

    /// Text form used in CSV tables: `p/q` for rationals, a decimal otherwise.
    fn to_table_string(&self) -> String;
}

pub trait Real: Scalar {
    fn from_f64_in(v: f64, prec: Self::Precision) -> Self;
    fn pi_in(prec: Self::Precision) -> Self;
    /// Effective binary mantissa width.
    fn mantissa_bits(prec: Self::Precision) -> u32;

    fn epsilon_in(prec: Self::Precision) -> Self {
        let bits = Self::mantissa_bits(prec) as i32;
        Self::from_f64_in(2f64.powi(1 - bits), prec)
    }

    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn floor(&self) -> Self;
    fn is_finite(&self) -> bool;
}

macro_rules! impl_ieee {
    ($t:ty, $bits:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            type Precision = ();

            fn precision(&self) {}

            fn from_i64_in(v: i64, _: ()) -> Self {
                v as $t
            }

            fn from_bigint_in(v: &BigInt, _: ()) -> Self {
                v.to_f64().unwrap_or(f64::NAN) as $t
            }

            fn from_rational_in(v: &BigRational, _: ()) -> Self {
                rational_to_f64(v) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn floor_i64(&self) -> i64 {
                <$t>::floor(*self) as i64
            }

            fn mul_ref(&self, rhs: &Self) -> Self {
                self * rhs
            }

            fn abs_ge(&self, other: &Self) -> bool {
                <$t>::abs(*self) >= <$t>::abs(*other)
            }

            fn to_table_string(&self) -> String {
                format!("{:e}", self)
            }
        }

        impl Real for $t {
            fn from_f64_in(v: f64, _: ()) -> Self {
                v as $t
            }
            fn pi_in(_: ()) -> Self {
                std::f64::consts::PI as $t
            }
            fn mantissa_bits(_: ()) -> u32 {
                $bits
            }
            fn epsilon_in(_: ()) -> Self {
                <$t>::EPSILON
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn atan2(&self, x: &Self) -> Self {
                <$t>::atan2(*self, *x)
            }
            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
        }
    };
}

impl_ieee!(f32, 24);
impl_ieee!(f64, 53);

impl Scalar for BigRational {
    const EXACT: bool = true;
    type Precision = ();

    fn precision(&self) {}

    fn from_i64_in(v: i64, _: ()) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint_in(v: &BigInt, _: ()) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_ratio_in(num: i64, den: i64, _: ()) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational_in(v: &BigRational, _: ()) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn floor_i64(&self) -> i64 {
        self.floor().to_integer().to_i64().expect("floor out of i64 range")
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn to_table_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Nearest-ish `f64` of a rational whose numerator and denominator may both
/// exceed the `f64` range.
pub(crate) fn rational_to_f64(v: &BigRational) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if let Some(x) = ToPrimitive::to_f64(v) {
        if x.is_finite() && x != 0.0 {
            return x;
        }
    }
    // Scale both parts down to 64 significant bits before dividing.
    let shift = |b: &BigInt| -> (f64, i64) {
        let bits = b.bits() as i64;
        let s = (bits - 64).max(0);
        ((b >> s as usize).to_f64().unwrap(), s)
    };
    let (n, sn) = shift(v.numer());
    let (d, sd) = shift(v.denom());
    let e = sn - sd;
    (n / d) * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}
