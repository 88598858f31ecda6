//! Fast exact sums of the shape `sum_k P_k * (p_k / q_k)` with big integer
//! `P_k` and machine-size fractions `p_k / q_k`.
//!
//! Adding `BigRational`s one at a time pays a big gcd per term. Here the
//! small denominators are merged into one lcm first, so the loop is a
//! multiply-add on integers and there is a single reduction at the end.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `lcm(l, d)` for a machine-size `d`, using only a remainder by `d`.
fn lcm_small(l: &mut BigInt, d: u64) {
    let r = (&*l % d).to_u64().unwrap_or(0);
    let g = if r == 0 { d } else { r.gcd(&d) };
    *l *= d / g;
}

/// Exact `sum_k big_k * num_k / den_k`, divided by `scale`.
pub fn small_fraction_dot<'a, I>(terms: I, scale: &BigInt) -> BigRational
where
    I: IntoIterator<Item = (&'a BigInt, i128, u64)>,
    I::IntoIter: Clone,
{
    let it = terms.into_iter();
    let mut l = BigInt::one();
    for (_, num, den) in it.clone() {
        if num != 0 {
            lcm_small(&mut l, den);
        }
    }
    let mut s = BigInt::zero();
    for (big, num, den) in it {
        if num == 0 || big.is_zero() {
            continue;
        }
        let w = (&l / den) * num;
        s += big * w;
    }
    BigRational::new(s, l * scale)
}

/// An exact table rewritten over a single denominator: `c_k = P_k / D`,
/// `C_k = S_k / D`.
#[derive(Clone, Debug)]
pub struct CommonDenominator {
    pub denom: BigInt,
    pub numerators: Vec<BigInt>,
    pub partial_numerators: Vec<BigInt>,
}

impl CommonDenominator {
    pub fn new(values: &[BigRational]) -> Self {
        let mut denom = BigInt::one();
        for v in values {
            denom = denom.lcm(v.denom());
        }
        let numerators: Vec<BigInt> = values.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
        let mut partial_numerators = Vec::with_capacity(numerators.len());
        let mut s = BigInt::zero();
        for p in &numerators {
            s += p;
            partial_numerators.push(s.clone());
        }
        CommonDenominator { denom, numerators, partial_numerators }
    }

    /// `sum_k c_k * num(k) / den(k)` over `range`.
    pub fn weighted<F>(&self, range: std::ops::Range<usize>, w: F) -> BigRational
    where
        F: Fn(usize) -> (i128, u64),
    {
        let terms: Vec<(&BigInt, i128, u64)> = range
            .map(|k| {
                let (n, d) = w(k);
                (&self.numerators[k], n, d)
            })
            .collect();
        small_fraction_dot(terms.iter().copied(), &self.denom)
    }

    /// `sum_k C_k * num(k) / den(k)` over `range`.
    pub fn weighted_partial<F>(&self, range: std::ops::Range<usize>, w: F) -> BigRational
    where
        F: Fn(usize) -> (i128, u64),
    {
        let terms: Vec<(&BigInt, i128, u64)> = range
            .map(|k| {
                let (n, d) = w(k);
                (&self.partial_numerators[k], n, d)
            })
            .collect();
        small_fraction_dot(terms.iter().copied(), &self.denom)
    }

    pub fn value(&self, k: usize) -> BigRational {
        BigRational::new(self.numerators[k].clone(), self.denom.clone())
    }

    pub fn partial(&self, k: usize) -> BigRational {
        BigRational::new(self.partial_numerators[k].clone(), self.denom.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn dot_matches_naive_rational_sum() {
        let big: Vec<BigInt> = (1..40).map(|k| BigInt::from(k * k - 17)).collect();
        let terms: Vec<(&BigInt, i128, u64)> =
            big.iter().enumerate().map(|(k, b)| (b, (k as i128 % 5) - 2, (k as u64 % 7) + 3)).collect();
        let fast = small_fraction_dot(terms.iter().copied(), &BigInt::from(6));
        let mut slow = BigRational::zero();
        for (b, n, d) in &terms {
            slow += BigRational::new(*b * BigInt::from(*n), BigInt::from(*d));
        }
        assert_eq!(fast, slow / BigInt::from(6));
    }

    #[test]
    fn common_denominator_reproduces_values() {
        let vals = vec![q(1, 1), q(-3, 2), q(5, 24), q(77, 720)];
        let cd = CommonDenominator::new(&vals);
        assert_eq!(cd.denom, BigInt::from(720));
        for (k, v) in vals.iter().enumerate() {
            assert_eq!(&cd.value(k), v);
        }
        assert_eq!(cd.partial(2), q(-7, 24));
        // c_0/3 + c_1/4 + c_2/5 = 0
        assert!(cd.weighted(0..3, |k| (1, (k + 3) as u64)).is_zero());
    }
}
