//! Plain and compensated accumulation.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummationMode {
    Plain,
    #[default]
    Compensated,
}

/// Neumaier's variant of Kahan summation: the running error term also
/// captures the case where the incoming term dominates the sum.
#[derive(Clone, Debug)]
pub struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Neumaier<T> {
    pub fn new(zero: T) -> Self {
        Neumaier { comp: zero.clone(), sum: zero }
    }

    pub fn add(&mut self, x: T) {
        if T::EXACT {
            self.sum += x;
            return;
        }
        let t = self.sum.clone() + &x;
        if self.sum.abs_ge(&x) {
            self.comp += (self.sum.clone() - &t) + x;
        } else {
            self.comp += (x - &t) + &self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum.clone() + &self.comp
    }
}

/// Accumulates with either rule; `Plain` skips the bookkeeping entirely.
#[derive(Clone, Debug)]
pub enum Accumulator<T> {
    Plain(T),
    Compensated(Neumaier<T>),
}

impl<T: Scalar> Accumulator<T> {
    pub fn new(mode: SummationMode, zero: T) -> Self {
        match mode {
            SummationMode::Plain => Accumulator::Plain(zero),
            SummationMode::Compensated => Accumulator::Compensated(Neumaier::new(zero)),
        }
    }

    pub fn add(&mut self, x: T) {
        match self {
            Accumulator::Plain(s) => *s += x,
            Accumulator::Compensated(n) => n.add(x),
        }
    }

    pub fn value(&self) -> T {
        match self {
            Accumulator::Plain(s) => s.clone(),
            Accumulator::Compensated(n) => n.value(),
        }
    }
}

pub fn sum_with<T: Scalar, I: IntoIterator<Item = T>>(mode: SummationMode, terms: I) -> T {
    let mut it = terms.into_iter().peekable();
    let zero = match it.peek() {
        Some(x) => x.clone() - x.clone(),
        None => T::zero(),
    };
    let mut acc = Accumulator::new(mode, zero);
    for x in it {
        acc.add(x);
    }
    acc.value()
}

impl<T: Scalar> Default for Neumaier<T> {
    fn default() -> Self {
        Neumaier::new(T::zero())
    }
}
