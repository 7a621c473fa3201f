//! Compensated (Kahan–Babuška–Neumaier) summation for long orbit sums.

use std::ops::AddAssign;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Real> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            compensation: F::zero(),
        }
    }

    pub fn add(&mut self, value: F) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.compensation
    }
}

impl<F: Real> AddAssign<F> for CompensatedSum<F> {
    fn add_assign(&mut self, rhs: F) {
        self.add(rhs);
    }
}

impl<F: Real> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}
