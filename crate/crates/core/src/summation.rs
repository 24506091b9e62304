//! Compensated summation and exactly-reduced trigonometric helpers.

use std::f64::consts::PI;
use std::iter::Sum;
use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation.
///
/// Every O(N) series in the crate is accumulated through this type so that
/// values on the `log N` scale are not swamped by roundoff growing with N.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().sum::<CompensatedSum>().value()
}

/// `sin(pi * t)` with the argument reduced before multiplying by pi.
///
/// Exact zeros at integers and exact `+-1` at half-integers.
pub fn sin_pi(t: f64) -> f64 {
    if !t.is_finite() {
        return f64::NAN;
    }
    // t = n/2 + r with |r| <= 1/4; both operations are exact in binary floating point.
    let n = (2.0 * t).round();
    let r = t - 0.5 * n;
    let quadrant = (n.rem_euclid(4.0)) as u8;
    let x = PI * r;
    match quadrant {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

/// `cos(pi * t)` with the same reduction as [`sin_pi`].
pub fn cos_pi(t: f64) -> f64 {
    sin_pi(t + 0.5)
}

/// `(-1)^k`.
#[inline]
pub fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized sinc `sin(pi x) / (pi x)` with the removable singularity at 0.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}
