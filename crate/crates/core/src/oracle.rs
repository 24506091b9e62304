//! Extended-precision reference evaluations (256-bit mantissa, about 77
//! decimal digits) used by the `oracle` precision mode and by cross-checks.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::signals::SampleSequence;

const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Stateful extended-precision context holding the constants cache.
pub struct Oracle {
    cc: Consts,
    pi: BigFloat,
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle").field("bits", &PRECISION).finish()
    }
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION)
}

fn big_int(k: i64) -> BigFloat {
    BigFloat::from_i64(k, PRECISION)
}

impl Oracle {
    pub fn new() -> Self {
        let mut cc = Consts::new().expect("constants cache");
        let pi = cc.pi(PRECISION, RM);
        Self { cc, pi }
    }

    fn lower(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let text = x
            .format(Radix::Dec, RoundingMode::ToEven, &mut self.cc)
            .expect("finite value");
        text.parse().expect("decimal float")
    }

    /// `sin(pi t)` for the exactly represented `t`.
    fn sin_pi(&mut self, t: f64) -> BigFloat {
        // Reduce by whole periods exactly before scaling by pi.
        let r = t - 2.0 * (t / 2.0).round();
        let x = big(r).mul(&self.pi, PRECISION, RM);
        x.sin(PRECISION, RM, &mut self.cc)
    }

    /// `(1/pi) sum_(|k| <= n) g(k) / (n + 1/2 - k)`.
    pub fn half_integer_closed_form(&mut self, g: &SampleSequence, n: u64) -> f64 {
        let n = n as i64;
        let center = big(n as f64 + 0.5);
        let mut acc = big(0.0);
        for (k, c) in g.iter_range(-n, n) {
            let d = center.sub(&big_int(k), PRECISION, RM);
            acc = acc.add(&big(c).div(&d, PRECISION, RM), PRECISION, RM);
        }
        let v = acc.div(&self.pi, PRECISION, RM);
        self.lower(&v)
    }

    fn kernel_sum(&mut self, s: &SampleSequence, lo: i64, hi: i64, t: f64, anchor: Option<f64>) -> BigFloat {
        let st = self.sin_pi(t);
        let tb = big(t);
        let mut acc = big(0.0);
        for (k, c) in s.iter_range(lo, hi) {
            if c == 0.0 {
                continue;
            }
            let d = tb.sub(&big_int(k), PRECISION, RM);
            let kernel = if d.is_zero() {
                big(1.0)
            } else {
                let num = if k.rem_euclid(2) == 0 { st.clone() } else { st.neg() };
                num.div(&d.mul(&self.pi, PRECISION, RM), PRECISION, RM)
            };
            let mut term = big(c).mul(&kernel, PRECISION, RM);
            if let Some(t0) = anchor {
                let w = big_int(k).sub(&big(t0), PRECISION, RM);
                term = term.div(&w, PRECISION, RM);
            }
            acc = acc.add(&term, PRECISION, RM);
        }
        acc
    }

    /// `sum_(k = lo..=hi) s(k) sinc(t - k)`.
    pub fn partial_sum_range(&mut self, s: &SampleSequence, lo: i64, hi: i64, t: f64) -> f64 {
        let v = self.kernel_sum(s, lo, hi, t, None);
        self.lower(&v)
    }

    /// Valiron partial sum over `|k| <= n` with anchor value `f_t0` at `t0`.
    pub fn valiron_partial(&mut self, s: &SampleSequence, f_t0: f64, t0: f64, n: u64, t: f64) -> f64 {
        let n = n as i64;
        let series = self.kernel_sum(s, -n, n, t, Some(t0));
        let dt = big(t).sub(&big(t0), PRECISION, RM);
        let st = self.sin_pi(t);
        let st0 = self.sin_pi(t0);
        let anchor = big(f_t0).mul(&st, PRECISION, RM).div(&st0, PRECISION, RM);
        let v = anchor.add(&dt.mul(&series, PRECISION, RM), PRECISION, RM);
        self.lower(&v)
    }

    /// `ln x`.
    pub fn ln(&mut self, x: f64) -> f64 {
        let v = big(x).ln(PRECISION, RM, &mut self.cc);
        self.lower(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        let mut o = Oracle::new();
        for x in [0.1, -3.25, 1e-300, 6.02e23] {
            assert_eq!(o.lower(&big(x)), x);
        }
    }

    #[test]
    fn closed_forms() {
        let mut o = Oracle::new();
        let ones = SampleSequence::new(-1, vec![1.0; 3]).unwrap();
        let v = o.half_integer_closed_form(&ones, 1);
        assert!((v - 0.976_150_317_630_291_4).abs() < 1e-16);
        let v = o.partial_sum_range(&ones, -1, 1, 1.5);
        assert!((v - 0.551_737_136_051_903_8).abs() < 1e-16);
        assert!((o.ln(7.0) - 7f64.ln()).abs() < 1e-15);
    }
}
