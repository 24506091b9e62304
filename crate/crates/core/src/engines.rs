//! Truncated reconstruction series over integer samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::SampleSequence;
use crate::summation::{parity_sign, sin_pi, CompensatedSum};

/// `sin(pi (t - k)) / (pi (t - k))`, equal to 1 at `t = k`.
pub fn sinc_kernel(t: f64, k: i64) -> f64 {
    let d = t - k as f64;
    if d == 0.0 {
        1.0
    } else {
        // sin(pi (t - k)) = (-1)^k sin(pi t) avoids rounding in t - k.
        parity_sign(k) * sin_pi(t) / (PI * d)
    }
}

/// Precomputed `sin(pi t)` for evaluating many kernel terms at one `t`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelPoint {
    t: f64,
    sin_pi_t: f64,
}

impl KernelPoint {
    pub(crate) fn new(t: f64) -> Self {
        Self {
            t,
            sin_pi_t: sin_pi(t),
        }
    }

    #[inline]
    pub(crate) fn kernel(&self, k: i64) -> f64 {
        let d = self.t - k as f64;
        if d == 0.0 {
            1.0
        } else {
            parity_sign(k) * self.sin_pi_t / (PI * d)
        }
    }
}

/// `sum_(k = lo..=hi) s(k) sinc(t - k)` with compensated summation.
pub fn partial_sum_range(s: &SampleSequence, lo: i64, hi: i64, t: f64) -> f64 {
    let p = KernelPoint::new(t);
    let mut acc = CompensatedSum::new();
    for (k, c) in s.iter_range(lo, hi) {
        if c != 0.0 {
            acc.add(c * p.kernel(k));
        }
    }
    acc.value()
}

/// Symmetric Shannon partial sum over `|k| <= n`.
pub fn shannon_partial(s: &SampleSequence, n: u64, t: f64) -> f64 {
    let n = n as i64;
    partial_sum_range(s, -n, n, t)
}

/// One-sided Shannon partial sum over `0 <= k <= n`.
pub fn shannon_partial_one_sided(s: &SampleSequence, n: u64, t: f64) -> f64 {
    partial_sum_range(s, 0, n as i64, t)
}

/// The full (untruncated) series, which for finitely supported samples is the
/// bandlimited signal itself.
pub fn signal_value(s: &SampleSequence, t: f64) -> f64 {
    partial_sum_range(s, s.support_lo(), s.support_hi(), t)
}

/// `(1/pi) sum_(|k| <= n) g(k) / (n + 1/2 - k)`.
///
/// Equals `|shannon_partial(modulate_alternating(g), n, n + 1/2)|` for nonnegative `g`.
pub fn half_integer_closed_form(g: &SampleSequence, n: u64) -> f64 {
    let n = n as i64;
    let center = n as f64 + 0.5;
    let mut acc = CompensatedSum::new();
    for (k, c) in g.iter_range(-n, n) {
        acc.add(c / (center - k as f64));
    }
    acc.value() / PI
}

/// Valiron series truncated to `|k| <= n`:
/// `f(t0) sin(pi t)/sin(pi t0) + (t - t0) sum s(k)/(k - t0) sinc(t - k)`.
pub fn valiron_partial(s: &SampleSequence, f_t0: f64, t0: f64, n: u64, t: f64) -> Result<f64> {
    if !t0.is_finite() || t0.fract() == 0.0 {
        return Err(Error::IntegerAnchor(t0));
    }
    let n = n as i64;
    let p = KernelPoint::new(t);
    let mut acc = CompensatedSum::new();
    for (k, c) in s.iter_range(-n, n) {
        if c != 0.0 {
            acc.add(c / (k as f64 - t0) * p.kernel(k));
        }
    }
    Ok(f_t0 * p.sin_pi_t / sin_pi(t0) + (t - t0) * acc.value())
}

/// `e^(i omega k)` with the phase product `omega * k` corrected by its rounding error.
#[inline]
fn unit_phase(omega: f64, k: i64) -> Complex64 {
    let kf = k as f64;
    let p = omega * kf;
    let e = omega.mul_add(kf, -p);
    let (s, c) = p.sin_cos();
    Complex64::new(c - e * s, s + e * c)
}

fn fourier_range(s: &SampleSequence, lo: i64, hi: i64, omega: f64) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (k, c) in s.iter_range(lo, hi) {
        let z = unit_phase(omega, k) * c;
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `sum_(|k| <= n) s(k) e^(i omega k)`.
pub fn fourier_partial(s: &SampleSequence, n: u64, omega: f64) -> Complex64 {
    let n = n as i64;
    fourier_range(s, -n, n, omega)
}

/// `sum_(k = 0..=n) s(k) e^(i omega k)`.
pub fn fourier_partial_one_sided(s: &SampleSequence, n: u64, omega: f64) -> Complex64 {
    fourier_range(s, 0, n as i64, omega)
}

fn check_increasing(subseq: &[u64]) -> Result<()> {
    if let Some(p) = subseq.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing(p + 1));
    }
    Ok(())
}

/// `max_l |sum_(k=0..=N_l) s(k) e^(i omega k)|` over the given subsequence.
pub fn maximal_operator(s: &SampleSequence, subseq: &[u64], omega: f64) -> Result<f64> {
    if subseq.is_empty() {
        return Err(Error::EmptySchedule);
    }
    check_increasing(subseq)?;
    Ok(maximal_operator_unchecked(s, subseq, omega))
}

pub(crate) fn maximal_operator_unchecked(s: &SampleSequence, subseq: &[u64], omega: f64) -> f64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut best = 0.0f64;
    let mut k = 0i64;
    for &n in subseq {
        let n = n as i64;
        while k <= n {
            let c = s.get(k);
            if c != 0.0 {
                let z = unit_phase(omega, k) * c;
                re.add(z.re);
                im.add(z.im);
            }
            k += 1;
        }
        best = best.max(re.value().hypot(im.value()));
    }
    best
}

/// Lacunarity of an increasing index sequence: `lambda = min N_(l+1)/N_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lacunarity {
    pub is_lacunary: bool,
    pub lambda: f64,
}

pub fn lacunary_check(subseq: &[u64]) -> Result<Lacunarity> {
    if subseq.len() < 2 {
        return Err(Error::InvalidArgument(
            "lacunarity needs at least two indices".into(),
        ));
    }
    if subseq[0] == 0 {
        return Err(Error::InvalidArgument("indices must be positive".into()));
    }
    check_increasing(subseq)?;
    let lambda = subseq
        .windows(2)
        .map(|w| w[1] as f64 / w[0] as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(Lacunarity {
        is_lacunary: lambda > 1.0,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{modulate_alternating, trapezoid_samples};
    use proptest::prelude::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(sinc_kernel(3.0, 3), 1.0);
        assert!((sinc_kernel(0.5, 0) - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        assert_eq!(sinc_kernel(7.0, 3), 0.0);
        for i in 0..100 {
            let t = -5.0 + 0.173 * i as f64;
            assert!(sinc_kernel(t, 2).abs() <= 1.0);
        }
    }

    #[test]
    fn shannon_examples() {
        let delta = SampleSequence::delta(0, 1.0);
        for n in 0..4 {
            assert!((shannon_partial(&delta, n, 0.5) - 2.0 / PI).abs() < 1e-15);
        }
        let w1 = trapezoid_samples(1).unwrap();
        assert_eq!(shannon_partial(&w1, 1, 1.0), 1.0);
    }

    #[test]
    fn shannon_ones_at_one_and_a_half() {
        // sin(pi (1.5 - k)) = +1, -1, +1 for k = -1, 0, 1.
        let ones = SampleSequence::new(-1, vec![1.0; 3]).unwrap();
        let v = shannon_partial(&ones, 1, 1.5);
        let expected = (1.0 / 2.5 - 1.0 / 1.5 + 1.0 / 0.5) / PI;
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.551_737_1).abs() < 1e-7);
    }

    #[test]
    fn closed_form_examples() {
        let delta = SampleSequence::delta(0, 1.0);
        assert!((half_integer_closed_form(&delta, 0) - 2.0 / PI).abs() < 1e-16);
        let ones = SampleSequence::new(-1, vec![1.0; 3]).unwrap();
        let v = half_integer_closed_form(&ones, 1);
        assert!((v - (1.0 / 2.5 + 1.0 / 1.5 + 2.0) / PI).abs() < 1e-15);
        assert!((v - 0.976_150_3).abs() < 1e-7);
    }

    #[test]
    fn valiron_examples() {
        let zero = SampleSequence::zero();
        assert_eq!(valiron_partial(&zero, 0.0, 0.3, 5, 2.7).unwrap(), 0.0);
        let t0 = 0.3;
        for n in [0, 3, 10] {
            for i in 0..50 {
                let t = -6.0 + 0.25 * i as f64;
                let v = valiron_partial(&zero, sin_pi(t0), t0, n, t).unwrap();
                assert!((v - sin_pi(t)).abs() < 1e-15);
            }
        }
        assert!(matches!(
            valiron_partial(&zero, 0.0, 2.0, 1, 0.5),
            Err(Error::IntegerAnchor(_))
        ));
    }

    #[test]
    fn fourier_examples() {
        let delta = SampleSequence::delta(0, 1.0);
        for n in 0..3 {
            let z = fourier_partial(&delta, n, 1.234);
            assert_eq!((z.re, z.im), (1.0, 0.0));
        }
        let ones = SampleSequence::new(0, vec![1.0, 1.0]).unwrap();
        let z = fourier_partial_one_sided(&ones, 1, PI);
        assert!(z.norm() < 1e-15);
        let s = SampleSequence::new(-3, vec![0.5, -1.0, 2.0, 0.25, 1.5, -0.75, 3.0]).unwrap();
        let z = fourier_partial(&s, 10, 0.0);
        assert!((z.re - 5.5).abs() < 1e-15 && z.im == 0.0);
    }

    #[test]
    fn maximal_examples() {
        let delta = SampleSequence::delta(0, 1.0);
        assert_eq!(maximal_operator(&delta, &[1, 5, 9], 0.7).unwrap(), 1.0);
        let s = SampleSequence::new(0, vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        let single = maximal_operator(&s, &[2], 1.1).unwrap();
        assert!((single - fourier_partial_one_sided(&s, 2, 1.1).norm()).abs() < 1e-15);
        assert!(maximal_operator(&s, &[], 1.0).is_err());
        assert!(maximal_operator(&s, &[3, 3], 1.0).is_err());
    }

    #[test]
    fn lacunary_examples() {
        let l = lacunary_check(&[1, 2, 4, 8]).unwrap();
        assert!(l.is_lacunary && l.lambda == 2.0);
        let l = lacunary_check(&[1, 2, 3, 4]).unwrap();
        assert!(l.is_lacunary);
        assert!((l.lambda - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(lacunary_check(&[5, 5]), Err(Error::NotIncreasing(1))));
        assert!(lacunary_check(&[5]).is_err());
    }

    fn arb_nonneg() -> impl Strategy<Value = SampleSequence> {
        (-30i64..30, proptest::collection::vec(0.0f64..2.0, 1..60))
            .prop_map(|(lo, c)| SampleSequence::new(lo, c).unwrap())
    }

    fn arb_signed() -> impl Strategy<Value = SampleSequence> {
        (-30i64..30, proptest::collection::vec(-2.0f64..2.0, 1..60))
            .prop_map(|(lo, c)| SampleSequence::new(lo, c).unwrap())
    }

    proptest! {
        #[test]
        fn interpolates_at_nodes(s in arb_signed(), n in 0u64..40) {
            for m in -(n as i64)..=(n as i64) {
                let v = shannon_partial(&s, n, m as f64);
                prop_assert!((v - s.get(m)).abs() <= 1e-12 * s.l1_norm().max(1.0));
            }
        }

        #[test]
        fn half_integer_identity(g in arb_nonneg(), n in 0u64..80) {
            let f1 = modulate_alternating(&g);
            let direct = shannon_partial(&f1, n, n as f64 + 0.5).abs();
            let closed = half_integer_closed_form(&g, n);
            prop_assert!((direct - closed).abs() <= 1e-12 * closed.max(1e-300));
        }

        #[test]
        fn maximal_monotone_in_extension(s in arb_signed(), omega in -3.2f64..3.2, extra in 1u64..20) {
            let base = [2u64, 5, 11];
            let mut longer = base.to_vec();
            longer.push(11 + extra);
            let a = maximal_operator(&s, &base, omega).unwrap();
            let b = maximal_operator(&s, &longer, omega).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn valiron_absolute_convergence_order_free(s in arb_signed(), t in -10.0f64..10.0) {
            // Reversing the summation order does not change the value materially.
            let t0 = 0.37;
            let n = 40u64;
            let fwd = valiron_partial(&s, 0.2, t0, n, t).unwrap();
            let mut acc = 0.0;
            for k in (-(n as i64)..=(n as i64)).rev() {
                acc += s.get(k) / (k as f64 - t0) * sinc_kernel(t, k);
            }
            let rev = 0.2 * sin_pi(t) / sin_pi(t0) + (t - t0) * acc;
            prop_assert!((fwd - rev).abs() <= 1e-10);
        }
    }
}
