//! Generating functions of finitely perturbed integer zero sets and the
//! interpolation series built from them.
//!
//! With zeros `t_k = k + delta_k`, `delta_k = 0` for `|k| > K`, the canonical
//! product `(z - t_0) prod_(k != 0) (1 - z/t_k)` folds into
//!
//! ```text
//! phi(z) = sin(pi z)/pi * prod_(m perturbed) (t_m - z)/(m - z) * s_m,
//! s_m = m / t_m (m != 0),  s_0 = 1,
//! ```
//!
//! since the factors over the unperturbed integers combine into the sine
//! product. Only the perturbed indices contribute explicit factors, so no
//! truncation radius enters the evaluation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::signals::SampleSequence;
use crate::summation::{parity_sign, sin_pi, sinc, CompensatedSum};

/// Zeros `t_k = k + delta_k` with the perturbation confined to `[-K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSequence {
    window: u64,
    deltas: Vec<f64>,
    separation: f64,
    max_perturbation: f64,
}

impl ZeroSequence {
    /// Unperturbed integer zeros with a window of `window` explicit indices either side.
    pub fn unperturbed(window: u64) -> Self {
        Self::build(window, vec![0.0; 2 * window as usize + 1])
    }

    /// `t_k = k + g(k)` on a window of at least the support radius of `g`.
    pub fn from_perturbation(g: &SampleSequence, window: u64) -> Result<Self> {
        if let Some((k, v)) = g.iter().find(|(_, c)| c.abs() >= 0.5) {
            return Err(Error::PerturbationTooLarge { k, value: v });
        }
        let window = if g.is_zero() { window } else { window.max(g.radius()) };
        let k = window as i64;
        let deltas = (-k..=k).map(|i| g.get(i)).collect();
        Ok(Self::build(window, deltas))
    }

    fn build(window: u64, deltas: Vec<f64>) -> Self {
        let k = window as i64;
        let delta_at = |i: i64| {
            if i.abs() > k {
                0.0
            } else {
                deltas[(i + k) as usize]
            }
        };
        let separation = (-k - 1..=k)
            .map(|i| 1.0 + delta_at(i + 1) - delta_at(i))
            .fold(f64::INFINITY, f64::min);
        let max_perturbation = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        Self {
            window,
            deltas,
            separation,
            max_perturbation,
        }
    }

    /// `K`: outside `[-K, K]` the zeros are the integers.
    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn perturbation(&self, k: i64) -> f64 {
        let w = self.window as i64;
        if k.abs() > w {
            0.0
        } else {
            self.deltas[(k + w) as usize]
        }
    }

    pub fn zero(&self, k: i64) -> f64 {
        k as f64 + self.perturbation(k)
    }

    /// Minimum gap `t_(k+1) - t_k` over all `k`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn max_perturbation(&self) -> f64 {
        self.max_perturbation
    }

    /// Maximum gap `t_(k+1) - t_k` over all `k`.
    pub fn max_gap(&self) -> f64 {
        let k = self.window as i64;
        (-k - 1..=k)
            .map(|i| self.zero(i + 1) - self.zero(i))
            .fold(0.0, f64::max)
    }

    fn perturbed_indices(&self) -> impl Iterator<Item = i64> + '_ {
        let w = self.window as i64;
        self.deltas
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(move |(i, _)| i as i64 - w)
    }

    /// CSV `k,t_k` over the window.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t_k\n");
        let w = self.window as i64;
        for k in -w..=w {
            let _ = writeln!(out, "{k},{}", fmt_f64(self.zero(k)));
        }
        out
    }
}

/// `t_k = k + g(k)` on exactly the support of `g`.
pub fn perturbed_zeros(g: &SampleSequence) -> Result<ZeroSequence> {
    ZeroSequence::from_perturbation(g, 0)
}

#[derive(Debug, Clone, Copy)]
struct Factor {
    index: i64,
    zero: f64,
}

/// The generating function `phi` of a [`ZeroSequence`] together with the
/// cached derivatives `phi'(t_k)` on the window.
#[derive(Debug, Clone)]
pub struct GeneratingProduct {
    zeros: ZeroSequence,
    factors: Vec<Factor>,
    scale: f64,
    trusted: f64,
    tail_bound: f64,
    derivatives: Vec<f64>,
}

impl GeneratingProduct {
    /// Builds the product with the default trusted domain `|z| <= K/2`.
    pub fn new(zeros: ZeroSequence) -> Self {
        let trusted = zeros.window() as f64 / 2.0;
        Self::with_trusted_radius(zeros, trusted)
    }

    pub fn with_trusted_radius(zeros: ZeroSequence, trusted: f64) -> Self {
        let factors: Vec<Factor> = zeros
            .perturbed_indices()
            .map(|m| Factor {
                index: m,
                zero: zeros.zero(m),
            })
            .collect();
        let scale = factors
            .iter()
            .filter(|f| f.index != 0)
            .map(|f| f.index as f64 / f.zero)
            .product();
        // Folding the unperturbed tail is exact; what remains is roundoff in
        // the explicit factors.
        let tail_bound = (4.0 * factors.len() as f64 + 16.0) * f64::EPSILON;
        let mut gp = Self {
            zeros,
            factors,
            scale,
            trusted,
            tail_bound,
            derivatives: Vec::new(),
        };
        let w = gp.zeros.window() as i64;
        gp.derivatives = (-w..=w)
            .map(|k| gp.over_linear(k, gp.zeros.zero(k)))
            .collect();
        gp
    }

    pub fn zeros(&self) -> &ZeroSequence {
        &self.zeros
    }

    /// Window of explicit factors; zeros beyond it are folded analytically.
    pub fn radius(&self) -> u64 {
        self.zeros.window()
    }

    pub fn trusted_radius(&self) -> f64 {
        self.trusted
    }

    /// Relative error bound of an evaluation inside the trusted domain.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn is_perturbed(&self, m: i64) -> bool {
        self.factors
            .binary_search_by_key(&m, |f| f.index)
            .is_ok()
    }

    /// `sign * sin(pi t)/pi * scale * prod_(m in P, m != skip)(t_m - t) / prod_(m in B)(m - t)`
    /// where `B = P` plus `extra` when given. The sine is absorbed into the
    /// denominator factor nearest to `t` so the ratio stays well conditioned.
    fn product(&self, t: f64, skip: Option<i64>, extra: Option<i64>) -> f64 {
        let nearest = t.round() as i64;
        let absorbs = |m: i64| m == nearest;
        let mut absorbed = false;
        let mut value = self.scale;
        for f in &self.factors {
            if Some(f.index) != skip {
                value *= f.zero - t;
            }
            if absorbs(f.index) {
                absorbed = true;
            } else {
                value /= f.index as f64 - t;
            }
        }
        if let Some(e) = extra {
            if absorbs(e) {
                absorbed = true;
            } else {
                value /= e as f64 - t;
            }
        }
        let sine = if absorbed {
            // sin(pi t) / (pi (j - t)) = -(-1)^j sinc(t - j)
            -parity_sign(nearest) * sinc(t - nearest as f64)
        } else {
            sin_pi(t) / PI
        };
        value * sine
    }

    /// `phi(t) / (t - t_k)`, continuous through `t = t_k` where it equals `phi'(t_k)`.
    fn over_linear(&self, k: i64, t: f64) -> f64 {
        if self.is_perturbed(k) {
            -self.product(t, Some(k), None)
        } else {
            -self.product(t, None, Some(k))
        }
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        if !(z.abs() <= self.trusted) {
            return Err(Error::OutOfDomain {
                value: z,
                limit: self.trusted,
            });
        }
        Ok(())
    }

    fn check_index(&self, k: i64) -> Result<()> {
        let w = self.zeros.window() as i64;
        if k.abs() > w {
            return Err(Error::IndexOutOfRange {
                index: k,
                lo: -w,
                hi: w,
            });
        }
        Ok(())
    }

    pub(crate) fn phi_unchecked(&self, z: f64) -> f64 {
        self.product(z, None, None)
    }

    pub(crate) fn derivative_unchecked(&self, k: i64) -> f64 {
        let w = self.zeros.window() as i64;
        if k.abs() > w {
            // Outside the window t_k = k.
            return self.over_linear(k, k as f64);
        }
        self.derivatives[(k + w) as usize]
    }

    /// `(min_k |phi'(t_k)|, max_k |phi'(t_k)|)` over the window.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        self.derivatives
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
                (lo.min(d.abs()), hi.max(d.abs()))
            })
    }
}

/// `phi(z)` inside the trusted domain.
pub fn phi_eval(gp: &GeneratingProduct, z: f64) -> Result<f64> {
    gp.check_domain(z)?;
    Ok(gp.phi_unchecked(z))
}

/// `phi'(t_k)` from the leave-one-out product.
pub fn phi_prime_at_zero(gp: &GeneratingProduct, k: i64) -> Result<f64> {
    gp.check_index(k)?;
    Ok(gp.derivative_unchecked(k))
}

/// `phi_k(t) = phi(t) / (phi'(t_k) (t - t_k))`, equal to 1 at `t = t_k`.
pub fn phi_k_eval(gp: &GeneratingProduct, k: i64, t: f64) -> Result<f64> {
    gp.check_index(k)?;
    gp.check_domain(t)?;
    let tk = gp.zeros.zero(k);
    if t == tk {
        return Ok(1.0);
    }
    Ok(gp.over_linear(k, t) / gp.derivative_unchecked(k))
}

/// Index `j` with `t == t_j`, if any.
fn node_at(gp: &GeneratingProduct, t: f64) -> Option<i64> {
    let j = t.round() as i64;
    (gp.zeros.zero(j) == t).then_some(j)
}

pub(crate) fn interpolation_unchecked(
    gp: &GeneratingProduct,
    sample: impl Fn(i64) -> f64,
    n: u64,
    t: f64,
) -> f64 {
    let n = n as i64;
    if let Some(j) = node_at(gp, t) {
        return if j.abs() <= n { sample(j) } else { 0.0 };
    }
    let phi = gp.phi_unchecked(t);
    let mut acc = CompensatedSum::new();
    for k in -n..=n {
        let c = sample(k);
        if c != 0.0 {
            acc.add(c / (gp.derivative_unchecked(k) * (t - gp.zeros.zero(k))));
        }
    }
    phi * acc.value()
}

fn check_order(gp: &GeneratingProduct, n: u64) -> Result<()> {
    if n > gp.zeros.window() {
        return Err(Error::IndexOutOfRange {
            index: n as i64,
            lo: 0,
            hi: gp.zeros.window() as i64,
        });
    }
    Ok(())
}

/// `sum_(|k| <= n) samples(k) phi_k(t)`, where `samples` holds the values at the zeros `t_k`.
pub fn interpolation_partial(
    gp: &GeneratingProduct,
    samples: &SampleSequence,
    n: u64,
    t: f64,
) -> Result<f64> {
    check_order(gp, n)?;
    gp.check_domain(t)?;
    Ok(interpolation_unchecked(gp, |k| samples.get(k), n, t))
}

/// `sin(pi t_k) = (-1)^k sin(pi delta_k)`.
pub fn crossing_sample(zeros: &ZeroSequence, k: i64) -> f64 {
    parity_sign(k) * sin_pi(zeros.perturbation(k))
}

/// `sum_(|k| <= n) sin(pi t_k) phi_k(t)`.
pub fn sine_crossing_partial(gp: &GeneratingProduct, n: u64, t: f64) -> Result<f64> {
    check_order(gp, n)?;
    gp.check_domain(t)?;
    Ok(interpolation_unchecked(
        gp,
        |k| crossing_sample(&gp.zeros, k),
        n,
        t,
    ))
}

/// Midpoint of `(t_N, t_(N+1))`.
pub fn midpoint_probe(zeros: &ZeroSequence, n: u64) -> Result<f64> {
    if n + 1 > zeros.window() {
        return Err(Error::IndexOutOfRange {
            index: n as i64 + 1,
            lo: 0,
            hi: zeros.window() as i64,
        });
    }
    let n = n as i64;
    Ok(0.5 * (zeros.zero(n) + zeros.zero(n + 1)))
}

/// Values `f(t_k)` of the bandlimited signal with integer samples `f` at the
/// zeros `|k| <= n_max`.
pub fn sample_signal_at_zeros(
    f: &SampleSequence,
    zeros: &ZeroSequence,
    n_max: u64,
) -> Result<SampleSequence> {
    let n = n_max as i64;
    SampleSequence::from_fn(-n, n, |k| {
        if zeros.perturbation(k) == 0.0 {
            f.get(k)
        } else {
            crate::engines::signal_value(f, zeros.zero(k))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{shannon_partial, sinc_kernel};

    fn single(k: i64, value: f64, window: u64) -> GeneratingProduct {
        let g = SampleSequence::delta(k, value);
        GeneratingProduct::new(ZeroSequence::from_perturbation(&g, window).unwrap())
    }

    #[test]
    fn zero_sequence_examples() {
        let z = perturbed_zeros(&SampleSequence::zero()).unwrap();
        assert_eq!(z.separation(), 1.0);
        assert_eq!(z.zero(5), 5.0);

        let z = perturbed_zeros(&SampleSequence::delta(0, 0.25)).unwrap();
        assert_eq!(z.zero(0), 0.25);
        assert_eq!(z.zero(0) - z.zero(-1), 1.25);
        assert_eq!(z.zero(1) - z.zero(0), 0.75);
        assert_eq!(z.separation(), 0.75);

        assert!(matches!(
            perturbed_zeros(&SampleSequence::delta(0, 0.6)),
            Err(Error::PerturbationTooLarge { k: 0, .. })
        ));
        assert!(perturbed_zeros(&SampleSequence::delta(3, -0.5)).is_err());
    }

    #[test]
    fn zero_sequence_csv() {
        let z = ZeroSequence::from_perturbation(&SampleSequence::delta(1, 0.125), 1).unwrap();
        assert_eq!(
            z.to_csv(),
            "k,t_k\n-1,-1.0000000000000000e0\n0,0.0000000000000000e0\n1,1.1250000000000000e0\n"
        );
    }

    #[test]
    fn unperturbed_product_is_the_sine() {
        let gp = GeneratingProduct::new(ZeroSequence::unperturbed(20));
        assert!((phi_eval(&gp, 0.5).unwrap() - 1.0 / PI).abs() < 1e-16);
        for i in 0..81 {
            let z = -10.0 + 0.25 * i as f64;
            assert!((phi_eval(&gp, z).unwrap() - sin_pi(z) / PI).abs() < 1e-16);
        }
        assert_eq!(phi_prime_at_zero(&gp, 0).unwrap(), 1.0);
        assert_eq!(phi_prime_at_zero(&gp, 1).unwrap(), -1.0);
        assert_eq!(phi_prime_at_zero(&gp, -3).unwrap(), -1.0);
        assert!((phi_k_eval(&gp, 0, 0.5).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!(phi_eval(&gp, 10.5).is_err());
        assert!(phi_prime_at_zero(&gp, 21).is_err());
    }

    #[test]
    fn single_perturbation_closed_form() {
        // phi(z) = (z - 1/4) * sin(pi z)/(pi z)
        let gp = single(0, 0.25, 8);
        let z = 0.5;
        let expected = (z - 0.25) * sin_pi(z) / (PI * z);
        assert!((phi_eval(&gp, z).unwrap() - expected).abs() < 1e-16);
        assert_eq!(phi_eval(&gp, 0.25).unwrap(), 0.0);
        assert_eq!(phi_eval(&gp, 3.0).unwrap(), 0.0);
        assert!(phi_eval(&gp, 0.0).unwrap().abs() > 0.1);
    }

    #[test]
    fn derivative_against_finite_difference() {
        let gp = single(2, 0.3, 10);
        for k in -4..=4 {
            let tk = gp.zeros().zero(k);
            let h = 1e-6;
            let fd = (gp.phi_unchecked(tk + h) - gp.phi_unchecked(tk - h)) / (2.0 * h);
            let d = phi_prime_at_zero(&gp, k).unwrap();
            assert!(((fd - d) / d).abs() < 1e-6, "k={k} fd={fd} d={d}");
        }
    }

    #[test]
    fn derivative_signs_alternate() {
        let g = SampleSequence::from_fn(-6, 6, |k| 0.2 * ((k * 7) % 5) as f64 / 5.0 - 0.1).unwrap();
        let gp = GeneratingProduct::new(ZeroSequence::from_perturbation(&g, 12).unwrap());
        for k in -12..12 {
            let a = phi_prime_at_zero(&gp, k).unwrap();
            let b = phi_prime_at_zero(&gp, k + 1).unwrap();
            assert!(a * b < 0.0);
        }
        let (lo, hi) = gp.derivative_bounds();
        assert!(lo > 0.0 && hi < f64::INFINITY && lo <= hi);
    }

    #[test]
    fn cardinal_interpolation() {
        let g = SampleSequence::from_fn(-5, 5, |k| 0.04 * k as f64).unwrap();
        let gp = GeneratingProduct::with_trusted_radius(
            ZeroSequence::from_perturbation(&g, 10).unwrap(),
            10.5,
        );
        for k in -10..=10 {
            for j in -10..=10 {
                let v = phi_k_eval(&gp, k, gp.zeros().zero(j)).unwrap();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phi_k_is_continuous_through_its_node() {
        let gp = single(0, 0.25, 8);
        let v = phi_k_eval(&gp, 0, 0.25 + 1e-9).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        let v = phi_k_eval(&gp, 2, 2.0 - 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduces_to_shannon() {
        let gp = GeneratingProduct::new(ZeroSequence::unperturbed(16));
        let s = SampleSequence::new(-4, vec![0.5, -1.0, 2.0, 0.25, 1.5, -0.75, 3.0, 1.0, 0.1]).unwrap();
        for i in 0..64 {
            let t = -7.9 + 0.247 * i as f64;
            for k in -3..=3 {
                assert!((phi_k_eval(&gp, k, t).unwrap() - sinc_kernel(t, k)).abs() < 1e-15);
            }
            for n in [0, 2, 5] {
                let a = interpolation_partial(&gp, &s, n, t).unwrap();
                let b = shannon_partial(&s, n, t);
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interpolation_examples() {
        let gp = single(0, 0.25, 8);
        let delta = SampleSequence::delta(0, 1.0);
        assert_eq!(interpolation_partial(&gp, &delta, 2, 0.25).unwrap(), 1.0);
        assert!(interpolation_partial(&gp, &delta, 9, 0.25).is_err());
    }

    #[test]
    fn sine_crossing_examples() {
        let gp = GeneratingProduct::new(ZeroSequence::unperturbed(10));
        for i in 0..20 {
            assert_eq!(sine_crossing_partial(&gp, 4, -4.0 + 0.4 * i as f64).unwrap(), 0.0);
        }
        let gp = single(0, 0.25, 8);
        let v = sine_crossing_partial(&gp, 0, 1.5).unwrap();
        let expected = sin_pi(0.25) * phi_k_eval(&gp, 0, 1.5).unwrap();
        assert!((v - expected).abs() < 1e-16);

        let g = SampleSequence::from_fn(-6, 6, |_| 0.3).unwrap();
        let z = ZeroSequence::from_perturbation(&g, 6).unwrap();
        for k in -6..=6 {
            let s = crossing_sample(&z, k);
            assert_eq!(s > 0.0, k.rem_euclid(2) == 0);
            assert!((s - sin_pi(z.zero(k))).abs() < 1e-15);
        }
    }

    #[test]
    fn midpoints() {
        let z = ZeroSequence::unperturbed(5);
        assert_eq!(midpoint_probe(&z, 3).unwrap(), 3.5);
        let g = SampleSequence::new(3, vec![0.1, 0.3]).unwrap();
        let z = ZeroSequence::from_perturbation(&g, 5).unwrap();
        let m = midpoint_probe(&z, 3).unwrap();
        assert!((m - 3.7).abs() < 1e-15);
        assert!(z.zero(3) < m && m < z.zero(4));
        assert!(midpoint_probe(&z, 5).is_err());
    }

    #[test]
    fn phi_keeps_sign_between_zeros() {
        let g = SampleSequence::from_fn(-8, 8, |k| 0.3 * (((k * 13) % 7) as f64 / 7.0) - 0.15).unwrap();
        let gp = GeneratingProduct::new(ZeroSequence::from_perturbation(&g, 16).unwrap());
        let z = gp.zeros().clone();
        for k in -7..7 {
            let (a, b) = (z.zero(k), z.zero(k + 1));
            let sign = phi_eval(&gp, 0.5 * (a + b)).unwrap().signum();
            for i in 1..50 {
                let t = a + (b - a) * i as f64 / 50.0;
                assert_eq!(phi_eval(&gp, t).unwrap().signum(), sign);
            }
        }
    }
}
