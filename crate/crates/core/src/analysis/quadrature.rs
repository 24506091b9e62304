//! PW^1 norm of a finitely supported sample sequence.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signals::SampleSequence;
use crate::summation::{cos_pi, sin_pi, CompensatedSum};

/// Smallest admissible oversampling factor.
pub const MIN_OVERSAMPLE: u64 = 8;
pub const DEFAULT_OVERSAMPLE: u64 = 32;

const GAUSS_POINTS: usize = 8;
/// A local minimum of `|G|` below this fraction of `sum |c_k|` is treated as a zero.
const ZERO_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pw1Norm {
    /// Integral on the doubled grid.
    pub value: f64,
    /// `|I_M - I_2M|`, floored at the roundoff level of the sum.
    pub error_estimate: f64,
    /// Number of zeros of the symbol used as quadrature breakpoints.
    pub kinks: usize,
    /// Coarse node count `M`.
    pub nodes: usize,
}

/// Symbol `G(w) = sum_j c_j e^(-i j w)` relative to the support start.
struct Symbol<'a> {
    coefficients: &'a [f64],
}

impl Symbol<'_> {
    /// Horner evaluation in `z = e^(-i w)`.
    fn modulus(&self, omega: f64) -> f64 {
        let (s, c) = omega.sin_cos();
        let z = Complex64::new(c, -s);
        let g = self
            .coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
        g.norm()
    }
}

/// Moduli at `w_m = -pi + 2 pi m / n`, `m = 0..n`, with phases taken from an
/// exact table so that a half-period shift maps nodes onto nodes.
fn uniform_moduli(coefficients: &[f64], n: usize) -> Vec<f64> {
    let roots: Vec<Complex64> = (0..n)
        .map(|q| {
            let x = 2.0 * q as f64 / n as f64;
            Complex64::new(cos_pi(x), -sin_pi(x))
        })
        .collect();
    (0..n)
        .into_par_iter()
        .map(|m| {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for (j, &c) in coefficients.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                // e^(-i j w_m) = (-1)^j e^(-2 pi i j m / n)
                let z = roots[(j * m) % n];
                let c = if j % 2 == 0 { c } else { -c };
                re.add(c * z.re);
                im.add(c * z.im);
            }
            re.value().hypot(im.value())
        })
        .collect()
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Composite Gauss-Legendre over the arcs between consecutive breakpoints of
/// the circle, `panels_per_period` panels for a full period.
fn piecewise_gauss(symbol: &Symbol<'_>, breaks: &[f64], panels_per_period: usize) -> f64 {
    let rule = gauss_legendre(GAUSS_POINTS);
    let arcs: Vec<(f64, f64)> = (0..breaks.len())
        .map(|i| {
            let a = breaks[i];
            let b = if i + 1 < breaks.len() {
                breaks[i + 1]
            } else {
                breaks[0] + 2.0 * PI
            };
            (a, b)
        })
        .collect();
    let parts: Vec<f64> = arcs
        .par_iter()
        .map(|&(a, b)| {
            let panels = ((b - a) / (2.0 * PI) * panels_per_period as f64).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            let mut acc = CompensatedSum::new();
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * h;
                for &(x, w) in &rule {
                    acc.add(w * 0.5 * h * symbol.modulus(mid + 0.5 * h * x));
                }
            }
            acc.value()
        })
        .collect();
    parts.into_iter().sum::<CompensatedSum>().value() / (2.0 * PI)
}

/// `(1/2pi) int_(-pi)^(pi) |sum_k s(k) e^(-i k w)| dw`.
///
/// Nodes are `oversample * (support width)` uniformly spaced points, doubled for
/// the error estimate. Zeros of the symbol (where the modulus has a kink) are
/// located on the doubled grid and refined; when present, the smooth arcs
/// between them are integrated with composite Gauss-Legendre at the same node
/// budget instead of the trapezoid rule.
pub fn pw1_norm(s: &SampleSequence, oversample: u64) -> Result<Pw1Norm> {
    if oversample < MIN_OVERSAMPLE {
        return Err(Error::InvalidArgument(format!(
            "oversample must be at least {MIN_OVERSAMPLE}, got {oversample}"
        )));
    }
    if s.is_zero() {
        return Ok(Pw1Norm {
            value: 0.0,
            error_estimate: 0.0,
            kinks: 0,
            nodes: 0,
        });
    }
    let coefficients = s.coefficients();
    let width = coefficients.len();
    let m = oversample as usize * width;
    let fine = uniform_moduli(coefficients, 2 * m);
    let scale: f64 = coefficients.iter().map(|c| c.abs()).sum();
    let symbol = Symbol { coefficients };

    let h = 2.0 * PI / (2 * m) as f64;
    let node = |i: usize| -PI + i as f64 * h;
    let n = fine.len();
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = fine[i];
            v <= fine[(i + n - 1) % n] && v <= fine[(i + 1) % n] && v <= 1e-2 * scale
        })
        .collect();
    let mut kinks: Vec<f64> = candidates
        .par_iter()
        .filter_map(|&i| {
            let c = node(i);
            let (w, v) = golden_min(|w| symbol.modulus(w), c - h, c + h);
            (v <= ZERO_THRESHOLD * scale).then_some(w)
        })
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup_by(|b, a| (*b - *a).abs() < 0.25 * h);
    if kinks.len() > 1 && kinks[0] + 2.0 * PI - kinks[kinks.len() - 1] < 0.25 * h {
        kinks.pop();
    }

    let (coarse, refined) = if kinks.is_empty() {
        let coarse = fine.iter().step_by(2).copied().sum::<CompensatedSum>().value() / m as f64;
        let refined = fine.iter().copied().sum::<CompensatedSum>().value() / (2 * m) as f64;
        (coarse, refined)
    } else {
        let panels = m.div_ceil(GAUSS_POINTS);
        (
            piecewise_gauss(&symbol, &kinks, panels),
            piecewise_gauss(&symbol, &kinks, 2 * panels),
        )
    };
    let floor = 64.0 * f64::EPSILON * refined.abs().max(scale);
    Ok(Pw1Norm {
        value: refined,
        error_estimate: (coarse - refined).abs().max(floor),
        kinks: kinks.len(),
        nodes: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{modulate_alternating, trapezoid_samples};

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let rule = gauss_legendre(GAUSS_POINTS);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x14: f64 = rule.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((x14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn delta_has_unit_norm() {
        let n = pw1_norm(&SampleSequence::delta(0, 1.0), 8).unwrap();
        assert_eq!(n.value, 1.0);
        let n = pw1_norm(&SampleSequence::delta(7, -2.0), 8).unwrap();
        assert!((n.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ones_closed_form() {
        // |1 + 2 cos w| integrates to 1/3 + 2 sqrt(3)/pi
        let s = SampleSequence::new(-1, vec![1.0; 3]).unwrap();
        let n = pw1_norm(&s, 32).unwrap();
        let exact = 1.0 / 3.0 + 2.0 * 3f64.sqrt() / PI;
        assert_eq!(n.kinks, 2);
        assert!((n.value - exact).abs() < 1e-12, "{}", n.value - exact);
        assert!(n.error_estimate < 1e-10);
    }

    #[test]
    fn windows_stay_below_three() {
        for n in [1, 2, 5, 17, 64] {
            let w = trapezoid_samples(n).unwrap();
            let norm = pw1_norm(&w, 32).unwrap();
            assert!(norm.value < 3.0 && norm.value >= 1.0);
            assert!(norm.error_estimate < 1e-8);
        }
    }

    #[test]
    fn modulation_invariance() {
        let s = SampleSequence::new(-3, vec![0.3, -1.0, 2.0, 0.5, 0.0, 1.25, -0.4]).unwrap();
        let a = pw1_norm(&s, 16).unwrap();
        let b = pw1_norm(&modulate_alternating(&s), 16).unwrap();
        assert!((a.value - b.value).abs() <= 2.0 * a.error_estimate.max(b.error_estimate));
    }

    #[test]
    fn rejects_small_oversample() {
        assert!(pw1_norm(&SampleSequence::delta(0, 1.0), 4).is_err());
        assert_eq!(pw1_norm(&SampleSequence::zero(), 8).unwrap().value, 0.0);
    }
}
