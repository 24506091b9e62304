//! Finitely supported integer sample sequences and the adversarial
//! constructions built from trapezoid windows.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ScheduleCondition};
use crate::io::fmt_f64;

/// Default hard limit on the number of materialized coefficients.
pub const DEFAULT_COEFFICIENT_CAP: u64 = 1 << 24;

/// Finitely supported map `k -> c_k` on the integers, kept in trimmed form.
///
/// The identically zero sequence is stored as support `[0, 0]` with a single
/// zero coefficient; every other sequence has nonzero end coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleSequenceRepr", into = "SampleSequenceRepr")]
pub struct SampleSequence {
    lo: i64,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SampleSequenceRepr {
    support_lo: i64,
    support_hi: i64,
    coefficients: Vec<f64>,
}

impl TryFrom<SampleSequenceRepr> for SampleSequence {
    type Error = Error;

    fn try_from(repr: SampleSequenceRepr) -> Result<Self> {
        let expected = repr.support_hi - repr.support_lo + 1;
        if expected < 1 || expected as usize != repr.coefficients.len() {
            return Err(Error::InvalidArgument(format!(
                "support [{}, {}] does not match {} coefficients",
                repr.support_lo,
                repr.support_hi,
                repr.coefficients.len()
            )));
        }
        SampleSequence::new(repr.support_lo, repr.coefficients)
    }
}

impl From<SampleSequence> for SampleSequenceRepr {
    fn from(s: SampleSequence) -> Self {
        SampleSequenceRepr {
            support_lo: s.support_lo(),
            support_hi: s.support_hi(),
            coefficients: s.coefficients,
        }
    }
}

impl SampleSequence {
    /// Builds a sequence with `coefficients[i]` at `k = lo + i`, then trims it.
    pub fn new(lo: i64, coefficients: Vec<f64>) -> Result<Self> {
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(lo + i as i64));
        }
        Ok(Self::trimmed(lo, coefficients))
    }

    pub fn zero() -> Self {
        Self {
            lo: 0,
            coefficients: vec![0.0],
        }
    }

    /// `value` at `k`, zero elsewhere.
    pub fn delta(k: i64, value: f64) -> Self {
        Self::trimmed(k, vec![value])
    }

    /// Samples `f(k)` for `k` in `[lo, hi]`.
    pub fn from_fn(lo: i64, hi: i64, f: impl Fn(i64) -> f64) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
        }
        Self::new(lo, (lo..=hi).map(f).collect())
    }

    fn trimmed(lo: i64, mut coefficients: Vec<f64>) -> Self {
        let first = coefficients.iter().position(|&c| c != 0.0);
        match first {
            None => Self::zero(),
            Some(first) => {
                let last = coefficients.iter().rposition(|&c| c != 0.0).unwrap();
                coefficients.truncate(last + 1);
                coefficients.drain(..first);
                Self {
                    lo: lo + first as i64,
                    coefficients,
                }
            }
        }
    }

    pub fn support_lo(&self) -> i64 {
        self.lo
    }

    pub fn support_hi(&self) -> i64 {
        self.lo + self.coefficients.len() as i64 - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Largest `|k|` in the support.
    pub fn radius(&self) -> u64 {
        self.lo.unsigned_abs().max(self.support_hi().unsigned_abs())
    }

    pub fn get(&self, k: i64) -> f64 {
        let i = k - self.lo;
        if i < 0 {
            return 0.0;
        }
        self.coefficients.get(i as usize).copied().unwrap_or(0.0)
    }

    /// `(k, c_k)` over the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lo + i as i64, c))
    }

    /// `(k, c_k)` restricted to `k` in `[lo, hi]`.
    pub fn iter_range(&self, lo: i64, hi: i64) -> impl Iterator<Item = (i64, f64)> + '_ {
        let a = lo.max(self.support_lo());
        let b = hi.min(self.support_hi());
        (a..=b).map(move |k| (k, self.coefficients[(k - self.lo) as usize]))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.len() == 1 && self.coefficients[0] == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        crate::summation::compensated_sum(self.coefficients.iter().map(|c| c.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::trimmed(self.lo, self.coefficients.iter().map(|c| c * factor).collect())
    }

    /// Sample shift: the result has `c'_k = c_(k - offset)`.
    pub fn shifted(&self, offset: i64) -> Self {
        Self {
            lo: self.lo + offset,
            coefficients: self.coefficients.clone(),
        }
    }

    /// `sum_i weight_i * seq_i` over the union of supports.
    pub fn linear_combination(terms: &[(f64, &SampleSequence)]) -> Self {
        if terms.is_empty() {
            return Self::zero();
        }
        let lo = terms.iter().map(|(_, s)| s.support_lo()).min().unwrap();
        let hi = terms.iter().map(|(_, s)| s.support_hi()).max().unwrap();
        let mut acc = vec![crate::summation::CompensatedSum::new(); (hi - lo + 1) as usize];
        for (w, s) in terms {
            for (k, c) in s.iter() {
                acc[(k - lo) as usize].add(w * c);
            }
        }
        Self::trimmed(lo, acc.into_iter().map(|a| a.value()).collect())
    }

    /// Two-column CSV `k,c_k` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,c_k\n");
        for (k, c) in self.iter() {
            let _ = writeln!(out, "{k},{}", fmt_f64(c));
        }
        out
    }
}

/// Trapezoid window: 1 on `|k| <= N`, linear ramp `1 - (|k| - N)/N` up to `|k| = 2N - 1`.
pub fn trapezoid_samples(n: i64) -> Result<SampleSequence> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "window index must be at least 1, got {n}"
        )));
    }
    let nf = n as f64;
    SampleSequence::from_fn(-(2 * n - 1), 2 * n - 1, |k| {
        let a = k.abs();
        if a <= n {
            1.0
        } else {
            1.0 - (a - n) as f64 / nf
        }
    })
}

/// `c'_k = (-1)^k c_k`.
pub fn modulate_alternating(s: &SampleSequence) -> SampleSequence {
    SampleSequence {
        lo: s.lo,
        coefficients: s
            .iter()
            .map(|(k, c)| if k.rem_euclid(2) == 0 { c } else { -c })
            .collect(),
    }
}

/// Level schedule `N_1 < ... < N_L` with positive weights `a_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    indices: Vec<u64>,
    weights: Vec<f64>,
    cap: u64,
}

impl ScheduleConfig {
    pub fn new(indices: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        if indices.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} indices but {} weights",
                indices.len(),
                weights.len()
            )));
        }
        if let Some(&0) = indices.first() {
            return Err(Error::InvalidArgument("schedule indices must be positive".into()));
        }
        if let Some(p) = indices.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NotIncreasing(p + 1));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "schedule weights must be positive and finite, got {w}"
            )));
        }
        Ok(Self {
            indices,
            weights,
            cap: DEFAULT_COEFFICIENT_CAP,
        })
    }

    /// `N_l = 2^(l^3)`, `a_l = 1/l^2` for `l = 1..=levels`.
    ///
    /// Only levels whose index fits in 64 bits can be declared at all.
    pub fn cubic_exponent(levels: usize) -> Result<Self> {
        let mut indices = Vec::with_capacity(levels);
        for l in 1..=levels {
            let exponent = (l as u32).pow(3);
            let n = 1u64.checked_shl(exponent).filter(|_| exponent < 64).ok_or(
                Error::CapExceeded {
                    level: l,
                    needed: u128::MAX,
                    cap: DEFAULT_COEFFICIENT_CAP,
                },
            )?;
            indices.push(n);
        }
        let weights = (1..=levels).map(|l| 1.0 / (l * l) as f64).collect();
        Self::new(indices, weights)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn levels(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Checks that the widest window `w_(N_L)` fits under the cap.
    fn check_cap(&self) -> Result<()> {
        let Some(&last) = self.indices.last() else {
            return Err(Error::EmptySchedule);
        };
        let needed = 4 * last as u128 - 1;
        if needed > self.cap as u128 {
            let level = self
                .indices
                .iter()
                .position(|&n| 4 * n as u128 - 1 > self.cap as u128)
                .unwrap()
                + 1;
            return Err(Error::CapExceeded {
                level,
                needed: 4 * self.indices[level - 1] as u128 - 1,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// 1-based level `j` whose plateau `|k| <= N_j` is the first to cover `n`.
    pub fn covering_level(&self, n: u64) -> Option<usize> {
        self.indices.iter().position(|&idx| idx >= n).map(|p| p + 1)
    }
}

fn weighted_windows(indices: &[u64], weights: &[f64]) -> Result<SampleSequence> {
    let windows = indices
        .iter()
        .map(|&n| trapezoid_samples(n as i64))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<(f64, &SampleSequence)> = weights.iter().copied().zip(windows.iter()).collect();
    Ok(SampleSequence::linear_combination(&terms))
}

/// `g = sum_l a_l w_(N_l)` and its alternating modulation `f1`.
#[derive(Debug, Clone)]
pub struct Thm1Adversary {
    pub g: SampleSequence,
    pub f1: SampleSequence,
}

pub fn thm1_adversary(sched: &ScheduleConfig) -> Result<Thm1Adversary> {
    sched.check_cap()?;
    let g = weighted_windows(sched.indices(), sched.weights())?;
    let f1 = modulate_alternating(&g);
    Ok(Thm1Adversary { g, f1 })
}

/// One shifted block `q^1` of the Hardy-space adversary.
#[derive(Debug, Clone)]
pub struct Thm4Block {
    /// Position of the selected index inside the base subsequence.
    pub base_position: usize,
    pub n: u64,
    /// Largest integer with `3 * n1 <= n`.
    pub n1: u64,
    pub weight: f64,
    /// Unweighted block samples `(-1)^(k-N+N1) w_N1(k - N + N1)`.
    pub samples: SampleSequence,
    /// `weight * (1/pi) * log(N - 3/2)`: what condition i) would ask to be at least `r`.
    pub middle_bound: f64,
}

#[derive(Debug, Clone)]
pub struct Thm4Adversary {
    pub f1: SampleSequence,
    pub blocks: Vec<Thm4Block>,
}

impl Thm4Adversary {
    pub fn chosen_indices(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.n).collect()
    }
}

fn thm4_block(n: u64, weight: f64, base_position: usize) -> Result<Thm4Block> {
    let n1 = n / 3;
    let shift = n as i64 - n1 as i64;
    let window = trapezoid_samples(n1 as i64)?;
    let samples = modulate_alternating(&window).shifted(shift);
    Ok(Thm4Block {
        base_position,
        n,
        n1,
        weight,
        samples,
        middle_bound: weight * ((n as f64 - 1.5).ln() / PI),
    })
}

/// Selects `r_max` indices from `base_subseq` satisfying `floor(N_(l_(r+1))/3) >= N_(l_r)^2`
/// and sums the weighted shifted blocks.
pub fn thm4_adversary(
    base_subseq: &[u64],
    r_max: usize,
    weights: &[f64],
    cap: u64,
) -> Result<Thm4Adversary> {
    if r_max == 0 {
        return Err(Error::InvalidArgument("at least one block is required".into()));
    }
    if weights.len() < r_max {
        return Err(Error::InvalidArgument(format!(
            "{} weights supplied for {r_max} blocks",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidArgument(format!("block weights must be positive, got {w}")));
    }
    if let Some(p) = base_subseq.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing(p + 1));
    }
    match base_subseq.first() {
        None => return Err(Error::EmptySchedule),
        Some(&n) if n < 3 => {
            return Err(Error::InvalidArgument(format!(
                "first index must be at least 3 so that N1 >= 1, got {n}"
            )))
        }
        _ => {}
    }

    let mut chosen = vec![0usize];
    let mut pos = 1;
    while chosen.len() < r_max {
        let prev = base_subseq[*chosen.last().unwrap()] as u128;
        let required = prev * prev;
        let start = pos;
        while pos < base_subseq.len() && ((base_subseq[pos] / 3) as u128) < required {
            pos += 1;
        }
        if pos == base_subseq.len() {
            let rejected: Vec<u64> = base_subseq[start..].to_vec();
            return Err(Error::SubsequenceExhausted {
                block: chosen.len() + 1,
                detail: format!(
                    "after N = {prev} the next index needs floor(N/3) >= {required} (N >= {}); \
                     rejected candidates {rejected:?}",
                    3 * required
                ),
            });
        }
        chosen.push(pos);
        pos += 1;
    }

    let last = base_subseq[*chosen.last().unwrap()];
    let needed = (last + last / 3) as u128;
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            level: chosen.len(),
            needed,
            cap,
        });
    }

    let blocks = chosen
        .iter()
        .enumerate()
        .map(|(r, &p)| thm4_block(base_subseq[p], weights[r], p))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<(f64, &SampleSequence)> = blocks.iter().map(|b| (b.weight, &b.samples)).collect();
    let f1 = SampleSequence::linear_combination(&terms);
    Ok(Thm4Adversary { f1, blocks })
}

/// `C(0) = max(1, max_k |g(k)|)` and `C(n) = max_(|k| >= n) |g(k)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    values: Vec<f64>,
    vanishes_beyond: u64,
}

impl DecayEnvelope {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn c0(&self) -> f64 {
        self.values[0]
    }

    /// `C(n)`; past the stored range this returns the last stored value
    /// (an upper bound by monotonicity) until the support ends, then zero.
    pub fn at(&self, n: u64) -> f64 {
        if n > self.vanishes_beyond {
            0.0
        } else if n <= self.n_max() {
            self.values[n as usize]
        } else {
            *self.values.last().unwrap()
        }
    }

    /// Support radius of the sequence the envelope was built from.
    pub fn vanishes_beyond(&self) -> u64 {
        self.vanishes_beyond
    }
}

pub fn compute_envelope(g: &SampleSequence, n_max: u64) -> DecayEnvelope {
    let radius = if g.is_zero() { 0 } else { g.radius() };
    // suffix[r] = max_(|k| >= r) |g(k)|
    let mut suffix = vec![0.0f64; radius as usize + 2];
    for r in (0..=radius as i64).rev() {
        let m = g.get(r).abs().max(g.get(-r).abs());
        suffix[r as usize] = m.max(suffix[r as usize + 1]);
    }
    let mut values = Vec::with_capacity(n_max as usize + 1);
    values.push(1.0f64.max(g.max_abs()));
    for n in 1..=n_max {
        values.push(suffix.get(n as usize).copied().unwrap_or(0.0));
    }
    DecayEnvelope {
        values,
        vanishes_beyond: if g.is_zero() { 0 } else { radius },
    }
}

#[derive(Debug, Clone)]
pub struct Thm2Adversary {
    pub g1: SampleSequence,
    pub f1: SampleSequence,
    pub schedule: Vec<u64>,
    pub weights: Vec<f64>,
}

const EIGHT_PI: f64 = 8.0 * PI;

fn least_envelope_index(env: &DecayEnvelope, c0: f64, threshold: f64) -> u64 {
    let known = env.n_max().min(env.vanishes_beyond());
    (1..=known)
        .find(|&n| EIGHT_PI * c0 * env.at(n) < threshold)
        .unwrap_or(env.vanishes_beyond() + 1)
}

/// Least positive integer `N` with `ln N > x`, or `None` if it exceeds `cap`.
fn least_log_index(x: f64, cap: u64) -> Option<u64> {
    if x < 0.0 {
        return Some(1);
    }
    let guess = x.exp();
    if !guess.is_finite() || guess > cap as f64 + 1.0 {
        return None;
    }
    let mut n = (guess.floor() as u64).max(1);
    while n > 1 && ((n - 1) as f64).ln() > x {
        n -= 1;
    }
    while !((n as f64).ln() > x) {
        n += 1;
    }
    (n <= cap).then_some(n)
}

/// Index schedule and `g1 = C(0) w_(N_1) + sum_(j>=2) 2^-(j-1) w_(N_j)`.
///
/// `N_1` is the least integer with `8 pi C(0) C(N_1) < 1`; for `j >= 2`, `N_j`
/// is the least integer with `8 pi C(0) C(N_j) < 2^-j` and `2^-j log N_j > j`.
/// Fails with the partial schedule as soon as an index would exceed `cap`.
pub fn thm2_adversary(env: &DecayEnvelope, k_max: usize, cap: u64) -> Result<Thm2Adversary> {
    if k_max == 0 {
        return Err(Error::EmptySchedule);
    }
    let c0 = env.c0();
    let mut schedule: Vec<u64> = Vec::with_capacity(k_max);
    for level in 1..=k_max {
        let threshold = if level == 1 { 1.0 } else { 0.5f64.powi(level as i32) };
        let by_envelope = least_envelope_index(env, c0, threshold);
        let by_log = if level == 1 {
            Some(1)
        } else {
            least_log_index(level as f64 * 2f64.powi(level as i32), cap)
        };
        let abort = |condition| Error::ScheduleCapExceeded {
            level,
            condition,
            cap,
            partial: schedule.clone(),
        };
        let Some(by_log) = by_log else {
            return Err(abort(ScheduleCondition::LogGrowth));
        };
        if by_envelope > cap {
            return Err(abort(ScheduleCondition::EnvelopeDecay));
        }
        schedule.push(by_envelope.max(by_log));
    }
    let weights: Vec<f64> = (1..=k_max)
        .map(|j| if j == 1 { c0 } else { 0.5f64.powi(j as i32 - 1) })
        .collect();
    let g1 = weighted_windows(&schedule, &weights)?;
    let f1 = modulate_alternating(&g1);
    Ok(Thm2Adversary {
        g1,
        f1,
        schedule,
        weights,
    })
}

/// Desk-scale variant of [`thm2_adversary`]: indices and weights come from `sched`.
///
/// Each level must still dominate the perturbation envelope,
/// `8 pi C(0) C(N_j) < a_(j+1)`, so that the samples of `f1` at the perturbed
/// zeros keep the sign pattern `(-1)^k` beyond `N_1`.
pub fn thm2_adversary_from_schedule(
    env: &DecayEnvelope,
    sched: &ScheduleConfig,
) -> Result<Thm2Adversary> {
    sched.check_cap()?;
    let c0 = env.c0();
    for j in 0..sched.levels().saturating_sub(1) {
        let lhs = EIGHT_PI * c0 * env.at(sched.indices()[j]);
        let rhs = sched.weights()[j + 1];
        if !(lhs < rhs) {
            return Err(Error::InvalidArgument(format!(
                "level {}: 8*pi*C(0)*C({}) = {lhs} is not below the next weight {rhs}",
                j + 1,
                sched.indices()[j]
            )));
        }
    }
    let g1 = weighted_windows(sched.indices(), sched.weights())?;
    let f1 = modulate_alternating(&g1);
    Ok(Thm2Adversary {
        g1,
        f1,
        schedule: sched.indices().to_vec(),
        weights: sched.weights().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn window_n2() {
        let w = trapezoid_samples(2).unwrap();
        assert_eq!((w.support_lo(), w.support_hi()), (-3, 3));
        for k in -2..=2 {
            assert_eq!(w.get(k), 1.0);
        }
        assert_eq!(w.get(3), 0.5);
        assert_eq!(w.get(-3), 0.5);
        assert_eq!(w.get(4), 0.0);
    }

    #[test]
    fn window_n1_has_no_ramp() {
        let w = trapezoid_samples(1).unwrap();
        assert_eq!(w.coefficients(), &[1.0, 1.0, 1.0]);
        assert_eq!(w.support_lo(), -1);
    }

    #[test]
    fn window_ramp_value() {
        let w = trapezoid_samples(3).unwrap();
        assert_eq!(w.get(5), 1.0 - 2.0 / 3.0);
    }

    #[test]
    fn window_rejects_nonpositive() {
        assert!(trapezoid_samples(0).is_err());
        assert!(trapezoid_samples(-4).is_err());
    }

    #[test]
    fn modulation_examples() {
        assert!(modulate_alternating(&SampleSequence::zero()).is_zero());
        let s = SampleSequence::new(0, vec![1.0, 1.0]).unwrap();
        assert_eq!(modulate_alternating(&s).coefficients(), &[1.0, -1.0]);
        let w = trapezoid_samples(2).unwrap();
        assert_eq!(modulate_alternating(&modulate_alternating(&w)), w);
    }

    #[test]
    fn trimming_and_zero_form() {
        let s = SampleSequence::new(-3, vec![0.0, 0.0, 2.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!((s.support_lo(), s.support_hi()), (-1, 1));
        assert_eq!(s.coefficients(), &[2.0, 0.0, -1.0]);
        let z = SampleSequence::new(5, vec![0.0; 4]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z, SampleSequence::zero());
        assert!(SampleSequence::new(0, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn json_and_csv_surfaces() {
        let s = SampleSequence::new(-1, vec![0.5, 1.0, 0.25]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"support_lo":-1,"support_hi":1,"coefficients":[0.5,1.0,0.25]}"#
        );
        let back: SampleSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"support_lo":0,"support_hi":5,"coefficients":[1.0]}"#;
        assert!(serde_json::from_str::<SampleSequence>(bad).is_err());

        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,c_k");
        assert_eq!(lines[1], "-1,5.0000000000000000e-1");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn thm1_single_level_is_a_window() {
        let sched = ScheduleConfig::new(vec![1], vec![1.0]).unwrap();
        let adv = thm1_adversary(&sched).unwrap();
        assert_eq!(adv.g, trapezoid_samples(1).unwrap());
        assert_eq!(adv.f1, modulate_alternating(&adv.g));
    }

    #[test]
    fn thm1_two_levels() {
        let sched = ScheduleConfig::new(vec![1, 2], vec![1.0, 0.25]).unwrap();
        let adv = thm1_adversary(&sched).unwrap();
        assert_eq!(adv.g.get(0), 1.25);
        assert_eq!(adv.g.get(3), 0.125);
    }

    #[test]
    fn thm1_rejects_empty_schedule() {
        let sched = ScheduleConfig::new(vec![], vec![]).unwrap();
        assert!(matches!(thm1_adversary(&sched), Err(Error::EmptySchedule)));
    }

    #[test]
    fn cubic_exponent_schedule_hits_the_cap() {
        let two = ScheduleConfig::cubic_exponent(2).unwrap();
        assert_eq!(two.indices(), &[2, 256]);
        assert!(thm1_adversary(&two).is_ok());

        let three = ScheduleConfig::cubic_exponent(3).unwrap();
        assert_eq!(three.indices()[2], 1 << 27);
        match thm1_adversary(&three) {
            Err(Error::CapExceeded { level, .. }) => assert_eq!(level, 3),
            other => panic!("expected cap violation, got {other:?}"),
        }
        assert!(matches!(
            ScheduleConfig::cubic_exponent(4),
            Err(Error::CapExceeded { level: 4, .. })
        ));
    }

    #[test]
    fn schedule_validation() {
        assert!(ScheduleConfig::new(vec![4, 4], vec![1.0, 1.0]).is_err());
        assert!(ScheduleConfig::new(vec![4, 8], vec![1.0, 0.0]).is_err());
        assert!(ScheduleConfig::new(vec![4, 8], vec![1.0]).is_err());
        assert!(ScheduleConfig::new(vec![0, 8], vec![1.0, 1.0]).is_err());
        let s = ScheduleConfig::new(vec![4, 16, 64], vec![1.0, 0.25, 0.1]).unwrap();
        assert_eq!(s.covering_level(1), Some(1));
        assert_eq!(s.covering_level(4), Some(1));
        assert_eq!(s.covering_level(5), Some(2));
        assert_eq!(s.covering_level(64), Some(3));
        assert_eq!(s.covering_level(65), None);
    }

    #[test]
    fn thm4_block_support() {
        let adv = thm4_adversary(&[12], 1, &[1.0], DEFAULT_COEFFICIENT_CAP).unwrap();
        let b = &adv.blocks[0];
        assert_eq!(b.n1, 4);
        assert_eq!((b.samples.support_lo(), b.samples.support_hi()), (1, 15));
        assert_eq!(adv.f1, b.samples);
        // The plateau sits on [N - 2 N1, N] with alternating signs.
        for k in 4..=12 {
            assert_eq!(b.samples.get(k).abs(), 1.0);
        }
        assert_eq!(b.samples.get(8), 1.0);
        assert_eq!(b.samples.get(9), -1.0);
    }

    #[test]
    fn thm4_condition_ii_selection() {
        let adv = thm4_adversary(&[12, 145, 432, 500], 2, &[1.0, 0.25], DEFAULT_COEFFICIENT_CAP)
            .unwrap();
        assert_eq!(adv.chosen_indices(), vec![12, 432]);
        assert_eq!(adv.blocks[1].base_position, 2);
        assert_eq!(adv.blocks[1].n1, 144);

        let err = thm4_adversary(&[12, 145], 2, &[1.0, 0.25], DEFAULT_COEFFICIENT_CAP).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("condition ii)"), "{msg}");
        assert!(msg.contains("145"), "{msg}");
        assert!(msg.contains("432"), "{msg}");

        // 431/3 = 143 < 144
        assert!(thm4_adversary(&[12, 431], 2, &[1.0, 1.0], DEFAULT_COEFFICIENT_CAP).is_err());
        assert!(thm4_adversary(&[2, 431], 1, &[1.0], DEFAULT_COEFFICIENT_CAP).is_err());
    }

    #[test]
    fn envelope_examples() {
        let g = SampleSequence::new(-2, vec![0.3; 5]).unwrap();
        let env = compute_envelope(&g, 5);
        assert_eq!(env.values(), &[1.0, 0.3, 0.3, 0.0, 0.0, 0.0]);

        let env = compute_envelope(&SampleSequence::zero(), 3);
        assert_eq!(env.values(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(env.at(100), 0.0);

        let g = SampleSequence::new(-1, vec![2.0, 0.1, -0.5]).unwrap();
        let env = compute_envelope(&g, 3);
        assert_eq!(env.values(), &[2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn envelope_upper_bound_past_stored_range() {
        let g = SampleSequence::from_fn(-10, 10, |k| 0.4 / (1 + k.abs()) as f64).unwrap();
        let env = compute_envelope(&g, 2);
        assert_eq!(env.at(5), env.values()[2]);
        assert_eq!(env.at(11), 0.0);
    }

    #[test]
    fn thm2_single_level() {
        let env = compute_envelope(&SampleSequence::zero(), 4);
        let adv = thm2_adversary(&env, 1, DEFAULT_COEFFICIENT_CAP).unwrap();
        assert_eq!(adv.schedule, vec![1]);
        assert_eq!(adv.g1, trapezoid_samples(1).unwrap());
    }

    #[test]
    fn thm2_log_condition_drives_the_schedule() {
        let env = compute_envelope(&SampleSequence::zero(), 4);
        let adv = thm2_adversary(&env, 2, DEFAULT_COEFFICIENT_CAP).unwrap();
        // least N with ln N > 2 * 2^2 = 8
        assert_eq!(adv.schedule, vec![1, 2981]);
        assert!((2980f64).ln() <= 8.0 && (2981f64).ln() > 8.0);
        assert_eq!(adv.weights, vec![1.0, 0.5]);

        match thm2_adversary(&env, 3, DEFAULT_COEFFICIENT_CAP) {
            Err(Error::ScheduleCapExceeded {
                level,
                condition,
                partial,
                ..
            }) => {
                assert_eq!(level, 3);
                assert_eq!(condition, ScheduleCondition::LogGrowth);
                assert_eq!(partial, vec![1, 2981]);
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn thm2_envelope_condition() {
        let g = SampleSequence::from_fn(-5, 5, |k| 0.02 * (6 - k.abs()) as f64).unwrap();
        let env = compute_envelope(&g, 10);
        let adv = thm2_adversary(&env, 1, DEFAULT_COEFFICIENT_CAP).unwrap();
        // C(n) = 0.02 (6 - n); need 8 pi C(n) < 1, i.e. C(n) < 0.0398 -> n = 5 (C = 0.02)
        assert_eq!(adv.schedule, vec![5]);

        match thm2_adversary(&env, 1, 3) {
            Err(Error::ScheduleCapExceeded { condition, .. }) => {
                assert_eq!(condition, ScheduleCondition::EnvelopeDecay)
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn thm2_desk_schedule_checks_domination() {
        let g = SampleSequence::from_fn(-3, 3, |_| 0.2).unwrap();
        let env = compute_envelope(&g, 8);
        let sched = ScheduleConfig::new(vec![4, 16, 64], vec![1.0, 1.0, 1.0]).unwrap();
        let adv = thm2_adversary_from_schedule(&env, &sched).unwrap();
        assert_eq!(adv.g1.get(0), 3.0);
        // C(2) = 0.2 is far too large for the next weight.
        let bad = ScheduleConfig::new(vec![2, 16], vec![1.0, 1.0]).unwrap();
        assert!(thm2_adversary_from_schedule(&env, &bad).is_err());
    }

    proptest! {
        #[test]
        fn window_shape(n in 1i64..200) {
            let w = trapezoid_samples(n).unwrap();
            let ones = w.coefficients().iter().filter(|&&c| c == 1.0).count();
            prop_assert_eq!(ones as i64, 2 * n + 1);
            prop_assert_eq!(w.coefficients().len() as i64 - ones as i64, 2 * (n - 1));
            for k in 0..=2 * n {
                prop_assert_eq!(w.get(k), w.get(-k));
                prop_assert!(w.get(k + 1) <= w.get(k));
            }
        }

        #[test]
        fn thm1_plateau_floor(levels in 1usize..5, seed in 0u64..1000) {
            let mut indices = Vec::new();
            let mut n = 1 + seed % 5;
            for _ in 0..levels {
                indices.push(n);
                n = 2 * n + 1 + seed % 7;
            }
            let weights: Vec<f64> = (1..=levels).map(|l| 1.0 / (l * l) as f64).collect();
            let sched = ScheduleConfig::new(indices.clone(), weights.clone()).unwrap();
            let adv = thm1_adversary(&sched).unwrap();
            let last = *indices.last().unwrap() as i64;
            for k in -(2 * last - 1)..=(2 * last - 1) {
                prop_assert!(adv.g.get(k) > 0.0);
                prop_assert_eq!(adv.g.get(k), adv.g.get(-k));
            }
            for (j, &nj) in indices.iter().enumerate() {
                for k in -(nj as i64)..=(nj as i64) {
                    prop_assert!(adv.g.get(k) >= weights[j] - 1e-15);
                }
            }
        }

        #[test]
        fn envelope_dominates(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..40), lo in -20i64..5) {
            let g = SampleSequence::new(lo, coeffs).unwrap();
            let n_max = g.radius() + 3;
            let env = compute_envelope(&g, n_max);
            for n in 1..=n_max {
                for (k, c) in g.iter() {
                    if k.unsigned_abs() >= n {
                        prop_assert!(env.at(n) >= c.abs());
                    }
                }
                prop_assert!(env.at(n + 1) <= env.at(n));
            }
            prop_assert!(env.c0() >= 1.0);
        }
    }
}
