//! Divergence traces: certified probe values against grid extrema along a ladder of N.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{grid_points, extrema_over, GridExtrema, DEFAULT_MARGIN, DEFAULT_STEP};
use crate::engines::{
    half_integer_closed_form, shannon_partial, shannon_partial_one_sided, signal_value,
    valiron_partial,
};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::oracle::Oracle;
use crate::signals::{
    compute_envelope, thm1_adversary, thm2_adversary_from_schedule, thm4_adversary,
    SampleSequence, ScheduleConfig, Thm4Adversary,
};
use crate::sinetype::{
    crossing_sample, interpolation_unchecked, midpoint_probe, sample_signal_at_zeros,
    GeneratingProduct, ZeroSequence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    ShannonThm1,
    Valiron,
    Thm4,
    SinetypeThm2,
    SinecrossingThm3,
}

impl TraceKind {
    pub const ALL: [TraceKind; 5] = [
        TraceKind::ShannonThm1,
        TraceKind::Valiron,
        TraceKind::Thm4,
        TraceKind::SinetypeThm2,
        TraceKind::SinecrossingThm3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::ShannonThm1 => "shannon_thm1",
            TraceKind::Valiron => "valiron",
            TraceKind::Thm4 => "thm4",
            TraceKind::SinetypeThm2 => "sinetype_thm2",
            TraceKind::SinecrossingThm3 => "sinecrossing_thm3",
        }
    }

    fn is_sine_type(self) -> bool {
        matches!(self, TraceKind::SinetypeThm2 | TraceKind::SinecrossingThm3)
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TraceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown trace kind '{s}'")))
    }
}

/// Perturbation `g` of the integer zeros, `t_k = k + g(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    Zero,
    /// `g(k) = amplitude` for `|k| <= radius`.
    Bump { amplitude: f64, radius: u64 },
    /// The window superposition of the schedule, scaled by `1/(6 sum a_l)` so
    /// that its PW^1 norm is below 1/2 and every value lies in `[0, 1/6]`.
    ScaledThm1,
}

impl Perturbation {
    pub fn samples(&self, sched: &ScheduleConfig) -> Result<SampleSequence> {
        match *self {
            Perturbation::Zero => Ok(SampleSequence::zero()),
            Perturbation::Bump { amplitude, radius } => {
                if !(amplitude.abs() < 0.5) {
                    return Err(Error::PerturbationTooLarge { k: 0, value: amplitude });
                }
                let r = radius as i64;
                SampleSequence::from_fn(-r, r, |_| amplitude)
            }
            Perturbation::ScaledThm1 => {
                let total: f64 = sched.weights().iter().sum();
                if total == 0.0 {
                    return Ok(SampleSequence::zero());
                }
                Ok(thm1_adversary(sched)?.g.scaled(1.0 / (6.0 * total)))
            }
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Zero => f.write_str("zero"),
            Perturbation::Bump { amplitude, radius } => write!(f, "bump:{amplitude}:{radius}"),
            Perturbation::ScaledThm1 => f.write_str("thm1"),
        }
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    /// `zero`, `thm1` or `bump:AMPLITUDE:RADIUS`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad perturbation '{s}' (zero | thm1 | bump:A:R)"));
        match s {
            "zero" => Ok(Perturbation::Zero),
            "thm1" => Ok(Perturbation::ScaledThm1),
            _ => {
                let rest = s.strip_prefix("bump:").ok_or_else(bad)?;
                let (a, r) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Perturbation::Bump {
                    amplitude: a.trim().parse().map_err(|_| bad())?,
                    radius: r.trim().parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    /// Certified probe values recomputed in extended precision.
    Oracle,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "oracle" => Ok(Precision::Oracle),
            _ => Err(Error::InvalidArgument(format!("unknown precision '{s}' (double | oracle)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceConfig {
    /// Window schedule: the adversary for `shannon_thm1`/`valiron`, the
    /// candidate subsequence for `thm4`, the level schedule for `sinetype_thm2`
    /// and the source of the scaled perturbation for `sinecrossing_thm3`.
    pub schedule: ScheduleConfig,
    /// Values of N; defaults to the schedule indices (the chosen block indices for `thm4`).
    pub ladder: Option<Vec<u64>>,
    pub grid_step: f64,
    /// Search window is `[-(N + margin), N + margin]`.
    pub margin: f64,
    /// Valiron anchor point.
    pub t0: f64,
    /// Number of `thm4` blocks.
    pub blocks: usize,
    /// Zero perturbation; defaults to `bump:0.2:3` for `sinetype_thm2` and `thm1` for `sinecrossing_thm3`.
    pub perturbation: Option<Perturbation>,
    pub precision: Precision,
}

impl TraceConfig {
    pub fn new(schedule: ScheduleConfig) -> Self {
        Self {
            schedule,
            ladder: None,
            grid_step: DEFAULT_STEP,
            margin: DEFAULT_MARGIN,
            t0: 0.25,
            blocks: 2,
            perturbation: None,
            precision: Precision::Double,
        }
    }

    pub fn with_ladder(mut self, ladder: Vec<u64>) -> Self {
        self.ladder = Some(ladder);
        self
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Self {
        self.perturbation = Some(p);
        self
    }

    fn perturbation_for(&self, kind: TraceKind) -> Perturbation {
        self.perturbation.clone().unwrap_or(match kind {
            TraceKind::SinecrossingThm3 => Perturbation::ScaledThm1,
            _ => Perturbation::Bump {
                amplitude: 0.2,
                radius: 3,
            },
        })
    }
}

enum Model {
    Shannon { g: SampleSequence, f1: SampleSequence },
    Valiron { f1: SampleSequence, t0: f64, f_t0: f64 },
    Thm4 { adversary: Thm4Adversary },
    SineType { gp: GeneratingProduct, samples: SampleSequence },
}

/// A constructed adversary together with the partial-sum operator it is traced under.
pub struct TraceModel {
    kind: TraceKind,
    ladder: Vec<u64>,
    model: Model,
}

impl TraceModel {
    pub fn build(kind: TraceKind, cfg: &TraceConfig) -> Result<Self> {
        let sched = &cfg.schedule;
        let (model, default_ladder) = match kind {
            TraceKind::ShannonThm1 => {
                let adv = thm1_adversary(sched)?;
                (Model::Shannon { g: adv.g, f1: adv.f1 }, sched.indices().to_vec())
            }
            TraceKind::Valiron => {
                let adv = thm1_adversary(sched)?;
                let ladder = cfg.ladder.clone().unwrap_or_else(|| sched.indices().to_vec());
                return Self::valiron(adv.f1, cfg.t0, ladder);
            }
            TraceKind::Thm4 => {
                let adversary = thm4_adversary(sched.indices(), cfg.blocks, sched.weights(), sched.cap())?;
                let ladder = adversary.chosen_indices();
                (Model::Thm4 { adversary }, ladder)
            }
            TraceKind::SinetypeThm2 | TraceKind::SinecrossingThm3 => {
                return Self::build_sine_type(kind, cfg);
            }
        };
        let ladder = cfg.ladder.clone().unwrap_or(default_ladder);
        Ok(Self { kind, ladder, model })
    }

    /// Valiron partial sums of arbitrary samples `f1` anchored at `t0`.
    pub fn valiron(f1: SampleSequence, t0: f64, ladder: Vec<u64>) -> Result<Self> {
        if !t0.is_finite() || t0.fract() == 0.0 {
            return Err(Error::IntegerAnchor(t0));
        }
        let f_t0 = signal_value(&f1, t0);
        Ok(Self {
            kind: TraceKind::Valiron,
            ladder,
            model: Model::Valiron { f1, t0, f_t0 },
        })
    }

    fn build_sine_type(kind: TraceKind, cfg: &TraceConfig) -> Result<Self> {
        let sched = &cfg.schedule;
        let ladder = cfg.ladder.clone().unwrap_or_else(|| sched.indices().to_vec());
        let top = ladder.iter().copied().max().unwrap_or(0);
        let g = cfg.perturbation_for(kind).samples(sched)?;
        let window = top + cfg.margin.ceil() as u64 + 2;
        let zeros = ZeroSequence::from_perturbation(&g, window)?;
        let trusted = zeros.window() as f64;
        let samples = match kind {
            TraceKind::SinetypeThm2 => {
                let env = compute_envelope(&g, zeros.window());
                let adv = thm2_adversary_from_schedule(&env, sched)?;
                sample_signal_at_zeros(&adv.f1, &zeros, zeros.window())?
            }
            _ => {
                let w = zeros.window() as i64;
                SampleSequence::from_fn(-w, w, |k| crossing_sample(&zeros, k))?
            }
        };
        let gp = GeneratingProduct::with_trusted_radius(zeros, trusted);
        Ok(Self {
            kind,
            ladder,
            model: Model::SineType { gp, samples },
        })
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn ladder(&self) -> &[u64] {
        &self.ladder
    }

    /// Samples driving the partial sums (values at the zeros for sine-type kinds).
    pub fn samples(&self) -> &SampleSequence {
        match &self.model {
            Model::Shannon { f1, .. } | Model::Valiron { f1, .. } => f1,
            Model::Thm4 { adversary } => &adversary.f1,
            Model::SineType { samples, .. } => samples,
        }
    }

    pub fn generating_product(&self) -> Option<&GeneratingProduct> {
        match &self.model {
            Model::SineType { gp, .. } => Some(gp),
            _ => None,
        }
    }

    /// The N-th partial sum at `t`.
    pub fn evaluate(&self, n: u64, t: f64) -> f64 {
        match &self.model {
            Model::Shannon { f1, .. } => shannon_partial(f1, n, t),
            Model::Valiron { f1, t0, f_t0 } => {
                valiron_partial(f1, *f_t0, *t0, n, t).expect("anchor checked at construction")
            }
            Model::Thm4 { adversary } => shannon_partial_one_sided(&adversary.f1, n, t),
            Model::SineType { gp, samples } => interpolation_unchecked(gp, |k| samples.get(k), n, t),
        }
    }

    /// The proof's probe points for order `n`: `N + 1/2`, or the midpoints
    /// of `(t_N, t_(N+1))` and `(t_(N+1), t_(N+2))` for sine-type kinds.
    pub fn probes(&self, n: u64) -> Result<Vec<f64>> {
        match &self.model {
            Model::SineType { gp, .. } => Ok(vec![
                midpoint_probe(gp.zeros(), n)?,
                midpoint_probe(gp.zeros(), n + 1)?,
            ]),
            _ => Ok(vec![n as f64 + 0.5]),
        }
    }

    /// `|partial sum|` at the first probe.
    pub fn certified_lower(&self, n: u64, precision: Precision) -> Result<f64> {
        let t = self.probes(n)?[0];
        Ok(match (&self.model, precision) {
            (Model::Shannon { g, .. }, Precision::Double) => half_integer_closed_form(g, n),
            (Model::Shannon { g, .. }, Precision::Oracle) => Oracle::new().half_integer_closed_form(g, n),
            (Model::Valiron { f1, t0, f_t0 }, Precision::Oracle) => {
                Oracle::new().valiron_partial(f1, *f_t0, *t0, n, t).abs()
            }
            (Model::Thm4 { adversary }, Precision::Oracle) => {
                Oracle::new().partial_sum_range(&adversary.f1, 0, n as i64, t).abs()
            }
            _ => self.evaluate(n, t).abs(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub certified_lower: f64,
    pub grid_max: f64,
    pub grid_min: f64,
    pub argmax: f64,
    pub argmin: f64,
    /// `max(grid_max, -grid_min) / ln N`, absent for `N < 2`.
    pub log_ratio: Option<f64>,
}

impl TraceRow {
    pub fn extrema(&self) -> GridExtrema {
        GridExtrema {
            max: self.grid_max,
            argmax: self.argmax,
            min: self.grid_min,
            argmin: self.argmin,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.extrema().sup_abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceTrace {
    pub kind: TraceKind,
    pub rows: Vec<TraceRow>,
}

pub const TRACE_CSV_HEADER: &str = "N,certified_lower,grid_max,grid_min,argmax,argmin,log_ratio";

impl DivergenceTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                fmt_f64(r.certified_lower),
                fmt_f64(r.grid_max),
                fmt_f64(r.grid_min),
                fmt_f64(r.argmax),
                fmt_f64(r.argmin),
                r.log_ratio.map(fmt_f64).unwrap_or_default()
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Every row has `grid_min <= grid_max` and a grid sup at least the
    /// certified value less `tolerance`.
    pub fn invariants_hold(&self, tolerance: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.grid_min <= r.grid_max && r.sup_abs() >= r.certified_lower - tolerance)
    }

    pub fn row(&self, n: u64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

fn trace_row(model: &TraceModel, n: u64, cfg: &TraceConfig) -> Result<(TraceRow, Vec<(f64, f64)>)> {
    let probes = model.probes(n)?;
    let t_max = n as f64 + cfg.margin;
    let points = grid_points(t_max, cfg.grid_step, &probes)?;
    let ext = extrema_over(&|t| model.evaluate(n, t), &points);
    let certified_lower = model.certified_lower(n, cfg.precision)?;
    let probe_values = probes.iter().map(|&t| (t, model.evaluate(n, t))).collect();
    let log_ratio = (n >= 2).then(|| ext.sup_abs() / (n as f64).ln());
    Ok((
        TraceRow {
            n,
            certified_lower,
            grid_max: ext.max,
            grid_min: ext.min,
            argmax: ext.argmax,
            argmin: ext.argmin,
            log_ratio,
        },
        probe_values,
    ))
}

fn sorted_ladder(ladder: &[u64]) -> Vec<u64> {
    let mut l = ladder.to_vec();
    l.sort_unstable();
    l.dedup();
    l
}

pub fn trace_model(model: &TraceModel, cfg: &TraceConfig) -> Result<DivergenceTrace> {
    let rows = sorted_ladder(model.ladder())
        .into_iter()
        .map(|n| trace_row(model, n, cfg).map(|(row, _)| row))
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceTrace {
        kind: model.kind(),
        rows,
    })
}

/// Certified probe values and grid extrema for every N of the ladder, sorted by N.
pub fn divergence_trace(kind: TraceKind, cfg: &TraceConfig) -> Result<DivergenceTrace> {
    let model = TraceModel::build(kind, cfg)?;
    trace_model(&model, cfg)
}

/// Values of the N-th partial sum at the midpoints of `(t_N, t_(N+1))` and `(t_(N+1), t_(N+2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePair {
    #[serde(rename = "N")]
    pub n: u64,
    pub t_n: f64,
    pub value_n: f64,
    pub t_next: f64,
    pub value_next: f64,
    pub sign_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationTrace {
    pub trace: DivergenceTrace,
    pub probes: Vec<ProbePair>,
    pub slack: f64,
    /// `grid_max` nondecreasing (up to slack) past the first ladder entry; `None` when vacuous.
    pub max_increasing: Option<bool>,
    /// `grid_min` nonincreasing (up to slack) past the first ladder entry; `None` when vacuous.
    pub min_decreasing: Option<bool>,
}

pub const MONOTONICITY_SLACK: f64 = 0.05;

impl OscillationTrace {
    /// `min(grid_max, -grid_min)` per row: the level both extremes clear.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.trace
            .rows
            .iter()
            .map(|r| r.grid_max.min(-r.grid_min))
            .collect()
    }

    /// Longest run of consecutive rows with positive amplitude in which each
    /// amplitude exceeds `(1 - slack)` times its predecessor and the last
    /// exceeds the first.
    pub fn growth_run(&self) -> usize {
        let a = self.amplitudes();
        let mut best = 0;
        for start in 0..a.len() {
            if !(a[start] > 0.0) {
                continue;
            }
            let mut end = start;
            while end + 1 < a.len() && a[end + 1] > (1.0 - self.slack) * a[end] {
                end += 1;
            }
            while end > start && !(a[end] > a[start]) {
                end -= 1;
            }
            best = best.max(end - start + 1);
        }
        best
    }

    pub fn all_sign_flips(&self) -> bool {
        self.probes.iter().all(|p| p.sign_flip)
    }
}

fn monotone_verdict(values: &[f64], slack: f64, increasing: bool) -> Option<bool> {
    if values.len() < 2 || values.iter().all(|v| *v == 0.0) {
        return None;
    }
    Some(values.windows(2).all(|w| {
        if increasing {
            w[1] >= w[0] - slack * w[0].abs()
        } else {
            w[1] <= w[0] + slack * w[0].abs()
        }
    }))
}

/// Two-sided trace for the sine-type kinds, with both midpoint probes.
pub fn oscillation_trace(kind: TraceKind, cfg: &TraceConfig) -> Result<OscillationTrace> {
    if !kind.is_sine_type() {
        return Err(Error::InvalidArgument(format!(
            "oscillation traces need a sine-type kind, got {kind}"
        )));
    }
    let model = TraceModel::build(kind, cfg)?;
    let mut rows = Vec::new();
    let mut probes = Vec::new();
    for n in sorted_ladder(model.ladder()) {
        let (row, values) = trace_row(&model, n, cfg)?;
        let (t_n, value_n) = values[0];
        let (t_next, value_next) = values[1];
        probes.push(ProbePair {
            n,
            t_n,
            value_n,
            t_next,
            value_next,
            sign_flip: value_n * value_next < 0.0,
        });
        rows.push(row);
    }
    let beyond: Vec<&TraceRow> = rows.iter().skip(1).collect();
    let maxima: Vec<f64> = beyond.iter().map(|r| r.grid_max).collect();
    let minima: Vec<f64> = beyond.iter().map(|r| r.grid_min).collect();
    let slack = MONOTONICITY_SLACK;
    Ok(OscillationTrace {
        max_increasing: monotone_verdict(&maxima, slack, true),
        min_decreasing: monotone_verdict(&minima, slack, false),
        trace: DivergenceTrace { kind, rows },
        probes,
        slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRatioRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub sup: f64,
    pub ratio: f64,
}

/// `max_t |S_N s(t)| / ln N` over the grid, for each N of the ladder (all N >= 2).
pub fn log_normalized_sup(s: &SampleSequence, ladder: &[u64], step: f64) -> Result<Vec<LogRatioRow>> {
    if let Some(n) = ladder.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("ladder entries must be at least 2, got {n}")));
    }
    ladder
        .iter()
        .map(|&n| {
            let points = grid_points(n as f64 + DEFAULT_MARGIN, step, &[])?;
            let sup = extrema_over(&|t| shannon_partial(s, n, t), &points).sup_abs();
            Ok(LogRatioRow {
                n,
                sup,
                ratio: sup / (n as f64).ln(),
            })
        })
        .collect()
}
