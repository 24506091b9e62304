//! Named experiments: a construction, the checks that apply to it, and its trace or table.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use super::battery::desk;
use super::grid::DEFAULT_STEP;
use super::quadrature::{pw1_norm, DEFAULT_OVERSAMPLE};
use super::trace::{
    divergence_trace, log_normalized_sup, oscillation_trace, DivergenceTrace, Perturbation,
    Precision, TraceConfig, TraceKind,
};
use super::verify::{
    scan_harmonic_log_bound, verify_maximal_domination, verify_thm1_lower_bound,
    verify_thm4_decomposition, Check,
};
use crate::engines::{half_integer_closed_form, shannon_partial, valiron_partial};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::signals::{thm1_adversary, thm4_adversary, SampleSequence, ScheduleConfig};
use crate::summation::sin_pi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Harmonic,
    Thm1,
    Valiron,
    Thm4,
    Thm2,
    Thm3,
    Maximal,
    Lognorm,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Harmonic,
        Experiment::Thm1,
        Experiment::Valiron,
        Experiment::Thm4,
        Experiment::Thm2,
        Experiment::Thm3,
        Experiment::Maximal,
        Experiment::Lognorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Harmonic => "harmonic",
            Experiment::Thm1 => "thm1",
            Experiment::Valiron => "valiron",
            Experiment::Thm4 => "thm4",
            Experiment::Thm2 => "thm2",
            Experiment::Thm3 => "thm3",
            Experiment::Maximal => "maximal",
            Experiment::Lognorm => "lognorm",
        }
    }

    /// Schedule used when none is configured.
    pub fn desk_schedule(self) -> ScheduleConfig {
        match self {
            Experiment::Thm4 | Experiment::Maximal => desk::thm4_schedule(),
            Experiment::Thm2 => desk::thm2_schedule(),
            Experiment::Thm3 => desk::thm3_schedule(),
            _ => desk::thm1_schedule(),
        }
    }

    pub fn desk_ladder(self) -> Option<Vec<u64>> {
        (self == Experiment::Thm2).then(desk::sine_ladder)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentParams {
    pub schedule: ScheduleConfig,
    pub ladder: Option<Vec<u64>>,
    pub grid_step: f64,
    pub oversample: u64,
    pub precision: Precision,
    pub perturbation: Option<Perturbation>,
    pub blocks: usize,
    pub t0: f64,
    /// Upper end of the harmonic scan.
    pub n_max: u64,
    /// Test hook, see [`crate::analysis::VerifyAllOptions::corrupt_thm4`].
    pub corrupt_thm4: bool,
}

impl ExperimentParams {
    pub fn desk(exp: Experiment) -> Self {
        Self {
            schedule: exp.desk_schedule(),
            ladder: exp.desk_ladder(),
            grid_step: DEFAULT_STEP,
            oversample: DEFAULT_OVERSAMPLE,
            precision: Precision::Double,
            perturbation: (exp == Experiment::Thm2).then(desk::thm2_perturbation),
            blocks: desk::THM4_BLOCKS,
            t0: 0.25,
            n_max: desk::HARMONIC_MAX,
            corrupt_thm4: false,
        }
    }

    pub fn trace_config(&self) -> TraceConfig {
        let mut cfg = TraceConfig::new(self.schedule.clone());
        cfg.ladder = self.ladder.clone();
        cfg.grid_step = self.grid_step;
        cfg.precision = self.precision;
        cfg.perturbation = self.perturbation.clone();
        cfg.blocks = self.blocks;
        cfg.t0 = self.t0;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub experiment: Experiment,
    pub checks: Vec<Check>,
    pub trace: Option<DivergenceTrace>,
    /// Main table of the experiment: the trace CSV when there is a trace.
    pub csv: String,
    pub json: String,
}

impl ExperimentOutcome {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    fn with_trace(experiment: Experiment, checks: Vec<Check>, trace: DivergenceTrace) -> Self {
        Self {
            experiment,
            checks,
            csv: trace.to_csv(),
            json: trace.to_json(),
            trace: Some(trace),
        }
    }
}

/// Absolute slack for a trace row covering its own probe.
const COVER_TOLERANCE: f64 = 1e-9;

pub fn coverage_checks(trace: &DivergenceTrace, out: &mut Vec<Check>) {
    for r in &trace.rows {
        out.push(Check::greater(
            format!("{}.grid_covers_probe[N={}]", trace.kind, r.n),
            r.sup_abs(),
            r.certified_lower,
            COVER_TOLERANCE,
        ));
    }
}

/// Deterministic test signal with values in `(-1, 1)`.
pub(crate) fn pseudo_random(lo: i64, hi: i64, seed: f64) -> SampleSequence {
    SampleSequence::from_fn(lo, hi, |k| (seed * (k as f64 + 1.0) * (k as f64 + 1.7)).sin())
        .expect("finite samples")
}

fn table<T: Serialize>(header: &str, rows: &[T], line: impl Fn(&T) -> String) -> (String, String) {
    let mut csv = String::from(header);
    csv.push('\n');
    for r in rows {
        let _ = writeln!(csv, "{}", line(r));
    }
    (csv, serde_json::to_string_pretty(rows).expect("rows serialize"))
}

pub fn run_experiment(exp: Experiment, p: &ExperimentParams) -> Result<ExperimentOutcome> {
    if !(p.grid_step.is_finite() && p.grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {}", p.grid_step)));
    }
    let mut checks = Vec::new();
    match exp {
        Experiment::Harmonic => {
            let (worst, failure) = scan_harmonic_log_bound(p.n_max)?;
            let mut c = Check::greater(
                format!("harmonic_log_bound[1..={}, tightest N={}]", p.n_max, worst.n),
                worst.lhs,
                worst.rhs,
                0.0,
            );
            c.holds = c.holds && failure.is_none();
            checks.push(c);
            let (csv, json) = table("N,lhs,rhs,holds", &[worst], |w| {
                format!("{},{},{},{}", w.n, fmt_f64(w.lhs), fmt_f64(w.rhs), w.holds)
            });
            Ok(ExperimentOutcome { experiment: exp, checks, trace: None, csv, json })
        }
        Experiment::Thm1 => {
            let sched = &p.schedule;
            let trace = divergence_trace(TraceKind::ShannonThm1, &p.trace_config())?;
            let adv = thm1_adversary(sched)?;
            for &n in sched.indices() {
                let r = verify_thm1_lower_bound(&adv.g, sched, n)?;
                checks.push(Check::greater(
                    format!("thm1_lower_bound[N={n}, level={}]", r.level),
                    r.value,
                    r.bound,
                    0.0,
                ));
                let direct = shannon_partial(&adv.f1, n, n as f64 + 0.5).abs();
                let closed = half_integer_closed_form(&adv.g, n);
                checks.push(Check::close(
                    format!("half_integer_identity[N={n}]"),
                    direct,
                    closed,
                    1e-10 * closed,
                ));
            }
            coverage_checks(&trace, &mut checks);
            Ok(ExperimentOutcome::with_trace(exp, checks, trace))
        }
        Experiment::Valiron => {
            let zero = SampleSequence::zero();
            let mut worst = 0.0f64;
            for i in 0..=1000 {
                let t = -8.0 + 0.016 * i as f64;
                let v = valiron_partial(&zero, sin_pi(p.t0), p.t0, 8, t)?;
                worst = worst.max((v - sin_pi(t)).abs());
            }
            checks.push(Check::less("valiron_reproduces_sine", worst, 1e-12, 0.0));
            let trace = divergence_trace(TraceKind::Valiron, &p.trace_config())?;
            coverage_checks(&trace, &mut checks);
            Ok(ExperimentOutcome::with_trace(exp, checks, trace))
        }
        Experiment::Thm4 => {
            let sched = &p.schedule;
            let mut adv = thm4_adversary(sched.indices(), p.blocks, sched.weights(), sched.cap())?;
            if p.corrupt_thm4 {
                let bump = SampleSequence::delta(5, 0.5);
                adv.f1 = SampleSequence::linear_combination(&[(1.0, &adv.f1), (1.0, &bump)]);
            }
            for m in 1..=adv.blocks.len() {
                checks.extend(verify_thm4_decomposition(&adv, m)?.checks);
            }
            let trace = divergence_trace(TraceKind::Thm4, &p.trace_config())?;
            coverage_checks(&trace, &mut checks);
            Ok(ExperimentOutcome::with_trace(exp, checks, trace))
        }
        Experiment::Thm2 => {
            let osc = oscillation_trace(TraceKind::SinetypeThm2, &p.trace_config())?;
            for pr in &osc.probes {
                checks.push(Check::greater(
                    format!("thm2.sign_flip[N={}]", pr.n),
                    -(pr.value_n * pr.value_next),
                    0.0,
                    0.0,
                ));
            }
            for r in osc.trace.rows.iter().skip(1) {
                checks.push(Check::greater(format!("thm2.grid_max_positive[N={}]", r.n), r.grid_max, 0.0, 0.0));
                checks.push(Check::less(format!("thm2.grid_min_negative[N={}]", r.n), r.grid_min, 0.0, 0.0));
            }
            for (what, verdict) in [("max_increasing", osc.max_increasing), ("min_decreasing", osc.min_decreasing)] {
                let ok = verdict != Some(false);
                checks.push(Check {
                    name: format!("thm2.{what}[slack={}]", osc.slack),
                    lhs: f64::from(u8::from(ok)),
                    rhs: 1.0,
                    holds: ok,
                    tolerance: osc.slack,
                });
            }
            coverage_checks(&osc.trace, &mut checks);
            Ok(ExperimentOutcome::with_trace(exp, checks, osc.trace))
        }
        Experiment::Thm3 => {
            let trace = divergence_trace(TraceKind::SinecrossingThm3, &p.trace_config())?;
            coverage_checks(&trace, &mut checks);
            Ok(ExperimentOutcome::with_trace(exp, checks, trace))
        }
        Experiment::Maximal => {
            let sched = &p.schedule;
            let adv = thm4_adversary(sched.indices(), p.blocks, sched.weights(), sched.cap())?;
            let chosen = adv.chosen_indices();
            let cases = [
                ("delta", SampleSequence::delta(0, 1.0), vec![1, 2, 4]),
                ("pseudo_random", pseudo_random(0, 8, 0.7), vec![2, 4, 8]),
                ("thm4_adversary", adv.f1, chosen),
            ];
            let mut rows = Vec::new();
            for (name, s, subseq) in cases {
                let r = verify_maximal_domination(&s, &subseq, p.oversample, 1e-6)?;
                checks.push(Check::less(format!("maximal_domination[{name}]"), r.lhs, r.rhs, r.tolerance));
                rows.push((name, r));
            }
            let (csv, json) = table("case,lhs,argmax,rhs,error_estimate,holds", &rows, |(name, r)| {
                format!(
                    "{name},{},{},{},{},{}",
                    fmt_f64(r.lhs),
                    fmt_f64(r.argmax),
                    fmt_f64(r.rhs),
                    fmt_f64(r.error_estimate),
                    r.holds
                )
            });
            Ok(ExperimentOutcome { experiment: exp, checks, trace: None, csv, json })
        }
        Experiment::Lognorm => {
            let sched = &p.schedule;
            let f1 = thm1_adversary(sched)?.f1;
            let norm = pw1_norm(&f1, p.oversample)?;
            let ladder = p.ladder.clone().unwrap_or_else(|| sched.indices().to_vec());
            let rows = log_normalized_sup(&f1, &ladder, p.grid_step)?;
            for r in &rows {
                // |f(k)| <= ||f||, and the kernel sum over |k| <= N is at most 2 + (2/pi)(1 + ln 2N).
                let lebesgue = 2.0 + (2.0 / std::f64::consts::PI) * (1.0 + (2.0 * r.n as f64).ln());
                let bound = (norm.value + norm.error_estimate) * lebesgue / (r.n as f64).ln();
                checks.push(Check::less(format!("lognorm_bounded[N={}]", r.n), r.ratio, bound, 0.0));
            }
            let (csv, json) = table("N,sup,ratio", &rows, |r| {
                format!("{},{},{}", r.n, fmt_f64(r.sup), fmt_f64(r.ratio))
            });
            Ok(ExperimentOutcome { experiment: exp, checks, trace: None, csv, json })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("verify-all".parse::<Experiment>().is_err());
    }

    #[test]
    fn small_thm1_run_holds() {
        let mut p = ExperimentParams::desk(Experiment::Thm1);
        p.schedule = ScheduleConfig::new(vec![4, 16, 64], vec![1.0, 0.25, 0.1111]).unwrap();
        let out = run_experiment(Experiment::Thm1, &p).unwrap();
        assert!(out.all_hold(), "{:?}", out.failures());
        assert_eq!(out.trace.unwrap().rows.len(), 3);
        assert!(out.csv.starts_with("N,"));
    }

    #[test]
    fn zero_perturbation_gives_zero_crossing_trace() {
        let mut p = ExperimentParams::desk(Experiment::Thm3);
        p.perturbation = Some(Perturbation::Zero);
        let out = run_experiment(Experiment::Thm3, &p).unwrap();
        assert!(out.all_hold());
        for r in out.trace.unwrap().rows {
            assert_eq!(r.sup_abs(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_step() {
        let mut p = ExperimentParams::desk(Experiment::Lognorm);
        p.grid_step = 0.0;
        assert!(run_experiment(Experiment::Lognorm, &p).is_err());
    }
}
