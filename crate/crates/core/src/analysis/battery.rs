//! The full verifier battery at desk-scale configurations.

use serde::Serialize;

use super::experiment::{pseudo_random, run_experiment, Experiment, ExperimentParams};
use super::grid::{sup_on_grid, DEFAULT_STEP};
use super::quadrature::{pw1_norm, DEFAULT_OVERSAMPLE};
use super::trace::{DivergenceTrace, Precision};
use super::verify::Check;
use crate::engines::{half_integer_closed_form, shannon_partial, sinc_kernel};
use crate::error::{Error, Result};
use crate::signals::{modulate_alternating, thm1_adversary, trapezoid_samples, SampleSequence};
use crate::sinetype::{
    interpolation_partial, phi_eval, phi_k_eval, GeneratingProduct, ZeroSequence,
};
use crate::summation::sin_pi;

/// Default configurations small enough to finish in seconds.
pub mod desk {
    use crate::analysis::trace::Perturbation;
    use crate::signals::ScheduleConfig;

    fn inverse_squares(indices: &[u64]) -> ScheduleConfig {
        let weights = (1..=indices.len()).map(|l| 1.0 / (l * l) as f64).collect();
        ScheduleConfig::new(indices.to_vec(), weights).expect("valid desk schedule")
    }

    /// Window schedule (4, 16, 64, 256) with weights `1/l^2`.
    pub fn thm1_schedule() -> ScheduleConfig {
        inverse_squares(&[4, 16, 64, 256])
    }

    /// Candidate subsequence for the Hardy-space blocks; 145 violates the
    /// growth condition after 12 and is skipped.
    pub fn thm4_schedule() -> ScheduleConfig {
        ScheduleConfig::new(vec![12, 145, 432], vec![1.0, 0.25, 1.0 / 9.0]).expect("valid desk schedule")
    }

    pub const THM4_BLOCKS: usize = 2;

    /// Level schedule for the sine-type adversary: `N_j = 4^j`, `j = 1..=10`,
    /// unit weights. The levels above the traced ladder keep the plateau sum
    /// `sum_(i>=j) a_i` large enough for `log N_j` growth to show.
    pub fn thm2_schedule() -> ScheduleConfig {
        let indices = (1..=10).map(|j| 4u64.pow(j)).collect();
        ScheduleConfig::new(indices, vec![1.0; 10]).expect("valid desk schedule")
    }

    /// Ladder of N traced for the sine-type kinds.
    pub fn sine_ladder() -> Vec<u64> {
        vec![4, 16, 64, 256]
    }

    pub fn thm2_perturbation() -> Perturbation {
        Perturbation::Bump {
            amplitude: 0.2,
            radius: 3,
        }
    }

    pub fn thm3_schedule() -> ScheduleConfig {
        thm1_schedule()
    }

    pub const HARMONIC_MAX: u64 = 100_000;
    pub const WINDOW_MAX: i64 = 64;
}

pub const CHECK_GROUPS: [&str; 12] = [
    "harmonic",
    "window_norm",
    "modulation",
    "half_integer",
    "thm1",
    "valiron",
    "thm4",
    "maximal",
    "sinetype",
    "oscillation",
    "thm3",
    "lognorm",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyAllOptions {
    /// Check groups to run, a subset of [`CHECK_GROUPS`].
    pub groups: Vec<String>,
    pub grid_step: f64,
    pub oversample: u64,
    pub precision: Precision,
    /// Test hook: perturbs one sample of the assembled Hardy-space adversary
    /// after construction, so the block decomposition no longer adds up.
    pub corrupt_thm4: bool,
}

impl Default for VerifyAllOptions {
    fn default() -> Self {
        Self {
            groups: CHECK_GROUPS.iter().map(|g| g.to_string()).collect(),
            grid_step: DEFAULT_STEP,
            oversample: DEFAULT_OVERSAMPLE,
            precision: Precision::Double,
            corrupt_thm4: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyAllReport {
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub traces: Vec<DivergenceTrace>,
}

impl VerifyAllReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.checks).expect("checks serialize")
    }

    pub fn to_csv(&self) -> String {
        super::verify::checks_to_csv(&self.checks)
    }
}

fn experiment(exp: Experiment, opts: &VerifyAllOptions) -> ExperimentParams {
    let mut p = ExperimentParams::desk(exp);
    p.grid_step = opts.grid_step;
    p.oversample = opts.oversample;
    p.precision = opts.precision;
    p.corrupt_thm4 = opts.corrupt_thm4;
    p
}

/// Runs the selected check groups in a fixed order.
pub fn verify_all(opts: &VerifyAllOptions) -> Result<VerifyAllReport> {
    if opts.groups.is_empty() {
        return Err(Error::InvalidArgument("no check groups selected".into()));
    }
    if let Some(g) = opts.groups.iter().find(|g| !CHECK_GROUPS.contains(&g.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "unknown check group '{g}' (known: {})",
            CHECK_GROUPS.join(", ")
        )));
    }
    let mut checks = Vec::new();
    let mut traces = Vec::new();
    for group in CHECK_GROUPS {
        if opts.groups.iter().any(|g| g == group) {
            run_group(group, opts, &mut checks, &mut traces)?;
        }
    }
    Ok(VerifyAllReport { checks, traces })
}

fn run_group(
    group: &str,
    opts: &VerifyAllOptions,
    checks: &mut Vec<Check>,
    traces: &mut Vec<DivergenceTrace>,
) -> Result<()> {
    let exp = match group {
        "harmonic" => Some(Experiment::Harmonic),
        "thm1" => Some(Experiment::Thm1),
        "valiron" => Some(Experiment::Valiron),
        "thm4" => Some(Experiment::Thm4),
        "maximal" => Some(Experiment::Maximal),
        "oscillation" => Some(Experiment::Thm2),
        "thm3" => Some(Experiment::Thm3),
        "lognorm" => Some(Experiment::Lognorm),
        _ => None,
    };
    if let Some(exp) = exp {
        let out = run_experiment(exp, &experiment(exp, opts))?;
        checks.extend(out.checks);
        traces.extend(out.trace);
        return Ok(());
    }
    match group {
        "window_norm" => {
            let mut worst_value = 0.0f64;
            let mut worst_error = 0.0f64;
            for n in 1..=desk::WINDOW_MAX {
                let norm = pw1_norm(&trapezoid_samples(n)?, opts.oversample)?;
                worst_value = worst_value.max(norm.value);
                worst_error = worst_error.max(norm.error_estimate);
            }
            checks.push(Check::less("window_norm[N=1..=64]", worst_value, 3.0, 0.0));
            checks.push(Check::less("window_norm_error[N=1..=64]", worst_error, 1e-4, 0.0));
        }
        "modulation" => {
            let g = thm1_adversary(&desk::thm1_schedule())?.g;
            let a = pw1_norm(&g, opts.oversample)?;
            let b = pw1_norm(&modulate_alternating(&g), opts.oversample)?;
            checks.push(Check::close(
                "pw1_modulation_invariance",
                b.value,
                a.value,
                2.0 * a.error_estimate.max(b.error_estimate),
            ));
        }
        "half_integer" => {
            for (case, n) in [(1u64, 10u64), (2, 100), (3, 1000)] {
                let g = pseudo_random(-(n as i64) - 20, n as i64 + 20, 0.3 * case as f64);
                let g = SampleSequence::from_fn(g.support_lo(), g.support_hi(), |k| g.get(k).abs())?;
                let direct = shannon_partial(&modulate_alternating(&g), n, n as f64 + 0.5).abs();
                let closed = half_integer_closed_form(&g, n);
                checks.push(Check::close(
                    format!("half_integer_identity[case={case}, N={n}]"),
                    direct,
                    closed,
                    1e-10 * closed,
                ));
            }
        }
        "sinetype" => sine_type_checks(checks)?,
        _ => unreachable!("group names validated"),
    }
    Ok(())
}

fn sine_type_checks(checks: &mut Vec<Check>) -> Result<()> {
    let gp = GeneratingProduct::new(ZeroSequence::unperturbed(16));
    let phi_err = sup_on_grid(
        |z| (phi_eval(&gp, z).expect("inside domain") - sin_pi(z) / std::f64::consts::PI).abs(),
        8.0,
        DEFAULT_STEP,
    )?
    .max;
    checks.push(Check::less("sinetype.phi_is_sine[|z|<=8]", phi_err, 1e-10, 0.0));

    let s = pseudo_random(-6, 6, 0.37);
    let mut kernel_err = 0.0f64;
    let mut series_err = 0.0f64;
    for i in 0..=256 {
        let t = -8.0 + i as f64 / 16.0;
        for k in -8..=8 {
            kernel_err = kernel_err.max((phi_k_eval(&gp, k, t)? - sinc_kernel(t, k)).abs());
        }
        series_err = series_err.max((interpolation_partial(&gp, &s, 8, t)? - shannon_partial(&s, 8, t)).abs());
    }
    checks.push(Check::less("sinetype.phi_k_is_sinc", kernel_err, 1e-9, 0.0));
    checks.push(Check::less("sinetype.interpolation_is_shannon", series_err, 1e-9, 0.0));

    let window = 64u64;
    let g = SampleSequence::from_fn(-64, 64, |k| 0.25 * (0.9 * k as f64).sin())?;
    let zeros = ZeroSequence::from_perturbation(&g, window)?;
    let gp = GeneratingProduct::with_trusted_radius(zeros, window as f64 + 1.0);
    let mut card_err = 0.0f64;
    for k in -64i64..=64 {
        for j in -64i64..=64 {
            let v = phi_k_eval(&gp, k, gp.zeros().zero(j))?;
            card_err = card_err.max((v - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(Check::less("sinetype.cardinal[K=64]", card_err, 1e-9, 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_unknown_selections_are_rejected() {
        let mut opts = VerifyAllOptions::default();
        opts.groups.clear();
        assert!(verify_all(&opts).is_err());
        opts.groups = vec!["nope".into()];
        assert!(verify_all(&opts).is_err());
    }

    #[test]
    fn fault_injection_hits_only_the_decomposition() {
        let opts = VerifyAllOptions {
            groups: vec!["harmonic".into(), "thm4".into()],
            corrupt_thm4: true,
            ..VerifyAllOptions::default()
        };
        let report = verify_all(&opts).unwrap();
        assert!(report.checks[0].holds);
        let failed: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
        assert!(failed.iter().all(|n| n.starts_with("thm4.total")), "{failed:?}");
        assert!(!failed.is_empty());
    }
}
