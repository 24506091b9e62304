//! `sdl`: runs the sampling-series constructions, traces and verifiers and
//! writes CSV/JSON results plus a manifest.
//!
//! Exit status is 0 when every enabled check holds, 1 when a check fails and
//! 2 when the configuration is rejected.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sdl_core::analysis::{
    checks_to_csv, coverage_checks, divergence_trace, pw1_norm, run_experiment, verify_all, Check,
    Experiment, Perturbation, TraceKind, VerifyAllOptions, DEFAULT_OVERSAMPLE, DEFAULT_STEP,
};
use sdl_core::io::fmt_f64;
use sdl_core::signals::{
    compute_envelope, thm1_adversary, thm2_adversary_from_schedule, thm4_adversary,
    trapezoid_samples, SampleSequence,
};
use sdl_core::sinetype::ZeroSequence;
use serde_json::{json, Value};

use config::{read_config, ExperimentConfig, Settings};
use output::{Manifest, Sink, Status};

#[derive(Parser, Debug)]
#[command(name = "sdl", version, about = "Sampling-series divergence laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

/// Flags mirror the config file keys one to one and override them.
#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat key = value config file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: sdl-out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[arg(long, global = true, value_name = "F")]
    grid_step: Option<String>,
    #[arg(long, global = true, value_name = "K")]
    oversample: Option<String>,
    #[arg(long, global = true, value_name = "LIST")]
    indices: Option<String>,
    #[arg(long, global = true, value_name = "LIST")]
    weights: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    levels: Option<String>,
    /// Coefficient cap for constructions
    #[arg(long, global = true, value_name = "N")]
    cap: Option<String>,
    /// Values of N to trace
    #[arg(long, global = true, value_name = "LIST")]
    ladder: Option<String>,
    /// zero | thm1 | bump:A:R
    #[arg(long, global = true, value_name = "SPEC")]
    perturbation: Option<String>,
    /// double | oracle
    #[arg(long, global = true, value_name = "P")]
    precision: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    blocks: Option<String>,
    /// Valiron anchor point
    #[arg(long, global = true, value_name = "F")]
    t0: Option<String>,
    /// Upper end of the harmonic scan
    #[arg(long, global = true, value_name = "N")]
    n_max: Option<String>,
    /// Check groups for verify-all
    #[arg(long, global = true, value_name = "LIST")]
    checks: Option<String>,
    /// Corrupts one sample of the Hardy-space adversary (test hook)
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

impl Opts {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let pairs: [(&'static str, &Option<String>); 14] = [
            ("out", &self.out),
            ("grid-step", &self.grid_step),
            ("oversample", &self.oversample),
            ("indices", &self.indices),
            ("weights", &self.weights),
            ("levels", &self.levels),
            ("cap", &self.cap),
            ("ladder", &self.ladder),
            ("perturbation", &self.perturbation),
            ("precision", &self.precision),
            ("blocks", &self.blocks),
            ("t0", &self.t0),
            ("n-max", &self.n_max),
            ("checks", &self.checks),
        ];
        let mut out: Vec<(&'static str, String)> =
            pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect();
        if self.inject_fault {
            out.push(("inject-fault", "true".into()));
        }
        out
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a sample sequence and write it as CSV and JSON
    Construct { what: Target },
    /// Divergence trace of one reconstruction
    Trace {
        /// shannon_thm1 | valiron | thm4 | sinetype_thm2 | sinecrossing_thm3
        kind: String,
    },
    /// Checks of one experiment, without its trace
    Verify {
        /// harmonic | thm1 | valiron | thm4 | thm2 | thm3 | maximal | lognorm
        experiment: String,
    },
    /// PW^1 norm of constructed sequences
    Norm { what: Target },
    /// Full verifier battery at desk-scale defaults
    VerifyAll,
    /// Run an experiment: construction, checks and trace
    Run {
        /// thm1 | valiron | thm4 | thm2 | thm3 | maximal | lognorm | harmonic | verify-all
        experiment: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    /// Trapezoid window w_N for the first index
    Window,
    Thm1,
    Thm4,
    Thm2,
    /// Perturbed zeros t_k = k + g(k)
    Zeros,
}

/// Outcome of a command that got past configuration parsing.
struct Report {
    checks: Vec<Check>,
    resolved: Option<Value>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let command = describe(&cli.command, &cfg);
    let start = Instant::now();
    let mut sink = match Sink::new(&cfg.out) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = execute(&cli.command, &cfg, &mut sink);
    let (checks, resolved) = match &result {
        Ok(r) => (r.checks.clone(), r.resolved.clone()),
        Err(_) => (Vec::new(), None),
    };
    let failures: Vec<&Check> = checks.iter().filter(|c| !c.holds).collect();
    let status = match &result {
        Err(e) => Status::Error(e),
        Ok(_) if failures.is_empty() => Status::Ok,
        Ok(_) => Status::ChecksFailed,
    };
    let outputs: Vec<String> = sink
        .written()
        .iter()
        .cloned()
        .chain(std::iter::once("manifest.json".to_string()))
        .collect();
    let manifest = Manifest {
        command,
        settings: &cfg.settings,
        resolved,
        checks: &checks,
        outputs: &outputs,
        wall_time: start.elapsed(),
        status,
    };
    let manifest_path = sink.dir().join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest.to_value()).expect("manifest serializes");
    text.push('\n');
    if let Err(e) = std::fs::write(&manifest_path, text) {
        eprintln!("error: writing {}: {e}", manifest_path.display());
        return ExitCode::from(2);
    }

    match result {
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Ok(_) if failures.is_empty() => {
            println!("{} checks hold; results in {}", checks.len(), cfg.out.display());
            ExitCode::SUCCESS
        }
        Ok(_) => {
            for c in &failures {
                eprintln!("FAILED {}: lhs = {}, rhs = {}, tolerance = {}", c.name, c.lhs, c.rhs, c.tolerance);
            }
            eprintln!("{} of {} checks failed", failures.len(), checks.len());
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut settings = match &cli.opts.config {
        Some(path) => read_config(path)?,
        None => Settings::new(),
    };
    for (k, v) in cli.opts.overrides() {
        settings.insert(k.to_string(), v);
    }
    let cfg = ExperimentConfig::from_settings(settings)?;
    validate(&cli.command, &cfg)?;
    Ok(cfg)
}

fn run_target(command: &Command, cfg: &ExperimentConfig) -> Result<Option<String>> {
    match command {
        Command::Run { experiment } => {
            let name = experiment
                .clone()
                .or_else(|| cfg.settings.get("experiment").cloned())
                .context("run needs an experiment (argument or `experiment` key)")?;
            Ok(Some(name))
        }
        _ => Ok(None),
    }
}

/// Rejects everything that can be decided before any computation.
fn validate(command: &Command, cfg: &ExperimentConfig) -> Result<()> {
    let experiment = match command {
        Command::Run { .. } => {
            let name = run_target(command, cfg)?.expect("run target");
            if name == "verify-all" {
                return Ok(());
            }
            Some(name.parse::<Experiment>()?)
        }
        Command::Verify { experiment } => Some(experiment.parse::<Experiment>()?),
        Command::Trace { kind } => Some(trace_experiment(kind.parse::<TraceKind>()?)),
        Command::Norm { what: Target::Zeros } => bail!("norm is not defined for the zero sequence"),
        Command::Construct { what } | Command::Norm { what } => Some(target_experiment(*what)),
        Command::VerifyAll => None,
    };
    if let Some(exp) = experiment {
        cfg.params(exp)?;
    }
    Ok(())
}

fn describe(command: &Command, cfg: &ExperimentConfig) -> String {
    match command {
        Command::Construct { what } => format!("construct {}", target_name(*what)),
        Command::Trace { kind } => format!("trace {kind}"),
        Command::Verify { experiment } => format!("verify {experiment}"),
        Command::Norm { what } => format!("norm {}", target_name(*what)),
        Command::VerifyAll => "verify-all".into(),
        Command::Run { .. } => format!("run {}", run_target(command, cfg).ok().flatten().unwrap_or_default()),
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Window => "window",
        Target::Thm1 => "thm1",
        Target::Thm4 => "thm4",
        Target::Thm2 => "thm2",
        Target::Zeros => "zeros",
    }
}

fn target_experiment(t: Target) -> Experiment {
    match t {
        Target::Window | Target::Thm1 => Experiment::Thm1,
        Target::Thm4 => Experiment::Thm4,
        Target::Thm2 => Experiment::Thm2,
        Target::Zeros => Experiment::Thm3,
    }
}

fn trace_experiment(kind: TraceKind) -> Experiment {
    match kind {
        TraceKind::ShannonThm1 => Experiment::Thm1,
        TraceKind::Valiron => Experiment::Valiron,
        TraceKind::Thm4 => Experiment::Thm4,
        TraceKind::SinetypeThm2 => Experiment::Thm2,
        TraceKind::SinecrossingThm3 => Experiment::Thm3,
    }
}

fn execute(command: &Command, cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Report> {
    match command {
        Command::Run { .. } => {
            let name = run_target(command, cfg)?.expect("run target");
            if name == "verify-all" {
                return battery(cfg, sink);
            }
            experiment(name.parse()?, cfg, sink, true)
        }
        Command::Verify { experiment: name } => experiment(name.parse()?, cfg, sink, false),
        Command::VerifyAll => battery(cfg, sink),
        Command::Trace { kind } => {
            let kind: TraceKind = kind.parse()?;
            let p = cfg.params(trace_experiment(kind))?;
            let trace = divergence_trace(kind, &p.trace_config())?;
            let mut checks = Vec::new();
            coverage_checks(&trace, &mut checks);
            sink.write(&format!("trace_{kind}.csv"), &trace.to_csv())?;
            sink.write(&format!("trace_{kind}.json"), &(trace.to_json() + "\n"))?;
            write_checks(sink, &checks)?;
            Ok(Report {
                checks,
                resolved: Some(serde_json::to_value(&p)?),
            })
        }
        Command::Construct { what } => {
            if let Target::Zeros = what {
                let (g, zeros) = perturbed_zeros(cfg)?;
                sink.write("perturbation.csv", &g.to_csv())?;
                sink.write_json("perturbation.json", &g)?;
                sink.write("zeros.csv", &zeros.to_csv())?;
            } else {
                for (name, s) in construct(*what, cfg)? {
                    sink.write(&format!("{name}.csv"), &s.to_csv())?;
                    sink.write_json(&format!("{name}.json"), &s)?;
                }
            }
            Ok(Report {
                checks: Vec::new(),
                resolved: Some(serde_json::to_value(cfg.params(target_experiment(*what))?)?),
            })
        }
        Command::Norm { what } => {
            let p = cfg.params(target_experiment(*what))?;
            let mut csv = String::from("sequence,value,error_estimate,kinks,nodes\n");
            let mut rows = Vec::new();
            for (name, s) in construct(*what, cfg)? {
                let n = pw1_norm(&s, p.oversample)?;
                csv.push_str(&format!(
                    "{name},{},{},{},{}\n",
                    fmt_f64(n.value),
                    fmt_f64(n.error_estimate),
                    n.kinks,
                    n.nodes
                ));
                rows.push(json!({ "sequence": name, "norm": n }));
            }
            sink.write("norm.csv", &csv)?;
            sink.write_json("norm.json", &rows)?;
            Ok(Report {
                checks: Vec::new(),
                resolved: Some(serde_json::to_value(&p)?),
            })
        }
    }
}

fn write_checks(sink: &mut Sink, checks: &[Check]) -> Result<()> {
    sink.write("checks.csv", &checks_to_csv(checks))?;
    sink.write_json("checks.json", &checks)
}

fn experiment(exp: Experiment, cfg: &ExperimentConfig, sink: &mut Sink, with_table: bool) -> Result<Report> {
    let p = cfg.params(exp)?;
    let out = run_experiment(exp, &p)?;
    if with_table {
        sink.write(&format!("{exp}.csv"), &out.csv)?;
        sink.write(&format!("{exp}.json"), &(out.json.clone() + "\n"))?;
    }
    write_checks(sink, &out.checks)?;
    Ok(Report {
        checks: out.checks,
        resolved: Some(serde_json::to_value(&p)?),
    })
}

fn battery(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Report> {
    let opts = VerifyAllOptions {
        groups: cfg.check_groups(),
        grid_step: cfg.grid_step.unwrap_or(DEFAULT_STEP),
        oversample: cfg.oversample.unwrap_or(DEFAULT_OVERSAMPLE),
        precision: cfg.precision,
        corrupt_thm4: cfg.inject_fault,
    };
    let report = verify_all(&opts)?;
    for t in &report.traces {
        sink.write(&format!("trace_{}.csv", t.kind), &t.to_csv())?;
        sink.write(&format!("trace_{}.json", t.kind), &(t.to_json() + "\n"))?;
    }
    write_checks(sink, &report.checks)?;
    Ok(Report {
        checks: report.checks,
        resolved: Some(serde_json::to_value(&opts)?),
    })
}

fn construct(what: Target, cfg: &ExperimentConfig) -> Result<Vec<(String, SampleSequence)>> {
    let p = cfg.params(target_experiment(what))?;
    let sched = &p.schedule;
    Ok(match what {
        Target::Window => {
            let n = sched.indices()[0];
            vec![("window".into(), trapezoid_samples(n as i64)?)]
        }
        Target::Thm1 => {
            let adv = thm1_adversary(sched)?;
            vec![("g".into(), adv.g), ("f1".into(), adv.f1)]
        }
        Target::Thm4 => {
            let adv = thm4_adversary(sched.indices(), p.blocks, sched.weights(), sched.cap())?;
            let mut out = vec![("f1".to_string(), adv.f1.clone())];
            for (i, b) in adv.blocks.iter().enumerate() {
                out.push((format!("block{}", i + 1), b.samples.scaled(b.weight)));
            }
            out
        }
        Target::Thm2 => {
            let g = p.perturbation.clone().unwrap_or(Perturbation::Zero).samples(sched)?;
            let env = compute_envelope(&g, sched.indices().last().copied().unwrap_or(1) + 4);
            let adv = thm2_adversary_from_schedule(&env, sched)?;
            vec![("perturbation".into(), g), ("g1".into(), adv.g1), ("f1".into(), adv.f1)]
        }
        Target::Zeros => bail!("the zero sequence is not a sample sequence"),
    })
}

/// Perturbation `g` and the zeros `k + g(k)` over a window covering the ladder.
fn perturbed_zeros(cfg: &ExperimentConfig) -> Result<(SampleSequence, ZeroSequence)> {
    let p = cfg.params(Experiment::Thm3)?;
    let g = p.perturbation.clone().unwrap_or(Perturbation::ScaledThm1).samples(&p.schedule)?;
    let top = p
        .ladder
        .clone()
        .unwrap_or_else(|| p.schedule.indices().to_vec())
        .into_iter()
        .max()
        .unwrap_or(1);
    let zeros = ZeroSequence::from_perturbation(&g, top + 4)?;
    Ok((g, zeros))
}
