//! Flat `key = value` configuration shared by config files and flags.
//!
//! Every key has a flag of the same name (`grid-step` is `--grid-step`).
//! Lines starting with `#` and blank lines are ignored; underscores in keys
//! are read as dashes.
//!
//! | key            | value                                          |
//! |----------------|------------------------------------------------|
//! | `experiment`   | experiment for `run` when none is given        |
//! | `out`          | output directory                               |
//! | `grid-step`    | sup grid spacing                               |
//! | `oversample`   | quadrature oversampling factor (>= 8)          |
//! | `indices`      | schedule indices, comma separated              |
//! | `weights`      | schedule weights, comma separated              |
//! | `levels`       | number of schedule levels                      |
//! | `cap`          | coefficient cap for constructions              |
//! | `ladder`       | values of N traced                             |
//! | `perturbation` | `zero`, `thm1` or `bump:A:R`                   |
//! | `precision`    | `double` or `oracle`                           |
//! | `blocks`       | number of Hardy-space blocks                   |
//! | `t0`           | Valiron anchor (not an integer)                |
//! | `n-max`        | upper end of the harmonic scan                 |
//! | `checks`       | check groups for `verify-all`                  |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sdl_core::analysis::{
    Experiment, ExperimentParams, Perturbation, Precision, CHECK_GROUPS, MIN_OVERSAMPLE,
};
use sdl_core::io::parse_list;
use sdl_core::signals::ScheduleConfig;

pub const KEYS: [&str; 16] = [
    "experiment",
    "out",
    "grid-step",
    "oversample",
    "indices",
    "weights",
    "levels",
    "cap",
    "ladder",
    "perturbation",
    "precision",
    "blocks",
    "t0",
    "n-max",
    "checks",
    "inject-fault",
];

/// Raw settings after merging the config file with the flags.
pub type Settings = BTreeMap<String, String>;

pub fn parse_config_text(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got '{line}'", i + 1);
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key '{key}'", i + 1);
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", path.display()))
}

/// Typed configuration. Options left unset fall back to the experiment's desk defaults.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub settings: Settings,
    pub out: PathBuf,
    pub grid_step: Option<f64>,
    pub oversample: Option<u64>,
    pub indices: Option<Vec<u64>>,
    pub weights: Option<Vec<f64>>,
    pub levels: Option<usize>,
    pub cap: Option<u64>,
    pub ladder: Option<Vec<u64>>,
    pub perturbation: Option<Perturbation>,
    pub precision: Precision,
    pub blocks: Option<usize>,
    pub t0: Option<f64>,
    pub n_max: Option<u64>,
    pub checks: Option<Vec<String>>,
    pub inject_fault: bool,
}

fn parse<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    s.get(key)
        .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("--{key} '{v}': {e}")))
        .transpose()
}

fn parse_vec<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Option<Vec<T>>>
where
    T::Err: std::fmt::Display,
{
    s.get(key)
        .map(|v| parse_list::<T>(v).map_err(|e| anyhow::anyhow!("--{key} '{v}': {e}")))
        .transpose()
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(key: &str, v: Option<T>) -> Result<Option<T>> {
    if let Some(x) = &v {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(*x > T::default()) {
            bail!("--{key} must be positive, got {x}");
        }
    }
    Ok(v)
}

impl ExperimentConfig {
    pub fn from_settings(settings: Settings) -> Result<Self> {
        let s = &settings;
        let grid_step = positive("grid-step", parse::<f64>(s, "grid-step")?)?;
        if grid_step.is_some_and(|g| !g.is_finite()) {
            bail!("--grid-step must be finite");
        }
        let oversample = parse::<u64>(s, "oversample")?;
        if let Some(o) = oversample {
            if o < MIN_OVERSAMPLE {
                bail!("--oversample must be at least {MIN_OVERSAMPLE}, got {o}");
            }
        }
        let t0 = parse::<f64>(s, "t0")?;
        if let Some(t) = t0 {
            if !t.is_finite() || t.fract() == 0.0 {
                bail!("--t0 must be a finite non-integer, got {t}");
            }
        }
        let checks = parse_vec::<String>(s, "checks")?;
        if let Some(c) = &checks {
            if c.is_empty() {
                bail!("--checks selects no check group");
            }
            if let Some(bad) = c.iter().find(|g| !CHECK_GROUPS.contains(&g.as_str())) {
                bail!("--checks: unknown group '{bad}' (known: {})", CHECK_GROUPS.join(", "));
            }
        }
        let ladder = parse_vec::<u64>(s, "ladder")?;
        if let Some(l) = &ladder {
            if l.is_empty() || l.contains(&0) {
                bail!("--ladder must list positive values");
            }
        }
        let inject_fault = match s.get("inject-fault").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => bail!("--inject-fault expects true or false, got '{v}'"),
        };
        Ok(Self {
            out: s.get("out").map_or_else(|| PathBuf::from("sdl-out"), PathBuf::from),
            grid_step,
            oversample,
            indices: parse_vec(s, "indices")?,
            weights: parse_vec(s, "weights")?,
            levels: positive("levels", parse(s, "levels")?)?,
            cap: positive("cap", parse(s, "cap")?)?,
            ladder,
            perturbation: parse(s, "perturbation")?,
            precision: parse(s, "precision")?.unwrap_or(Precision::Double),
            blocks: positive("blocks", parse(s, "blocks")?)?,
            t0,
            n_max: positive("n-max", parse(s, "n-max")?)?,
            checks,
            inject_fault,
            settings,
        })
    }

    /// Schedule for `exp`: explicit indices, else the first `levels` desk
    /// indices (extended by factors of 4), with weights `1/l^2` unless given.
    pub fn schedule(&self, exp: Experiment) -> Result<ScheduleConfig> {
        let desk = exp.desk_schedule();
        let (indices, default_weights) = match (&self.indices, self.levels) {
            (Some(idx), Some(l)) if idx.len() != l => {
                bail!("--levels {l} does not match the {} values of --indices", idx.len())
            }
            (Some(idx), _) => (idx.clone(), None),
            (None, Some(l)) => {
                let mut idx: Vec<u64> = desk.indices().iter().copied().take(l).collect();
                while idx.len() < l {
                    let last = *idx.last().expect("desk schedules are nonempty");
                    idx.push(last.checked_mul(4).context("--levels overflows the index range")?);
                }
                let w = (l <= desk.levels()).then(|| desk.weights()[..l].to_vec());
                (idx, w)
            }
            (None, None) => (desk.indices().to_vec(), Some(desk.weights().to_vec())),
        };
        let weights = match (&self.weights, default_weights) {
            (Some(w), _) => w.clone(),
            (None, Some(w)) => w,
            (None, None) => (1..=indices.len()).map(|l| 1.0 / (l * l) as f64).collect(),
        };
        let mut sched = ScheduleConfig::new(indices, weights)?;
        if let Some(cap) = self.cap {
            sched = sched.with_cap(cap);
        }
        Ok(sched)
    }

    pub fn params(&self, exp: Experiment) -> Result<ExperimentParams> {
        let mut p = ExperimentParams::desk(exp);
        p.schedule = self.schedule(exp)?;
        if self.ladder.is_some() {
            p.ladder = self.ladder.clone();
        } else if self.indices.is_some() || self.levels.is_some() {
            p.ladder = None;
        }
        if let Some(g) = self.grid_step {
            p.grid_step = g;
        }
        if let Some(o) = self.oversample {
            p.oversample = o;
        }
        p.precision = self.precision;
        if self.perturbation.is_some() {
            p.perturbation = self.perturbation.clone();
        }
        if let Some(b) = self.blocks {
            p.blocks = b;
        }
        if let Some(t) = self.t0 {
            p.t0 = t;
        }
        if let Some(n) = self.n_max {
            p.n_max = n;
        }
        p.corrupt_thm4 = self.inject_fault;
        Ok(p)
    }

    pub fn check_groups(&self) -> Vec<String> {
        self.checks
            .clone()
            .unwrap_or_else(|| CHECK_GROUPS.iter().map(|g| g.to_string()).collect())
    }
}
