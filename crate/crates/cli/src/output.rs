//! Output directory handling and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use sdl_core::analysis::Check;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Settings;

/// Writes files into the output directory and remembers their names.
pub struct Sink {
    dir: PathBuf,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

pub enum Status<'a> {
    Ok,
    ChecksFailed,
    Error(&'a anyhow::Error),
}

pub struct Manifest<'a> {
    pub command: String,
    pub settings: &'a Settings,
    pub resolved: Option<Value>,
    pub checks: &'a [Check],
    pub outputs: &'a [String],
    pub wall_time: Duration,
    pub status: Status<'a>,
}

impl Manifest<'_> {
    pub fn to_value(&self) -> Value {
        let (status, error) = match &self.status {
            Status::Ok => ("ok", Value::Null),
            Status::ChecksFailed => ("checks_failed", Value::Null),
            Status::Error(e) => ("error", Value::String(format!("{e:#}"))),
        };
        let verdicts: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "holds": c.holds }))
            .collect();
        json!({
            "tool": "sdl",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.settings,
            "resolved": self.resolved,
            "sdl_seed": std::env::var("SDL_SEED").ok(),
            "wall_time_seconds": self.wall_time.as_secs_f64(),
            "status": status,
            "error": error,
            "all_hold": self.checks.iter().all(|c| c.holds),
            "verdicts": verdicts,
            "outputs": self.outputs,
        })
    }
}
