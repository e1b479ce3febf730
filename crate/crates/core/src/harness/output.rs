//! CSV artifacts. Every file starts with `#` comment lines carrying the
//! scenario name, configuration hash and seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::monte_carlo::RmseSeries;
use super::scenario::ScenarioConfig;
use super::trial::TrialOutput;
use crate::error::Result;

/// The `#` comment lines that open every artifact.
pub fn write_header<W: Write>(out: &mut W, cfg: &ScenarioConfig, seed: u64) -> Result<()> {
    writeln!(out, "# scenario={}", cfg.name)?;
    writeln!(out, "# config_sha256={}", cfg.config_hash())?;
    writeln!(out, "# seed={seed}")?;
    Ok(())
}

/// Rows `t_s,estimator,rmse_m,trials`, step-major.
pub fn write_rmse_csv<W: Write>(mut out: W, cfg: &ScenarioConfig, series: &RmseSeries) -> Result<()> {
    write_header(&mut out, cfg, cfg.master_seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "estimator", "rmse_m", "trials"])?;
    for (i, t) in series.timestamps.iter().enumerate() {
        for (kind, v) in &series.rmse {
            w.write_record([t.to_string(), kind.label().to_string(), v[i].to_string(), series.trials.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows `k,t_k,estimator,p0x,p0y,px,py,candidates,truth_x,truth_y,error_m`.
pub fn write_trace_csv<W: Write>(mut out: W, cfg: &ScenarioConfig, trial: &TrialOutput) -> Result<()> {
    write_header(&mut out, cfg, trial.seed)?;
    writeln!(out, "# trial={}", trial.trial)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k", "t_k", "estimator", "p0x", "p0y", "px", "py", "candidates", "truth_x", "truth_y", "error_m",
    ])?;
    for r in &trial.records {
        w.write_record([
            r.k.to_string(),
            r.time.to_string(),
            r.estimator.label().to_string(),
            r.initial.x.to_string(),
            r.initial.y.to_string(),
            r.current.x.to_string(),
            r.current.y.to_string(),
            r.candidates.to_string(),
            r.truth.x.to_string(),
            r.truth.y.to_string(),
            r.error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn rmse_path(dir: &Path, cfg: &ScenarioConfig) -> PathBuf {
    dir.join(format!("rmse_{}.csv", cfg.name))
}

pub fn trace_path(dir: &Path, cfg: &ScenarioConfig, trial: u64) -> PathBuf {
    dir.join(format!("trace_{}_{}.csv", cfg.name, trial))
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
