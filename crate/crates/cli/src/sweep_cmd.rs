//! One solve per axis value with a shared seed; per-run artifacts land in
//! isolated directories and the aggregate CSV keeps going past failed runs.

use std::path::Path;

use clap::ValueEnum;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::format_real;
use crate::solve_cmd::{run_problem, write_outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    P,
    Gamma,
    B,
    L,
    N,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Gamma => "gamma",
            Axis::B => "b",
            Axis::L => "L",
            Axis::N => "n",
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) -> Result<(), CliError> {
        match self {
            Axis::P => cfg.p = value,
            Axis::Gamma => cfg.gamma = value,
            Axis::B => cfg.b = value,
            Axis::L => cfg.half_width = value,
            Axis::N => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(CliError::Config(format!(
                        "axis n needs positive integer values, got {value}"
                    )));
                }
                cfg.n = value as usize;
            }
        }
        Ok(())
    }
}

pub fn sweep_cmd(
    config: Option<&Path>,
    axis: Axis,
    values: &[f64],
    out_dir: &Path,
) -> Result<i32, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let base = RunConfig::load_or_default(config)?;
    std::fs::create_dir_all(out_dir)?;
    let mut rows = String::from("value,energy,cerami_residual,iterations,status\n");
    let mut any_failed = false;
    for &value in values {
        let mut cfg = base.clone();
        let run_label = format!("run_{}_{}", axis.name(), value);
        let run_dir = out_dir.join(&run_label);
        let outcome = axis.apply(&mut cfg, value).and_then(|()| {
            let (problem, result) = run_problem(&cfg)?;
            write_outputs(&run_dir, &cfg, &problem, &result)?;
            Ok(result)
        });
        match outcome {
            Ok(result) => {
                if !result.converged() {
                    any_failed = true;
                }
                rows.push_str(&format!(
                    "{value},{},{},{},{}\n",
                    format_real(result.energy),
                    format_real(result.diagnostics.cerami_residual),
                    result.iterations,
                    result.exit.as_str()
                ));
            }
            Err(err) => {
                any_failed = true;
                eprintln!("{run_label}: {err}");
                rows.push_str(&format!("{value},,,0,error\n"));
            }
        }
    }
    std::fs::write(out_dir.join("sweep.csv"), rows)?;
    Ok(if any_failed { 2 } else { 0 })
}
