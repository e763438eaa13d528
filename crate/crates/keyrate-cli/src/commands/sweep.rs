//! `keyrate sweep`: one row per axis value, CSV or JSON, with a JSON
//! summary next to CSV output.

use crate::commands::point::compute_point;
use crate::config::{ExperimentConfig, OutputFormat};
use crate::output::{render_sweep, to_json_pretty, write_output, RunManifest, SweepReport};
use crate::CliError;
use keyrate_core::RncModel;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let rnc = RncModel::new(cfg.rnc.to_kind()?);

    // Axis points run concurrently; the collect keeps axis order, so
    // the output is identical no matter how many workers run.
    let rows: Vec<_> = cfg
        .sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &axis_value)| compute_point(cfg, axis_value, i as u64, &rnc))
        .collect();

    for row in &rows {
        for err in &row.errors {
            eprintln!("warning: axis {}: {err}", row.axis_value);
        }
    }

    let report = SweepReport {
        manifest: RunManifest::for_config(cfg),
        axis: crate::output::axis_column(cfg.sweep.axis).to_string(),
        rows,
    };
    let rendered = render_sweep(&report, cfg.sweep.axis, &cfg.sweep.curves, cfg.output.format)?;
    write_output(out, &rendered)?;

    // CSV carries data only; the reproduction manifest goes in a JSON
    // summary alongside it.
    if cfg.output.format == OutputFormat::Csv {
        if let Some(path) = out {
            let summary_path = summary_path(path);
            let summary = to_json_pretty(&report)?;
            std::fs::write(&summary_path, summary).map_err(|e| {
                CliError::numeric(format!("writing {}: {e}", summary_path.display()))
            })?;
        }
    }
    Ok(())
}

pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.json")
}
