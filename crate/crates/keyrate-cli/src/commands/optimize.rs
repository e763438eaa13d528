//! `keyrate optimize`: search the scheme parameters at one operating
//! point and emit the full report.

use crate::commands::point::nodisc_config;
use crate::commands::rates::spec_for;
use crate::config::ExperimentConfig;
use crate::output::{to_json_pretty, write_output, RunManifest};
use crate::CliError;
use keyrate_core::{optimize_scheme, OptimizeReport, OptimizeTarget, RncModel};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct OptimizeOutput {
    manifest: RunManifest,
    t: u32,
    snr_db: f64,
    rho: f64,
    target: OptimizeTarget,
    report: OptimizeReport,
}

pub fn run(
    cfg: &ExperimentConfig,
    target: OptimizeTarget,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sys = cfg.system_at(cfg.sweep.values[0])?;
    let ecfg = cfg.eval_config(0);
    let rnc = RncModel::new(cfg.rnc.to_kind()?);
    let report = optimize_scheme(&sys, &spec_for(cfg, target), &rnc, &nodisc_config(cfg), &ecfg)
        .map_err(|e| CliError::numeric(format!("optimizer: {e}")))?;
    let out_doc = OptimizeOutput {
        manifest: RunManifest::for_config(cfg),
        t: sys.t(),
        snr_db: keyrate_core::linear_to_db(sys.p()),
        rho: sys.channel().rho(),
        target,
        report,
    };
    write_output(out, &to_json_pretty(&out_doc)?)
}
