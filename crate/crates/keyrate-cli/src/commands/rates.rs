//! `keyrate rates`: all requested bounds at a single operating point,
//! emitted as JSON with full breakdowns and provenance.

use crate::commands::point::nodisc_config;
use crate::config::{Curve, ExperimentConfig};
use crate::output::{to_json_pretty, write_output, RunManifest};
use crate::CliError;
use keyrate_core::{
    gamma_constant, optimize_scheme, rate_training, rate_upper, OptimizeSpec, OptimizeTarget,
    RateBreakdown, RncModel,
};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct RatesReport {
    manifest: RunManifest,
    t: u32,
    snr_db: f64,
    power_linear: f64,
    rho: f64,
    gamma_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    training: Option<RateBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<RateBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_pd: Option<RateBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_nodisc: Option<RateBreakdown>,
    errors: Vec<String>,
}

pub fn spec_for(cfg: &ExperimentConfig, target: OptimizeTarget) -> OptimizeSpec {
    let mut spec = OptimizeSpec::new(target);
    spec.passes = cfg.optimizer.passes;
    spec.coarse_points = cfg.optimizer.coarse_points;
    spec.tol_bits = cfg.optimizer.tol_bits;
    spec.surrogate = cfg.optimizer.surrogate;
    spec
}

pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let axis_value = cfg.sweep.values[0];
    let sys = cfg.system_at(axis_value)?;
    let ecfg = cfg.eval_config(0);
    let ncfg = nodisc_config(cfg);
    let rnc = RncModel::new(cfg.rnc.to_kind()?);

    let mut report = RatesReport {
        manifest: RunManifest::for_config(cfg),
        t: sys.t(),
        snr_db: keyrate_core::linear_to_db(sys.p()),
        power_linear: sys.p(),
        rho: sys.channel().rho(),
        gamma_bits: gamma_constant(sys.channel(), &ecfg).value,
        training: None,
        upper: None,
        lower_pd: None,
        lower_nodisc: None,
        errors: Vec::new(),
    };

    for curve in &cfg.sweep.curves {
        match curve {
            Curve::Training => {
                report.training = Some(rate_training(sys.t(), sys.channel().rho()));
            }
            Curve::Upper => match rate_upper(&sys, &ecfg) {
                Ok(r) => report.upper = Some(r),
                Err(e) => report.errors.push(format!("upper: {e}")),
            },
            Curve::LowerPd => {
                let spec = spec_for(cfg, OptimizeTarget::LowerPd);
                match optimize_scheme(&sys, &spec, &rnc, &ncfg, &ecfg) {
                    Ok(rep) => report.lower_pd = Some(rep.best_rate),
                    Err(e) => report.errors.push(format!("lower_pd: {e}")),
                }
            }
            Curve::LowerNodisc => {
                let spec = spec_for(cfg, OptimizeTarget::LowerNodisc);
                match optimize_scheme(&sys, &spec, &rnc, &ncfg, &ecfg) {
                    Ok(rep) => report.lower_nodisc = Some(rep.best_rate),
                    Err(e) => report.errors.push(format!("lower_nodisc: {e}")),
                }
            }
        }
    }
    if !report.errors.is_empty() {
        let detail = report.errors.join("; ");
        write_output(out, &to_json_pretty(&report)?)?;
        return Err(CliError::numeric(detail));
    }
    write_output(out, &to_json_pretty(&report)?)
}
