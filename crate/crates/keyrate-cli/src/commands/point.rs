//! Evaluation of all requested curves at one axis point. Shared by the
//! single-point and sweep commands.

use crate::config::{Curve, ExperimentConfig};
use crate::output::{CurvePoint, SweepRow};
use keyrate_core::{
    optimize_scheme, rate_training, rate_upper, NodiscConfig, OptimizeSpec, OptimizeTarget,
    RncModel,
};

pub fn nodisc_config(cfg: &ExperimentConfig) -> NodiscConfig {
    NodiscConfig {
        eps1_rule: cfg.nodisc.eps1_rule,
        ..NodiscConfig::default()
    }
}

fn optimize_spec(cfg: &ExperimentConfig, target: OptimizeTarget) -> OptimizeSpec {
    let mut spec = OptimizeSpec::new(target);
    spec.passes = cfg.optimizer.passes;
    spec.coarse_points = cfg.optimizer.coarse_points;
    spec.tol_bits = cfg.optimizer.tol_bits;
    spec.surrogate = cfg.optimizer.surrogate;
    spec
}

/// Compute one row. Failures of individual curves are recorded in the
/// row and never abort the remaining work.
pub fn compute_point(
    cfg: &ExperimentConfig,
    axis_value: f64,
    point_index: u64,
    rnc: &RncModel,
) -> SweepRow {
    let mut row = SweepRow {
        axis_value,
        training: None,
        upper: None,
        lower_pd: None,
        lower_nodisc: None,
        scheme: None,
        errors: Vec::new(),
    };
    let sys = match cfg.system_at(axis_value) {
        Ok(s) => s,
        Err(e) => {
            row.errors.push(format!("system: {e}"));
            return row;
        }
    };
    let ecfg = cfg.eval_config(point_index);
    let ncfg = nodisc_config(cfg);

    for curve in &cfg.sweep.curves {
        match curve {
            Curve::Training => {
                let r = rate_training(sys.t(), sys.channel().rho());
                row.training = Some(CurvePoint::from(&r));
            }
            Curve::Upper => match rate_upper(&sys, &ecfg) {
                Ok(r) => row.upper = Some(CurvePoint::from(&r)),
                Err(e) => row.errors.push(format!("upper: {e}")),
            },
            Curve::LowerPd => {
                let spec = optimize_spec(cfg, OptimizeTarget::LowerPd);
                match optimize_scheme(&sys, &spec, rnc, &ncfg, &ecfg) {
                    Ok(rep) => {
                        if row.scheme.is_none() {
                            row.scheme = rep.best_rate.resolved;
                        }
                        row.lower_pd = Some(CurvePoint::from(&rep.best_rate));
                    }
                    Err(e) => row.errors.push(format!("lower_pd: {e}")),
                }
            }
            Curve::LowerNodisc => {
                let spec = optimize_spec(cfg, OptimizeTarget::LowerNodisc);
                match optimize_scheme(&sys, &spec, rnc, &ncfg, &ecfg) {
                    Ok(rep) => {
                        row.scheme = rep.best_rate.resolved;
                        row.lower_nodisc = Some(CurvePoint::from(&rep.best_rate));
                    }
                    Err(e) => row.errors.push(format!("lower_nodisc: {e}")),
                }
            }
        }
    }
    row
}
