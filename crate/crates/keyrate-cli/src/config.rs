//! Experiment configuration: TOML file, presets, flag and environment
//! overrides. Unknown keys anywhere in the file are errors.

use crate::CliError;
use keyrate_core::{
    ChannelParams, Eps1Rule, EvalConfig, EvalMethod, RncKind, Surrogate, SystemParams,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    CoherenceT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Training,
    Upper,
    LowerPd,
    LowerNodisc,
}

impl Curve {
    pub const ALL: [Curve; 4] = [
        Curve::Training,
        Curve::Upper,
        Curve::LowerPd,
        Curve::LowerNodisc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Curve::Training => "training",
            Curve::Upper => "upper",
            Curve::LowerPd => "lower_pd",
            Curve::LowerNodisc => "lower_nodisc",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "training" => Ok(Curve::Training),
            "upper" => Ok(Curve::Upper),
            "lower_pd" => Ok(Curve::LowerPd),
            "lower_nodisc" => Ok(Curve::LowerNodisc),
            other => Err(CliError::config(format!(
                "unknown curve {other:?}; expected training|upper|lower_pd|lower_nodisc"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub curves: Vec<Curve>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub t: u32,
    pub snr_db: f64,
    pub rho: f64,
    #[serde(default = "one")]
    pub var_h: f64,
    #[serde(default = "one")]
    pub var_g: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub seed: u64,
    pub n_samples: u64,
    pub quadrature_order: usize,
    pub method: EvalMethod,
    pub antithetic: bool,
    pub workers: Option<usize>,
}

impl Default for EvalSection {
    fn default() -> Self {
        let d = EvalConfig::default();
        Self {
            seed: d.seed,
            n_samples: d.n_samples,
            quadrature_order: d.quadrature_order,
            method: d.method,
            antithetic: d.antithetic,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub passes: u32,
    pub coarse_points: usize,
    pub tol_bits: f64,
    pub surrogate: Surrogate,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            passes: 3,
            coarse_points: 33,
            tol_bits: 1e-5,
            surrogate: Surrogate::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RncSection {
    pub kind: RncConfigKind,
    /// Rate in bits per channel use when `kind = "constant"`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RncConfigKind {
    #[default]
    Training,
    Genie,
    Constant,
}

impl Default for RncSection {
    fn default() -> Self {
        Self {
            kind: RncConfigKind::Training,
            value: 0.0,
        }
    }
}

impl RncSection {
    pub fn to_kind(self) -> Result<RncKind, CliError> {
        Ok(match self.kind {
            RncConfigKind::Training => RncKind::TrainingBased,
            RncConfigKind::Genie => RncKind::CoherentGenie,
            RncConfigKind::Constant => {
                if !(self.value >= 0.0 && self.value.is_finite()) {
                    return Err(CliError::config(format!(
                        "rnc.value must be a non-negative finite rate, got {}",
                        self.value
                    )));
                }
                RncKind::Constant(self.value)
            }
        })
    }

    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        match s {
            "training" => Ok(Self {
                kind: RncConfigKind::Training,
                value: 0.0,
            }),
            "genie" => Ok(Self {
                kind: RncConfigKind::Genie,
                value: 0.0,
            }),
            other => {
                if let Some(v) = other.strip_prefix("const:") {
                    let value: f64 = v.parse().map_err(|_| {
                        CliError::config(format!("bad constant rate in --rnc {other:?}"))
                    })?;
                    Ok(Self {
                        kind: RncConfigKind::Constant,
                        value,
                    })
                } else {
                    Err(CliError::config(format!(
                        "unknown --rnc {other:?}; expected training|genie|const:VALUE"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NodiscSection {
    pub eps1_rule: Eps1Rule,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::config(format!(
                "unknown format {other:?}; expected csv|json"
            ))),
        }
    }
}

/// The whole experiment file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sweep: SweepSection,
    pub system: SystemSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub rnc: RncSection,
    #[serde(default)]
    pub nodisc: NodiscSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(name: &str, fig5_snr_35: bool) -> Result<Self, CliError> {
        match name {
            "fig4" => Ok(Self {
                sweep: SweepSection {
                    axis: SweepAxis::SnrDb,
                    values: (0..=10).map(|i| 5.0 * i as f64).collect(),
                    curves: Curve::ALL.to_vec(),
                },
                system: SystemSection {
                    t: 10,
                    snr_db: 30.0,
                    rho: 0.95,
                    var_h: 1.0,
                    var_g: 1.0,
                },
                eval: EvalSection::default(),
                optimizer: OptimizerSection::default(),
                rnc: RncSection::default(),
                nodisc: NodiscSection::default(),
                output: OutputSection::default(),
            }),
            "fig5" => Ok(Self {
                sweep: SweepSection {
                    axis: SweepAxis::CoherenceT,
                    values: vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
                    curves: Curve::ALL.to_vec(),
                },
                system: SystemSection {
                    t: 10,
                    snr_db: if fig5_snr_35 { 35.0 } else { 30.0 },
                    rho: 0.99,
                    var_h: 1.0,
                    var_g: 1.0,
                },
                eval: EvalSection::default(),
                optimizer: OptimizerSection::default(),
                rnc: RncSection::default(),
                nodisc: NodiscSection::default(),
                output: OutputSection::default(),
            }),
            other => Err(CliError::config(format!(
                "unknown preset {other:?}; expected fig4|fig5"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sweep.curves.is_empty() {
            return Err(CliError::config("sweep.curves must name at least one curve"));
        }
        if self.sweep.values.is_empty() {
            return Err(CliError::config("sweep.values must not be empty"));
        }
        if !self.sweep.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(CliError::config(
                "sweep.values must be strictly increasing",
            ));
        }
        if self.sweep.axis == SweepAxis::CoherenceT {
            for &v in &self.sweep.values {
                if v.fract() != 0.0 || v < 2.0 {
                    return Err(CliError::config(format!(
                        "sweep.values must be integers >= 2 for the coherence_t axis, got {v}"
                    )));
                }
            }
        }
        if self.eval.n_samples < 1_000 {
            return Err(CliError::config("eval.n_samples must be at least 1000"));
        }
        if !(8..=256).contains(&self.eval.quadrature_order) {
            return Err(CliError::config(
                "eval.quadrature_order must lie in [8, 256]",
            ));
        }
        // construct the domain types once so their validation runs
        let _ = self.channel()?;
        let _ = self.system_at(self.sweep.values[0])?;
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelParams, CliError> {
        ChannelParams::new(self.system.rho, self.system.var_h, self.system.var_g)
            .map_err(|e| CliError::config(format!("system: {e}")))
    }

    /// System parameters at one axis value.
    pub fn system_at(&self, axis_value: f64) -> Result<SystemParams, CliError> {
        let (t, p) = match self.sweep.axis {
            SweepAxis::SnrDb => (self.system.t, keyrate_core::db_to_linear(axis_value)),
            SweepAxis::CoherenceT => (
                axis_value as u32,
                keyrate_core::db_to_linear(self.system.snr_db),
            ),
        };
        SystemParams::new(t, p, self.channel()?)
            .map_err(|e| CliError::config(format!("system: {e}")))
    }

    pub fn eval_config(&self, substream_base: u64) -> EvalConfig {
        EvalConfig {
            n_samples: self.eval.n_samples,
            seed: self.eval.seed,
            substream_base,
            quadrature_order: self.eval.quadrature_order,
            antithetic: self.eval.antithetic,
            method: self.eval.method,
            opt_tol_bits: self.optimizer.tol_bits,
            power_grid: 512,
            workers: self.eval.workers,
        }
    }

    /// Canonical serialization used for the manifest hash. The worker
    /// count is an execution knob, not part of the experiment identity,
    /// so it is dropped: outputs must be byte-identical under any pool
    /// size.
    pub fn canonical_toml(&self) -> String {
        let mut canonical = self.clone();
        canonical.eval.workers = None;
        toml::to_string(&canonical).expect("config serializes")
    }
}

/// FNV-1a 64-bit, enough to fingerprint a config for reproduction.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in ["fig4", "fig5"] {
            let cfg = ExperimentConfig::preset(name, false).unwrap();
            cfg.validate().unwrap();
        }
        assert_eq!(
            ExperimentConfig::preset("fig5", true).unwrap().system.snr_db,
            35.0
        );
        assert!(ExperimentConfig::preset("fig9", false).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"
[sweep]
axis = "snr_db"
values = [0.0, 10.0]
curves = ["training"]
typo_key = 1

[system]
t = 10
snr_db = 30.0
rho = 0.95
"#;
        let err = toml::from_str::<ExperimentConfig>(text).unwrap_err();
        assert!(err.to_string().contains("typo_key"), "{err}");
    }

    #[test]
    fn axis_values_must_increase() {
        let mut cfg = ExperimentConfig::preset("fig4", false).unwrap();
        cfg.sweep.values = vec![10.0, 5.0];
        assert!(cfg.validate().is_err());
        cfg.sweep.values = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_curves_rejected_before_compute() {
        let mut cfg = ExperimentConfig::preset("fig4", false).unwrap();
        cfg.sweep.curves.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rnc_flag_parser() {
        assert_eq!(
            RncSection::parse_flag("const:2.5").unwrap().value,
            2.5
        );
        assert!(RncSection::parse_flag("const:x").is_err());
        assert!(RncSection::parse_flag("quantum").is_err());
        assert_eq!(
            RncSection::parse_flag("genie").unwrap().kind,
            RncConfigKind::Genie
        );
    }

    #[test]
    fn fnv_fingerprint_is_stable() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"keyrate"), fnv1a(b"keyrate"));
        assert_ne!(fnv1a(b"keyrate"), fnv1a(b"keyrates"));
    }
}
