//! `keyrate` — compute, optimize and validate secret-key rate bounds
//! over two-way reciprocal Rayleigh block-fading channels.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure,
//! 3 numeric failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{Curve, ExperimentConfig, OutputFormat, RncSection, SweepAxis, SweepSection,
    SystemSection};
use keyrate_core::{Eps1Rule, EvalMethod, OptimizeTarget};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliErrorKind {
    Config,
    Validation,
    Numeric,
}

#[derive(Debug)]
pub struct CliError {
    kind: CliErrorKind,
    message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Config,
            message: msg.into(),
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Validation,
            message: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Self {
            kind: CliErrorKind::Numeric,
            message: msg.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            CliErrorKind::Config => 1,
            CliErrorKind::Validation => 2,
            CliErrorKind::Numeric => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Parser)]
#[command(
    name = "keyrate",
    version,
    about = "Secret-key rate bounds for two-way reciprocal fading channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in experiment: "fig4" (rate vs SNR) or "fig5" (rate vs T).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Base random seed (KEYRATE_SEED also works; this flag wins).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo sample count per expectation.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Non-coherent rate model: training, genie, or const:VALUE.
    #[arg(long, global = true)]
    rnc: Option<String>,

    /// Channel-message budget multiplier: Tminus1 (default) or T.
    #[arg(long = "eps1-rule", global = true)]
    eps1_rule: Option<String>,

    /// Expectation method: mc or quadrature.
    #[arg(long, global = true)]
    method: Option<String>,

    /// Worker threads (KEYRATE_WORKERS also works; this flag wins).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// All requested bounds at a single operating point (JSON).
    Rates {
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "snr-db")]
        snr_db: Option<f64>,
        /// Comma-separated subset of training,upper,lower_pd,lower_nodisc.
        #[arg(long)]
        curves: Option<String>,
    },
    /// Parameter sweep producing figure-style curves.
    Sweep {
        /// Use 35 dB for the coherence-period preset instead of 30 dB.
        #[arg(long = "fig5-snr-35")]
        fig5_snr_35: bool,
    },
    /// Search scheme parameters for the best lower bound.
    Optimize {
        /// lower_pd or lower_nodisc.
        #[arg(long, default_value = "lower_nodisc")]
        target: String,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "snr-db")]
        snr_db: Option<f64>,
    },
    /// Run the cross-module consistency checks.
    Validate {
        #[arg(long, hide = true)]
        inject_q1_sign_flip: bool,
    },
}

fn default_point_config() -> ExperimentConfig {
    ExperimentConfig {
        sweep: SweepSection {
            axis: SweepAxis::SnrDb,
            values: vec![30.0],
            curves: Curve::ALL.to_vec(),
        },
        system: SystemSection {
            t: 10,
            snr_db: 30.0,
            rho: 0.95,
            var_h: 1.0,
            var_g: 1.0,
        },
        eval: Default::default(),
        optimizer: Default::default(),
        rnc: Default::default(),
        nodisc: Default::default(),
        output: Default::default(),
    }
}

fn env_u64(name: &str) -> Result<Option<u64>, CliError> {
    match std::env::var(name) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(format!("{name} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Resolve the effective configuration: file/preset/default base, then
/// environment variables, then flags.
fn resolve_config(cli: &Cli, needs_file: bool) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("--config and --preset are mutually exclusive"))
        }
        (Some(path), None) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => {
            let fig5_snr_35 = matches!(&cli.command, Command::Sweep { fig5_snr_35: true });
            ExperimentConfig::preset(name, fig5_snr_35)?
        }
        (None, None) if needs_file => {
            return Err(CliError::config("sweep needs --config or --preset"))
        }
        (None, None) => default_point_config(),
    };

    if let Some(seed) = env_u64("KEYRATE_SEED")? {
        cfg.eval.seed = seed;
    }
    if let Some(w) = env_u64("KEYRATE_WORKERS")? {
        cfg.eval.workers = Some(w as usize);
    }
    if let Some(seed) = cli.seed {
        cfg.eval.seed = seed;
    }
    if let Some(n) = cli.samples {
        cfg.eval.n_samples = n;
    }
    if let Some(w) = cli.workers {
        cfg.eval.workers = Some(w);
    }
    if let Some(f) = &cli.format {
        cfg.output.format = OutputFormat::parse(f)?;
    }
    if let Some(r) = &cli.rnc {
        cfg.rnc = RncSection::parse_flag(r)?;
    }
    if let Some(rule) = &cli.eps1_rule {
        cfg.nodisc.eps1_rule = match rule.as_str() {
            "Tminus1" | "t_minus_1" => Eps1Rule::TMinus1,
            "T" | "t" => Eps1Rule::T,
            other => {
                return Err(CliError::config(format!(
                    "unknown --eps1-rule {other:?}; expected Tminus1|T"
                )))
            }
        };
    }
    if let Some(m) = &cli.method {
        cfg.eval.method = match m.as_str() {
            "mc" => EvalMethod::Mc,
            "quadrature" => EvalMethod::Quadrature,
            other => {
                return Err(CliError::config(format!(
                    "unknown --method {other:?}; expected mc|quadrature"
                )))
            }
        };
    }

    // point-style flags
    match &cli.command {
        Command::Rates {
            t,
            rho,
            snr_db,
            curves,
        } => {
            if let Some(t) = t {
                cfg.system.t = *t;
            }
            if let Some(r) = rho {
                cfg.system.rho = *r;
            }
            if let Some(db) = snr_db {
                cfg.system.snr_db = *db;
                cfg.sweep.values = vec![*db];
                cfg.sweep.axis = SweepAxis::SnrDb;
            }
            if let Some(list) = curves {
                let mut parsed = Vec::new();
                for name in list.split(',').filter(|s| !s.is_empty()) {
                    parsed.push(Curve::parse(name.trim())?);
                }
                cfg.sweep.curves = parsed;
            }
        }
        Command::Optimize { t, rho, snr_db, .. } => {
            if let Some(t) = t {
                cfg.system.t = *t;
            }
            if let Some(r) = rho {
                cfg.system.rho = *r;
            }
            if let Some(db) = snr_db {
                cfg.system.snr_db = *db;
                cfg.sweep.values = vec![*db];
                cfg.sweep.axis = SweepAxis::SnrDb;
            }
        }
        _ => {}
    }

    cfg.validate()?;
    Ok(cfg)
}

fn init_workers(cfg: &ExperimentConfig) {
    if let Some(n) = cfg.eval.workers {
        // later calls are no-ops once a global pool exists; results never
        // depend on the pool size anyway
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let needs_file = matches!(cli.command, Command::Sweep { .. });
    let cfg = resolve_config(cli, needs_file)?;
    init_workers(&cfg);
    let out = cli
        .out
        .as_deref()
        .or(cfg.output.path.as_ref().map(std::path::Path::new));
    match &cli.command {
        Command::Rates { .. } => commands::rates::run(&cfg, out),
        Command::Sweep { .. } => commands::sweep::run(&cfg, out),
        Command::Optimize { target, .. } => {
            let target = match target.as_str() {
                "lower_pd" => OptimizeTarget::LowerPd,
                "lower_nodisc" => OptimizeTarget::LowerNodisc,
                other => {
                    return Err(CliError::config(format!(
                        "unknown --target {other:?}; expected lower_pd|lower_nodisc"
                    )))
                }
            };
            commands::optimize::run(&cfg, target, out)
        }
        Command::Validate {
            inject_q1_sign_flip,
        } => commands::validate::run(&cfg, *inject_q1_sign_flip),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
