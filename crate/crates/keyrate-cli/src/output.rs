//! Result rows, manifests and the CSV/JSON writers.

use crate::config::{Curve, ExperimentConfig, OutputFormat, SweepAxis};
use crate::CliError;
use keyrate_core::{RateBreakdown, ResolvedScheme};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Sentinel written for values a failed point could not produce.
pub const SENTINEL: &str = "NA";

/// Everything needed to reproduce an output bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub n_samples: u64,
    pub method: String,
    /// FNV-1a of the canonical config serialization.
    pub config_hash: String,
}

impl RunManifest {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        Self {
            tool: "keyrate".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.eval.seed,
            n_samples: cfg.eval.n_samples,
            method: format!("{:?}", cfg.eval.method).to_lowercase(),
            config_hash: format!("{:016x}", crate::config::fnv1a(cfg.canonical_toml().as_bytes())),
        }
    }
}

/// One curve value at one axis point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rate: f64,
    pub std_error: f64,
}

impl From<&RateBreakdown> for CurvePoint {
    fn from(r: &RateBreakdown) -> Self {
        Self {
            rate: r.total,
            std_error: r.std_error,
        }
    }
}

/// One sweep row. A curve that failed at this axis point is `None` and
/// serializes as the sentinel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub training: Option<CurvePoint>,
    pub upper: Option<CurvePoint>,
    pub lower_pd: Option<CurvePoint>,
    pub lower_nodisc: Option<CurvePoint>,
    /// Scheme of the no-discussion optimum when computed, else of the
    /// discussion optimum.
    pub scheme: Option<ResolvedScheme>,
    /// Human-readable reasons for missing entries.
    pub errors: Vec<String>,
}

impl SweepRow {
    pub fn point(&self, curve: Curve) -> Option<CurvePoint> {
        match curve {
            Curve::Training => self.training,
            Curve::Upper => self.upper,
            Curve::LowerPd => self.lower_pd,
            Curve::LowerNodisc => self.lower_nodisc,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub manifest: RunManifest,
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

/// Decimal with 9 significant digits, `.` separator.
pub fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return SENTINEL.to_string();
    }
    if v == 0.0 {
        return "0.0".to_string();
    }
    let exp10 = v.abs().log10().floor() as i32;
    let decimals = (8 - exp10).max(0) as usize;
    format!("{:.*}", decimals, v)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_else(|| SENTINEL.to_string())
}

pub fn axis_column(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::SnrDb => "snr_db",
        SweepAxis::CoherenceT => "coherence_t",
    }
}

/// Stable CSV schema: the axis column, then `<curve>` and
/// `<curve>_stderr` for every requested curve in canonical order, then
/// the scheme columns `p1,p2,eps1,eps2,q1,q2`.
pub fn write_csv<W: Write>(
    out: W,
    axis: SweepAxis,
    curves: &[Curve],
    rows: &[SweepRow],
) -> Result<(), CliError> {
    let mut curves: Vec<Curve> = curves.to_vec();
    curves.sort();
    curves.dedup();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![axis_column(axis).to_string()];
    for c in &curves {
        header.push(c.name().to_string());
        header.push(format!("{}_stderr", c.name()));
    }
    for s in ["p1", "p2", "eps1", "eps2", "q1", "q2"] {
        header.push(s.to_string());
    }
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![fmt_sig(row.axis_value)];
        for c in &curves {
            let p = row.point(*c);
            rec.push(opt_cell(p.map(|p| p.rate)));
            rec.push(opt_cell(p.map(|p| p.std_error)));
        }
        let s = row.scheme;
        rec.push(opt_cell(s.map(|s| s.p1)));
        rec.push(opt_cell(s.map(|s| s.p2)));
        rec.push(opt_cell(s.map(|s| s.eps1)));
        rec.push(opt_cell(s.map(|s| s.eps2)));
        rec.push(opt_cell(s.map(|s| s.q1)));
        rec.push(opt_cell(s.map(|s| s.q2)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| CliError::numeric(format!("flushing csv: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::numeric(format!("writing csv: {e}"))
}

pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::numeric(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::numeric(format!("serializing json: {e}")))
}

/// Emit a sweep report in the requested format.
pub fn render_sweep(
    report: &SweepReport,
    axis: SweepAxis,
    curves: &[Curve],
    format: OutputFormat,
) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => to_json_pretty(report),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, axis, curves, &report.rows)?;
            String::from_utf8(buf).map_err(|e| CliError::numeric(format!("utf8: {e}")))
        }
    }
}
