//! The four secret-key rate quantities: genie-aided training baseline,
//! converse upper bound, and the two achievable lower bounds (with and
//! without a public discussion channel).
//!
//! Conventions: rates are bits per channel use, logs are base 2, powers
//! are linear against unit-variance noise. The average-power constraint
//! `P₁ + (T−1)P₂ ≤ T·P` is validated on entry and the optimizers spend
//! it with equality, since every rate term is non-decreasing in both
//! powers.

use crate::expectation::{eval, EvalConfig, EvalResult, Functional};
use crate::fading::{substream_tag, ChannelParams};
use crate::gaussian::{alpha_from_pilot, sigma_sq_residual};
use crate::power::{golden_section_max, optimize_power_allocation};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid system parameters: {detail}")]
    InvalidSystem { detail: String },
    #[error("power constraint violated: P1 + (T-1)P2 = {used:e} exceeds T*P = {budget:e}")]
    PowerConstraint { used: f64, budget: f64 },
    #[error("power-allocation solver failed: {detail}")]
    PowerSolverFailed { detail: String },
    #[error("corollary schedule needs P > 1, got {0}")]
    ScheduleNeedsPower(f64),
}

/// Block-fading system: coherence period, average power, gain law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    t: u32,
    p: f64,
    channel: ChannelParams,
}

impl SystemParams {
    pub fn new(t: u32, p: f64, channel: ChannelParams) -> Result<Self, BoundsError> {
        if t < 2 {
            return Err(BoundsError::InvalidSystem {
                detail: format!("coherence period must be at least 2 symbols, got {t}"),
            });
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(BoundsError::InvalidSystem {
                detail: format!("average power must be positive and finite, got {p}"),
            });
        }
        Ok(Self { t, p, channel })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn t_f64(&self) -> f64 {
        f64::from(self.t)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    /// Total energy available per coherence block.
    pub fn block_budget(&self) -> f64 {
        self.t_f64() * self.p
    }
}

/// Pilot/sharing powers and overhead fractions of the two-phase scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub p1: f64,
    pub p2: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl SchemeParams {
    pub fn new(p1: f64, p2: f64, eps1: f64, eps2: f64) -> Self {
        assert!(p1 >= 0.0 && p2 >= 0.0 && eps1 >= 0.0 && eps2 >= 0.0);
        Self { p1, p2, eps1, eps2 }
    }

    /// Split the full block budget with equality: `p1 = τ·T·P`, the rest
    /// spread over the `T−1` sharing symbols.
    pub fn from_split(sys: &SystemParams, tau: f64, eps1: f64, eps2: f64) -> Self {
        assert!((0.0..=1.0).contains(&tau), "tau={tau}");
        let budget = sys.block_budget();
        let p1 = tau * budget;
        let p2 = (budget - p1) / (sys.t_f64() - 1.0);
        Self::new(p1, p2, eps1, eps2)
    }

    pub fn alpha(&self) -> f64 {
        alpha_from_pilot(self.p1)
    }

    pub fn validate_power(&self, sys: &SystemParams) -> Result<(), BoundsError> {
        let used = self.p1 + (sys.t_f64() - 1.0) * self.p2;
        let budget = sys.block_budget();
        if used > budget * (1.0 + 1e-9) {
            return Err(BoundsError::PowerConstraint { used, budget });
        }
        Ok(())
    }
}

/// Which multiplier scales the channel-message budget `ε₁·R_NC`.
///
/// The sharing phase spans `T−1` of the `T` symbols per block, which
/// makes `(T−1)·ε₁·R_NC` the natural budget and the default; the `T`
/// variant is exposed for sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Eps1Rule {
    #[default]
    TMinus1,
    T,
}

impl Eps1Rule {
    fn multiplier(&self, t: f64) -> f64 {
        match self {
            Eps1Rule::TMinus1 => t - 1.0,
            Eps1Rule::T => t,
        }
    }
}

/// Options of the no-discussion evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodiscConfig {
    pub eps1_rule: Eps1Rule,
    /// Force the quantizer variances instead of solving the public-rate
    /// constraints (used by the reduction checks).
    pub q_override: Option<(f64, f64)>,
    /// Apply the `1/(1+ε₁+ε₂)` overhead factor.
    pub apply_overhead: bool,
}

impl Default for NodiscConfig {
    fn default() -> Self {
        Self {
            eps1_rule: Eps1Rule::TMinus1,
            q_override: None,
            apply_overhead: true,
        }
    }
}

/// Communication-rate model pricing the public messages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RncKind {
    /// One pilot symbol per block, optimized pilot/data power split,
    /// Gaussian signalling against the residual estimation error.
    TrainingBased,
    /// Coherent-receiver rate `E[log2(1 + P|h|²)]`.
    CoherentGenie,
    /// Fixed rate in bits per channel use.
    Constant(f64),
}

/// `R_NC(P)` with a per-(T, P) value cache.
#[derive(Debug)]
pub struct RncModel {
    kind: RncKind,
    cache: Mutex<HashMap<(u32, u64), f64>>,
}

impl Clone for RncModel {
    fn clone(&self) -> Self {
        Self::new(self.kind)
    }
}

impl RncModel {
    pub fn new(kind: RncKind) -> Self {
        Self {
            kind,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn training_based() -> Self {
        Self::new(RncKind::TrainingBased)
    }

    pub fn coherent_genie() -> Self {
        Self::new(RncKind::CoherentGenie)
    }

    pub fn constant(rate: f64) -> Self {
        assert!(rate >= 0.0, "R_NC must be non-negative, got {rate}");
        Self::new(RncKind::Constant(rate))
    }

    pub fn kind(&self) -> RncKind {
        self.kind
    }

    /// Achievable non-coherent rate in bits per channel use.
    pub fn rate(&self, sys: &SystemParams, cfg: &EvalConfig) -> f64 {
        match self.kind {
            RncKind::Constant(v) => v,
            _ => {
                let key = (sys.t(), sys.p().to_bits());
                if let Some(&v) = self.cache.lock().expect("rnc cache").get(&key) {
                    return v;
                }
                let v = match self.kind {
                    RncKind::CoherentGenie => {
                        crate::expectation::eval_quadrature(
                            &Functional::simple(sys.p()),
                            cfg.quadrature_order,
                        )
                        .value
                    }
                    RncKind::TrainingBased => training_based_rate(sys, cfg),
                    RncKind::Constant(v) => v,
                };
                self.cache.lock().expect("rnc cache").insert(key, v);
                v
            }
        }
    }
}

/// Best training-based rate: maximize over the pilot/data energy split.
/// With pilot power `P_τ`, estimation quality `α_τ = P_τ/(1+P_τ)` turns
/// the data symbols into an effective coherent SNR
/// `ρ_eff = α_τ P_d / (1 + (1−α_τ) P_d)`.
fn training_based_rate(sys: &SystemParams, cfg: &EvalConfig) -> f64 {
    let t = sys.t_f64();
    let budget = sys.block_budget();
    let objective = |tau: f64| -> f64 {
        let p_pilot = tau * budget;
        let p_data = (budget - p_pilot) / (t - 1.0);
        let a_t = p_pilot / (1.0 + p_pilot);
        let rho_eff = a_t * p_data / (1.0 + (1.0 - a_t) * p_data);
        if rho_eff <= 0.0 {
            return 0.0;
        }
        (t - 1.0) / t
            * crate::expectation::eval_quadrature(
                &Functional::simple(rho_eff),
                cfg.quadrature_order,
            )
            .value
    };
    let (_, value) = scan_then_golden(1e-6, 1.0 - 1e-6, 33, &objective);
    value
}

/// Coarse scan followed by golden-section refinement around the best
/// cell. Deterministic; good enough for the smooth 1-D objectives here.
pub(crate) fn scan_then_golden(
    lo: f64,
    hi: f64,
    points: usize,
    f: &impl Fn(f64) -> f64,
) -> (f64, f64) {
    assert!(points >= 3);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(lo + step * i as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let bracket_lo = lo + step * best_i.saturating_sub(1) as f64;
    let bracket_hi = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, v) = golden_section_max(bracket_lo, bracket_hi, 72, f);
    if v >= best_v {
        (x, v)
    } else {
        (lo + step * best_i as f64, best_v)
    }
}

/// Which bound a breakdown belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundLabel {
    Training,
    Upper,
    LowerPd,
    LowerNodisc,
}

/// Scheme coefficients actually used by an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScheme {
    pub p1: f64,
    pub p2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub alpha: f64,
    pub q1: f64,
    pub q2: f64,
    pub sigma_sq: f64,
}

/// A bound value with its additive components, all in bits per channel
/// use and already carrying the `1/T`, `(T−1)/T` and overhead scalings,
/// so `total = reciprocity_term + forward_term + reverse_term` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub label: BoundLabel,
    pub total: f64,
    pub reciprocity_term: f64,
    pub forward_term: f64,
    pub reverse_term: f64,
    /// Scaled sum of the subtracted estimation penalties (informational;
    /// already inside the link terms).
    pub penalty_terms: f64,
    pub std_error: f64,
    /// A link direction went negative and was clamped to zero.
    pub clamped: bool,
    /// Total without the per-link clamping, for figure regeneration.
    pub unclamped_total: f64,
    pub overhead_factor: f64,
    /// The public-message constraints admit no finite quantizer.
    pub infeasible: bool,
    pub resolved: Option<ResolvedScheme>,
}

impl RateBreakdown {
    fn zero(label: BoundLabel, infeasible: bool, resolved: Option<ResolvedScheme>) -> Self {
        Self {
            label,
            total: 0.0,
            reciprocity_term: 0.0,
            forward_term: 0.0,
            reverse_term: 0.0,
            penalty_terms: 0.0,
            std_error: 0.0,
            clamped: false,
            unclamped_total: 0.0,
            overhead_factor: 1.0,
            infeasible,
            resolved,
        }
    }
}

/// `α²ρ²`, the squared correlation of the two channel estimates. Shared
/// by both lower bounds so their reciprocity terms agree bit-for-bit.
#[inline]
fn alpha_rho_sq(alpha: f64, rho: f64) -> f64 {
    (alpha * alpha) * (rho * rho)
}

/// `2^c − 1` accurately for small and huge `c`.
#[inline]
fn exp2_m1(c: f64) -> f64 {
    (c * LN_2).exp_m1()
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    label: BoundLabel,
    t: f64,
    overhead: f64,
    recip_block: f64,
    fwd: EvalResult,
    rev: EvalResult,
    pen_fwd: f64,
    pen_rev: f64,
    resolved: Option<ResolvedScheme>,
) -> RateBreakdown {
    let k = (t - 1.0) / t;
    let raw_f = fwd.value - pen_fwd;
    let raw_r = rev.value - pen_rev;
    let clamped = raw_f < 0.0 || raw_r < 0.0;
    let reciprocity_term = overhead * (recip_block / t);
    let forward_term = overhead * (k * raw_f.max(0.0));
    let reverse_term = overhead * (k * raw_r.max(0.0));
    let total = reciprocity_term + forward_term + reverse_term;
    let unclamped_total = overhead * (recip_block / t + k * (raw_f + raw_r));
    let std_error =
        overhead * k * (fwd.std_error * fwd.std_error + rev.std_error * rev.std_error).sqrt();
    RateBreakdown {
        label,
        total,
        reciprocity_term,
        forward_term,
        reverse_term,
        penalty_terms: overhead * k * (pen_fwd + pen_rev),
        std_error,
        clamped,
        unclamped_total,
        overhead_factor: overhead,
        infeasible: false,
        resolved,
    }
}

/// Genie-aided training baseline `−(1/T) log2(1 − ρ²)`: the best any
/// scheme keying on channel estimates alone can do, with free channel
/// knowledge at the legitimate terminals and no public-message cost.
pub fn rate_training(t: u32, rho: f64) -> RateBreakdown {
    assert!(t >= 2, "coherence period must be at least 2, got {t}");
    assert!((0.0..1.0).contains(&rho), "rho={rho}");
    let recip = -(1.0 - rho * rho).log2();
    let tf = f64::from(t);
    RateBreakdown {
        label: BoundLabel::Training,
        total: recip / tf,
        reciprocity_term: recip / tf,
        ..RateBreakdown::zero(BoundLabel::Training, false, None)
    }
}

/// Converse upper bound: exact reciprocity mutual information plus the
/// two per-link maxima over average-power-constrained allocations.
pub fn rate_upper(sys: &SystemParams, cfg: &EvalConfig) -> Result<RateBreakdown, BoundsError> {
    let rho = sys.channel().rho();
    let recip = -(1.0 - rho * rho).log2();
    // Both links share one gain law, so one allocation solve serves the
    // forward and reverse maxima.
    let policy = optimize_power_allocation(sys, cfg)?;
    let tf = sys.t_f64();
    Ok(RateBreakdown {
        label: BoundLabel::Upper,
        total: recip / tf + 2.0 * policy.value,
        reciprocity_term: recip / tf,
        forward_term: policy.value,
        reverse_term: policy.value,
        ..RateBreakdown::zero(BoundLabel::Upper, false, None)
    })
}

/// Achievable rate with a public discussion channel:
/// `(1/T)(−log2(1−α²ρ²)) + ((T−1)/T)(R_AB + R_BA)` with
/// `R_XY = E[log2(1 + P₂|h|²/(1+P₂|g|²))] − log2(1 + P₂/(1+P₁))`.
///
/// A link direction whose value goes negative is clamped to zero (the
/// scheme may always ignore that direction); `clamped` reports it.
pub fn rate_lower_pd(
    sys: &SystemParams,
    scheme: &SchemeParams,
    cfg: &EvalConfig,
) -> Result<RateBreakdown, BoundsError> {
    scheme.validate_power(sys)?;
    let alpha = scheme.alpha();
    let rho = sys.channel().rho();
    let x = alpha_rho_sq(alpha, rho);
    let recip = -(1.0 - x).log2();
    let a = scheme.p2 * sys.channel().var_h();
    let b = scheme.p2 * sys.channel().var_g();
    let fwd = eval(&Functional::ratio(a, b), cfg, substream_tag::FORWARD);
    let rev = eval(&Functional::ratio(a, b), cfg, substream_tag::REVERSE);
    let pen = (scheme.p2 / (1.0 + scheme.p1)).ln_1p() / LN_2;
    let resolved = ResolvedScheme {
        p1: scheme.p1,
        p2: scheme.p2,
        eps1: 0.0,
        eps2: 0.0,
        alpha,
        q1: 0.0,
        q2: 0.0,
        sigma_sq: sigma_sq_residual(alpha, 0.0),
    };
    Ok(assemble(
        BoundLabel::LowerPd,
        sys.t_f64(),
        1.0,
        recip,
        fwd,
        rev,
        pen,
        pen,
        Some(resolved),
    ))
}

/// Achievable rate without public discussion.
///
/// The quantizer variances bind their rate constraints with equality
/// (smaller quantization noise strictly helps every term):
/// `Q₁ = α(1−α²ρ²)/(2^{c₁}−1)` with `c₁ = ε₁·(T−1)·R_NC(P)` and
/// `Q₂ = (σ²P₂+1)/(2^{c₂}−1)` with `c₂ = ε₂·R_NC(P)`. A zero message
/// budget leaves the constraint unsatisfiable for any finite quantizer;
/// the result is then a zero-rate breakdown flagged `infeasible`.
pub fn rate_lower_nodisc(
    sys: &SystemParams,
    scheme: &SchemeParams,
    rnc: &RncModel,
    ncfg: &NodiscConfig,
    cfg: &EvalConfig,
) -> Result<RateBreakdown, BoundsError> {
    scheme.validate_power(sys)?;
    let alpha = scheme.alpha();
    let rho = sys.channel().rho();
    let tf = sys.t_f64();
    let x = alpha_rho_sq(alpha, rho);

    let (q1, q2) = match ncfg.q_override {
        Some((q1, q2)) => {
            assert!(q1 >= 0.0 && q2 >= 0.0, "quantizer variances q1={q1}, q2={q2}");
            (q1, q2)
        }
        None => {
            let rnc_bits = rnc.rate(sys, cfg);
            let c1 = scheme.eps1 * ncfg.eps1_rule.multiplier(tf) * rnc_bits;
            let num1 = alpha * (1.0 - x);
            let q1 = if num1 == 0.0 {
                0.0
            } else {
                let den = exp2_m1(c1);
                if den <= 0.0 {
                    return Ok(infeasible_breakdown(scheme, alpha));
                }
                num1 / den
            };
            let sigma_sq = sigma_sq_residual(alpha, q1);
            let c2 = scheme.eps2 * rnc_bits;
            let den2 = exp2_m1(c2);
            if den2 <= 0.0 {
                return Ok(infeasible_breakdown(scheme, alpha));
            }
            let q2 = (sigma_sq * scheme.p2 + 1.0) / den2;
            (q1, q2)
        }
    };

    let sigma_sq = sigma_sq_residual(alpha, q1);
    // R_I = −2 log2(1 − α²ρ²/(1+Q₁/α)) + log2(1 − α²ρ²/(1+Q₁/α)²);
    // at Q₁ = 0 this collapses exactly to −log2(1−α²ρ²).
    let r_i = if alpha == 0.0 {
        0.0
    } else {
        let d = 1.0 + q1 / alpha;
        let r1 = x / d;
        let r2 = x / (d * d);
        -2.0 * (1.0 - r1).log2() + (1.0 - r2).log2()
    };

    let a = scheme.p2 * sys.channel().var_h() / (1.0 + q2);
    let b = scheme.p2 * sys.channel().var_g();
    let fwd = eval(&Functional::ratio(a, b), cfg, substream_tag::FORWARD);
    let rev = eval(&Functional::ratio(a, b), cfg, substream_tag::REVERSE);
    let pen = (sigma_sq * scheme.p2 / (1.0 + q2)).ln_1p() / LN_2;

    let overhead = if ncfg.apply_overhead {
        1.0 / (1.0 + scheme.eps1 + scheme.eps2)
    } else {
        1.0
    };
    let resolved = ResolvedScheme {
        p1: scheme.p1,
        p2: scheme.p2,
        eps1: scheme.eps1,
        eps2: scheme.eps2,
        alpha,
        q1,
        q2,
        sigma_sq,
    };
    Ok(assemble(
        BoundLabel::LowerNodisc,
        tf,
        overhead,
        r_i,
        fwd,
        rev,
        pen,
        pen,
        Some(resolved),
    ))
}

fn infeasible_breakdown(scheme: &SchemeParams, alpha: f64) -> RateBreakdown {
    RateBreakdown::zero(
        BoundLabel::LowerNodisc,
        true,
        Some(ResolvedScheme {
            p1: scheme.p1,
            p2: scheme.p2,
            eps1: scheme.eps1,
            eps2: scheme.eps2,
            alpha,
            q1: f64::INFINITY,
            q2: f64::INFINITY,
            sigma_sq: sigma_sq_residual(alpha, f64::MAX),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::EvalMethod;

    fn quad_cfg() -> EvalConfig {
        EvalConfig::default().with_method(EvalMethod::Quadrature)
    }

    fn unit_sys(t: u32, p: f64, rho: f64) -> SystemParams {
        SystemParams::new(t, p, ChannelParams::unit(rho).unwrap()).unwrap()
    }

    #[test]
    fn training_values() {
        assert_eq!(rate_training(10, 0.0).total, 0.0);
        let r = rate_training(10, 0.95);
        assert!((r.total - 0.335_845_397_091_247_6).abs() < 1e-12);
        assert_eq!(r.forward_term, 0.0);
        // vanishes as 1/T
        let big = rate_training(1_000_000, 0.95);
        assert!(big.total < 1e-5);
    }

    #[test]
    fn system_params_validation() {
        let ch = ChannelParams::unit(0.5).unwrap();
        assert!(SystemParams::new(1, 1.0, ch).is_err());
        assert!(SystemParams::new(2, 0.0, ch).is_err());
        assert!(SystemParams::new(2, f64::NAN, ch).is_err());
    }

    #[test]
    fn scheme_power_validation() {
        let sys = unit_sys(10, 1.0, 0.5);
        let ok = SchemeParams::new(5.0, 0.5, 0.0, 0.0);
        assert!(ok.validate_power(&sys).is_ok());
        let bad = SchemeParams::new(5.0, 1.0, 0.0, 0.0);
        assert_eq!(
            bad.validate_power(&sys),
            Err(BoundsError::PowerConstraint {
                used: 14.0,
                budget: 10.0
            })
        );
        let split = SchemeParams::from_split(&sys, 0.3, 0.0, 0.0);
        assert!((split.p1 + 9.0 * split.p2 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lower_pd_edge_cases() {
        let sys = unit_sys(10, 1.0, 0.95);
        let cfg = quad_cfg();
        // no pilot power: reciprocity term zero
        let r = rate_lower_pd(&sys, &SchemeParams::new(0.0, 1.0, 0.0, 0.0), &cfg).unwrap();
        assert_eq!(r.reciprocity_term, 0.0);
        // no sharing power: only the reciprocity term remains
        let r = rate_lower_pd(&sys, &SchemeParams::new(10.0, 0.0, 0.0, 0.0), &cfg).unwrap();
        assert_eq!(r.forward_term, 0.0);
        assert_eq!(r.reverse_term, 0.0);
        let alpha = 10.0 / 11.0;
        let expect = -(1.0 - alpha * alpha * 0.9025f64).log2() / 10.0;
        assert!((r.total - expect).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_structure() {
        let sys = unit_sys(10, 10.0, 0.0);
        let r = rate_upper(&sys, &quad_cfg()).unwrap();
        assert_eq!(r.reciprocity_term, 0.0);
        assert!((r.total - (r.forward_term + r.reverse_term)).abs() < 1e-12);
        assert_eq!(r.forward_term, r.reverse_term);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn upper_bound_nondecreasing_in_power() {
        let cfg = quad_cfg();
        let mut last = 0.0;
        for &p in &[0.5, 1.0, 5.0, 20.0, 100.0, 1000.0] {
            let r = rate_upper(&unit_sys(10, p, 0.9), &cfg).unwrap();
            assert!(r.total >= last - 1e-9, "P={p}: {} < {last}", r.total);
            last = r.total;
        }
    }

    #[test]
    fn lower_pd_at_the_high_snr_schedule() {
        // P1 = P−√P, P2 = √P/(T−1) at P = 10⁶, T = 10, ρ = 0.95. The
        // frozen total comes from the exponential-integral oracle:
        // recip/T + 1.8·(F(P2,P2) − pen) with F(c,c) = (1 − s·κ(s))/ln2.
        // It sits 3.34% below the P → ∞ limit 0.1·recip∞ + 0.9·γ; the
        // deficit is the sharing term's saturation gap at P2 ≈ 111.
        let sys = unit_sys(10, 1e6, 0.95);
        let scheme = SchemeParams::new(1e6 - 1e3, 1e3 / 9.0, 0.0, 0.0);
        let r = rate_lower_pd(&sys, &scheme, &quad_cfg()).unwrap();
        assert!((r.total - 2.834_696).abs() < 1e-4, "total {}", r.total);
        let limit = 0.335_845_397_091_247_6 + 0.9 * 2.0 / LN_2;
        let ratio = r.total / limit;
        assert!((ratio - 0.9666).abs() < 5e-4, "limit ratio {ratio}");
    }

    #[test]
    fn nodisc_reduces_to_pd_with_zero_quantizers() {
        let cfg = quad_cfg();
        let rnc = RncModel::coherent_genie();
        let ncfg = NodiscConfig {
            q_override: Some((0.0, 0.0)),
            apply_overhead: false,
            ..NodiscConfig::default()
        };
        for &(t, p, tau, rho) in &[
            (10u32, 100.0, 0.5, 0.95),
            (2, 3.0, 0.2, 0.5),
            (50, 1.0, 0.8, 0.99),
        ] {
            let sys = unit_sys(t, p, rho);
            let scheme = SchemeParams::from_split(&sys, tau, 0.1, 0.1);
            let pd = rate_lower_pd(&sys, &scheme, &cfg).unwrap();
            let nd = rate_lower_nodisc(&sys, &scheme, &rnc, &ncfg, &cfg).unwrap();
            assert!(
                (pd.total - nd.total).abs() < 1e-12,
                "t={t} p={p}: {} vs {}",
                pd.total,
                nd.total
            );
        }
    }

    #[test]
    fn nodisc_infeasible_with_zero_message_budget() {
        let sys = unit_sys(10, 10.0, 0.9);
        let scheme = SchemeParams::from_split(&sys, 0.5, 0.0, 0.0);
        let r = rate_lower_nodisc(
            &sys,
            &scheme,
            &RncModel::coherent_genie(),
            &NodiscConfig::default(),
            &quad_cfg(),
        )
        .unwrap();
        assert!(r.infeasible);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn nodisc_large_budget_approaches_pd_over_overhead() {
        let sys = unit_sys(10, 100.0, 0.95);
        let cfg = quad_cfg();
        let scheme = SchemeParams::from_split(&sys, 0.5, 1.0, 1.0);
        // constant R_NC so large that the quantizers all but vanish
        let nd = rate_lower_nodisc(
            &sys,
            &scheme,
            &RncModel::constant(60.0),
            &NodiscConfig::default(),
            &cfg,
        )
        .unwrap();
        let pd = rate_lower_pd(&sys, &scheme, &cfg).unwrap();
        let expect = pd.total / 3.0; // 1/(1+1+1)
        assert!(
            (nd.total - expect).abs() < 1e-6,
            "{} vs {}",
            nd.total,
            expect
        );
    }

    #[test]
    fn nodisc_quantizers_solve_constraints_with_equality() {
        let sys = unit_sys(10, 100.0, 0.9);
        let scheme = SchemeParams::from_split(&sys, 0.4, 0.15, 0.2);
        let rnc = RncModel::constant(5.0);
        let cfg = quad_cfg();
        let r = rate_lower_nodisc(&sys, &scheme, &rnc, &NodiscConfig::default(), &cfg).unwrap();
        let res = r.resolved.unwrap();
        let alpha = scheme.alpha();
        let x = alpha * alpha * 0.81;
        let c1 = 0.15 * 9.0 * 5.0;
        assert!(
            ((1.0 + alpha * (1.0 - x) / res.q1).log2() - c1).abs() < 1e-9,
            "channel-message constraint not tight"
        );
        let c2 = 0.2 * 5.0;
        assert!(
            ((1.0 + (res.sigma_sq * scheme.p2 + 1.0) / res.q2).log2() - c2).abs() < 1e-9,
            "source-message constraint not tight"
        );
        // T-rule moves Q1 down
        let ncfg_t = NodiscConfig {
            eps1_rule: Eps1Rule::T,
            ..NodiscConfig::default()
        };
        let rt = rate_lower_nodisc(&sys, &scheme, &rnc, &ncfg_t, &cfg).unwrap();
        assert!(rt.resolved.unwrap().q1 < res.q1);
        assert!(rt.total >= r.total);
    }

    #[test]
    fn rnc_model_kinds() {
        let cfg = quad_cfg();
        let sys = unit_sys(10, 1.0, 0.5);
        assert_eq!(RncModel::constant(2.5).rate(&sys, &cfg), 2.5);
        let genie = RncModel::coherent_genie().rate(&sys, &cfg);
        assert!((genie - 0.860_347_382_270_885_8).abs() < 1e-6, "{genie}");
        let training = RncModel::training_based().rate(&sys, &cfg);
        assert!(training > 0.0 && training <= genie, "{training} vs {genie}");
        // training <= genie across (T, P)
        for &(t, p) in &[(2u32, 10.0), (10, 100.0), (50, 1000.0)] {
            let sys = unit_sys(t, p, 0.5);
            let tr = RncModel::training_based().rate(&sys, &cfg);
            let ge = RncModel::coherent_genie().rate(&sys, &cfg);
            assert!(tr <= ge + 1e-9, "T={t} P={p}: {tr} vs {ge}");
        }
        // vanishing power, vanishing rate
        let sys = unit_sys(10, 1e-12, 0.5);
        assert!(RncModel::training_based().rate(&sys, &cfg) < 1e-9);
    }

    #[test]
    fn penalty_identity_at_zero_quantizers() {
        // at Q1=0, sigma² = 1/(1+P1), so the no-discussion penalty
        // log2(σ²P2/(1+Q2)+1) at Q2=0 equals log2(1+P2/(1+P1))
        let (p1, p2) = (7.0, 3.0);
        let alpha = alpha_from_pilot(p1);
        let lhs = (sigma_sq_residual(alpha, 0.0) * p2 / (1.0 + 0.0)).ln_1p() / LN_2;
        let rhs = (p2 / (1.0 + p1)).ln_1p() / LN_2;
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn breakdown_components_sum_to_total() {
        let sys = unit_sys(10, 50.0, 0.9);
        let cfg = quad_cfg();
        let scheme = SchemeParams::from_split(&sys, 0.3, 0.1, 0.1);
        for r in [
            rate_training(10, 0.9),
            rate_upper(&sys, &cfg).unwrap(),
            rate_lower_pd(&sys, &scheme, &cfg).unwrap(),
            rate_lower_nodisc(
                &sys,
                &scheme,
                &RncModel::coherent_genie(),
                &NodiscConfig::default(),
                &cfg,
            )
            .unwrap(),
        ] {
            assert!(
                (r.total - (r.reciprocity_term + r.forward_term + r.reverse_term)).abs() < 1e-12,
                "{:?}",
                r.label
            );
        }
    }

    #[test]
    fn strong_eavesdropper_clamps_link_terms() {
        // var_g >> var_h makes the link expectation smaller than the
        // penalty; the clamped flag must report it and total stay >= 0.
        let ch = ChannelParams::new(0.9, 1.0, 100.0).unwrap();
        let sys = SystemParams::new(10, 10.0, ch).unwrap();
        let scheme = SchemeParams::from_split(&sys, 0.1, 0.0, 0.0);
        let r = rate_lower_pd(&sys, &scheme, &quad_cfg()).unwrap();
        assert!(r.clamped);
        assert!(r.total >= 0.0);
        assert!(r.unclamped_total < r.total);
    }
}
