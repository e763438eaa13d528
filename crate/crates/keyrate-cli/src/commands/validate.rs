//! `keyrate validate`: the cross-module consistency battery. Prints one
//! line per check; exits nonzero when any check fails.

use crate::commands::point::nodisc_config;
use crate::commands::rates::spec_for;
use crate::config::ExperimentConfig;
use crate::CliError;
use keyrate_core::gaussian::symbols::*;
use keyrate_core::*;
use rand::RngExt;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn uniform(rng: &mut rand_chacha::ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

fn log_uniform(rng: &mut rand_chacha::ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

/// Closed forms of the quantized-chain identities against the
/// determinant oracle. `sign_flip` is a mutation hook for tests: it
/// corrupts Q1's sign in the closed forms, which must trip the check.
fn check_chain_identities(cfg: &ExperimentConfig, sign_flip: bool) -> CheckResult {
    let mut rng = RngStream::new(cfg.eval.seed, 101).rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p1 = log_uniform(&mut rng, 0.1, 1e4);
        let rho = uniform(&mut rng, 0.0, 0.999);
        let q1 = log_uniform(&mut rng, 1e-4, 1e2);
        let alpha = alpha_from_pilot(p1);
        let q1_formula = if sign_flip { -q1 } else { q1 };
        let x = alpha * alpha * rho * rho;
        let d = 1.0 + q1_formula / alpha;
        let same = (1.0 + alpha / q1_formula).log2();
        let cross = -(1.0 - x / d).log2();
        let uu = -(1.0 - x / (d * d)).log2();
        let m = match build_quantized_chain(rho, p1, q1) {
            Ok(m) => m,
            Err(e) => {
                return CheckResult {
                    name: "chain_identities",
                    pass: false,
                    detail: format!("chain construction failed: {e}"),
                }
            }
        };
        let mi = |a: &str, b: &str| gaussian_mi(&m, &[a], &[b]).unwrap().bits();
        worst = worst
            .max((same - mi(U_AB, HHAT_AB)).abs())
            .max((cross - mi(U_AB, HHAT_BA)).abs())
            .max((uu - mi(U_AB, U_BA)).abs());
    }
    CheckResult {
        name: "chain_identities",
        pass: worst < 1e-10,
        detail: format!("worst |closed-form − oracle| = {worst:.3e} (tolerance 1e-10)"),
    }
}

/// The in-band formulas at zero quantizers and no overhead equal the
/// discussion-channel formulas.
fn check_quantizer_reduction(cfg: &ExperimentConfig) -> CheckResult {
    let mut rng = RngStream::new(cfg.eval.seed, 102).rng();
    let ecfg = cfg.eval_config(0).with_method(EvalMethod::Quadrature);
    let rnc = RncModel::coherent_genie();
    let ncfg = NodiscConfig {
        q_override: Some((0.0, 0.0)),
        apply_overhead: false,
        ..NodiscConfig::default()
    };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = 2 + (rng.random::<u32>() % 63);
        let p = log_uniform(&mut rng, 0.1, 1e3);
        let tau = uniform(&mut rng, 0.01, 0.99);
        let rho = uniform(&mut rng, 0.0, 0.99);
        let sys = SystemParams::new(t, p, ChannelParams::unit(rho).unwrap()).unwrap();
        let scheme = SchemeParams::from_split(&sys, tau, 0.3, 0.2);
        let pd = rate_lower_pd(&sys, &scheme, &ecfg).unwrap();
        let nd = rate_lower_nodisc(&sys, &scheme, &rnc, &ncfg, &ecfg).unwrap();
        worst = worst.max((pd.total - nd.total).abs());
    }
    CheckResult {
        name: "quantizer_reduction",
        pass: worst < 1e-12,
        detail: format!("worst |pd − nodisc(Q=0)| = {worst:.3e} (tolerance 1e-12)"),
    }
}

/// Sampler vs quadrature across a randomized coefficient grid.
fn check_mc_vs_quadrature(cfg: &ExperimentConfig) -> CheckResult {
    let mut rng = RngStream::new(cfg.eval.seed, 103).rng();
    let n = cfg.eval.n_samples.min(1_000_000);
    let ecfg = EvalConfig {
        n_samples: n,
        ..cfg.eval_config(0)
    };
    let mut worst_sigmas = 0.0f64;
    for i in 0..50u64 {
        let a = log_uniform(&mut rng, 0.05, 50.0);
        let b = log_uniform(&mut rng, 0.05, 50.0);
        let f = Functional::ratio(a, b);
        let quad = eval_quadrature(&f, ecfg.quadrature_order.max(96));
        let mc = eval_mc(&f, &ecfg, &RngStream::new(cfg.eval.seed, 200 + i));
        let sigmas = (mc.value - quad.value).abs() / mc.std_error.max(1e-300);
        worst_sigmas = worst_sigmas.max(sigmas);
    }
    CheckResult {
        name: "mc_vs_quadrature",
        pass: worst_sigmas < 4.0,
        detail: format!("worst disagreement = {worst_sigmas:.2} sigma (tolerance 4)"),
    }
}

/// Optimized bounds keep their order at a compact grid of operating
/// points.
fn check_ordering(cfg: &ExperimentConfig) -> CheckResult {
    let ncfg = nodisc_config(cfg);
    let rnc = RncModel::training_based();
    let mut detail = String::new();
    let mut pass = true;
    for &snr_db in &[10.0, 30.0] {
        for &t in &[2u32, 10] {
            for &rho in &[0.5, 0.95] {
                let sys =
                    SystemParams::new(t, db_to_linear(snr_db), ChannelParams::unit(rho).unwrap())
                        .unwrap();
                let ecfg = cfg.eval_config(0);
                let pd = optimize_scheme(
                    &sys,
                    &spec_for(cfg, OptimizeTarget::LowerPd),
                    &rnc,
                    &ncfg,
                    &ecfg,
                );
                let nd = optimize_scheme(
                    &sys,
                    &spec_for(cfg, OptimizeTarget::LowerNodisc),
                    &rnc,
                    &ncfg,
                    &ecfg,
                );
                let up = rate_upper(&sys, &ecfg);
                let (pd, nd, up) = match (pd, nd, up) {
                    (Ok(a), Ok(b), Ok(c)) => (a.best_rate, b.best_rate, c),
                    _ => {
                        pass = false;
                        detail = format!("evaluation failed at snr={snr_db} t={t} rho={rho}");
                        continue;
                    }
                };
                let slack = 3.0
                    * (pd.std_error.powi(2) + nd.std_error.powi(2)).sqrt()
                    + 1e-9;
                if !(nd.total <= pd.total + slack && pd.total <= up.total + slack) {
                    pass = false;
                    detail = format!(
                        "order violated at snr={snr_db} t={t} rho={rho}: nodisc {} pd {} upper {}",
                        nd.total, pd.total, up.total
                    );
                }
            }
        }
    }
    if pass {
        detail = "lower_nodisc <= lower_pd <= upper at 8 operating points".into();
    }
    CheckResult {
        name: "bound_ordering",
        pass,
        detail,
    }
}

/// High-SNR gap between the converse and the optimized discussion bound
/// lands on γ/T.
fn check_high_snr_gap(cfg: &ExperimentConfig) -> CheckResult {
    let sys = SystemParams::new(10, 1e6, ChannelParams::unit(0.95).unwrap()).unwrap();
    let ecfg = cfg.eval_config(0).with_method(EvalMethod::Quadrature);
    let gamma = gamma_constant(sys.channel(), &ecfg).value;
    let target = gamma / 10.0;
    let up = match rate_upper(&sys, &ecfg) {
        Ok(r) => r,
        Err(e) => {
            return CheckResult {
                name: "high_snr_gap",
                pass: false,
                detail: format!("upper bound failed: {e}"),
            }
        }
    };
    let pd = match optimize_scheme(
        &sys,
        &spec_for(cfg, OptimizeTarget::LowerPd),
        &RncModel::coherent_genie(),
        &nodisc_config(cfg),
        &ecfg,
    ) {
        Ok(r) => r.best_rate,
        Err(e) => {
            return CheckResult {
                name: "high_snr_gap",
                pass: false,
                detail: format!("lower bound failed: {e}"),
            }
        }
    };
    let gap = up.total - pd.total;
    let ratio = gap / target;
    CheckResult {
        name: "high_snr_gap",
        pass: (0.95..=1.05).contains(&ratio),
        detail: format!(
            "upper − lower_pd = {gap:.6} bits at 60 dB, γ/T = {target:.6}, ratio {ratio:.4}"
        ),
    }
}

pub fn run(cfg: &ExperimentConfig, inject_q1_sign_flip: bool) -> Result<(), CliError> {
    let checks = [
        check_chain_identities(cfg, inject_q1_sign_flip),
        check_quantizer_reduction(cfg),
        check_mc_vs_quadrature(cfg),
        check_ordering(cfg),
        check_high_snr_gap(cfg),
    ];
    let mut all_pass = true;
    for c in &checks {
        println!(
            "{} {:<18} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all_pass &= c.pass;
    }
    if all_pass {
        println!("validation: all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "{} of {} checks failed",
            checks.iter().filter(|c| !c.pass).count(),
            checks.len()
        )))
    }
}
